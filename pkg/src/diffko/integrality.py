"""Integrality of the Pontrjagin character: the phi function, denominator
bounds, admissible pairs at odd primes, the degree-8 criterion, and a few
worked obstruction classes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .ahss import D4kValue, FormSlot, d4k_on_form_slot
from .genera import a_hat, evaluate_genus, pontrjagin_character
from .polynomial import PONTRYAGIN, GeneratorScheme, GradedPolynomial
from .presentation import CohomologyPresentation


def phi(x) -> int:
    """Greatest integer strictly less than x (x > 0)."""
    x = Fraction(x)
    if x <= 0:
        raise ValueError("phi is defined for x > 0")
    f = math.floor(x)
    return f - 1 if f == x else f


def primes_up_to(n: int) -> list[int]:
    if n < 2:
        return []
    sieve = bytearray([1]) * (n + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, math.isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i::i] = bytearray(len(sieve[i * i::i]))
    return [i for i, v in enumerate(sieve) if v]


def _render_factored(exponents: dict[int, int]) -> str:
    parts = [str(p) if e == 1 else f"{p}^{e}" for p, e in sorted(exponents.items()) if e]
    return "·".join(parts) if parts else "1"


@dataclass(frozen=True)
class DenominatorReport:
    k: int
    exponents: dict[int, int]  # p -> phi(k/p), for primes p <= k
    note: str = "powers of 2 are absorbed: the bound is stated in Z[1/2]"

    @property
    def odd_exponents(self) -> dict[int, int]:
        return {p: e for p, e in self.exponents.items() if p != 2 and e}

    @property
    def odd_part(self) -> int:
        return math.prod(p ** e for p, e in self.odd_exponents.items())

    @property
    def full(self) -> int:
        return math.prod(p ** e for p, e in self.exponents.items())

    def odd_part_factored(self) -> str:
        return _render_factored(self.odd_exponents)

    def exponent(self, p: int) -> int:
        return self.exponents.get(p, 0)

    def to_row(self) -> dict:
        return {"k": self.k, "degree": 4 * self.k, "two_exponent": self.exponents.get(2, 0),
                "odd_part": self.odd_part, "odd_part_factored": self.odd_part_factored()}


def ph_denominator(k: int) -> DenominatorReport:
    if k < 1:
        raise ValueError("k must be >= 1")
    return DenominatorReport(k, {p: phi(Fraction(k, p)) for p in primes_up_to(k)})


def d4k_survival(slot: FormSlot, k: int) -> tuple[bool, D4kValue]:
    """Whether the degree-4k periods survive d_4k, with the computed value as witness.

    Conservative mode: the target quotient is taken trivially, so a period
    is reported as killed only when the value is literally nonzero in Q/Z.
    """
    value = d4k_on_form_slot(slot, k)
    return value.is_zero, value


# --- degree-8 criterion --------------------------------------------------------

@dataclass(frozen=True)
class Degree8Verdict:
    applies: bool
    verdict: str
    failing: tuple[str, ...] = ()

    def to_json(self) -> dict:
        return {"applies": self.applies, "verdict": self.verdict, "failing": list(self.failing)}


def degree8_criterion(presentation: CohomologyPresentation) -> Degree8Verdict:
    """Hypotheses: H^1(Z/2) = H^2(Z/2) = 0 and the image of beta_U(1) in
    H^4(Z), i.e. its torsion subgroup, is 2-divisible (all orders odd)."""
    failing = []
    if presentation.mod2_dim(1):
        failing.append("H^1(M;Z/2) = 0")
    if presentation.mod2_dim(2):
        failing.append("H^2(M;Z/2) = 0")
    if any(o % 2 == 0 for o in presentation.integral(4).torsion):
        failing.append("torsion of H^4(M;Z) divisible by 2")
    if failing:
        return Degree8Verdict(False, "criterion inapplicable", tuple(failing))
    return Degree8Verdict(True, "Ph_8 liftable iff integral periods")


# --- admissible pairs ------------------------------------------------------------

PROOF = "proof"          # 4k + 4r(p-1) = ell
STATEMENT = "statement"  # 4k + r(p-1) = ell


@dataclass(frozen=True)
class PairStatus:
    r: int
    k: int
    status: str  # "admissible", "not admissible", "undetermined"
    reason: str
    witness: str | None = None

    def to_json(self) -> dict:
        out = {"r": self.r, "k": self.k, "status": self.status, "reason": self.reason}
        if self.witness:
            out["witness"] = self.witness
        return out


@dataclass(frozen=True)
class AdmissibleReport:
    ell: int
    p: int
    convention: str
    pairs: tuple[PairStatus, ...] = field(default_factory=tuple)

    @property
    def admissible(self) -> list[tuple[int, int]]:
        return [(q.r, q.k) for q in self.pairs if q.status == "admissible"]

    @property
    def s(self) -> int:
        return len(self.admissible)

    @property
    def denominator(self) -> int:
        return self.p ** self.s

    @property
    def complete(self) -> bool:
        return all(q.status != "undetermined" for q in self.pairs)


def candidate_pairs(ell: int, p: int, convention: str = PROOF) -> list[tuple[int, int]]:
    if convention not in (PROOF, STATEMENT):
        raise ValueError(f"unknown convention {convention!r}")
    step = 4 * (p - 1) if convention == PROOF else (p - 1)
    out = []
    r = 1
    while ell - r * step >= 4:
        rest = ell - r * step
        if rest % 4 == 0:
            out.append((r, rest // 4))
        r += 1
    return out


def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % q for q in range(2, math.isqrt(p) + 1))


def admissible_pairs(ell: int, p: int, presentation: CohomologyPresentation,
                     convention: str = PROOF) -> AdmissibleReport:
    """Classify each candidate (r, k) for the prime p.

    Only basis classes carrying an odd-primary annotation are examined.  A
    p-torsion basis class without an annotation for P^(2r) makes the pair
    undetermined rather than rejected.
    """
    if not _is_prime(p) or p == 2:
        raise ValueError("admissible pairs are defined for odd primes")
    statuses = []
    notes = {}
    for datum in presentation.odd_primary:
        if datum.prime == p:
            notes.setdefault(datum.label, datum)
    for r, k in candidate_pairs(ell, p, convention):
        deg = 4 * k
        orders = presentation.integral_orders(deg)
        labels = presentation.integral_labels(deg)
        ptors = [labels[i] for i, o in enumerate(orders) if o and o % p == 0]
        if not ptors:
            statuses.append(PairStatus(r, k, "not admissible", f"no {p}-torsion in H^{deg}(M;Z)"))
            continue
        if ell > presentation.top_degree:
            statuses.append(PairStatus(r, k, "not admissible", f"P^{2 * r} lands above the top degree"))
            continue
        if r > k:
            statuses.append(PairStatus(r, k, "not admissible", f"P^{2 * r} vanishes by excess in degree {deg}"))
            continue
        found, missing = None, []
        for lab in ptors:
            datum = notes.get(lab)
            if datum is None or 2 * r not in datum.reduced_powers:
                missing.append(lab)
                continue
            nonzero, bzero = datum.reduced_powers[2 * r]
            if datum.divisibility == 2 * r - 1 and nonzero and bzero:
                found = lab
                break
        if found:
            statuses.append(PairStatus(r, k, "admissible", "conditions (1)-(3) hold", found))
        elif missing:
            statuses.append(PairStatus(r, k, "undetermined", "no P^%d data for %s" % (2 * r, ", ".join(missing))))
        else:
            statuses.append(PairStatus(r, k, "not admissible", "no annotated class meets the conditions"))
    return AdmissibleReport(ell, p, convention, tuple(statuses))


# --- obstruction examples ----------------------------------------------------------

HP2_SCHEME = GeneratorScheme.single("x", 4, constant=True)


def _set_zero(poly: GradedPolynomial, indices) -> GradedPolynomial:
    kill = set(indices)
    return GradedPolynomial(poly.scheme, {m: c for m, c in poly.terms.items()
                                          if not any(i in kill for _, i in m)})


def obstruction_examples() -> dict:
    ph = pontrjagin_character(12)
    ph4 = ph.component(4)
    ph8 = _set_zero(ph.component(8), [1])
    half_ph12 = _set_zero(ph.component(12), [1, 2]).scale(Fraction(1, 2))
    c8 = ph8.coefficient(next(iter(GradedPolynomial.generator(PONTRYAGIN, 2).terms)))
    # HP^2: p = 1 + 2x + 7x^2 with x = x1 in degree 4, <x1^2, [HP^2]> = 1
    x = GradedPolynomial.generator(HP2_SCHEME, 1)
    total_p = GradedPolynomial.constant(HP2_SCHEME, 1) + x.scale(2) + x.mul(x).scale(7)
    a_hat_hp2 = evaluate_genus(a_hat(8), total_p, 8, {"x1^2": 1})
    p1, p2x = total_p.component(4), total_p.component(8)
    half_p1 = p1.scale(Fraction(1, 2))
    combo = (p2x - half_p1.mul(half_p1)).scale(Fraction(1, 48))
    return {
        "ph4": {"value": str(ph4), "denominator": 1},
        "ph8_p1_zero": {
            "value": str(ph8), "p2_coefficient": str(c8), "denominator": c8.denominator,
            "sign_note": "computed with Ph = rank + sum 2/(2k)! s_k(p); magnitude 1/6 agrees, sign is negative",
        },
        "half_ph12_p1_p2_zero": {"value": str(half_ph12)},
        "hp2": {"a_hat": str(a_hat_hp2), "p2_minus_half_p1_squared_over_48": str(combo)},
    }
