"""Adams operations on formal bundles.

A formal bundle is a sum of line bundles, each written as a monomial in
formal line-bundle variables L1, L2, ... (its exponent vector), with an
integer multiplicity.  Its K-theory class is the polynomial sum of those
monomials, and Lambda^i is the i-th elementary symmetric polynomial of the
roots.  psi^r raises every root to the r-th power.

Variables listed as *real* satisfy L^2 = 1 (real line bundles), so their
exponents are kept mod 2.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .coefficients import ALPHA, ETA, ETA2, KINDS, ONE, TORSION_KINDS, KOElement, adams_coefficient, ko_mul
from .polynomial import GeneratorScheme, GradedPolynomial

LINE_BUNDLES = GeneratorScheme.single("L", 1, constant=True)
_NO_TRUNCATION = 10 ** 9

Root = tuple[int, ...]


def _root_poly(root: Root) -> GradedPolynomial:
    mono = tuple((0, i + 1) for i, e in enumerate(root) for _ in range(e))
    return GradedPolynomial(LINE_BUNDLES, {mono: 1})


@dataclass(frozen=True)
class FormalBundle:
    """Root model (``roots``) and/or lambda model (``lambdas`` = [Lambda^1, ...])."""

    roots: Mapping[Root, int] | None = None
    lambdas: tuple[GradedPolynomial, ...] | None = None
    real: frozenset[int] = field(default_factory=frozenset)  # 0-based variable indices with L^2 = 1

    def __post_init__(self) -> None:
        if self.roots is None and self.lambdas is None:
            raise ValueError("a formal bundle needs roots or exterior powers")
        if self.roots is not None:
            clean: dict[Root, int] = {}
            width = max((len(r) for r in self.roots), default=0)
            for r, m in self.roots.items():
                if m < 0:
                    raise ValueError("root multiplicities must be non-negative")
                r = tuple(r) + (0,) * (width - len(r))
                r = tuple(e % 2 if i in self.real else e for i, e in enumerate(r))
                if m:
                    clean[r] = clean.get(r, 0) + m
            object.__setattr__(self, "roots", dict(sorted(clean.items())))
        if self.lambdas is not None:
            object.__setattr__(self, "lambdas", tuple(self.lambdas))
        object.__setattr__(self, "real", frozenset(self.real))

    @classmethod
    def from_roots(cls, roots: Sequence[Root], real: Sequence[int] = ()) -> "FormalBundle":
        acc: dict[Root, int] = {}
        for r in roots:
            acc[tuple(r)] = acc.get(tuple(r), 0) + 1
        return cls(acc, real=frozenset(real))

    @classmethod
    def generic(cls, rank: int) -> "FormalBundle":
        """L1 + ... + L_rank with independent variables."""
        return cls.from_roots([tuple(int(i == j) for j in range(rank)) for i in range(rank)])

    @property
    def rank(self) -> int:
        if self.roots is not None:
            return sum(self.roots.values())
        return len(self.lambdas)

    def root_list(self) -> list[Root]:
        if self.roots is None:
            raise ValueError("bundle has no root model")
        return [r for r, m in self.roots.items() for _ in range(m)]

    def klass(self) -> GradedPolynomial:
        """The K-theory class as a polynomial in the L variables."""
        if self.roots is None:
            return self.lambdas[0] if self.lambdas else GradedPolynomial.zero(LINE_BUNDLES)
        out = GradedPolynomial.zero(LINE_BUNDLES)
        for r, m in self.roots.items():
            out = out + _reduce_real(_root_poly(r), self.real).scale(m)
        return out

    def exterior_powers(self) -> tuple[GradedPolynomial, ...]:
        """Lambda^1 .. Lambda^rank (the lambda model, derived from roots if needed)."""
        if self.lambdas is not None:
            return self.lambdas
        e = [GradedPolynomial.constant(LINE_BUNDLES, 1)]
        for r in self.root_list():
            x = _root_poly(r)
            e.append(GradedPolynomial.zero(LINE_BUNDLES))
            for i in range(len(e) - 1, 0, -1):
                e[i] = e[i] + x.mul(e[i - 1], _NO_TRUNCATION)
        return tuple(_reduce_real(p, self.real) for p in e[1:])

    def with_lambda_model(self) -> "FormalBundle":
        return FormalBundle(self.roots, self.exterior_powers(), self.real)

    def __add__(self, other: "FormalBundle") -> "FormalBundle":
        if self.roots is None or other.roots is None:
            raise ValueError("direct sums are formed in the root model")
        acc = dict(self.roots)
        for r, m in other.roots.items():
            acc[r] = acc.get(r, 0) + m
        return FormalBundle(acc, real=self.real | other.real)


def _reduce_real(poly: GradedPolynomial, real: frozenset[int]) -> GradedPolynomial:
    if not real:
        return poly
    acc: dict = {}
    for mono, c in poly.terms.items():
        counts: dict[int, int] = {}
        for _, i in mono:
            counts[i] = counts.get(i, 0) + 1
        kept = tuple(sorted((0, i) for i, n in counts.items()
                            for _ in range((n % 2) if (i - 1) in real else n)))
        acc[kept] = acc.get(kept, 0) + c
    return GradedPolynomial(LINE_BUNDLES, acc)


def adams_root_model(r: int, bundle: FormalBundle) -> FormalBundle:
    """psi^r: every root L^a becomes L^(r a)."""
    if r < 1:
        raise ValueError("r must be >= 1")
    if bundle.roots is None:
        raise ValueError("adams_root_model needs the root model")
    acc: dict[Root, int] = {}
    for root, m in bundle.roots.items():
        new = tuple(r * e for e in root)
        acc[new] = acc.get(new, 0) + m
    return FormalBundle(acc, real=bundle.real)


NEWTON = "newton"
PRINTED = "printed"


def adams_newton_recursion(r: int, bundle: FormalBundle, variant: str = NEWTON) -> GradedPolynomial:
    """psi^r(E) from the exterior powers alone.

    ``newton``: psi^r = sum_{i<r} (-1)^(i-1) Lambda^i psi^(r-i) + (-1)^(r-1) r Lambda^r.
    ``printed``: psi^r = sum_{i<r} (-1)^i Lambda^i psi^(r-i) + (-1)^r Lambda^r, with the
    same formula used for the inner psi^(r-i).
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    if variant not in (NEWTON, PRINTED):
        raise ValueError(f"unknown variant {variant!r}")
    lam = bundle.exterior_powers()
    zero = GradedPolynomial.zero(LINE_BUNDLES)

    def L(i: int) -> GradedPolynomial:
        return lam[i - 1] if i <= len(lam) else zero

    psi: list[GradedPolynomial] = [zero]
    for n in range(1, r + 1):
        acc = zero
        for i in range(1, n):
            sign = (-1) ** (i - 1) if variant == NEWTON else (-1) ** i
            acc = acc + L(i).mul(psi[n - i], _NO_TRUNCATION).scale(sign)
        top = (-1) ** (n - 1) * n if variant == NEWTON else (-1) ** n
        acc = acc + L(n).scale(top)
        psi.append(_reduce_real(acc, bundle.real))
    return psi[r]


def divergence_table(max_r: int = 6, max_rank: int = 4) -> list[dict]:
    """Compare both recursions with the root model on generic bundles."""
    rows = []
    for rank in range(1, max_rank + 1):
        E = FormalBundle.generic(rank)
        for r in range(1, max_r + 1):
            truth = adams_root_model(r, E).klass()
            printed = adams_newton_recursion(r, E, PRINTED)
            newton = adams_newton_recursion(r, E, NEWTON)
            rows.append({
                "r": r, "rank": rank,
                "newton_agrees": newton == truth,
                "printed_agrees": printed == truth,
                "printed_equals_negative": printed == truth.scale(-1),
                "printed_minus_truth_terms": len((printed - truth).terms),
            })
    return rows


# --- coefficient level ------------------------------------------------------------

def beta_power(k: int) -> KOElement:
    return KOElement.basis(ONE, k)


def localized_extension_check(r: int, k: int) -> bool:
    """psi^r(beta^k x) = r^(4k) beta^k psi^r(x) on every basis x of degree < 8."""
    if r < 1:
        raise ValueError("r must be >= 1")
    scale = Fraction(r) ** (4 * k)
    for kind in KINDS:
        x = KOElement.basis(kind, 0)
        lhs = adams_coefficient(r, ko_mul(beta_power(k), x))
        px = adams_coefficient(r, x)
        if kind in TORSION_KINDS:
            # r^(4k) acts on 2-torsion through its parity
            rhs = ko_mul(beta_power(k), px) if r % 2 else KOElement()
        else:
            rhs = ko_mul(beta_power(k), px).scale(scale)
        if lhs != rhs:
            return False
    return True


def real_line_adams(k: int, line: FormalBundle) -> FormalBundle:
    """psi^k on a genuine real line bundle: L for odd k, trivial for even k.

    Because L tensor L is trivial, the root exponent only matters mod 2.
    """
    if line.rank != 1 or not line.real:
        raise ValueError("expected a single real line bundle")
    if k < 0:
        raise ValueError("k must be >= 0")
    if k == 0:
        return FormalBundle({(0,) * len(line.root_list()[0]): 1}, real=line.real)
    return adams_root_model(k, line)


def adams_form(r: int, a: KOElement) -> KOElement:
    """Form-level shadow: alpha -> alpha / r^2 (so beta -> beta / r^4), forms fixed.

    Only the free families have form representatives.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    out = KOElement()
    for (kind, e), c in a.terms.items():
        if kind in (ETA, ETA2):
            raise ValueError("torsion classes have no form shadow")
        weight = (2 if kind == ALPHA else 0) + 4 * e
        out = out + KOElement.basis(kind, e, Fraction(c) / Fraction(r) ** weight)
    return out
