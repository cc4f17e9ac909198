"""Atiyah-Hirzebruch spectral sequences for KO and differential KO.

Every entry E_r^{s,t} is a subquotient Z_r / B_r of an ambient group
Z^m / R, where R = diag(orders) (order 0 marks a free coordinate).  A
differential is an integer matrix between ambients; applying it updates the
cycles of its source (preimage of the target boundaries) and the boundaries
of its target (image of the source cycles).

Entries of the differential variant with U(1) coefficients are modelled as
H^s(M;U(1)) ~ tor H^(s+1)(M;Z) + T^(b_s).  Their ambient holds the torsion
coordinates followed by one order-2 coordinate per circle, standing for the
2-torsion of that circle (the only part reached by the finite differentials).
The circles themselves are carried as a count and are only ever removed as
a whole, by the d_4k differentials out of the form slot.

Differentials come from a fixed rule table.  A differential with nonzero
source and target and no identified rule is recorded as unsupported and the
entries it touches are marked tainted; convergence refuses tainted degrees.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Sequence

from .abelian import GroupDescriptor, Lattice, Matrix, direct_sum, f2_solve, zeros
from .builtins import sphere as sphere_document
from .coefficients import flat_coefficient_group, ko_coefficient_group
from .errors import InvariantViolation, UnsupportedOperation
from .presentation import BUILTIN_NAMES, CohomologyPresentation, builtin, load_presentation

EVALUATED = "evaluated"
LACUNARY = "zero-by-lacunarity"
UNSUPPORTED = "unsupported"

TOPOLOGICAL = "topological"
DIFFERENTIAL = "differential"


# --- form slot -------------------------------------------------------------------

@dataclass(frozen=True)
class FormSlot:
    """Closed forms recorded through their periods.

    ``periods[4k]`` lists the periods of omega_4k against a basis of integral
    4k-cycles; ``omega0`` is the constant-function component.
    """

    periods: Mapping[int, tuple[Fraction, ...]] = field(default_factory=dict)
    omega0: int = 0

    def __post_init__(self) -> None:
        clean = {}
        for d, vec in self.periods.items():
            if d <= 0 or d % 4:
                raise ValueError(f"periods live in positive degrees divisible by 4, not {d}")
            clean[d] = tuple(Fraction(v) for v in vec)
        object.__setattr__(self, "periods", clean)

    def check_against(self, presentation: CohomologyPresentation) -> None:
        for d, vec in self.periods.items():
            if len(vec) != presentation.betti(d):
                raise ValueError(f"degree {d}: {len(vec)} periods for b_{d} = {presentation.betti(d)}")


@dataclass(frozen=True)
class D4kValue:
    degree: int
    values: tuple[Fraction, ...]
    context: str

    @property
    def is_zero(self) -> bool:
        return all(v == 0 for v in self.values)


def _frac_mod1(x: Fraction) -> Fraction:
    return x - (x.numerator // x.denominator)


def d4k_on_form_slot(slot: FormSlot, k: int) -> D4kValue:
    """d_4k on the degree-4k periods: [w] mod Z when 4k = 0 mod 8, and
    (1/2)[w] mod Z when 4k = 4 mod 8."""
    if k < 1:
        raise ValueError("k must be >= 1")
    deg = 4 * k
    if deg not in slot.periods:
        raise ValueError(f"no degree-{deg} periods in the slot")
    factor = Fraction(1) if deg % 8 == 0 else Fraction(1, 2)
    values = tuple(_frac_mod1(factor * p) for p in slot.periods[deg])
    return D4kValue(deg, values, "target (Q/Z)^b, quotient by incoming images taken trivially (conservative)")


def lattice_multiplier(degree: int) -> int:
    """Smallest positive integer period that survives d_degree."""
    m = 1
    while not d4k_on_form_slot(FormSlot({degree: (m,)}), degree // 4).is_zero:
        m += 1
    return m


# --- pages ----------------------------------------------------------------------------

@dataclass(frozen=True)
class Entry:
    s: int
    t: int
    kind: str  # "Z", "Z/2", "U(1)", "forms"
    orders: tuple[int, ...]
    labels: tuple[str, ...]
    cycles: Lattice
    boundaries: Lattice
    circles: int = 0
    torus_coords: int = 0
    torus_killed: bool = False
    tainted: bool = False
    form_constraints: tuple[tuple[int, int], ...] = ()  # (degree, multiplier) for the slot

    @property
    def dim(self) -> int:
        return len(self.orders)

    def descriptor(self) -> GroupDescriptor:
        if self.kind == "forms":
            raise ValueError("the form slot has no group descriptor; use slot_summary")
        if self.kind == "U(1)":
            na = self.dim - self.torus_coords
            proj = lambda lat: Lattice(na, [v[:na] for v in lat.basis])
            z, b = proj(self.cycles), proj(self.boundaries)
            orders, free, gens = z.quotient(b)
            labels = tuple(_render(g, self.labels[:na]) for g in gens)
            circles = 0 if self.torus_killed else self.circles
            return GroupDescriptor(free, tuple(orders), circles,
                                   labels + tuple(f"T{i + 1}" for i in range(circles)))
        orders, free, gens = self.cycles.quotient(self.boundaries)
        return GroupDescriptor(free, tuple(orders), 0, tuple(_render(g, self.labels) for g in gens))

    def is_zero(self) -> bool:
        if self.kind == "forms":
            return False
        return self.descriptor().is_zero


def _render(vec: Sequence[int], labels: Sequence[str]) -> str:
    parts = []
    for c, lab in zip(vec, labels):
        if c == 0:
            continue
        parts.append(lab if c == 1 else (f"-{lab}" if c == -1 else f"{c}*{lab}"))
    return " + ".join(parts) if parts else "0"


@dataclass(frozen=True)
class DifferentialRecord:
    r: int
    source: tuple[int, int]
    target: tuple[int, int]
    rule: str
    status: str
    matrix: tuple[tuple[int, ...], ...] | None = None
    note: str = ""

    def to_json(self) -> dict:
        out = {"r": self.r, "source": list(self.source), "target": list(self.target),
               "rule": self.rule, "status": self.status}
        if self.matrix is not None:
            out["matrix"] = [list(r) for r in self.matrix]
        if self.note:
            out["note"] = self.note
        return out


@dataclass(frozen=True)
class Page:
    variant: str
    r: int
    presentation: CohomologyPresentation
    entries: Mapping[tuple[int, int], Entry]
    totals: tuple[int, int]
    reduced: bool
    log: tuple[DifferentialRecord, ...] = ()
    slot: FormSlot | None = None
    slot_values: tuple[tuple[int, D4kValue], ...] = ()

    @property
    def dimension(self) -> int:
        return self.presentation.top_degree

    def entry(self, s: int, t: int) -> Entry | None:
        return self.entries.get((s, t))

    def group(self, s: int, t: int) -> GroupDescriptor:
        e = self.entries.get((s, t))
        return GroupDescriptor() if e is None else e.descriptor()

    def differentials(self, r: int | None = None) -> list[DifferentialRecord]:
        return [d for d in self.log if r is None or d.r == r]

    def in_report_range(self, s: int, t: int) -> bool:
        return self.totals[0] <= s + t <= self.totals[1]


# --- E2 construction -------------------------------------------------------------------

def _window(presentation: CohomologyPresentation, totals: tuple[int, int]) -> Iterable[tuple[int, int]]:
    lo, hi = totals
    for s in range(0, presentation.top_degree + 1):
        for n in range(lo - 1, hi + 2):
            yield s, n - s


def _integral_entry(pres, s, t, coef_label, reduced) -> Entry | None:
    if reduced and s == 0:
        return None
    orders = tuple(pres.integral_orders(s))
    if not orders:
        return None
    labels = tuple(f"{l}⊗{coef_label}" for l in pres.integral_labels(s))
    rel = Lattice.diagonal(orders)
    return Entry(s, t, "Z", orders, labels, Lattice.full(len(orders)), rel)


def _mod2_entry(pres, s, t, coef_label, reduced) -> Entry | None:
    if reduced and s == 0:
        return None
    n = pres.mod2_dim(s)
    if n == 0:
        return None
    orders = (2,) * n
    labels = tuple(f"{l}⊗{coef_label}" for l in pres.mod2_basis(s))
    return Entry(s, t, "Z/2", orders, labels, Lattice.full(n), Lattice.diagonal(orders))


def _u1_entry(pres, s, t, coef_label, reduced) -> Entry | None:
    if reduced and s == 0:
        return None
    tor = [i for i, o in enumerate(pres.integral_orders(s + 1)) if o]
    t_orders = [pres.integral_orders(s + 1)[i] for i in tor]
    b = pres.betti(s)
    if not t_orders and b == 0:
        return None
    orders = tuple(t_orders) + (2,) * b
    int_labels = pres.integral_labels(s + 1)
    labels = tuple(f"β⁻¹({int_labels[i]})⊗{coef_label}" for i in tor) + tuple(
        f"½{l}⊗{coef_label}" for l in pres.integral_labels(s)[:b])
    return Entry(s, t, "U(1)", orders, labels, Lattice.full(len(orders)), Lattice.diagonal(orders),
                 circles=b, torus_coords=b)


def e2_topological(presentation: CohomologyPresentation, totals: tuple[int, int] = (0, 0),
                   reduced: bool = False) -> Page:
    """E_2^{s,t} = H^s(X; KO^t(pt)) on the columns of X and the rows needed
    for total degrees ``totals[0]..totals[1]``."""
    entries = {}
    for s, t in _window(presentation, totals):
        coef = ko_coefficient_group(t)
        if coef.is_zero:
            continue
        label = coef.labels[0]
        e = (_integral_entry if coef.free else _mod2_entry)(presentation, s, t, label, reduced)
        if e is not None:
            entries[(s, t)] = e
    return Page(TOPOLOGICAL, 2, presentation, entries, tuple(totals), reduced)


def differential_row_kind(t: int) -> tuple[str, str] | None:
    """Coefficient kind and label for row t < 0 of the differential variant.

    Rows follow the flat coefficient table at index -t.  At -t = 3 mod 8 the
    row is the circle alone: the extra Z/2 of the flat table there is not
    given a row of its own.
    """
    g = flat_coefficient_group(-t)
    if g.is_zero:
        return None
    if g.circles:
        return "U(1)", g.labels[0]
    return "Z/2", g.labels[0]


def e2_differential(presentation: CohomologyPresentation, totals: tuple[int, int] = (0, 0),
                    reduced: bool = False, slot: FormSlot | None = None) -> Page:
    """Three-case page: forms at (0,0), U(1)-type rows for t < 0 and integral
    KO rows for t > 0.  Entries (s, 0) with s > 0 are zero."""
    if slot is not None:
        slot.check_against(presentation)
    entries = {}
    for s, t in _window(presentation, totals):
        if t == 0:
            if s == 0:
                entries[(0, 0)] = Entry(0, 0, "forms", (), ("Ω_cl",), Lattice(0), Lattice(0))
            continue
        if t > 0:
            coef = ko_coefficient_group(t)
            if coef.is_zero:
                continue
            maker = _integral_entry if coef.free else _mod2_entry
            e = maker(presentation, s, t, coef.labels[0], reduced)
        else:
            kind = differential_row_kind(t)
            if kind is None:
                continue
            maker = _u1_entry if kind[0] == "U(1)" else _mod2_entry
            e = maker(presentation, s, t, kind[1], reduced)
        if e is not None:
            entries[(s, t)] = e
    return Page(DIFFERENTIAL, 2, presentation, entries, tuple(totals), reduced, slot=slot)


# --- rule matrices ---------------------------------------------------------------------------

def _f2(m: Matrix) -> Matrix:
    return [[x % 2 for x in row] for row in m]


def _mm(A: Matrix, B: Matrix, a_rows: int, inner: int, b_cols: int) -> Matrix:
    if a_rows == 0:
        return []
    if inner == 0:
        return zeros(a_rows, b_cols)
    return [[sum(A[i][k] * B[k][j] for k in range(inner)) for j in range(b_cols)] for i in range(a_rows)]


def sq2_rho2(pres, s) -> Matrix:
    return _f2(_mm(pres.sq_matrix(2, s), pres.rho2_matrix(s), pres.mod2_dim(s + 2), pres.mod2_dim(s),
                   len(pres.integral_orders(s))))


def beta2_sq2(pres, s) -> Matrix:
    return _mm(pres.beta2_matrix(s + 2), _f2(pres.sq_matrix(2, s)), len(pres.integral_orders(s + 3)),
               pres.mod2_dim(s + 2), pres.mod2_dim(s))


def beta2_sq4_rho2(pres, s) -> Matrix:
    inner = _f2(_mm(pres.sq_matrix(4, s), pres.rho2_matrix(s), pres.mod2_dim(s + 4), pres.mod2_dim(s),
                    len(pres.integral_orders(s))))
    return _mm(pres.beta2_matrix(s + 4), inner, len(pres.integral_orders(s + 5)), pres.mod2_dim(s + 4),
               len(pres.integral_orders(s)))


def j_matrix(pres: CohomologyPresentation, k: int) -> Matrix:
    """j : H^k(Z/2) -> H^k(U(1)) in the U(1)-entry coordinates.

    On the image of rho_2, j(rho_2 y) = (free part of y)/2 in the circles and
    nothing in the torsion part.  On a chosen complement of that image, j is
    taken to be beta_2 in the torsion coordinates and 0 in the circles; this
    choice is exactly the non-canonical splitting of H^k(U(1)).
    """
    n = pres.mod2_dim(k)
    int_orders = pres.integral_orders(k)
    nfree = sum(1 for o in int_orders if o == 0)
    tor_next = [i for i, o in enumerate(pres.integral_orders(k + 1)) if o]
    b = pres.betti(k)
    rows_out = len(tor_next) + b
    if n == 0:
        return zeros(rows_out, 0)
    rho = _f2(pres.rho2_matrix(k)) if int_orders else zeros(n, 0)
    beta = pres.beta2_matrix(k)
    ncols_rho = len(int_orders)
    # basis of W = im rho2 (independent subset of rho columns), then complement
    chosen: list[list[int]] = []
    chosen_kind: list[tuple[str, int]] = []
    for c in range(ncols_rho):
        col = [rho[r][c] for r in range(n)]
        if _f2_independent(chosen, col):
            chosen.append(col)
            chosen_kind.append(("rho", c))
    w_dim = len(chosen)
    for c in range(n):
        col = [int(r == c) for r in range(n)]
        if _f2_independent(chosen, col):
            chosen.append(col)
            chosen_kind.append(("std", c))
    # value of j on each chosen basis vector
    values: list[list[int]] = []
    for kind, c in chosen_kind:
        val = [0] * rows_out
        if kind == "rho":
            if c < nfree:
                val[len(tor_next) + c] = 1
        else:
            col_img = [beta[r][c] for r in range(len(pres.integral_orders(k + 1)))] if beta else []
            for idx, i in enumerate(tor_next):
                val[idx] = col_img[i] if col_img else 0
        values.append(val)
    for c in range(nfree):
        if not any(rho[r][c] for r in range(n)):
            raise InvariantViolation(f"{pres.name}: rho2 kills a free generator in degree {k}")
    # express standard basis vectors in the chosen basis
    basis_cols = [[chosen[j][r] for j in range(n)] for r in range(n)]
    out = zeros(rows_out, n)
    for c in range(n):
        coords, _ = f2_solve(basis_cols, [int(r == c) for r in range(n)], n)
        for j, a in enumerate(coords):
            if a:
                for r in range(rows_out):
                    out[r][c] += values[j][r]
    return out


def _f2_independent(vectors: list[list[int]], v: list[int]) -> bool:
    if not any(x % 2 for x in v):
        return False
    if not vectors:
        return True
    n = len(v)
    cols = [[vectors[j][r] for j in range(len(vectors))] for r in range(n)]
    sol, _ = f2_solve(cols, v, len(vectors))
    return sol is None


def beta_u1_matrix(pres: CohomologyPresentation, s: int) -> Matrix:
    """beta_U(1) : H^s(U(1)) -> H^(s+1)(Z): torsion coordinates map to
    themselves, circle coordinates to zero."""
    orders = pres.integral_orders(s + 1)
    tor = [i for i, o in enumerate(orders) if o]
    b = pres.betti(s)
    out = zeros(len(orders), len(tor) + b)
    for idx, i in enumerate(tor):
        out[i][idx] = 1
    return out


def j_sq2(pres, s) -> Matrix:
    J = j_matrix(pres, s + 2)
    return _mm(J, _f2(pres.sq_matrix(2, s)), len(J), pres.mod2_dim(s + 2), pres.mod2_dim(s))


def j_sq4_rho2_beta(pres, s) -> Matrix:
    B = beta_u1_matrix(pres, s)
    ncols = len([o for o in pres.integral_orders(s + 1) if o]) + pres.betti(s)
    rho = _mm(_f2(pres.rho2_matrix(s + 1)), B, pres.mod2_dim(s + 1), len(pres.integral_orders(s + 1)), ncols)
    sq = _f2(_mm(pres.sq_matrix(4, s + 1), rho, pres.mod2_dim(s + 5), pres.mod2_dim(s + 1), ncols))
    J = j_matrix(pres, s + 5)
    return _mm(J, sq, len(J), pres.mod2_dim(s + 5), ncols)


# Each rule: (r, row test, name, builder).  Row tests take t.
TOPOLOGICAL_RULES: list[tuple[int, Callable[[int], bool], str, Callable]] = [
    (2, lambda t: t % 8 == 0, "d2 = Sq^2 rho_2", sq2_rho2),
    (2, lambda t: t % 8 == 7, "d2 = Sq^2", lambda p, s: _f2(p.sq_matrix(2, s))),
    (3, lambda t: t % 8 == 6, "d3 = beta_2 Sq^2", beta2_sq2),
    (5, lambda t: t % 8 == 0, "d5 = beta_2 Sq^4 rho_2", beta2_sq4_rho2),
]

FLAT_RULES: list[tuple[int, Callable[[int], bool], str, Callable]] = [
    (2, lambda t: (-t) % 8 == 1, "d2 = Sq^2", lambda p, s: _f2(p.sq_matrix(2, s))),
    (2, lambda t: (-t) % 8 == 2, "d2 = j Sq^2", j_sq2),
    (5, lambda t: (-t) % 8 in (3, 7), "d5 = j_2 Sq^4 rho_2 beta_U(1)", j_sq4_rho2_beta),
]


def _find_rule(rules, r, t):
    for rr, test, name, builder in rules:
        if rr == r and test(t):
            return name, builder
    return None


# --- transitions ---------------------------------------------------------------------------------

def _advance(page: Page, choose: Callable[[Page, Entry, tuple[int, int]], tuple]) -> Page:
    r = page.r
    entries = dict(page.entries)
    new_cycles: dict[tuple[int, int], Lattice] = {}
    new_bounds: dict[tuple[int, int], Lattice] = {}
    taint: set[tuple[int, int]] = set()
    killed: set[tuple[int, int]] = set()
    slot_constraints: list[tuple[int, int]] = []
    slot_values = list(page.slot_values)
    records = []
    hi = page.totals[1]
    for (s, t), src in sorted(page.entries.items()):
        if s + t > hi:
            continue  # outgoing differential leaves the window
        tgt_key = (s + r, t - r + 1)
        tgt = page.entries.get(tgt_key)
        if src.kind != "forms" and src.is_zero():
            continue
        if tgt is None or tgt.is_zero():
            records.append(DifferentialRecord(r, (s, t), tgt_key, "target group is zero", LACUNARY))
            continue
        decision = choose(page, src, tgt_key)
        if decision[0] == "unsupported" and _finite_into_free(src, tgt):
            decision = ("zero", "finite source into a torsion-free target")
        kind = decision[0]
        if kind == "zero":
            records.append(DifferentialRecord(r, (s, t), tgt_key, decision[1], EVALUATED, note="zero"))
            continue
        if kind == "unsupported":
            records.append(DifferentialRecord(r, (s, t), tgt_key, decision[1], UNSUPPORTED, note=decision[2]))
            taint.update({(s, t), tgt_key})
            continue
        if kind == "slot":
            _, name, degree = decision
            if page.presentation.betti(degree):
                killed.add(tgt_key)
                slot_constraints.append((degree, lattice_multiplier(degree)))
            if page.slot is not None and degree in page.slot.periods:
                slot_values.append((degree, d4k_on_form_slot(page.slot, degree // 4)))
            records.append(DifferentialRecord(r, (s, t), tgt_key, name, EVALUATED,
                                              note=f"image is the whole circle part of E_{r}{tgt_key}"))
            continue
        _, name, M = decision
        M = [list(row) for row in M]
        img = src.cycles.image(M, tgt.dim) + Lattice.diagonal(tgt.orders)
        if not tgt.cycles.contains_lattice(img):
            raise InvariantViolation(
                f"{name} from {(s, t)} lands outside the cycles of {tgt_key} on page {r}")
        new_cycles[(s, t)] = src.cycles.preimage(M, tgt.boundaries)
        new_bounds[tgt_key] = tgt.boundaries + img
        zero = all(tgt.boundaries.contains(v) for v in img.basis)
        records.append(DifferentialRecord(r, (s, t), tgt_key, name, EVALUATED,
                                          tuple(tuple(row) for row in M), note="zero" if zero else "nonzero"))
    for key, lat in new_cycles.items():
        entries[key] = replace(entries[key], cycles=lat)
    for key, lat in new_bounds.items():
        entries[key] = replace(entries[key], boundaries=lat)
    for key in killed:
        entries[key] = replace(entries[key], torus_killed=True)
    for key in taint:
        if key in entries:
            entries[key] = replace(entries[key], tainted=True)
    if slot_constraints and (0, 0) in entries:
        slot = entries[(0, 0)]
        entries[(0, 0)] = replace(slot, form_constraints=slot.form_constraints + tuple(slot_constraints))
    return replace(page, r=r + 1, entries=entries, log=page.log + tuple(records),
                   slot_values=tuple(slot_values))


def _finite_into_free(src: Entry, tgt: Entry) -> bool:
    if src.kind == "forms" or tgt.kind == "U(1)":
        return False
    a, b = src.descriptor(), tgt.descriptor()
    return a.is_finite and not b.torsion


def _topological_choice(page: Page, src: Entry, tgt_key) -> tuple:
    s, t = src.s, src.t
    if s == 0 and not page.reduced:
        return ("zero", "column 0 comes from the basepoint (permanent cycles)")
    found = _find_rule(TOPOLOGICAL_RULES, page.r, t)
    if found is None:
        return ("unsupported", f"d{page.r} from row {t}", "differential not identified")
    name, builder = found
    try:
        return ("matrix", name, builder(page.presentation, s))
    except UnsupportedOperation as exc:
        return ("unsupported", name, str(exc))


def apply_topological_differentials(page: Page, presentation: CohomologyPresentation | None = None) -> Page:
    """Apply d_r of ``page`` and return page r+1."""
    if page.variant != TOPOLOGICAL:
        raise ValueError("page belongs to the differential variant")
    return _advance(page, _topological_choice)


def _differential_choice(page: Page, src: Entry, tgt_key) -> tuple:
    s, t = src.s, src.t
    r = page.r
    if src.kind == "forms":
        if r % 4 == 0 and tgt_key == (r, 1 - r):
            rule = "d%d = [ω_%d] mod Z" % (r, r) if r % 8 == 0 else "d%d = ½[ω_%d] mod Z" % (r, r)
            return ("slot", rule, r)
        return ("zero", "form slot: no other differentials")
    if s == 0 and not page.reduced:
        return ("zero", "column 0 comes from the basepoint (permanent cycles)")
    tt = tgt_key[1]
    if t > 0 and tt > 0:
        return _topological_choice(replace(page, reduced=True), src, tgt_key)
    if t < 0:
        found = _find_rule(FLAT_RULES, r, t)
        if found is not None:
            name, builder = found
            try:
                return ("matrix", name, builder(page.presentation, s))
            except UnsupportedOperation as exc:
                return ("unsupported", name, str(exc))
    return ("unsupported", f"d{r} from row {t}", "differential not identified")


def apply_differential_variant_rules(page: Page, presentation: CohomologyPresentation | None = None) -> Page:
    if page.variant != DIFFERENTIAL:
        raise ValueError("page belongs to the topological variant")
    return _advance(page, _differential_choice)


def last_page_index(page: Page) -> int:
    return page.dimension + 2


def run(page: Page) -> list[Page]:
    """All pages from ``page`` up to E_infinity (= E_(dim+2))."""
    step = apply_topological_differentials if page.variant == TOPOLOGICAL else apply_differential_variant_rules
    pages = [page]
    while pages[-1].r < last_page_index(page):
        pages.append(step(pages[-1]))
    return pages


# --- odd-primary (and 2-primary Sq^8r) components ---------------------------------------


@dataclass(frozen=True)
class OddPrimaryEvaluation:
    """p-primary part of d_(4r(p-1)+1) (d_(8r+1) when p = 2) on one entry.

    The unit epsilon is unknown mod p and is taken to be 1, so a nonzero
    image always carries ``unit_ambiguous``.  Zero conclusions do not depend
    on the unit.
    """

    prime: int
    r: int
    length: int
    operation: str
    source: tuple[int, int]
    target: tuple[int, int]
    status: str
    image: str  # "zero", "nonzero" or "unknown"
    reason: str
    classes: tuple[str, ...] = ()
    unit_ambiguous: bool = False

    def to_json(self) -> dict:
        return {"prime": self.prime, "r": self.r, "length": self.length, "operation": self.operation,
                "source": list(self.source), "target": list(self.target), "status": self.status,
                "image": self.image, "reason": self.reason, "classes": list(self.classes),
                "unit_ambiguous": self.unit_ambiguous}


def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % q for q in range(2, int(p ** 0.5) + 1))


def odd_primary_differential(page: Page, p: int, r: int, key: tuple[int, int],
                             presentation: CohomologyPresentation | None = None) -> OddPrimaryEvaluation:
    """Evaluate the p-primary component of the long differential out of ``key``.

    Topological pages use beta_p P^(2r)(x / p^(2r-1)) on integral rows t = 0
    mod 4.  Differential pages use j_p P^(2r)(beta_U(1)(x / p^(2r-1))) on the
    U(1) rows t = 1 mod 4, t < 0, so the classes examined are the integral
    torsion classes of degree s+1.

    Excess is judged against the source column s: P^(2r) vanishes when
    4r > s and Sq^(8r) when 8r > s.  A source that is not annotated with
    P^(2r) data, or whose divisibility is below 2r-1, is unsupported.
    """
    if not _is_prime(p):
        raise ValueError(f"{p} is not prime")
    if r < 1:
        raise ValueError("r must be >= 1")
    pres = presentation or page.presentation
    s, t = key
    if page.variant == TOPOLOGICAL:
        if t % 4:
            raise ValueError(f"row {t} is not a row of the form 4t")
        class_degree = s
    else:
        if t >= 0 or t % 4 != 1:
            raise ValueError(f"row {t} is not a U(1) row of the form -4t+1")
        class_degree = s + 1
    if p == 2:
        op_degree, power, op = 8 * r, 4 * r, f"Sq^{8 * r}"
    else:
        op_degree, power, op = 4 * r * (p - 1), 2 * r, f"P^{2 * r}"
    length = op_degree + 1
    target = (s + length, t - length + 1)
    base = dict(prime=p, r=r, length=length, operation=op, source=key, target=target)

    torsion = [lab for lab, o in zip(pres.integral_labels(class_degree), pres.integral_orders(class_degree))
               if o and o % p == 0]
    if not torsion:
        return OddPrimaryEvaluation(**base, status=LACUNARY, image="zero",
                                    reason=f"no {p}-torsion in H^{class_degree}(M;Z)")
    if s + length > pres.top_degree:
        return OddPrimaryEvaluation(**base, status=LACUNARY, image="zero",
                                    reason="target column lies above the top degree")
    # instability: P^j vanishes below degree 2j, Sq^i below degree i
    if (p == 2 and op_degree > s) or (p > 2 and 2 * power > s):
        return OddPrimaryEvaluation(**base, status=EVALUATED, image="zero",
                                    reason=f"{op} vanishes by excess on column {s}")
    notes = {d.label: d for d in pres.odd_primary if d.prime == p}
    nonzero_on, missing = [], []
    for lab in torsion:
        datum = notes.get(lab)
        if datum is None or power not in datum.reduced_powers:
            missing.append(f"{lab}: no {op} data")
            continue
        if datum.divisibility < 2 * r - 1:
            missing.append(f"{lab}: divisible only by {p}^{datum.divisibility}, rule needs {p}^{2 * r - 1}")
            continue
        nonzero, bockstein_zero = datum.reduced_powers[power]
        hit = nonzero and (page.variant != TOPOLOGICAL or not bockstein_zero)
        if hit:
            nonzero_on.append(lab)
    if missing:
        return OddPrimaryEvaluation(**base, status=UNSUPPORTED, image="unknown",
                                    reason="; ".join(missing), classes=tuple(torsion))
    if nonzero_on:
        return OddPrimaryEvaluation(**base, status=EVALUATED, image="nonzero",
                                    reason=f"{op} is nonzero on " + ", ".join(nonzero_on) + " (unit set to 1)",
                                    classes=tuple(nonzero_on), unit_ambiguous=True)
    return OddPrimaryEvaluation(**base, status=EVALUATED, image="zero",
                                reason=f"{op} data vanish on every {p}-torsion class", classes=tuple(torsion))


# --- convergence ------------------------------------------------------------------------------

@dataclass(frozen=True)
class Convergence:
    total: int
    status: str  # "assembled", "extension-unresolved", "refused"
    group: GroupDescriptor | None
    pieces: tuple[tuple[int, int, GroupDescriptor], ...]
    blockers: tuple[DifferentialRecord, ...] = ()
    forms: dict | None = None

    def to_json(self) -> dict:
        out = {"total_degree": self.total, "status": self.status,
               "group": None if self.group is None else str(self.group),
               "pieces": [{"s": s, "t": t, "group": str(g)} for s, t, g in self.pieces]}
        if self.blockers:
            out["blockers"] = [b.to_json() for b in self.blockers]
        if self.forms is not None:
            out["forms"] = self.forms
        return out


def slot_summary(page: Page) -> dict:
    """Surviving forms: lattice multipliers on periods, plus exact summands."""
    pres = page.presentation
    entry = page.entries.get((0, 0))
    constraints = dict(entry.form_constraints) if entry else {}
    lattices = {}
    for d in range(4, pres.top_degree + 1, 4):
        if pres.betti(d):
            lattices[d] = {"rank": pres.betti(d), "multiplier": constraints.get(d)}
    return {
        "omega0": None if page.reduced else "Z",
        "period_lattices": lattices,
        "exact_summands": [4 * k - 1 for k in range(1, pres.top_degree // 4 + 1)],
    }


def converge(pages: Sequence[Page] | Page) -> dict[int, Convergence]:
    final = pages[-1] if isinstance(pages, Sequence) else pages
    if final.r < last_page_index(final):
        raise ValueError(f"page E_{final.r} is not E_infinity (needs E_{last_page_index(final)})")
    out = {}
    blockers_all = [d for d in final.log if d.status == UNSUPPORTED]
    for n in range(final.totals[0], final.totals[1] + 1):
        keys = sorted(k for k in final.entries if k[0] + k[1] == n)
        forms = None
        pieces = []
        tainted = []
        for key in keys:
            e = final.entries[key]
            if e.kind == "forms":
                forms = slot_summary(final)
                continue
            if e.tainted:
                tainted.append(key)
            g = e.descriptor()
            if not g.is_zero:
                pieces.append((key[0], key[1], g))
        if tainted:
            blockers = tuple(d for d in blockers_all if d.source in tainted or d.target in tainted)
            out[n] = Convergence(n, "refused", None, tuple(pieces), blockers, forms)
            continue
        nonzero = [g for _, _, g in pieces]
        if len(nonzero) <= 1 or all(not g.torsion for g in nonzero):
            group = direct_sum(*nonzero) if nonzero else GroupDescriptor()
            out[n] = Convergence(n, "assembled", group, tuple(pieces), (), forms)
        else:
            out[n] = Convergence(n, "extension-unresolved", None, tuple(pieces), (), forms)
    return out


# --- spheres -------------------------------------------------------------------------------

KO_SPHERE_TABLE = {1: GroupDescriptor(0, (2,)), 2: GroupDescriptor(0, (2,)), 3: GroupDescriptor(),
                   4: GroupDescriptor(1), 5: GroupDescriptor(), 6: GroupDescriptor(), 7: GroupDescriptor(),
                   0: GroupDescriptor(1)}


def sphere_presentation(n: int) -> CohomologyPresentation:
    name = f"S{n}"
    return builtin(name) if name in BUILTIN_NAMES else load_presentation(sphere_document(n))


def ko_of_sphere(n: int) -> GroupDescriptor:
    """Reduced KO^0(S^n) through the engine, checked against the period-8 table."""
    if not 1 <= n <= 32:
        raise ValueError("n must satisfy 1 <= n <= 32")
    pages = run(e2_topological(sphere_presentation(n), (0, 0), reduced=True))
    result = converge(pages)[0]
    if result.status != "assembled":
        raise InvariantViolation(f"S^{n}: convergence {result.status}")
    expected = KO_SPHERE_TABLE[n % 8]
    if result.group != expected:
        raise InvariantViolation(f"S^{n}: engine gives {result.group}, table gives {expected}")
    return result.group


@dataclass(frozen=True)
class SphereKOHat:
    n: int
    multiplier: int | None
    exact_summands: tuple[int, ...]
    torsion: tuple[int, ...]
    circles: int
    metric_tag: str = "round"

    def to_json(self) -> dict:
        return {"n": self.n, "metric": self.metric_tag,
                "lattice": None if self.multiplier is None else f"<{self.multiplier}·dvol>",
                "multiplier": self.multiplier, "exact_summands": list(self.exact_summands),
                "torsion": list(self.torsion), "circles": self.circles}

    def __str__(self) -> str:
        parts = []
        if self.multiplier is not None:
            parts.append("<dvol>_Z" if self.multiplier == 1 else f"<{self.multiplier}·dvol>_Z")
        parts += [f"Z/{t}" for t in self.torsion]
        parts += ["U(1)"] * self.circles
        parts += [f"dΩ^{d}" for d in self.exact_summands]
        return " ⊕ ".join(parts) if parts else "0"


def ko_hat_of_sphere(n: int, metric_tag: str = "round") -> SphereKOHat:
    """Reduced differential KO^0(S^n) through the differential-variant engine."""
    if n < 1:
        raise ValueError("n must be >= 1")
    pres = sphere_presentation(n)
    slot = FormSlot({n: (1,)}) if n % 4 == 0 else None
    pages = run(e2_differential(pres, (0, 0), reduced=True, slot=slot))
    result = converge(pages)[0]
    if result.status != "assembled":
        raise InvariantViolation(f"S^{n}: differential convergence {result.status}")
    forms = result.forms or slot_summary(pages[-1])
    lattice = forms["period_lattices"].get(n)
    multiplier = lattice["multiplier"] if lattice else None
    return SphereKOHat(n, multiplier, tuple(forms["exact_summands"]), result.group.torsion,
                       result.group.circles, metric_tag)
