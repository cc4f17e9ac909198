"""Steenrod squares: Sq^1 on Stiefel-Whitney generators, Wu classes, and the
action on presentations."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .abelian import f2_solve
from .errors import InvariantViolation, UnsupportedOperation
from .polynomial import MOD2, STIEFEL_WHITNEY, Family, GeneratorScheme, GradedPolynomial
from .presentation import CohomologyPresentation

# w(E) and w(E') side by side, rendered w2 and w2'
TWO_BUNDLES = GeneratorScheme((Family("w", 1), Family("w", 1, suffix="'")), MOD2)


def w(i: int, family: int = 0, scheme: GeneratorScheme = STIEFEL_WHITNEY) -> GradedPolynomial:
    """w_i as a polynomial; w_0 = 1."""
    if i == 0:
        return GradedPolynomial.constant(scheme, 1)
    return GradedPolynomial.generator(scheme, i, family)


def _sq1_generator(key, scheme: GeneratorScheme) -> GradedPolynomial:
    fam, i = key
    w1 = GradedPolynomial.generator(scheme, 1, fam)
    wi = GradedPolynomial.generator(scheme, i, fam)
    if i % 2 == 0:
        return GradedPolynomial.generator(scheme, i + 1, fam) + w1.mul(wi)
    return w1.mul(wi)


def sq1_sw(poly: GradedPolynomial) -> GradedPolynomial:
    """Sq^1 as a derivation, with Sq^1 w_2i = w_2i+1 + w_1 w_2i and
    Sq^1 w_2i+1 = w_1 w_2i+1 (per family)."""
    scheme = poly.scheme
    if not scheme.is_mod2 or any(f.prefix != "w" or f.step != 1 or f.constant for f in scheme.families):
        raise ValueError("sq1_sw works on Stiefel-Whitney schemes over Z/2")
    out = GradedPolynomial.zero(scheme)
    for mono, c in poly.terms.items():
        for pos, key in enumerate(mono):
            rest = GradedPolynomial(scheme, {mono[:pos] + mono[pos + 1:]: c})
            out = out + rest.mul(_sq1_generator(key, scheme))
    return out


def torsion_pontrjagin_mod2(k: int, scheme: GeneratorScheme = STIEFEL_WHITNEY) -> GradedPolynomial:
    """rho_2 P_(4k+2) = Sq^1(w_2k w_2k+1), using rho_2 beta_2 = Sq^1."""
    if k < 0:
        raise ValueError("k must be >= 0")
    return sq1_sw(w(2 * k, 0, scheme).mul(w(2 * k + 1, 0, scheme)))


def whitney_correction_mod2(k: int) -> GradedPolynomial:
    """rho_2 D_k = sum_{i+j=k-1} Sq^1(w_2i(E) w_2i+1(E')) Sq^1(w_2j(E') w_2j+1(E))."""
    if k < 1:
        raise ValueError("k must be >= 1")
    out = GradedPolynomial.zero(TWO_BUNDLES)
    for i in range(k):
        j = k - 1 - i
        left = sq1_sw(w(2 * i, 0, TWO_BUNDLES).mul(w(2 * i + 1, 1, TWO_BUNDLES)))
        right = sq1_sw(w(2 * j, 1, TWO_BUNDLES).mul(w(2 * j + 1, 0, TWO_BUNDLES)))
        out = out + left.mul(right)
    return out


# Vanishing w-classes for structured bundles.  Orientable: w_1 = 0.  Spin:
# w_1 = w_2 = 0, hence w_3 = Sq^1 w_2 + w_1 w_2 = 0; and w_5 = 0 because
# Sq^2 Sq^1 w_2 = w_2 w_3 + w_5 lies in the ideal defining H*(BSpin; Z/2).
ORIENTABLE_VANISHING = (1,)
SPIN_VANISHING = (1, 2, 3, 5)


def specialize(poly: GradedPolynomial, vanishing: Sequence[int]) -> GradedPolynomial:
    """Set w_i = 0 (in every family) for i in ``vanishing``."""
    kill = set(vanishing)
    return GradedPolynomial(
        poly.scheme, {m: c for m, c in poly.terms.items() if not any(i in kill for _, i in m)}
    )


# --- classes in a presentation -------------------------------------------------

@dataclass(frozen=True)
class ModTwoClass:
    """A homogeneous mod-2 class: degree plus a coordinate vector."""

    degree: int
    vector: tuple[int, ...]

    def is_zero(self) -> bool:
        return not any(self.vector)

    def render(self, presentation: CohomologyPresentation) -> str:
        basis = presentation.mod2_basis(self.degree)
        names = [basis[i] for i, v in enumerate(self.vector) if v % 2]
        return " + ".join(names) if names else "0"


def mod2_class(presentation: CohomologyPresentation, label: str) -> ModTwoClass:
    d, i = presentation.mod2_label(label)
    vec = [0] * presentation.mod2_dim(d)
    vec[i] = 1
    return ModTwoClass(d, tuple(vec))


def apply_sq(i: int, x: ModTwoClass | str, presentation: CohomologyPresentation) -> ModTwoClass:
    """Sq^i x via the presentation's matrices; raises UnsupportedOperation when
    the action is not tabulated."""
    if isinstance(x, str):
        x = mod2_class(presentation, x)
    m = presentation.sq_matrix(i, x.degree)
    vec = tuple(sum(row[c] * x.vector[c] for c in range(len(x.vector))) % 2 for row in m)
    return ModTwoClass(x.degree + i, vec)


# A total (inhomogeneous) mod-2 class: degree -> ModTwoClass
TotalClass = dict[int, ModTwoClass]


def render_total(total: TotalClass, presentation: CohomologyPresentation) -> str:
    parts = [total[d].render(presentation) for d in sorted(total) if not total[d].is_zero()]
    return " + ".join(parts) if parts else "0"


def wu_classes(presentation: CohomologyPresentation, dimension: int | None = None) -> TotalClass:
    """v_0 .. v_floor(n/2) with <Sq^k x, [M]> = <v_k x, [M]> for |x| = n - k.

    v_k for k > n/2 vanishes (Sq^k is zero on classes of degree n - k < k),
    so those entries are zero vectors.
    """
    n = presentation.dimension if dimension is None else dimension
    if n is None or presentation.fundamental_mod2 is None:
        raise InvariantViolation(f"{presentation.name}: no fundamental-class pairing")
    top_deg, top_idx = presentation.mod2_label(presentation.fundamental_mod2)
    if top_deg != n:
        raise InvariantViolation("fundamental class is not in the stated dimension")

    def evaluate(vec: Sequence[int]) -> int:
        return vec[top_idx] % 2 if vec else 0

    out: TotalClass = {}
    for k in range(0, n // 2 + 1):
        src = presentation.mod2_basis(k)
        tests = presentation.mod2_basis(n - k)
        # unknown v_k = sum c_b b; one equation per test class x
        rows, rhs = [], []
        for xi, x in enumerate(tests):
            xv = [int(j == xi) for j in range(len(tests))]
            rows.append([evaluate(presentation.cup_mod2_vectors(k, [int(j == b) for j in range(len(src))], n - k, xv))
                         for b in range(len(src))])
            rhs.append(evaluate(apply_sq(k, ModTwoClass(n - k, tuple(xv)), presentation).vector))
        sol, freedom = f2_solve(rows, rhs, len(src))
        if sol is None or freedom:
            raise InvariantViolation(
                f"{presentation.name}: Poincare pairing degenerate in degree {k}; Wu class not determined")
        out[k] = ModTwoClass(k, tuple(sol))
    return out


def total_sq(x: TotalClass, presentation: CohomologyPresentation) -> TotalClass:
    """Sq = Sq^0 + Sq^1 + ... applied to a total class."""
    out: dict[int, list[int]] = {}
    top = presentation.top_degree
    for d, cls in x.items():
        for i in range(0, top - d + 1):
            if presentation.mod2_dim(d + i) == 0:
                continue
            img = apply_sq(i, cls, presentation)
            acc = out.setdefault(d + i, [0] * presentation.mod2_dim(d + i))
            for j, v in enumerate(img.vector):
                acc[j] ^= v
    return {d: ModTwoClass(d, tuple(v)) for d, v in sorted(out.items())}


def sw_from_wu(v: TotalClass, presentation: CohomologyPresentation) -> TotalClass:
    """Total Stiefel-Whitney class w = Sq(v)."""
    return total_sq(v, presentation)


def binomial_total(presentation: CohomologyPresentation, generator: str, exponent: int) -> TotalClass:
    """(1 + g)^exponent in a monogenic presentation, by repeated cup products.

    Used as the oracle for w(RP^n) = (1+a)^(n+1) and w(CP^n) = (1+x)^(n+1).
    """
    one = mod2_class(presentation, presentation.mod2_basis(0)[0])
    g = mod2_class(presentation, generator)
    total: TotalClass = {0: one}
    for _ in range(exponent):
        nxt: dict[int, list[int]] = {}
        for d, cls in total.items():
            for factor in (one, g):
                dd = d + factor.degree
                if presentation.mod2_dim(dd) == 0:
                    continue
                prod = presentation.cup_mod2_vectors(d, cls.vector, factor.degree, factor.vector)
                acc = nxt.setdefault(dd, [0] * presentation.mod2_dim(dd))
                for j, val in enumerate(prod):
                    acc[j] ^= val
        total = {d: ModTwoClass(d, tuple(v)) for d, v in sorted(nxt.items())}
    return total


def totals_equal(a: TotalClass, b: TotalClass) -> bool:
    keys = set(a) | set(b)
    return all((a.get(d) is None or a[d].is_zero()) and (b.get(d) is None or b[d].is_zero())
               or (d in a and d in b and a[d] == b[d]) for d in keys)
