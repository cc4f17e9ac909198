"""Newton's identities, multiplicative sequences, Ph and the A-hat genus."""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import factorial
from typing import Mapping, Sequence

from .polynomial import (
    CHERN_ROOTS,
    PONTRYAGIN,
    GeneratorScheme,
    GradedPolynomial,
    exp_nilpotent,
    invert_unit,
)


class PowerSeries1D:
    """Truncated power series in one variable with rational coefficients."""

    __slots__ = ("coefficients",)

    def __init__(self, coefficients: Sequence) -> None:
        self.coefficients = tuple(Fraction(c) for c in coefficients)

    def __len__(self) -> int:
        return len(self.coefficients)

    def __getitem__(self, k: int) -> Fraction:
        return self.coefficients[k] if k < len(self.coefficients) else Fraction(0)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PowerSeries1D):
            return NotImplemented
        n = max(len(self), len(other))
        return all(self[k] == other[k] for k in range(n))

    def __mul__(self, other: "PowerSeries1D") -> "PowerSeries1D":
        n = min(len(self), len(other))
        return PowerSeries1D(
            [sum((self[i] * other[k - i] for i in range(k + 1)), Fraction(0)) for k in range(n)]
        )

    def inverse(self) -> "PowerSeries1D":
        if self[0] == 0:
            raise ZeroDivisionError("series has zero constant term")
        out = [1 / self[0]]
        for k in range(1, len(self)):
            s = sum((self[i] * out[k - i] for i in range(1, k + 1)), Fraction(0))
            out.append(-s / self[0])
        return PowerSeries1D(out)

    def log(self) -> "PowerSeries1D":
        """log of a series with constant term 1, via log(f)' = f'/f."""
        if self[0] != 1:
            raise ValueError("log needs constant term 1")
        n = len(self)
        deriv = PowerSeries1D([k * self[k] for k in range(1, n)] + [0])
        q = deriv * self.inverse()
        return PowerSeries1D([0] + [q[k - 1] / k for k in range(1, n)])

    def __repr__(self) -> str:
        return f"PowerSeries1D({[str(c) for c in self.coefficients]})"


def a_hat_series(terms: int) -> PowerSeries1D:
    """Q(z) = (sqrt(z)/2) / sinh(sqrt(z)/2) to ``terms`` coefficients.

    sinh(y)/y = sum y^(2k)/(2k+1)!, and y^2 = z/4.
    """
    sinh_over = PowerSeries1D([Fraction(1, 4**k * factorial(2 * k + 1)) for k in range(terms)])
    return sinh_over.inverse()


@dataclass(frozen=True)
class GenusExpansion:
    components: tuple[GradedPolynomial, ...]

    def __getitem__(self, j: int) -> GradedPolynomial:
        return self.components[j]

    def __len__(self) -> int:
        return len(self.components)

    def total(self) -> GradedPolynomial:
        out = GradedPolynomial.zero(self.components[0].scheme)
        for c in self.components:
            out = out + c
        return out


# Newton's identities ---------------------------------------------------------

def power_sums_in_elementary(n: int, scheme: GeneratorScheme = PONTRYAGIN) -> list[GradedPolynomial]:
    """[s_1, ..., s_n] written in the generators e_i of ``scheme``.

    s_k = sum_{i<k} (-1)^(i-1) e_i s_(k-i) + (-1)^(k-1) k e_k
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    e = [None] + [GradedPolynomial.generator(scheme, i) for i in range(1, n + 1)]
    s: list[GradedPolynomial] = [None]
    for k in range(1, n + 1):
        acc = e[k].scale((-1) ** (k - 1) * k)
        for i in range(1, k):
            acc = acc + e[i].mul(s[k - i]).scale((-1) ** (i - 1))
        s.append(acc)
    return s[1:]


def elementary_in_power_sums(n: int, scheme: GeneratorScheme = PONTRYAGIN) -> list[GradedPolynomial]:
    """[e_1, ..., e_n] written in the generators s_i of ``scheme``.

    k e_k = sum_{i=1..k} (-1)^(i-1) e_(k-i) s_i
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    s = [None] + [GradedPolynomial.generator(scheme, i) for i in range(1, n + 1)]
    e: list[GradedPolynomial] = [GradedPolynomial.constant(scheme, 1)]
    for k in range(1, n + 1):
        acc = GradedPolynomial.zero(scheme)
        for i in range(1, k + 1):
            acc = acc + e[k - i].mul(s[i]).scale((-1) ** (i - 1))
        e.append(acc.scale(Fraction(1, k)))
    return e[1:]


def newton_convert(elementary: Sequence[GradedPolynomial] | None, direction: str, n: int,
                   scheme: GeneratorScheme = PONTRYAGIN) -> list[GradedPolynomial]:
    """Convert between elementary symmetric functions and power sums.

    ``direction="e_to_s"`` returns s_1..s_n in terms of e-generators;
    ``direction="s_to_e"`` returns e_1..e_n in terms of s-generators.  If
    ``elementary`` is given, its entries are substituted for the input
    generators, so converting concrete expressions is one call.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if direction == "e_to_s":
        formal = power_sums_in_elementary(n, scheme)
    elif direction == "s_to_e":
        formal = elementary_in_power_sums(n, scheme)
    else:
        raise ValueError("direction must be 'e_to_s' or 's_to_e'")
    if elementary is None:
        return formal
    values = list(elementary)
    if len(values) < n:
        raise ValueError(f"need {n} input expressions, got {len(values)}")
    target = values[0].scheme
    images = {(0, i + 1): values[i] for i in range(n)}
    return [f.substitute(images, target) for f in formal]


# Multiplicative sequences ---------------------------------------------------

def multiplicative_sequence(Q: PowerSeries1D, max_j: int, scheme: GeneratorScheme = PONTRYAGIN) -> GenusExpansion:
    """K_0..K_max_j for the characteristic series Q.

    prod_i Q(y_i) = exp(sum_i log Q(y_i)) = exp(sum_k c_k s_k(y)), where
    log Q = sum c_k z^k and s_k is the k-th power sum rewritten in the
    elementary functions p_j = e_j(y).
    """
    if Q[0] != 1:
        raise ValueError("characteristic series must have constant term 1")
    if max_j < 0:
        raise ValueError("max_j must be non-negative")
    one = GradedPolynomial.constant(scheme, 1)
    if max_j == 0:
        return GenusExpansion((one,))
    padded = PowerSeries1D([Q[k] for k in range(max_j + 1)])
    log_q = padded.log()
    s = power_sums_in_elementary(max_j, scheme)
    step = scheme.degree((0, 1))
    top = step * max_j
    exponent = GradedPolynomial.zero(scheme)
    for k in range(1, max_j + 1):
        exponent = exponent + s[k - 1].scale(log_q[k])
    total = exp_nilpotent(exponent, top)
    return GenusExpansion(tuple(total.component(step * j) for j in range(max_j + 1)))


def pontrjagin_character(max_degree: int, rank=0, scheme: GeneratorScheme = PONTRYAGIN) -> GradedPolynomial:
    """rank + sum_k (2/(2k)!) s_k(p) through ``max_degree``."""
    out = GradedPolynomial.constant(scheme, Fraction(rank))
    n = max_degree // 4
    if n >= 1:
        for k, s_k in enumerate(power_sums_in_elementary(n, scheme), start=1):
            out = out + s_k.scale(Fraction(2, factorial(2 * k)))
    return out


def a_hat(max_degree: int, scheme: GeneratorScheme = PONTRYAGIN) -> GradedPolynomial:
    n = max(max_degree, 0) // 4
    return multiplicative_sequence(a_hat_series(n + 1), n, scheme).total()


def a_hat_inverse(max_degree: int, scheme: GeneratorScheme = PONTRYAGIN) -> GradedPolynomial:
    return invert_unit(a_hat(max_degree, scheme), max_degree)


class MissingPairing(KeyError):
    pass


def evaluate_genus(genus: GradedPolynomial, total_p: GradedPolynomial, top_degree: int,
                   pairing: Mapping[str, Fraction]) -> Fraction:
    """Substitute a manifold's Pontrjagin classes and pair with [M].

    ``total_p`` is 1 + p_1 + p_2 + ... written in the manifold's own
    cohomology generators; its degree-4j part is substituted for p_j.  The
    pairing maps rendered top-degree monomials (``"x^2"``) to rationals.
    """
    if total_p.constant_term() != 1:
        raise ValueError("total Pontrjagin class must have constant term 1")
    target = total_p.scheme
    images = lambda key: total_p.component(genus.scheme.degree(key))
    value = genus.substitute(images, target, top_degree).component(top_degree)
    result = Fraction(0)
    for mono, c in value.sorted_terms():
        name = value.render_monomial(mono)
        if name not in pairing:
            raise MissingPairing(f"no pairing value for top-degree monomial {name}")
        result += c * Fraction(pairing[name])
    return result


# Thom / genus identity ----------------------------------------------------

def _root_poly(j: int, series: Sequence[Fraction], scheme: GeneratorScheme, max_degree: int) -> GradedPolynomial:
    """sum_k series[k] * x_j^k truncated at ``max_degree``."""
    deg = scheme.degree((0, j))
    return GradedPolynomial(
        scheme, {((0, j),) * k: c for k, c in enumerate(series) if k * deg <= max_degree}
    )


def required_root_pairs(max_degree: int) -> int:
    return -(-max_degree // 4)


def thom_side(num_root_pairs: int, max_degree: int) -> GradedPolynomial:
    """prod_j (1 - e^x_j)(1 - e^-x_j) / (-x_j^2), expanded from exponentials."""
    n = max_degree // 2 + 3
    exp_pos = [Fraction(1, factorial(k)) for k in range(n)]
    exp_neg = [Fraction((-1) ** k, factorial(k)) for k in range(n)]
    out = GradedPolynomial.constant(CHERN_ROOTS, 1)
    for j in range(1, num_root_pairs + 1):
        one = GradedPolynomial.constant(CHERN_ROOTS, 1)
        a = one - _root_poly(j, exp_pos, CHERN_ROOTS, max_degree + 4)
        b = one - _root_poly(j, exp_neg, CHERN_ROOTS, max_degree + 4)
        num = a.mul(b, max_degree + 4)
        # divide by -x_j^2 monomial-wise; every term carries x_j^2
        quotient = {}
        for mono, c in num.terms.items():
            power = mono.count((0, j))
            if power < 2:
                raise ArithmeticError("numerator not divisible by x^2")
            rest = tuple(k for k in mono if k != (0, j)) + ((0, j),) * (power - 2)
            quotient[rest] = -c
        out = out.mul(GradedPolynomial(CHERN_ROOTS, quotient), max_degree)
    return out


def sinh_side(roots: Sequence[int], max_degree: int) -> GradedPolynomial:
    """prod over ``roots`` of sinh(x_j/2)/(x_j/2) = sum_k (x_j/2)^(2k)/(2k+1)!.

    ``roots`` lists Chern-root indices and may repeat an index.
    """
    n = max_degree // 2 + 1
    series = [Fraction(1, 2**k * factorial(k + 1)) if k % 2 == 0 else Fraction(0) for k in range(n)]
    out = GradedPolynomial.constant(CHERN_ROOTS, 1)
    for j in roots:
        out = out.mul(_root_poly(j, series, CHERN_ROOTS, max_degree), max_degree)
    return out


def doubled_roots(num_root_pairs: int) -> list[int]:
    """Root list x_1, x_1, x_2, x_2, ...: the n/2 roots that the sinh product
    runs over when the (1 - e^x)(1 - e^-x) product runs over n/4 of them."""
    return [j for j in range(1, num_root_pairs + 1) for _ in range(2)]


def pontryagin_from_roots(roots: Sequence[int], j: int) -> GradedPolynomial:
    """p_j = e_j(x_r^2 : r in roots) in the Chern-root scheme."""
    from itertools import combinations

    out = GradedPolynomial.zero(CHERN_ROOTS)
    for combo in combinations(range(len(roots)), j):
        mono = tuple(k for i in combo for k in ((0, roots[i]), (0, roots[i])))
        out = out + GradedPolynomial(CHERN_ROOTS, {mono: 1})
    return out


def verify_thom_genus_identity(num_root_pairs: int, max_degree: int) -> bool:
    """Check the fiber-integrated Ph of the spinor difference against 1/A-hat.

    The left side is prod_{j<=m} (1 - e^x_j)(1 - e^-x_j) / (-x_j^2) over m
    root pairs.  Since (1 - e^x)(1 - e^-x) = -4 sinh(x/2)^2, it equals the
    sinh product over the doubled root list x_1, x_1, ..., x_m, x_m, and that
    product is 1/A-hat of the bundle whose Pontrjagin roots are that list.
    """
    if num_root_pairs < 1:
        raise ValueError("need at least one root pair")
    if num_root_pairs < required_root_pairs(max_degree):
        raise ValueError(
            f"degree {max_degree} needs at least {required_root_pairs(max_degree)} root pairs "
            f"for the finite root model to be exact"
        )
    roots = doubled_roots(num_root_pairs)
    lhs = thom_side(num_root_pairs, max_degree)
    rhs = sinh_side(roots, max_degree)
    if lhs != rhs:
        return False
    inverse = a_hat_inverse(max_degree)
    images = lambda key: pontryagin_from_roots(roots, key[1])
    return inverse.substitute(images, CHERN_ROOTS, max_degree) == rhs


def literal_same_index_form(num_root_pairs: int, max_degree: int) -> tuple[GradedPolynomial, GradedPolynomial]:
    """Both sides when the two products share one index range.

    Returned for inspection: the left side is the square of the right side,
    so the same-range reading is not an identity.
    """
    roots = list(range(1, num_root_pairs + 1))
    return thom_side(num_root_pairs, max_degree), sinh_side(roots, max_degree)
