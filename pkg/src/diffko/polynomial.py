"""Sparse graded polynomials with exact rational or mod-2 coefficients.

A polynomial lives in a :class:`GeneratorScheme`, which fixes the names and
degrees of its generators.  A scheme may hold several families (for example
``w`` and ``w'`` for two bundles), each of which is an indexed sequence of
generators.  Monomials are stored as sorted tuples of generator keys
``(family, index)`` with repetition, so ``p1^2*p3`` is ``((0,1),(0,1),(0,3))``.

Terms are ordered by degree and then lexicographically on the key tuple, which
makes the text rendering reproducible.  Rendering grammar::

    poly    := "0" | term (( " + " | " - " ) term)*
    term    := [coeff "*"] monomial | coeff
    coeff   := integer | integer "/" integer
    monomial:= factor ("*" factor)*
    factor  := name [ "^" integer ]
    name    := prefix index suffix          e.g.  p1, x3, w2'
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Union

Scalar = Union[int, Fraction]
Key = tuple[int, int]
Monomial = tuple[Key, ...]

RATIONAL = "Q"
MOD2 = "F2"


class SchemeMismatch(ValueError):
    pass


@dataclass(frozen=True)
class Family:
    """An indexed run of generators: ``prefix + index + suffix``.

    With ``constant=False`` generator ``i`` has degree ``step * i`` (like
    Pontrjagin classes, step 4); with ``constant=True`` every generator has
    degree ``step`` (like Chern roots, step 2).
    """

    prefix: str
    step: int
    constant: bool = False
    suffix: str = ""

    def __post_init__(self) -> None:
        if self.step <= 0:
            raise ValueError("generator degrees must be positive")

    def degree(self, index: int) -> int:
        if index < 1:
            raise ValueError(f"generator index must be >= 1, got {index}")
        return self.step if self.constant else self.step * index

    def name(self, index: int) -> str:
        return f"{self.prefix}{index}{self.suffix}"


@dataclass(frozen=True)
class GeneratorScheme:
    families: tuple[Family, ...]
    field: str = RATIONAL

    def __post_init__(self) -> None:
        if self.field not in (RATIONAL, MOD2):
            raise ValueError(f"unknown coefficient field {self.field!r}")
        if not self.families:
            raise ValueError("a scheme needs at least one family")

    @classmethod
    def single(cls, prefix: str, step: int, constant: bool = False, field: str = RATIONAL) -> "GeneratorScheme":
        return cls((Family(prefix, step, constant),), field)

    def degree(self, key: Key) -> int:
        return self.families[key[0]].degree(key[1])

    def monomial_degree(self, mono: Monomial) -> int:
        return sum(self.degree(k) for k in mono)

    def name(self, key: Key) -> str:
        return self.families[key[0]].name(key[1])

    @property
    def is_mod2(self) -> bool:
        return self.field == MOD2


# Schemes used throughout the package.
PONTRYAGIN = GeneratorScheme.single("p", 4)
CHERN_ROOTS = GeneratorScheme.single("x", 2, constant=True)
STIEFEL_WHITNEY = GeneratorScheme.single("w", 1, field=MOD2)


def _normalize(c: Scalar, mod2: bool) -> Scalar:
    if mod2:
        if isinstance(c, Fraction):
            if c.denominator % 2 == 0:
                raise ValueError(f"coefficient {c} has no image in Z/2")
            c = c.numerator * c.denominator
        return int(c) % 2
    if isinstance(c, Fraction):
        return c.numerator if c.denominator == 1 else c
    return c


def _mono_sort_key(scheme: GeneratorScheme, mono: Monomial):
    return (scheme.monomial_degree(mono), mono)


class GradedPolynomial:
    """Immutable sparse polynomial over Q or F2."""

    __slots__ = ("scheme", "_terms")

    def __init__(self, scheme: GeneratorScheme, terms: Mapping[Monomial, Scalar] | Iterable = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[Monomial, Scalar] = {}
        mod2 = scheme.is_mod2
        for mono, c in items:
            mono = tuple(sorted(tuple(k) for k in mono))
            for key in mono:
                scheme.degree(key)
            acc[mono] = acc.get(mono, 0) + c
        self.scheme = scheme
        self._terms = {}
        for mono, c in acc.items():
            c = _normalize(c, mod2)
            if c != 0:
                self._terms[mono] = c

    # construction helpers -------------------------------------------------
    @classmethod
    def zero(cls, scheme: GeneratorScheme) -> "GradedPolynomial":
        return cls(scheme)

    @classmethod
    def constant(cls, scheme: GeneratorScheme, c: Scalar) -> "GradedPolynomial":
        return cls(scheme, {(): c})

    @classmethod
    def generator(cls, scheme: GeneratorScheme, index: int, family: int = 0, power: int = 1) -> "GradedPolynomial":
        return cls(scheme, {((family, index),) * power: 1})

    # inspection -------------------------------------------------------------
    @property
    def terms(self) -> dict[Monomial, Scalar]:
        return dict(self._terms)

    def sorted_terms(self) -> list[tuple[Monomial, Scalar]]:
        return sorted(self._terms.items(), key=lambda kv: _mono_sort_key(self.scheme, kv[0]))

    def is_zero(self) -> bool:
        return not self._terms

    def coefficient(self, mono: Iterable[Key]) -> Scalar:
        return self._terms.get(tuple(sorted(mono)), 0)

    def constant_term(self) -> Scalar:
        return self._terms.get((), 0)

    def degree(self) -> int:
        """Top degree present (``-1`` for the zero polynomial)."""
        return max((self.scheme.monomial_degree(m) for m in self._terms), default=-1)

    def component(self, d: int) -> "GradedPolynomial":
        return GradedPolynomial(
            self.scheme, {m: c for m, c in self._terms.items() if self.scheme.monomial_degree(m) == d}
        )

    def components(self) -> dict[int, "GradedPolynomial"]:
        out: dict[int, dict] = {}
        for m, c in self._terms.items():
            out.setdefault(self.scheme.monomial_degree(m), {})[m] = c
        return {d: GradedPolynomial(self.scheme, t) for d, t in sorted(out.items())}

    def is_homogeneous(self, d: int) -> bool:
        return all(self.scheme.monomial_degree(m) == d for m in self._terms)

    def truncate(self, max_degree: int) -> "GradedPolynomial":
        return GradedPolynomial(
            self.scheme, {m: c for m, c in self._terms.items() if self.scheme.monomial_degree(m) <= max_degree}
        )

    # arithmetic -------------------------------------------------------------
    def _check(self, other: "GradedPolynomial") -> None:
        if self.scheme != other.scheme:
            raise SchemeMismatch("polynomials live in different generator schemes")

    def _coerce(self, other) -> "GradedPolynomial":
        if isinstance(other, GradedPolynomial):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return GradedPolynomial.constant(self.scheme, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return GradedPolynomial(self.scheme, list(self._terms.items()) + list(other._terms.items()))

    __radd__ = __add__

    def __neg__(self) -> "GradedPolynomial":
        return GradedPolynomial(self.scheme, {m: -c for m, c in self._terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c: Scalar) -> "GradedPolynomial":
        return GradedPolynomial(self.scheme, {m: c * v for m, v in self._terms.items()})

    def mul(self, other: "GradedPolynomial", max_degree: int | None = None) -> "GradedPolynomial":
        self._check(other)
        deg = self.scheme.monomial_degree
        acc: dict[Monomial, Scalar] = {}
        right = [(m, c, deg(m)) for m, c in other._terms.items()]
        for m1, c1 in self._terms.items():
            d1 = deg(m1)
            for m2, c2, d2 in right:
                if max_degree is not None and d1 + d2 > max_degree:
                    continue
                m = tuple(sorted(m1 + m2))
                acc[m] = acc.get(m, 0) + c1 * c2
        return GradedPolynomial(self.scheme, acc)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if isinstance(other, GradedPolynomial):
            return self.mul(other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def pow(self, n: int, max_degree: int | None = None) -> "GradedPolynomial":
        out = GradedPolynomial.constant(self.scheme, 1)
        for _ in range(n):
            out = out.mul(self, max_degree)
        return out

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = GradedPolynomial.constant(self.scheme, other)
        if not isinstance(other, GradedPolynomial):
            return NotImplemented
        return self.scheme == other.scheme and self._terms == other._terms

    def __hash__(self) -> int:
        return hash((self.scheme, frozenset(self._terms.items())))

    # substitution -----------------------------------------------------------
    def substitute(
        self,
        images: Mapping[Key, "GradedPolynomial"] | Callable[[Key], "GradedPolynomial"],
        target: GeneratorScheme,
        max_degree: int | None = None,
    ) -> "GradedPolynomial":
        """Ring map sending each generator key to a polynomial in ``target``."""
        lookup = images if callable(images) else images.__getitem__
        cache: dict[Key, GradedPolynomial] = {}
        out = GradedPolynomial.zero(target)
        for mono, c in self._terms.items():
            term = GradedPolynomial.constant(target, c)
            for key in mono:
                if key not in cache:
                    img = lookup(key)
                    if img.scheme != target:
                        raise SchemeMismatch("substitution image in the wrong scheme")
                    cache[key] = img
                term = term.mul(cache[key], max_degree)
                if term.is_zero():
                    break
            out = out + term
        return out

    # text -------------------------------------------------------------------
    def render_monomial(self, mono: Monomial) -> str:
        parts = []
        i = 0
        while i < len(mono):
            j = i
            while j < len(mono) and mono[j] == mono[i]:
                j += 1
            name = self.scheme.name(mono[i])
            parts.append(name if j - i == 1 else f"{name}^{j - i}")
            i = j
        return "*".join(parts)

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        out = []
        for idx, (mono, c) in enumerate(self.sorted_terms()):
            neg = c < 0
            mag = -c if neg else c
            body = self.render_monomial(mono)
            if not body:
                text = str(mag)
            elif mag == 1:
                text = body
            else:
                text = f"{mag}*{body}"
            if idx == 0:
                out.append(f"-{text}" if neg else text)
            else:
                out.append(f" - {text}" if neg else f" + {text}")
        return "".join(out)

    def __repr__(self) -> str:
        return f"GradedPolynomial({self})"


def poly_add(a: GradedPolynomial, b: GradedPolynomial) -> GradedPolynomial:
    a._check(b)
    return a + b


def poly_mul(a: GradedPolynomial, b: GradedPolynomial, max_degree: int) -> GradedPolynomial:
    if max_degree < 0:
        raise ValueError("max_degree must be non-negative")
    return a.mul(b, max_degree)


def invert_unit(a: GradedPolynomial, max_degree: int) -> GradedPolynomial:
    """Inverse of a unit via the geometric series on its nilpotent part.

    Writing ``a = c(1 + x)`` with ``x`` of positive degree, the inverse is
    ``c^-1 (1 - x + x^2 - ...)``; the series stops once powers of ``x`` pass
    ``max_degree``.
    """
    c = a.constant_term()
    if c == 0:
        raise ZeroDivisionError("constant term is zero, not a unit")
    inv_c = 1 if a.scheme.is_mod2 else Fraction(1, 1) / c
    x = (a.scale(inv_c) - 1).truncate(max_degree)
    result = GradedPolynomial.constant(a.scheme, 1)
    power = GradedPolynomial.constant(a.scheme, 1)
    sign = 1
    while True:
        power = power.mul(x, max_degree)
        if power.is_zero():
            break
        sign = -sign
        result = result + power.scale(sign)
    return result.scale(inv_c)


def exp_nilpotent(x: GradedPolynomial, max_degree: int) -> GradedPolynomial:
    """exp(x) truncated at ``max_degree``; ``x`` must have zero constant term."""
    if x.constant_term() != 0:
        raise ValueError("exp needs a nilpotent argument")
    x = x.truncate(max_degree)
    result = GradedPolynomial.constant(x.scheme, 1)
    power = GradedPolynomial.constant(x.scheme, 1)
    n = 0
    while True:
        n += 1
        power = power.mul(x, max_degree).scale(Fraction(1, n))
        if power.is_zero():
            return result
        result = result + power


# --- parsing ------------------------------------------------------------------

_TERM_RE = re.compile(r"([+-]?)([^+-]+)")
_FACTOR_RE = re.compile(r"^([A-Za-z]+)(\d+)('*)(?:\^(\d+))?$")
_COEFF_RE = re.compile(r"^\d+(?:/\d+)?$")


def parse_polynomial(text: str, scheme: GeneratorScheme) -> GradedPolynomial:
    """Inverse of the text rendering (whitespace is ignored)."""
    compact = "".join(text.split())
    if not compact:
        raise ValueError("empty polynomial")
    terms: dict[Monomial, Scalar] = {}
    pos = 0
    for m in _TERM_RE.finditer(compact):
        if m.start() != pos:
            raise ValueError(f"cannot parse polynomial {text!r}")
        pos = m.end()
        sign = -1 if m.group(1) == "-" else 1
        coeff: Scalar = 1
        mono: list[Key] = []
        for part in m.group(2).split("*"):
            if _COEFF_RE.match(part):
                coeff = coeff * Fraction(part)
                continue
            f = _FACTOR_RE.match(part)
            if not f:
                raise ValueError(f"cannot parse factor {part!r}")
            key = _lookup_name(scheme, f.group(1), int(f.group(2)), f.group(3))
            mono.extend([key] * int(f.group(4) or 1))
        key_t = tuple(sorted(mono))
        terms[key_t] = terms.get(key_t, 0) + sign * coeff
    if pos != len(compact):
        raise ValueError(f"cannot parse polynomial {text!r}")
    return GradedPolynomial(scheme, terms)


def _lookup_name(scheme: GeneratorScheme, prefix: str, index: int, suffix: str) -> Key:
    for fam_idx, fam in enumerate(scheme.families):
        if fam.prefix == prefix and fam.suffix == suffix:
            if index < 1:
                raise ValueError(f"generator index must be positive in {prefix}{index}{suffix}")
            return (fam_idx, index)
    raise ValueError(f"unknown generator {prefix}{index}{suffix}")
