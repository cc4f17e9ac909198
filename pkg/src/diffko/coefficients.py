"""Coefficient rings of KO and K, the maps c and r between them, and the
flat (U(1)) coefficient table.

Basis of pi_*(KO): beta^k, alpha*beta^k, eta*beta^k, eta^2*beta^k (k in Z),
with |eta| = 1, |alpha| = 4, |beta| = 8 in homotopy degree.  The free
families carry rational coefficients so that Adams operations can be
localized; construction reduces the eta families mod 2.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Mapping

from .abelian import GroupDescriptor

ONE, ALPHA, ETA, ETA2 = "1", "alpha", "eta", "eta2"
KINDS = (ONE, ALPHA, ETA, ETA2)
_KIND_DEGREE = {ONE: 0, ALPHA: 4, ETA: 1, ETA2: 2}
TORSION_KINDS = (ETA, ETA2)

BasisSymbol = tuple[str, int]


def _reduce(kind: str, c):
    c = Fraction(c)
    if kind in TORSION_KINDS:
        if c.denominator % 2 == 0:
            raise ValueError(f"coefficient {c} on a 2-torsion generator")
        return (c.numerator * c.denominator) % 2
    return c.numerator if c.denominator == 1 else c


class KOElement:
    """Element of pi_*(KO)[beta^-1], a finite sum over basis symbols."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[BasisSymbol, object] | Iterable = ()) -> None:
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[BasisSymbol, Fraction] = {}
        for (kind, k), c in items:
            if kind not in KINDS:
                raise ValueError(f"unknown basis kind {kind!r}")
            acc[(kind, int(k))] = acc.get((kind, int(k)), 0) + Fraction(c)
        self._terms = {}
        for sym, c in acc.items():
            c = _reduce(sym[0], c)
            if c != 0:
                self._terms[sym] = c

    @classmethod
    def basis(cls, kind: str, k: int = 0, c=1) -> "KOElement":
        return cls({(kind, k): c})

    @property
    def terms(self) -> dict[BasisSymbol, object]:
        return dict(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __add__(self, other: "KOElement") -> "KOElement":
        return KOElement(list(self._terms.items()) + list(other._terms.items()))

    def __neg__(self) -> "KOElement":
        return KOElement({s: -c for s, c in self._terms.items()})

    def __sub__(self, other: "KOElement") -> "KOElement":
        return self + (-other)

    def scale(self, c) -> "KOElement":
        return KOElement({s: Fraction(c) * v for s, v in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, KOElement):
            return ko_mul(self, other)
        return self.scale(other)

    __rmul__ = scale

    def __eq__(self, other) -> bool:
        return isinstance(other, KOElement) and self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def degrees(self) -> set[int]:
        return {basis_degree(s) for s in self._terms}

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        items = sorted(self._terms.items(), key=lambda kv: (basis_degree(kv[0]), KINDS.index(kv[0][0])))
        out = []
        for idx, (sym, c) in enumerate(items):
            body = symbol_name(sym)
            neg = c < 0
            mag = -c if neg else c
            text = body if mag == 1 and body != "1" else (str(mag) if body == "1" else f"{mag}*{body}")
            out.append(("-" if neg else "") + text if idx == 0 else (" - " if neg else " + ") + text)
        return "".join(out)

    __repr__ = __str__


def basis_degree(sym: BasisSymbol) -> int:
    """Homotopy degree of a basis symbol."""
    return _KIND_DEGREE[sym[0]] + 8 * sym[1]


def symbol_name(sym: BasisSymbol) -> str:
    kind, k = sym
    parts = {ONE: [], ALPHA: ["alpha"], ETA: ["eta"], ETA2: ["eta^2"]}[kind]
    if k == 1:
        parts.append("beta")
    elif k != 0:
        parts.append(f"beta^{k}")
    return "*".join(parts) if parts else "1"


_PRODUCTS = {
    (ONE, ONE): (ONE, 0, 1),
    (ONE, ALPHA): (ALPHA, 0, 1),
    (ONE, ETA): (ETA, 0, 1),
    (ONE, ETA2): (ETA2, 0, 1),
    (ALPHA, ALPHA): (ONE, 1, 4),   # alpha^2 = 4 beta
    (ALPHA, ETA): None,            # eta alpha = 0
    (ALPHA, ETA2): None,
    (ETA, ETA): (ETA2, 0, 1),
    (ETA, ETA2): None,             # eta^3 = 0
    (ETA2, ETA2): None,
}


def ko_mul(a: KOElement, b: KOElement) -> KOElement:
    """Product rewritten with 2eta = 0, eta^3 = 0, eta*alpha = 0, alpha^2 = 4beta."""
    acc = []
    for (k1, e1), c1 in a._terms.items():
        for (k2, e2), c2 in b._terms.items():
            key = (k1, k2) if (k1, k2) in _PRODUCTS else (k2, k1)
            rule = _PRODUCTS[key]
            if rule is None:
                continue
            kind, shift, factor = rule
            acc.append(((kind, e1 + e2 + shift), Fraction(c1) * Fraction(c2) * factor))
    return KOElement(acc)


_TERM = re.compile(r"^(?:(?P<coef>-?\d+(?:/\d+)?)\*?)?(?P<body>[a-z0-9^*\-]*)$")


def parse_ko(text: str) -> KOElement:
    """Parse sums like ``3*alpha*beta^2 + eta*beta^-1 - 2``."""
    text = text.replace(" ", "")
    if text in ("", "0"):
        return KOElement()
    text = re.sub(r"(?<=[^\^*])-", "+-", text)
    out = KOElement()
    for chunk in filter(None, text.split("+")):
        sign = 1
        if chunk.startswith("-") and not re.match(r"^-\d", chunk):
            sign, chunk = -1, chunk[1:]
        m = _TERM.match(chunk)
        if not m:
            raise ValueError(f"cannot parse KO term {chunk!r}")
        coef = Fraction(m.group("coef")) if m.group("coef") else Fraction(1)
        kind, k = ONE, 0
        eta_power = 0
        for factor in filter(None, m.group("body").split("*")):
            name, _, power = factor.partition("^")
            n = int(power) if power else 1
            if name == "beta":
                k += n
            elif name == "alpha":
                if kind != ONE or n != 1:
                    raise ValueError(f"unsupported alpha factor in {chunk!r}")
                kind = ALPHA
            elif name == "eta":
                eta_power += n
            elif name.isdigit() and not power:
                coef *= int(name)
            else:
                raise ValueError(f"unknown factor {factor!r}")
        term = KOElement.basis(kind, k, sign * coef)
        if eta_power:
            term = ko_mul(term, KOElement.basis(ETA if eta_power == 1 else ETA2) if eta_power <= 2 else KOElement())
        out = out + term
    return out


# --- groups ------------------------------------------------------------------

def ko_coefficient_group(i: int) -> GroupDescriptor:
    """KO^i(pt) = pi_{-i}(KO), in cohomological degree i.

    So i = -10 gives pi_10 = Z/2 on eta^2*beta.
    """
    n = -i
    k, rem = divmod(n, 8)
    table = {0: (ONE, 1, ()), 4: (ALPHA, 1, ()), 1: (ETA, 0, (2,)), 2: (ETA2, 0, (2,))}
    if rem not in table:
        return GroupDescriptor()
    kind, free, tors = table[rem]
    return GroupDescriptor(free, tors, 0, (symbol_name((kind, k)),))


def flat_coefficient_group(i: int) -> GroupDescriptor:
    """Flat KO coefficients at index i: U(1) at 8k-1, Z/2 at 8k+1 and 8k+2,
    U(1) + Z/2 at 8k+3, zero otherwise."""
    rem = i % 8
    k = (i - rem) // 8
    if rem == 7:
        return GroupDescriptor(0, (), 1, (f"U(1){{{symbol_name((ONE, k + 1))}}}",))
    if rem == 1:
        return GroupDescriptor(0, (2,), 0, (symbol_name((ETA, k)),))
    if rem == 2:
        return GroupDescriptor(0, (2,), 0, (symbol_name((ETA2, k)),))
    if rem == 3:
        return GroupDescriptor(0, (2,), 1, (f"U(1){{{symbol_name((ALPHA, k))}}}", "Z/2"))
    return GroupDescriptor()


def coefficient_table(lo: int = 0, hi: int = 7) -> list[dict]:
    """Rows of the mod-8 table: homotopy degree, KO group, K group."""
    rows = []
    for n in range(lo, hi + 1):
        rows.append({
            "degree": n,
            "KO": str(ko_coefficient_group(-n)),
            "generator": ", ".join(ko_coefficient_group(-n).labels) or "-",
            "K": "Z" if n % 2 == 0 else "0",
        })
    return rows


# --- complex coefficients -------------------------------------------------------

class KElement:
    """Laurent polynomial in the Bott class u (homotopy degree 2)."""

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[int, int] | Iterable = ()) -> None:
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[int, Fraction] = {}
        for i, c in items:
            acc[int(i)] = acc.get(int(i), 0) + Fraction(c)
        self._terms = {i: (c.numerator if c.denominator == 1 else c) for i, c in acc.items() if c != 0}

    @classmethod
    def u(cls, i: int, c=1) -> "KElement":
        return cls({i: c})

    @property
    def terms(self) -> dict[int, object]:
        return dict(self._terms)

    def __add__(self, other: "KElement") -> "KElement":
        return KElement(list(self._terms.items()) + list(other._terms.items()))

    def scale(self, c) -> "KElement":
        return KElement({i: Fraction(c) * v for i, v in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, KElement):
            return KElement([(i + j, a * b) for i, a in self._terms.items() for j, b in other._terms.items()])
        return self.scale(other)

    def conjugate(self) -> "KElement":
        """tau: u -> -u."""
        return KElement({i: (-1) ** (i % 2) * c for i, c in self._terms.items()})

    def is_zero(self) -> bool:
        return not self._terms

    def __eq__(self, other) -> bool:
        return isinstance(other, KElement) and self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        out = []
        for idx, (i, c) in enumerate(sorted(self._terms.items())):
            body = "1" if i == 0 else ("u" if i == 1 else f"u^{i}")
            neg = c < 0
            mag = -c if neg else c
            text = body if (mag == 1 and body != "1") else (str(mag) if body == "1" else f"{mag}*{body}")
            out.append(("-" if neg else "") + text if idx == 0 else (" - " if neg else " + ") + text)
        return "".join(out)

    __repr__ = __str__


def complexify(a: KOElement) -> KElement:
    """c(eta) = 0, c(alpha) = 2u^2, c(beta) = u^4."""
    acc = []
    for (kind, k), c in a.terms.items():
        if kind == ONE:
            acc.append((4 * k, c))
        elif kind == ALPHA:
            acc.append((4 * k + 2, 2 * Fraction(c)))
    return KElement(acc)


def realify_basis(i: int) -> KOElement:
    """r(u^i) by i mod 4: 2beta^(i/4), eta^2 beta^((i-1)/4), alpha beta^((i-2)/4), 0."""
    q, rem = divmod(i, 4)
    if rem == 0:
        return KOElement.basis(ONE, q, 2)
    if rem == 1:
        return KOElement.basis(ETA2, q)
    if rem == 2:
        return KOElement.basis(ALPHA, q)
    return KOElement()


def realify(a: KElement) -> KOElement:
    out = KOElement()
    for i, c in a.terms.items():
        out = out + realify_basis(i).scale(c)
    return out


# Table of the forgetful maps m_O: KO -> K and f_U: K -> KO on
# the generators 1, u, u^2, u^3.
F_U_TABLE = {0: KOElement.basis(ONE, 0, 2), 1: KOElement.basis(ETA2), 2: KOElement.basis(ALPHA), 3: KOElement()}


def all_basis(range_k: int) -> list[KOElement]:
    return [KOElement.basis(kind, k) for k in range(-range_k, range_k + 1) for kind in KINDS]


def check_bott_identities(range_k: int) -> bool:
    """r(c(x)) = 2x on KO basis elements and c(r(u^i)) = u^i + tau(u^i)."""
    if range_k < 1:
        raise ValueError("range_k must be >= 1")
    for x in all_basis(range_k):
        if realify(complexify(x)) != x.scale(2):
            return False
    for i in range(-4 * range_k, 4 * range_k + 1):
        u = KElement.u(i)
        if complexify(realify(u)) != u + u.conjugate():
            return False
    return True


# --- Adams operations on coefficients ---------------------------------------

def adams_basis(k: int, sym: BasisSymbol) -> KOElement:
    """psi^k on one basis symbol: eta -> k eta, alpha -> k^2 alpha, beta -> k^4 beta.

    Negative beta powers need k inverted.  For the free families this gives
    rational coefficients; for the eta families k must be odd (when k is
    even the localized image of eta is zero, as 2 is inverted).
    """
    kind, e = sym
    base = {ONE: 0, ALPHA: 2, ETA: 1, ETA2: 2}[kind]
    exponent = base + 4 * e
    if kind in TORSION_KINDS:
        if k % 2 == 0:
            return KOElement()
        return KOElement.basis(kind, e)
    return KOElement.basis(kind, e, Fraction(k) ** exponent)


def adams_coefficient(k: int, a: KOElement) -> KOElement:
    if k < 1:
        raise ValueError("Adams operations need k >= 1")
    out = KOElement()
    for sym, c in a.terms.items():
        out = out + adams_basis(k, sym).scale(c)
    return out
