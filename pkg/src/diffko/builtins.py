"""Brute-force construction of the built-in presentations.

Steenrod squares are obtained from the total square on a ring generator
(Sq(a) = a + a^2, Sq(x) = x + x^2 for the degree-2 class of CP^n) and the
Cartan formula: Sq(g^j) = Sq(g)^j, expanded as a polynomial over F2 and
truncated at the top degree.  No binomial coefficient shortcut is used, so
the tables are an independent check of the closed formulas.
"""

from __future__ import annotations

from .presentation import SCHEMA_VERSION


def _f2_poly_power(base: dict[int, int], j: int, top: int) -> dict[int, int]:
    """(sum base[e] g^e)^j over F2, keeping powers <= top."""
    out = {0: 1}
    for _ in range(j):
        nxt: dict[int, int] = {}
        for e1, c1 in out.items():
            for e2, c2 in base.items():
                e = e1 + e2
                if e <= top:
                    nxt[e] = (nxt.get(e, 0) + c1 * c2) % 2
        out = {e: c for e, c in nxt.items() if c}
    return out


def _monogenic(name: str, gen: str, gen_deg: int, top_power: int, integral: dict, rho2: dict,
               bockstein: dict) -> dict:
    """Presentation with mod-2 cohomology F2[g]/(g^(top_power+1))."""
    dim = gen_deg * top_power
    label = lambda j: "1" if j == 0 else (gen if j == 1 else f"{gen}^{j}")
    mod2 = {str(j * gen_deg): [label(j)] for j in range(top_power + 1)}
    sq: dict[str, dict[str, list]] = {}
    for j in range(top_power + 1):
        total = _f2_poly_power({1: 1, 2: 1}, j, top_power)
        d = j * gen_deg
        for i in range(1, dim - d + 1):
            if d + i > dim or str(d + i) not in mod2:
                continue
            if i % gen_deg:
                value = 0
            else:
                value = total.get(j + i // gen_deg, 0)
            sq.setdefault(str(i), {})[str(d)] = [[value]]
    cups = []
    for j1 in range(1, top_power + 1):
        for j2 in range(j1, top_power + 1):
            prod = [label(j1 + j2)] if j1 + j2 <= top_power else []
            cups.append({"left": label(j1), "right": label(j2), "product": prod})
    return {
        "schema_version": SCHEMA_VERSION,
        "name": name,
        "dimension": dim,
        "integral": integral,
        "mod2": mod2,
        "rho2": rho2,
        "bockstein": bockstein,
        "sq": dict(sorted(sq.items(), key=lambda kv: int(kv[0]))),
        "cup_mod2": cups,
        "betti": {d: g["free"] for d, g in integral.items()},
        "fundamental_class": {"mod2": label(top_power)},
    }


def point() -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "name": "point",
        "dimension": 0,
        "integral": {"0": {"free": 1, "torsion": [], "labels": ["1"]}},
        "mod2": {"0": ["1"]},
        "rho2": {"0": [[1]]},
        "bockstein": {},
        "sq": {},
        "cup_mod2": [],
        "betti": {"0": 1},
        "fundamental_class": {"mod2": "1"},
    }


def sphere(n: int) -> dict:
    if n < 1:
        raise ValueError("sphere dimension must be >= 1")
    integral = {"0": {"free": 1, "torsion": [], "labels": ["1"]}, str(n): {"free": 1, "torsion": [], "labels": ["u"]}}
    sq = {str(n): {"0": [[0]]}}
    return {
        "schema_version": SCHEMA_VERSION,
        "name": f"S{n}",
        "dimension": n,
        "integral": integral,
        "mod2": {"0": ["1"], str(n): ["u"]},
        "rho2": {"0": [[1]], str(n): [[1]]},
        "bockstein": {"0": [[0]]} if n == 1 else {},
        "sq": sq,
        "cup_mod2": [{"left": "u", "right": "u", "product": []}],
        "betti": {"0": 1, str(n): 1},
        "fundamental_class": {"mod2": "u"},
    }


def real_projective(n: int) -> dict:
    """RP^n: H^(2i) = Z/2 for 0 < 2i <= n, H^n = Z for odd n."""
    if n < 1:
        raise ValueError("RP^n needs n >= 1")
    integral = {"0": {"free": 1, "torsion": [], "labels": ["1"]}}
    rho2 = {"0": [[1]]}
    for d in range(2, n + 1, 2):
        integral[str(d)] = {"free": 0, "torsion": [2], "labels": [f"e{d}"]}
        rho2[str(d)] = [[1]]
    if n % 2:
        integral[str(n)] = {"free": 1, "torsion": [], "labels": [f"o{n}"]}
        rho2[str(n)] = [[1]]
    bockstein = {}
    for d in range(0, n + 1):
        nxt = integral.get(str(d + 1))
        if nxt is None:
            continue
        bockstein[str(d)] = [[1 if (d % 2 == 1 and nxt["torsion"]) else 0]]
    doc = _monogenic(f"RP{n}", "a", 1, n, integral, rho2, bockstein)
    return doc


def complex_projective(n: int) -> dict:
    if n < 1:
        raise ValueError("CP^n needs n >= 1")
    label = lambda j: "1" if j == 0 else ("x" if j == 1 else f"x^{j}")
    integral = {str(2 * j): {"free": 1, "torsion": [], "labels": [label(j)]} for j in range(n + 1)}
    rho2 = {str(2 * j): [[1]] for j in range(n + 1)}
    return _monogenic(f"CP{n}", "x", 2, n, integral, rho2, {})


def all_builtin_documents() -> dict[str, dict]:
    docs = {"point": point()}
    for n in range(1, 17):
        docs[f"S{n}"] = sphere(n)
    for n in range(1, 9):
        docs[f"RP{n}"] = real_projective(n)
    for n in range(1, 5):
        docs[f"CP{n}"] = complex_projective(n)
    return docs
