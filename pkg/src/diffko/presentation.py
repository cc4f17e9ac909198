"""Finite presentations of a space's cohomology.

A presentation records, degree by degree, the integral group H^d(X;Z) (free
generators first, then cyclic torsion generators), a basis of H^d(X;Z/2),
and the structure maps the engine consumes.  Matrices are row lists: the
matrix of a map A -> B has one row per coordinate of B and one column per
coordinate of A.  Degrees absent from ``integral``/``mod2`` are zero groups.

Maps whose source or target group is zero are zero and need no data.  Any
other map without data is *unsupported*, never silently zero.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from typing import Any, Mapping, Sequence

import jsonschema

from .abelian import GroupDescriptor, Matrix, zeros
from .errors import InvariantViolation, PresentationError, UnsupportedOperation

SCHEMA_VERSION = 1


@lru_cache(maxsize=1)
def schema() -> dict:
    text = resources.files("diffko.data").joinpath("presentation.schema.json").read_text()
    return json.loads(text)


@dataclass(frozen=True)
class OddPrimaryDatum:
    label: str
    prime: int
    divisibility: int
    reduced_powers: Mapping[int, tuple[bool, bool]]  # j -> (P^j nonzero, beta P^j zero)


class CohomologyPresentation:
    """Validated, read-only view of a presentation document."""

    def __init__(self, doc: Mapping[str, Any]) -> None:
        try:
            jsonschema.validate(doc, schema())
        except jsonschema.ValidationError as exc:
            where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
            raise PresentationError(f"schema violation at {where}: {exc.message}") from None
        self._doc = json.loads(json.dumps(doc))
        self.name: str = doc["name"]
        self.dimension: int | None = doc.get("dimension")
        self._integral: dict[int, GroupDescriptor] = {}
        self._int_orders: dict[int, list[int]] = {}
        self._int_labels: dict[int, list[str]] = {}
        for d, g in doc["integral"].items():
            d = int(d)
            labels = g.get("labels") or [f"z{d}_{i}" for i in range(g["free"] + len(g["torsion"]))]
            if len(labels) != g["free"] + len(g["torsion"]):
                raise PresentationError(f"degree {d}: {len(labels)} integral labels for "
                                        f"{g['free'] + len(g['torsion'])} generators")
            self._integral[d] = GroupDescriptor(g["free"], tuple(g["torsion"]), 0, tuple(labels))
            # coordinate order: free generators, then torsion in document order
            self._int_orders[d] = [0] * g["free"] + list(g["torsion"])
            self._int_labels[d] = list(labels)
        self._mod2: dict[int, list[str]] = {int(d): list(b) for d, b in doc["mod2"].items() if b}
        self._label_index: dict[str, tuple[int, int]] = {}
        for d, basis in self._mod2.items():
            for i, lab in enumerate(basis):
                if lab in self._label_index:
                    raise PresentationError(f"mod-2 label {lab!r} used twice")
                self._label_index[lab] = (d, i)
        self._int_label_index: dict[str, tuple[int, int]] = {}
        for d, labels in self._int_labels.items():
            for i, lab in enumerate(labels):
                if lab in self._int_label_index:
                    raise PresentationError(f"integral label {lab!r} used twice")
                self._int_label_index[lab] = (d, i)
        self._rho2 = {int(d): m for d, m in doc.get("rho2", {}).items()}
        self._beta2 = {int(d): m for d, m in doc.get("bockstein", {}).items()}
        self._sq = {int(i): {int(d): m for d, m in t.items()} for i, t in doc.get("sq", {}).items()}
        self._cup2: dict[tuple[str, str], list[str]] = {}
        for e in doc.get("cup_mod2", []):
            for lab in (e["left"], e["right"], *e["product"]):
                if lab not in self._label_index:
                    raise PresentationError(f"cup table mentions unknown mod-2 class {lab!r}")
            self._cup2[(e["left"], e["right"])] = list(e["product"])
            self._cup2.setdefault((e["right"], e["left"]), list(e["product"]))
        self._cupz: dict[tuple[str, str], dict[str, int]] = {}
        for e in doc.get("cup_integral", []):
            self._cupz[(e["left"], e["right"])] = dict(e["product"])
        fc = doc.get("fundamental_class")
        self.fundamental_mod2: str | None = fc["mod2"] if fc else None
        self.odd_primary: list[OddPrimaryDatum] = []
        for e in doc.get("odd_primary", []):
            if e["class"] not in self._int_label_index:
                raise PresentationError(f"odd-primary datum names unknown class {e['class']!r}")
            self.odd_primary.append(OddPrimaryDatum(
                e["class"], e["prime"], e["divisibility"],
                {int(j): (v["nonzero"], v["bockstein_zero"]) for j, v in e["reduced_powers"].items()},
            ))
        self._validate()

    # --- basic data ---------------------------------------------------------
    def to_document(self) -> dict:
        return json.loads(json.dumps(self._doc))

    def degrees(self) -> list[int]:
        return sorted(set(self._integral) | set(self._mod2))

    @property
    def top_degree(self) -> int:
        if self.dimension is not None:
            return self.dimension
        return max(self.degrees(), default=0)

    def integral(self, d: int) -> GroupDescriptor:
        return self._integral.get(d, GroupDescriptor())

    def integral_orders(self, d: int) -> list[int]:
        """Coordinate orders of H^d(X;Z): 0 for free coordinates."""
        return list(self._int_orders.get(d, []))

    def integral_labels(self, d: int) -> list[str]:
        return list(self._int_labels.get(d, []))

    def torsion_coordinates(self, d: int) -> list[int]:
        return [i for i, o in enumerate(self.integral_orders(d)) if o]

    def betti(self, d: int) -> int:
        return self.integral(d).free

    def mod2_basis(self, d: int) -> list[str]:
        return list(self._mod2.get(d, []))

    def mod2_dim(self, d: int) -> int:
        return len(self._mod2.get(d, []))

    def mod2_label(self, label: str) -> tuple[int, int]:
        if label not in self._label_index:
            raise KeyError(f"no mod-2 class named {label!r} in {self.name}")
        return self._label_index[label]

    def integral_label(self, label: str) -> tuple[int, int]:
        if label not in self._int_label_index:
            raise KeyError(f"no integral class named {label!r} in {self.name}")
        return self._int_label_index[label]

    @property
    def is_torsion_free(self) -> bool:
        return all(not g.torsion for g in self._integral.values())

    # --- structure maps ------------------------------------------------------
    def _lookup(self, table: Mapping[int, Matrix], d: int, nrows: int, ncols: int, what: str) -> Matrix:
        if nrows == 0 or ncols == 0:
            return zeros(nrows, ncols)
        if d not in table:
            raise UnsupportedOperation(f"{self.name}: no {what} data in degree {d}")
        return [list(r) for r in table[d]]

    def sq_matrix(self, i: int, d: int) -> Matrix:
        """Matrix of Sq^i : H^d(Z/2) -> H^(d+i)(Z/2)."""
        n_src, n_tgt = self.mod2_dim(d), self.mod2_dim(d + i)
        if i == 0:
            return [[int(r == c) for c in range(n_src)] for r in range(n_src)]
        if i < 0:
            raise ValueError("negative Steenrod square")
        if i > d:
            return zeros(n_tgt, n_src)
        return self._lookup(self._sq.get(i, {}), d, n_tgt, n_src, f"Sq^{i}")

    def has_sq(self, i: int, d: int) -> bool:
        try:
            self.sq_matrix(i, d)
            return True
        except UnsupportedOperation:
            return False

    def rho2_matrix(self, d: int) -> Matrix:
        """Reduction mod 2, H^d(Z) -> H^d(Z/2)."""
        return self._lookup(self._rho2, d, self.mod2_dim(d), len(self.integral_orders(d)), "rho2")

    def beta2_matrix(self, d: int) -> Matrix:
        """Bockstein H^d(Z/2) -> H^(d+1)(Z)."""
        return self._lookup(self._beta2, d, len(self.integral_orders(d + 1)), self.mod2_dim(d), "bockstein")

    def cup_mod2(self, x: str, y: str) -> list[str]:
        if self.mod2_label(x)[0] == 0 and self.mod2_basis(0) and x == self.mod2_basis(0)[0]:
            return [y]
        if self.mod2_label(y)[0] == 0 and self.mod2_basis(0) and y == self.mod2_basis(0)[0]:
            return [x]
        dx, dy = self.mod2_label(x)[0], self.mod2_label(y)[0]
        if self.mod2_dim(dx + dy) == 0:
            return []
        if (x, y) not in self._cup2:
            raise UnsupportedOperation(f"{self.name}: cup product {x}*{y} not tabulated")
        return list(self._cup2[(x, y)])

    def cup_mod2_vectors(self, dx: int, x: Sequence[int], dy: int, y: Sequence[int]) -> list[int]:
        out = [0] * self.mod2_dim(dx + dy)
        bx, by = self.mod2_basis(dx), self.mod2_basis(dy)
        for i, a in enumerate(x):
            if not a % 2:
                continue
            for j, b in enumerate(y):
                if not b % 2:
                    continue
                for lab in self.cup_mod2(bx[i], by[j]):
                    out[self.mod2_label(lab)[1]] ^= 1
        return out

    # --- validation ------------------------------------------------------------
    def _check_shape(self, m: Matrix, nrows: int, ncols: int, what: str) -> None:
        if len(m) != nrows or any(len(r) != ncols for r in m):
            raise InvariantViolation(f"{self.name}: {what} has shape mismatch (expected {nrows}x{ncols})")

    def _validate(self) -> None:
        for d, m in self._rho2.items():
            self._check_shape(m, self.mod2_dim(d), len(self.integral_orders(d)), f"rho2 in degree {d}")
            for c, o in enumerate(self.integral_orders(d)):
                if o and o % 2 and any(r[c] % 2 for r in m):
                    raise InvariantViolation(
                        f"{self.name}: rho2 in degree {d} is nonzero on an odd-order class")
        for d, m in self._beta2.items():
            self._check_shape(m, len(self.integral_orders(d + 1)), self.mod2_dim(d), f"bockstein in degree {d}")
            orders = self.integral_orders(d + 1)
            for c in range(self.mod2_dim(d)):
                for r, o in enumerate(orders):
                    if (o == 0 and m[r][c] != 0) or (o and (2 * m[r][c]) % o):
                        raise InvariantViolation(
                            f"{self.name}: bockstein in degree {d} does not land in 2-torsion")
        for i, table in self._sq.items():
            for d, m in table.items():
                self._check_shape(m, self.mod2_dim(d + i), self.mod2_dim(d), f"Sq^{i} in degree {d}")
        for d, n in ((int(k), v) for k, v in self._doc.get("betti", {}).items()):
            if self.betti(d) != n:
                raise InvariantViolation(
                    f"{self.name}: Betti number {n} in degree {d} differs from free rank {self.betti(d)}")
        for d in self.degrees():
            # rho2 beta2 = Sq^1
            try:
                rb = _f2_compose(self.rho2_matrix(d + 1), self.beta2_matrix(d),
                                 self.mod2_dim(d + 1), self.mod2_dim(d))
                sq1 = self.sq_matrix(1, d)
            except UnsupportedOperation:
                pass
            else:
                if rb != _f2(sq1, self.mod2_dim(d + 1), self.mod2_dim(d)):
                    raise InvariantViolation(f"{self.name}: rho2*beta2 != Sq^1 in degree {d}")
            # Sq^1 Sq^1 = 0
            try:
                sq1a, sq1b = self.sq_matrix(1, d), self.sq_matrix(1, d + 1)
            except UnsupportedOperation:
                pass
            else:
                comp = _f2_compose(sq1b, sq1a, self.mod2_dim(d + 2), self.mod2_dim(d))
                if any(any(r) for r in comp):
                    raise InvariantViolation(f"{self.name}: Sq^1 Sq^1 != 0 on degree {d}")
            # Sq^d x = x^2 where the cup table covers it
            if d >= 1:
                try:
                    top = self.sq_matrix(d, d)
                except UnsupportedOperation:
                    continue
                for c, lab in enumerate(self.mod2_basis(d)):
                    try:
                        sq = self.cup_mod2(lab, lab)
                    except UnsupportedOperation:
                        continue
                    vec = [0] * self.mod2_dim(2 * d)
                    for s in sq:
                        vec[self.mod2_label(s)[1]] ^= 1
                    if [r[c] % 2 for r in top] != vec:
                        raise InvariantViolation(f"{self.name}: Sq^{d}({lab}) differs from {lab}^2")
        if self.fundamental_mod2 is not None:
            d, _ = self.mod2_label(self.fundamental_mod2)
            if self.dimension is not None and d != self.dimension:
                raise InvariantViolation(f"{self.name}: fundamental class not in the top degree")
        for datum in self.odd_primary:
            d, i = self.integral_label(datum.label)
            order = self.integral_orders(d)[i]
            p, e = datum.prime, datum.divisibility
            if order == 0 or order % p:
                raise InvariantViolation(f"{self.name}: odd-primary class {datum.label} is not {p}-torsion")
            a = 0
            while order % p == 0:
                order //= p
                a += 1
            if order != 1:
                raise InvariantViolation(f"{self.name}: odd-primary class {datum.label} has order not a power of {p}")
            if e >= a:
                raise InvariantViolation(
                    f"{self.name}: {p}^{e} times {datum.label} vanishes; divisibility annotation impossible")


def _f2(m: Matrix, nrows: int, ncols: int) -> Matrix:
    return [[m[r][c] % 2 for c in range(ncols)] for r in range(nrows)]


def _f2_compose(A: Matrix, B: Matrix, nrows: int, ncols: int) -> Matrix:
    inner = len(B)
    return [[sum(A[r][k] * B[k][c] for k in range(inner)) % 2 for c in range(ncols)] for r in range(nrows)]


# --- loading --------------------------------------------------------------------

BUILTIN_NAMES = (
    ["point"] + [f"S{n}" for n in range(1, 17)] + [f"RP{n}" for n in range(1, 9)] + [f"CP{n}" for n in range(1, 5)]
)


def load_presentation(document: Mapping[str, Any] | str) -> CohomologyPresentation:
    """Load a presentation from a dict, a JSON string, a file path or a built-in name."""
    if isinstance(document, str):
        if document in BUILTIN_NAMES:
            return builtin(document)
        text = document
        if not document.lstrip().startswith("{"):
            with open(document, encoding="utf-8") as fh:
                text = fh.read()
        try:
            document = json.loads(text)
        except json.JSONDecodeError as exc:
            raise PresentationError(f"not valid JSON: {exc}") from None
    return CohomologyPresentation(document)


@lru_cache(maxsize=None)
def builtin(name: str) -> CohomologyPresentation:
    if name not in BUILTIN_NAMES:
        raise KeyError(f"no built-in presentation {name!r}")
    path = resources.files("diffko.data").joinpath("presentations", f"{name}.json")
    return CohomologyPresentation(json.loads(path.read_text()))


def u1_cohomology(presentation: CohomologyPresentation, k: int) -> GroupDescriptor:
    """H^k(X;U(1)) up to isomorphism: tor H^(k+1)(X;Z) + T^(b_k).

    The splitting is not canonical; only the isomorphism type is returned.
    """
    if k < 0:
        raise ValueError("negative degree")
    g = presentation.integral(k + 1)
    labels = tuple(presentation.integral_labels(k + 1)[g.free:])
    return GroupDescriptor(0, g.torsion, presentation.betti(k), labels)


def kunneth_product(a: CohomologyPresentation, b: CohomologyPresentation) -> CohomologyPresentation:
    """Tensor-product presentation of X x Y for integrally torsion-free factors.

    Labels are ``x|y``.  Squares follow the Cartan formula wherever both
    factors supply the needed data; cup products likewise.
    """
    if not (a.is_torsion_free and b.is_torsion_free):
        raise UnsupportedOperation("Kunneth product with torsion needs Tor terms, which are not modelled")
    top = a.top_degree + b.top_degree

    def pairs(deg_a, deg_b, d):
        return [(i, d - i) for i in range(0, d + 1) if deg_a(i) and deg_b(d - i)]

    integral, mod2, rho2, bock = {}, {}, {}, {}
    mod2_pairs: dict[int, list[tuple[int, int, int, int]]] = {}
    for d in range(top + 1):
        ints = []
        for i, j in pairs(lambda i: a.betti(i), lambda j: b.betti(j), d):
            la, lb = a.integral_labels(i), b.integral_labels(j)
            for x in range(a.betti(i)):
                for y in range(b.betti(j)):
                    ints.append((i, x, j, y, f"{la[x]}|{lb[y]}"))
        if ints:
            integral[str(d)] = {"free": len(ints), "torsion": [], "labels": [t[4] for t in ints]}
        basis = []
        for i, j in pairs(a.mod2_dim, b.mod2_dim, d):
            for x in range(a.mod2_dim(i)):
                for y in range(b.mod2_dim(j)):
                    basis.append((i, x, j, y))
        if basis:
            mod2[str(d)] = [f"{a.mod2_basis(i)[x]}|{b.mod2_basis(j)[y]}" for i, x, j, y in basis]
            mod2_pairs[d] = basis
        if ints and basis:
            m = []
            for (i, x, j, y) in basis:
                row = []
                for (ii, xx, jj, yy, _) in ints:
                    if ii != i or jj != j:
                        row.append(0)
                        continue
                    ra, rb = a.rho2_matrix(i), b.rho2_matrix(j)
                    row.append((ra[x][xx] * rb[y][yy]) % 2)
                m.append(row)
            rho2[str(d)] = m
    # Bocksteins vanish: no 2-torsion
    for d in range(top + 1):
        if str(d) in mod2:
            n_next = 0
            for i, j in pairs(lambda i: a.betti(i), lambda j: b.betti(j), d + 1):
                n_next += a.betti(i) * b.betti(j)
            bock[str(d)] = zeros(n_next, len(mod2[str(d)]))
    index = {d: {(i, x, j, y): n for n, (i, x, j, y) in enumerate(basis)} for d, basis in mod2_pairs.items()}
    sq: dict[str, dict[str, Matrix]] = {}
    for k in range(1, top + 1):
        table = {}
        for d, basis in mod2_pairs.items():
            tgt = mod2_pairs.get(d + k, [])
            if not tgt:
                continue
            m = zeros(len(tgt), len(basis))
            try:
                for c, (i, x, j, y) in enumerate(basis):
                    for s in range(0, k + 1):
                        A = a.sq_matrix(s, i)
                        B = b.sq_matrix(k - s, j)
                        for xa in range(a.mod2_dim(i + s)):
                            if not A[xa][x] % 2:
                                continue
                            for yb in range(b.mod2_dim(j + k - s)):
                                if B[yb][y] % 2:
                                    r = index[d + k][(i + s, xa, j + k - s, yb)]
                                    m[r][c] ^= 1
            except UnsupportedOperation:
                continue
            table[str(d)] = m
        if table:
            sq[str(k)] = table
    cups = []
    for d1, b1 in mod2_pairs.items():
        for d2, b2 in mod2_pairs.items():
            for (i, x, j, y) in b1:
                for (i2, x2, j2, y2) in b2:
                    try:
                        pa = a.cup_mod2(a.mod2_basis(i)[x], a.mod2_basis(i2)[x2])
                        pb = b.cup_mod2(b.mod2_basis(j)[y], b.mod2_basis(j2)[y2])
                    except UnsupportedOperation:
                        continue
                    prod = [f"{u}|{v}" for u in pa for v in pb]
                    left = f"{a.mod2_basis(i)[x]}|{b.mod2_basis(j)[y]}"
                    right = f"{a.mod2_basis(i2)[x2]}|{b.mod2_basis(j2)[y2]}"
                    cups.append({"left": left, "right": right, "product": prod})
    doc = {
        "schema_version": SCHEMA_VERSION,
        "name": f"{a.name}x{b.name}",
        "dimension": top,
        "integral": integral,
        "mod2": mod2,
        "rho2": rho2,
        "bockstein": bock,
        "sq": sq,
        "cup_mod2": cups,
        "betti": {d: g["free"] for d, g in integral.items()},
    }
    if a.fundamental_mod2 and b.fundamental_mod2:
        doc["fundamental_class"] = {"mod2": f"{a.fundamental_mod2}|{b.fundamental_mod2}"}
    return CohomologyPresentation(doc)
