"""Finitely generated abelian groups: descriptors, Smith form, lattices.

Integer matrices are lists of rows.  A subgroup of ``Z^m`` is a
:class:`Lattice` kept in Hermite (row echelon) form, and a subquotient
``L / K`` of two nested lattices is turned into a :class:`GroupDescriptor`
through the Smith invariants of ``K`` written in a basis of ``L``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

Matrix = list[list[int]]


@dataclass(frozen=True)
class GroupDescriptor:
    """Z^free + Z/t_1 + ... + U(1)^circles, with optional generator labels."""

    free: int = 0
    torsion: tuple[int, ...] = ()
    circles: int = 0
    labels: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        if self.free < 0 or self.circles < 0:
            raise ValueError("ranks must be non-negative")
        if any(t < 2 for t in self.torsion):
            raise ValueError("torsion orders must be at least 2")
        object.__setattr__(self, "torsion", tuple(sorted(self.torsion)))

    @property
    def is_zero(self) -> bool:
        return self.free == 0 and not self.torsion and self.circles == 0

    @property
    def is_finite(self) -> bool:
        return self.free == 0 and self.circles == 0

    def order(self) -> int:
        if not self.is_finite:
            raise ValueError("group is infinite")
        out = 1
        for t in self.torsion:
            out *= t
        return out

    def __str__(self) -> str:
        parts = []
        if self.free:
            parts.append("Z" if self.free == 1 else f"Z^{self.free}")
        parts += [f"Z/{t}" for t in self.torsion]
        if self.circles:
            parts.append("U(1)" if self.circles == 1 else f"U(1)^{self.circles}")
        return " ⊕ ".join(parts) if parts else "0"

    def to_json(self) -> dict:
        out = {"free": self.free, "torsion": list(self.torsion), "circles": self.circles}
        if self.labels:
            out["labels"] = list(self.labels)
        return out


ZERO = GroupDescriptor()


def direct_sum(*groups: GroupDescriptor) -> GroupDescriptor:
    return GroupDescriptor(
        sum(g.free for g in groups),
        tuple(t for g in groups for t in g.torsion),
        sum(g.circles for g in groups),
        tuple(l for g in groups for l in g.labels),
    )


# --- integer row reduction ---------------------------------------------------

def _echelon(rows: Matrix, ncols: int) -> tuple[Matrix, int]:
    """Integer row echelon form on the first ``ncols`` columns.

    Row operations are unimodular and act on the whole row, so extra columns
    appended to the right record the transformation.  Returns the reduced
    rows and the number of pivot rows.
    """
    rows = [list(r) for r in rows]
    pivot_row = 0
    for col in range(ncols):
        if pivot_row == len(rows):
            break
        while True:
            nz = [i for i in range(pivot_row, len(rows)) if rows[i][col] != 0]
            if not nz:
                break
            best = min(nz, key=lambda i: abs(rows[i][col]))
            rows[pivot_row], rows[best] = rows[best], rows[pivot_row]
            piv = rows[pivot_row]
            if piv[col] < 0:
                rows[pivot_row] = piv = [-x for x in piv]
            done = True
            for i in range(pivot_row + 1, len(rows)):
                q = rows[i][col] // piv[col]
                if q:
                    rows[i] = [a - q * b for a, b in zip(rows[i], piv)]
                if rows[i][col] != 0:
                    done = False
            if done:
                break
        if any(rows[i][col] != 0 for i in range(pivot_row, len(rows))):
            # reduce rows above the pivot to keep entries small
            piv = rows[pivot_row]
            for i in range(pivot_row):
                q = rows[i][col] // piv[col]
                if q:
                    rows[i] = [a - q * b for a, b in zip(rows[i], piv)]
            pivot_row += 1
    return rows, pivot_row


def hermite_rows(gens: Sequence[Sequence[int]], dim: int) -> Matrix:
    """A basis (as rows) of the lattice spanned by ``gens`` in Z^dim."""
    if not gens:
        return []
    rows, rank = _echelon([list(g) for g in gens], dim)
    return [r for r in rows[:rank]]


def integer_kernel(matrix: Matrix, ncols: int) -> Matrix:
    """Basis rows of {x in Z^ncols : matrix * x = 0}."""
    nrows = len(matrix)
    # work with the transpose augmented by the identity
    aug = [[matrix[i][j] for i in range(nrows)] + [1 if k == j else 0 for k in range(ncols)] for j in range(ncols)]
    rows, rank = _echelon(aug, nrows)
    return [r[nrows:] for r in rows[rank:]]


def smith_form(matrix: Matrix, nrows: int, ncols: int) -> tuple[list[int], Matrix, Matrix]:
    """Smith normal form ``U * A * V = D``.

    Returns the diagonal (including zeros up to min(nrows, ncols)), and the
    unimodular ``V`` and ``V^-1`` (both ncols x ncols).  ``U`` is not needed
    by any caller and is not tracked.
    """
    A = [list(r) for r in matrix] if nrows else []
    V = [[int(i == j) for j in range(ncols)] for i in range(ncols)]
    Vinv = [[int(i == j) for j in range(ncols)] for i in range(ncols)]

    def col_op(j_dst: int, j_src: int, q: int) -> None:
        # column j_dst -= q * column j_src
        for r in A:
            r[j_dst] -= q * r[j_src]
        for r in V:
            r[j_dst] -= q * r[j_src]
        # inverse: row j_src += q * row j_dst
        Vinv[j_src] = [a + q * b for a, b in zip(Vinv[j_src], Vinv[j_dst])]

    def col_swap(a: int, b: int) -> None:
        for r in A:
            r[a], r[b] = r[b], r[a]
        for r in V:
            r[a], r[b] = r[b], r[a]
        Vinv[a], Vinv[b] = Vinv[b], Vinv[a]

    def col_neg(a: int) -> None:
        for r in A:
            r[a] = -r[a]
        for r in V:
            r[a] = -r[a]
        Vinv[a] = [-x for x in Vinv[a]]

    t = 0
    while t < min(nrows, ncols):
        nz = [(abs(A[i][j]), i, j) for i in range(t, nrows) for j in range(t, ncols) if A[i][j] != 0]
        if not nz:
            break
        _, i0, j0 = min(nz)
        A[t], A[i0] = A[i0], A[t]
        if j0 != t:
            col_swap(t, j0)
        while True:
            changed = False
            for i in range(t + 1, nrows):
                q = A[i][t] // A[t][t]
                if q:
                    A[i] = [a - q * b for a, b in zip(A[i], A[t])]
                if A[i][t] != 0:
                    A[t], A[i] = A[i], A[t]
                    changed = True
            for j in range(t + 1, ncols):
                q = A[t][j] // A[t][t]
                if q:
                    col_op(j, t, q)
                if A[t][j] != 0:
                    col_swap(t, j)
                    changed = True
            if changed:
                continue
            # divisibility condition
            bad = [(i, j) for i in range(t + 1, nrows) for j in range(t + 1, ncols) if A[i][j] % A[t][t] != 0]
            if bad:
                i, _ = bad[0]
                A[t] = [a + b for a, b in zip(A[t], A[i])]
                continue
            break
        if A[t][t] < 0:
            col_neg(t)
        t += 1
    diag = [A[i][i] if i < nrows and i < ncols else 0 for i in range(min(nrows, ncols))]
    return diag, V, Vinv


def _solve_rational(basis: Matrix, v: Sequence[int]) -> list[Fraction] | None:
    """c with sum c_i basis_i = v, for linearly independent rows."""
    n = len(basis)
    if n == 0:
        return [] if all(x == 0 for x in v) else None
    m = len(v)
    # Gaussian elimination on the transposed system
    aug = [[Fraction(basis[i][j]) for i in range(n)] + [Fraction(v[j])] for j in range(m)]
    piv_cols = []
    r = 0
    for c in range(n):
        p = next((i for i in range(r, m) if aug[i][c] != 0), None)
        if p is None:
            continue
        aug[r], aug[p] = aug[p], aug[r]
        pv = aug[r][c]
        aug[r] = [x / pv for x in aug[r]]
        for i in range(m):
            if i != r and aug[i][c] != 0:
                f = aug[i][c]
                aug[i] = [a - f * b for a, b in zip(aug[i], aug[r])]
        piv_cols.append(c)
        r += 1
    if any(aug[i][n] != 0 for i in range(r, m)):
        return None
    sol = [Fraction(0)] * n
    for i, c in enumerate(piv_cols):
        sol[c] = aug[i][n]
    return sol


class Lattice:
    """Subgroup of Z^dim, stored as Hermite basis rows."""

    __slots__ = ("dim", "basis")

    def __init__(self, dim: int, gens: Sequence[Sequence[int]] = ()) -> None:
        self.dim = dim
        for g in gens:
            if len(g) != dim:
                raise ValueError("generator has wrong length")
        self.basis = hermite_rows(gens, dim)

    @classmethod
    def full(cls, dim: int) -> "Lattice":
        return cls(dim, [[int(i == j) for j in range(dim)] for i in range(dim)])

    @classmethod
    def diagonal(cls, orders: Sequence[int]) -> "Lattice":
        dim = len(orders)
        return cls(dim, [[o if i == j else 0 for j in range(dim)] for i, o in enumerate(orders) if o])

    @property
    def rank(self) -> int:
        return len(self.basis)

    def __add__(self, other: "Lattice") -> "Lattice":
        return Lattice(self.dim, self.basis + other.basis)

    def contains(self, v: Sequence[int]) -> bool:
        c = _solve_rational(self.basis, v)
        return c is not None and all(x.denominator == 1 for x in c)

    def contains_lattice(self, other: "Lattice") -> bool:
        return all(self.contains(v) for v in other.basis)

    def __eq__(self, other) -> bool:
        return isinstance(other, Lattice) and self.dim == other.dim and self.basis == other.basis

    def image(self, M: Matrix, target_dim: int) -> "Lattice":
        return Lattice(target_dim, [apply(M, b, target_dim) for b in self.basis])

    def preimage(self, M: Matrix, target: "Lattice") -> "Lattice":
        """{x in self : M x in target}."""
        r = len(self.basis)
        if r == 0:
            return Lattice(self.dim)
        imgs = [apply(M, b, target.dim) for b in self.basis]
        q = len(target.basis)
        # columns: images of self basis, then minus target basis
        system = [[imgs[i][row] for i in range(r)] + [-target.basis[j][row] for j in range(q)]
                  for row in range(target.dim)]
        ker = integer_kernel(system, r + q)
        gens = []
        for k in ker:
            a = k[:r]
            gens.append([sum(a[i] * self.basis[i][c] for i in range(r)) for c in range(self.dim)])
        return Lattice(self.dim, gens)

    def intersect(self, other: "Lattice") -> "Lattice":
        identity = [[int(i == j) for j in range(self.dim)] for i in range(self.dim)]
        return self.preimage(identity, other)

    def quotient(self, sub: "Lattice") -> tuple[list[int], int, Matrix]:
        """Invariant factors of self / sub and generator vectors.

        Returns (torsion orders > 1, free rank, generators in Z^dim), where
        the generators list torsion generators first (matching the orders)
        and then the free generators.
        """
        if not self.contains_lattice(sub):
            raise ValueError("quotient by a lattice that is not a sublattice")
        r = self.rank
        coords = []
        for v in sub.basis:
            c = _solve_rational(self.basis, v)
            coords.append([int(x) for x in c])
        diag, _, Vinv = smith_form(coords, len(coords), r)
        diag = diag + [0] * (r - len(diag))
        # new basis f_i = row i of Vinv in L-coordinates; sub = span(d_i f_i)
        gens_t, orders, gens_f = [], [], []
        for i in range(r):
            vec = [sum(Vinv[i][k] * self.basis[k][c] for k in range(r)) for c in range(self.dim)]
            d = abs(diag[i])
            if d == 1:
                continue
            if d == 0:
                gens_f.append(vec)
            else:
                gens_t.append(vec)
                orders.append(d)
        return orders, len(gens_f), gens_t + gens_f


def apply(M: Matrix, v: Sequence[int], target_dim: int) -> list[int]:
    """M v, with M given as target_dim rows."""
    if target_dim == 0:
        return []
    return [sum(a * b for a, b in zip(row, v)) for row in M]


def matmul(A: Matrix, B: Matrix, inner: int, ncols: int) -> Matrix:
    """A (rows x inner) times B (inner x ncols)."""
    return [[sum(A[i][k] * B[k][j] for k in range(inner)) for j in range(ncols)] for i in range(len(A))]


def zeros(nrows: int, ncols: int) -> Matrix:
    return [[0] * ncols for _ in range(nrows)]


def describe(orders: Sequence[int], labels: Sequence[str] = ()) -> GroupDescriptor:
    """Descriptor of Z^m / diag(orders) where order 0 means a free summand."""
    free = sum(1 for o in orders if o == 0)
    tors = tuple(o for o in orders if o not in (0, 1))
    return GroupDescriptor(free, tors, 0, tuple(labels))


# --- F2 linear algebra -------------------------------------------------------

def f2_rank(rows: Matrix) -> int:
    rows = [[x % 2 for x in r] for r in rows]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    for c in range(ncols):
        p = next((i for i in range(rank, len(rows)) if rows[i][c]), None)
        if p is None:
            continue
        rows[rank], rows[p] = rows[p], rows[rank]
        for i in range(len(rows)):
            if i != rank and rows[i][c]:
                rows[i] = [(a + b) % 2 for a, b in zip(rows[i], rows[rank])]
        rank += 1
    return rank


def f2_solve(A: Matrix, b: Sequence[int], ncols: int) -> tuple[list[int] | None, int]:
    """Solve A x = b over F2.

    Returns a particular solution (or None) and the dimension of the
    solution space's kernel.
    """
    m = len(A)
    aug = [[A[i][j] % 2 for j in range(ncols)] + [b[i] % 2] for i in range(m)]
    pivots = []
    r = 0
    for c in range(ncols):
        p = next((i for i in range(r, m) if aug[i][c]), None)
        if p is None:
            continue
        aug[r], aug[p] = aug[p], aug[r]
        for i in range(m):
            if i != r and aug[i][c]:
                aug[i] = [(x + y) % 2 for x, y in zip(aug[i], aug[r])]
        pivots.append(c)
        r += 1
    if any(aug[i][ncols] for i in range(r, m)):
        return None, ncols - r
    x = [0] * ncols
    for i, c in enumerate(pivots):
        x[c] = aug[i][ncols]
    return x, ncols - r
