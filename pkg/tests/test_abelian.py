import pytest
from hypothesis import given
from hypothesis import strategies as st
from sympy import Matrix as SMatrix
from sympy import ZZ
from sympy.matrices.normalforms import smith_normal_form as sympy_snf

from diffko.abelian import (GroupDescriptor, Lattice, describe, direct_sum, f2_rank, f2_solve, integer_kernel,
                            matmul, smith_form)

small = st.integers(-12, 12)


def matrices(max_rows=4, max_cols=4):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(small, min_size=c, max_size=c), min_size=r, max_size=r)))


def _oracle_factors(m):
    snf = sympy_snf(SMatrix(m), domain=ZZ)
    diag = [abs(int(snf[i, i])) for i in range(min(snf.shape))]
    return sorted(d for d in diag if d)


def test_smith_known_example():
    diag, _, _ = smith_form([[2, 4, 4], [-6, 6, 12], [10, -4, -16]], 3, 3)
    assert [abs(d) for d in diag] == [2, 6, 12]


@given(matrices())
def test_smith_matches_sympy(m):
    diag, _, _ = smith_form(m, len(m), len(m[0]))
    ours = sorted(abs(d) for d in diag if d)
    assert ours == _oracle_factors(m)


@given(matrices())
def test_smith_divisibility_chain(m):
    diag, _, _ = smith_form(m, len(m), len(m[0]))
    nz = [abs(d) for d in diag if d]
    assert all(b % a == 0 for a, b in zip(nz, nz[1:]))


@given(matrices())
def test_kernel_vectors_are_killed(m):
    ker = integer_kernel(m, len(m[0]))
    for v in ker:
        assert all(sum(a * b for a, b in zip(row, v)) == 0 for row in m)


@given(st.lists(st.lists(small, min_size=3, max_size=3), min_size=1, max_size=4))
def test_quotient_of_full_lattice(rows):
    sub = Lattice(3, rows)
    orders, free, gens = Lattice.full(3).quotient(sub)
    assert free == 3 - sub.rank
    assert sorted(o for o in orders) == [d for d in _oracle_factors(rows) if d > 1]
    assert len(gens) == len(orders) + free


def test_descriptor_rendering_and_sum():
    g = direct_sum(GroupDescriptor(1), GroupDescriptor(0, (2,)), GroupDescriptor(0, (), 1))
    assert str(g) == "Z ⊕ Z/2 ⊕ U(1)"
    assert str(GroupDescriptor()) == "0"
    assert describe([0, 2, 1, 4]) == GroupDescriptor(1, (2, 4))
    with pytest.raises(ValueError):
        GroupDescriptor(0, (1,))


def test_lattice_preimage_and_intersection():
    L = Lattice.full(2)
    M = [[2, 0], [0, 3]]
    target = Lattice.diagonal([4, 3])
    pre = L.preimage(M, target)
    assert pre == Lattice(2, [[2, 0], [0, 1]])
    a = Lattice(2, [[2, 0], [0, 1]])
    b = Lattice(2, [[1, 0], [0, 2]])
    assert a.intersect(b) == Lattice(2, [[2, 0], [0, 2]])
    assert a.image(M, 2) == Lattice(2, [[4, 0], [0, 3]])


def test_quotient_requires_sublattice():
    with pytest.raises(ValueError):
        Lattice(1, [[2]]).quotient(Lattice.full(1))


@given(st.lists(st.lists(st.integers(0, 1), min_size=4, max_size=4), min_size=1, max_size=5),
       st.lists(st.integers(0, 1), min_size=4, max_size=4))
def test_f2_solve(A, x):
    b = [sum(a * v for a, v in zip(row, x)) % 2 for row in A]
    sol, freedom = f2_solve(A, b, 4)
    assert sol is not None
    assert [sum(a * v for a, v in zip(row, sol)) % 2 for row in A] == b
    assert freedom == 4 - f2_rank(A)


def test_matmul_shapes():
    assert matmul([[1, 2]], [[3], [4]], 2, 1) == [[11]]
