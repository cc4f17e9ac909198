import pytest
from hypothesis import given
from hypothesis import strategies as st

from diffko.polynomial import STIEFEL_WHITNEY, GradedPolynomial, parse_polynomial
from diffko.presentation import builtin
from diffko.steenrod import (ORIENTABLE_VANISHING, SPIN_VANISHING, apply_sq, binomial_total, render_total,
                             specialize, sq1_sw, sw_from_wu, torsion_pontrjagin_mod2, totals_equal, w,
                             whitney_correction_mod2, wu_classes)

W = lambda text: parse_polynomial(text, STIEFEL_WHITNEY)


def test_sq1_on_generators():
    assert sq1_sw(W("w2")) == W("w3 + w1*w2")
    assert sq1_sw(W("w1")) == W("w1^2")
    assert sq1_sw(W("w2^2")).is_zero()


def test_torsion_pontrjagin_examples():
    assert torsion_pontrjagin_mod2(1) == W("w3^2")
    assert torsion_pontrjagin_mod2(0) == W("w1^2")
    assert specialize(torsion_pontrjagin_mod2(1), ORIENTABLE_VANISHING) == W("w3^2")


def _monomials_up_to(degree, max_gen=12):
    """All w-monomials of total degree <= degree (as polynomials)."""
    out = [GradedPolynomial.constant(STIEFEL_WHITNEY, 1)]
    frontier = [((), 0)]
    while frontier:
        nxt = []
        for mono, d in frontier:
            start = mono[-1] if mono else 1
            for i in range(start, max_gen + 1):
                if d + i <= degree:
                    m = mono + (i,)
                    nxt.append((m, d + i))
                    out.append(GradedPolynomial(STIEFEL_WHITNEY, {tuple((0, j) for j in m): 1}))
        frontier = nxt
    return out


def test_sq1_squares_to_zero_through_degree_12():
    monos = _monomials_up_to(12)
    assert len(monos) > 200
    for m in monos:
        assert sq1_sw(sq1_sw(m)).is_zero()


w_polys = st.lists(st.lists(st.integers(1, 6), max_size=3), max_size=4).map(
    lambda ms: sum((GradedPolynomial(STIEFEL_WHITNEY, {tuple(sorted((0, i) for i in m)): 1}) for m in ms),
                   GradedPolynomial.zero(STIEFEL_WHITNEY)))


@given(w_polys, w_polys)
def test_sq1_is_a_derivation(x, y):
    assert sq1_sw(x.mul(y)) == sq1_sw(x).mul(y) + x.mul(sq1_sw(y))


def test_sq1_rejects_rational_schemes():
    from diffko.polynomial import PONTRYAGIN
    with pytest.raises(ValueError):
        sq1_sw(parse_polynomial("p1", PONTRYAGIN))


@pytest.mark.parametrize("k", [1, 2])
def test_whitney_correction_orientable(k):
    assert specialize(whitney_correction_mod2(k), ORIENTABLE_VANISHING).is_zero()


@pytest.mark.parametrize("k", range(1, 7))
def test_whitney_correction_spin(k):
    assert specialize(whitney_correction_mod2(k), SPIN_VANISHING).is_zero()


def test_whitney_correction_nonzero_in_general():
    # not vacuous: without the vanishing assumptions the class survives
    assert not whitney_correction_mod2(1).is_zero()
    assert not specialize(whitney_correction_mod2(3), ORIENTABLE_VANISHING).is_zero()


# --- presentations -----------------------------------------------------------------

@pytest.mark.parametrize("n", range(1, 7))
def test_wu_and_sw_of_real_projective_space(n):
    p = builtin(f"RP{n}")
    w_total = sw_from_wu(wu_classes(p), p)
    assert totals_equal(w_total, binomial_total(p, "a", n + 1))


@pytest.mark.parametrize("n", range(1, 4))
def test_wu_and_sw_of_complex_projective_space(n):
    p = builtin(f"CP{n}")
    w_total = sw_from_wu(wu_classes(p), p)
    assert totals_equal(w_total, binomial_total(p, "x", n + 1))


def test_wu_examples():
    assert render_total(wu_classes(builtin("RP2")), builtin("RP2")) == "1 + a"
    assert render_total(wu_classes(builtin("CP2")), builtin("CP2")) == "1 + x"
    for n in (2, 5, 8):
        assert render_total(wu_classes(builtin(f"S{n}")), builtin(f"S{n}")) == "1"


def test_sw_examples():
    p = builtin("RP2")
    assert render_total(sw_from_wu(wu_classes(p), p), p) == "1 + a + a^2"
    p = builtin("CP2")
    assert render_total(sw_from_wu(wu_classes(p), p), p) == "1 + x + x^2"


def test_apply_sq_examples():
    p = builtin("RP6")
    assert apply_sq(0, "a^3", p).render(p) == "a^3"
    assert apply_sq(2, "a^2", p).render(p) == "a^4"
    assert apply_sq(3, "a", p).is_zero()


@pytest.mark.parametrize("name", ["RP6", "CP3", "CP4"])
def test_cartan_formula_on_builtins(name):
    p = builtin(name)
    classes = [lab for d in p.degrees() for lab in p.mod2_basis(d) if d > 0]
    for x in classes:
        for y in classes:
            prod = p.cup_mod2(x, y)
            dx, dy = p.mod2_label(x)[0], p.mod2_label(y)[0]
            if not prod:
                continue
            z = prod[0]
            for k in range(0, p.top_degree - dx - dy + 1):
                lhs = apply_sq(k, z, p)
                acc = [0] * p.mod2_dim(dx + dy + k)
                for i in range(k + 1):
                    a, b = apply_sq(i, x, p), apply_sq(k - i, y, p)
                    if p.mod2_dim(a.degree) and p.mod2_dim(b.degree):
                        v = p.cup_mod2_vectors(a.degree, a.vector, b.degree, b.vector)
                        acc = [(s + t) % 2 for s, t in zip(acc, v)]
                assert list(lhs.vector) == acc
