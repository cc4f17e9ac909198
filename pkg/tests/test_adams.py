import csv
import io
from fractions import Fraction
from itertools import combinations
from itertools import product

import pytest
import sympy as sp

from diffko.adams import (LINE_BUNDLES, NEWTON, PRINTED, FormalBundle, adams_form, adams_newton_recursion,
                          adams_root_model, beta_power, divergence_table, localized_extension_check,
                          real_line_adams)
from diffko.coefficients import ALPHA, ETA, ONE, KOElement, adams_coefficient
from diffko.polynomial import parse_polynomial

from conftest import GOLDEN


def to_sympy(poly):
    return sp.expand(sp.sympify(str(poly).replace("^", "**")))


def generic_symbols(n):
    return sp.symbols(f"L1:{n + 1}")


def test_root_model_examples():
    line = FormalBundle.from_roots([(1,)])
    assert adams_root_model(3, line).root_list() == [(3,)]
    E = FormalBundle.generic(3)
    assert adams_root_model(1, E).roots == E.roots
    with pytest.raises(ValueError):
        adams_root_model(0, E)
    with pytest.raises(ValueError):
        adams_root_model(2, FormalBundle(lambdas=E.exterior_powers()))


def test_coefficient_shadow_on_u():
    """psi^r(1 - H) = 1 - H^r = r u modulo u^2, with H = 1 - u."""
    u = sp.Symbol("u")
    H = FormalBundle.from_roots([(1,)])
    for r in range(1, 7):
        image = to_sympy(adams_root_model(r, H).klass()).subs(sp.Symbol("L1"), 1 - u)
        shadow = sp.expand(1 - image)
        assert shadow.coeff(u, 1) == r and shadow.coeff(u, 0) == 0


@pytest.mark.parametrize("rank", range(1, 5))
@pytest.mark.parametrize("r", range(1, 7))
def test_root_model_matches_power_sums(rank, r):
    xs = generic_symbols(rank)
    assert to_sympy(adams_root_model(r, FormalBundle.generic(rank)).klass()) == sum(x**r for x in xs)


@pytest.mark.parametrize("rank", range(1, 5))
@pytest.mark.parametrize("r", range(1, 7))
def test_newton_recursion_matches_root_model(rank, r):
    E = FormalBundle.generic(rank)
    assert adams_newton_recursion(r, E, NEWTON) == adams_root_model(r, E).klass()


def test_newton_rank_two_square():
    E = FormalBundle.generic(2)
    lam = E.exterior_powers()
    expected = lam[0].mul(lam[0], 10**6) - lam[1].scale(2)
    assert adams_newton_recursion(2, E, NEWTON) == expected


@pytest.mark.parametrize("rank", range(1, 5))
@pytest.mark.parametrize("r,s", list(product(range(1, 6), repeat=2)))
def test_root_model_composition(rank, r, s):
    E = FormalBundle.generic(rank)
    assert adams_root_model(r, adams_root_model(s, E)).roots == adams_root_model(r * s, E).roots


def test_root_model_additive():
    E = FormalBundle.from_roots([(1, 0, 0), (0, 1, 0)])
    F = FormalBundle.from_roots([(0, 0, 1), (1, 1, 0)])
    for r in range(1, 6):
        assert adams_root_model(r, E + F).klass() == adams_root_model(r, E).klass() + adams_root_model(r, F).klass()


def test_lambda_model_is_elementary_symmetric():
    xs = generic_symbols(4)
    lam = FormalBundle.generic(4).with_lambda_model().lambdas
    for i, poly in enumerate(lam, start=1):
        e_i = sum(sp.Mul(*c) for c in combinations(xs, i))
        assert to_sympy(poly) == sp.expand(e_i)


def test_printed_recursion_at_r1_is_minus_e():
    """The formula as printed gives -E at r = 1; recorded, not corrected."""
    E = FormalBundle.generic(3)
    assert adams_newton_recursion(1, E, PRINTED) == E.klass().scale(-1)
    assert adams_newton_recursion(1, E, NEWTON) == E.klass()


def test_divergence_table_shape():
    rows = divergence_table()
    assert len(rows) == 24
    assert all(r["newton_agrees"] for r in rows)
    assert not all(r["printed_agrees"] for r in rows)
    # on line bundles the printed formula is right for even r and off by sign for odd r
    for row in rows:
        if row["rank"] == 1:
            assert row["printed_agrees"] == (row["r"] % 2 == 0)
            assert row["printed_equals_negative"] == (row["r"] % 2 == 1)


def test_divergence_table_stable():
    golden = (GOLDEN / "adams_divergence.csv").read_text()
    rows = list(csv.DictReader(io.StringIO(golden)))
    fresh = divergence_table()
    assert len(rows) == len(fresh)
    for old, new in zip(rows, fresh):
        assert {k: str(v) for k, v in new.items()} == old
    assert divergence_table() == fresh


def test_recursion_rejects_bad_input():
    with pytest.raises(ValueError):
        adams_newton_recursion(0, FormalBundle.generic(1))
    with pytest.raises(ValueError):
        adams_newton_recursion(2, FormalBundle.generic(1), "other")


# --- coefficient level ------------------------------------------------------------------

def test_psi2_beta():
    assert adams_coefficient(2, beta_power(1)) == KOElement.basis(ONE, 1, 16)


@pytest.mark.parametrize("r", range(1, 6))
@pytest.mark.parametrize("k", range(-2, 4))
def test_localized_extension(r, k):
    assert localized_extension_check(r, k)


def test_localized_extension_example():
    assert adams_coefficient(3, KOElement.basis(ALPHA, 1)) == KOElement.basis(ALPHA, 1, 3**2 * 3**4)


# --- real line bundles and the form shadow -------------------------------------------------

def test_real_line_bundle_rule():
    L = FormalBundle.from_roots([(1,)], real=[0])
    for k in (1, 3, 5):
        assert real_line_adams(k, L).roots == L.roots
    for k in (0, 2, 4):
        assert real_line_adams(k, L).roots == {(0,): 1}
    with pytest.raises(ValueError):
        real_line_adams(2, FormalBundle.from_roots([(1,)]))


def test_real_variables_square_to_one():
    L = FormalBundle.from_roots([(1,), (1,)], real=[0])
    assert L.exterior_powers()[1] == parse_polynomial("1", LINE_BUNDLES)


def test_adams_form_rescales_alpha():
    out = adams_form(2, KOElement.basis(ALPHA) + KOElement.basis(ONE, 1))
    assert out == KOElement.basis(ALPHA, 0, Fraction(1, 4)) + KOElement.basis(ONE, 1, Fraction(1, 16))
    with pytest.raises(ValueError):
        adams_form(2, KOElement.basis(ETA))
