import math
from fractions import Fraction

import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from diffko.ahss import FormSlot
from diffko.errors import InvariantViolation
from diffko.genera import pontrjagin_character
from diffko.integrality import (PROOF, STATEMENT, admissible_pairs, candidate_pairs, d4k_survival,
                                degree8_criterion, obstruction_examples, ph_denominator, phi, primes_up_to)
from diffko.presentation import builtin, load_presentation

from conftest import load_data

EXPECTED_ODD_PARTS = [1, 1, 1, 3, 3, 3 * 5, 3**2 * 5, 3**2 * 5 * 7, 3**2 * 5 * 7, 3**3 * 5 * 7,
                      3**3 * 5**2 * 7, 3**3 * 5**2 * 7 * 11]


def test_phi_examples():
    assert phi(6) == 5
    assert phi(Fraction(12, 5)) == 2
    assert phi(Fraction(7, 5)) == 1
    with pytest.raises(ValueError):
        phi(0)


@given(st.fractions(min_value=Fraction(1, 100), max_value=200))
def test_phi_is_greatest_integer_below(x):
    n = phi(x)
    assert n < x <= n + 1


def test_primes_against_sympy():
    assert primes_up_to(200) == list(sp.primerange(2, 201))
    assert primes_up_to(1) == []


@pytest.mark.parametrize("k", range(1, 13))
def test_denominator_odd_parts(k):
    assert ph_denominator(k).odd_part == EXPECTED_ODD_PARTS[k - 1]


def test_denominator_rendering():
    assert ph_denominator(12).odd_part_factored() == "3^3·5^2·7·11"
    assert ph_denominator(1).odd_part_factored() == "1"
    assert ph_denominator(6).to_row()["odd_part"] == 15


def test_denominator_independent_oracle():
    """Recompute the exponents with sympy's primes and integer arithmetic."""
    for k in range(1, 30):
        for p in sp.primerange(2, k + 1):
            q, rem = divmod(k, p)
            assert ph_denominator(k).exponent(p) == (q - 1 if rem == 0 else q)


def test_large_primes_contribute_nothing():
    rep = ph_denominator(10)
    assert all(p <= 10 for p in rep.exponents)
    assert rep.exponent(11) == 0 and rep.exponent(13) == 0


def test_exponents_monotone_in_k():
    for p in primes_up_to(40):
        exps = [ph_denominator(k).exponent(p) for k in range(1, 41)]
        assert exps == sorted(exps)


def _odd(n):
    while n % 2 == 0:
        n //= 2
    return n


def _character_lcd(k):
    comp = pontrjagin_character(4 * k).component(4 * k)
    return math.lcm(*[Fraction(c).denominator for c in comp.terms.values()])


@pytest.mark.parametrize("k", [
    1,
    *[pytest.param(k, marks=pytest.mark.xfail(
        strict=True, reason="universal Ph coefficients carry (2k)! denominators; the bound "
                            "constrains classes on manifolds, not polynomial coefficients"))
      for k in range(2, 7)],
])
def test_character_denominators_within_bound(k):
    assert ph_denominator(k).odd_part % _odd(_character_lcd(k)) == 0


def test_denominator_rejects_k0():
    with pytest.raises(ValueError):
        ph_denominator(0)


# --- d4k survival -----------------------------------------------------------------------

def test_survival_examples():
    ok, _ = d4k_survival(FormSlot({8: (3, -2)}), 2)
    assert ok
    ok, witness = d4k_survival(FormSlot({4: (1,)}), 1)
    assert not ok and witness.values == (Fraction(1, 2),)
    ok, _ = d4k_survival(FormSlot({4: (2, -6)}), 1)
    assert ok


periods = st.lists(st.fractions(min_value=-10, max_value=10, max_denominator=9), min_size=1, max_size=3)


@given(st.integers(1, 4), periods, st.data())
def test_survival_shift_invariance(j, vec, data):
    shift = data.draw(st.lists(st.integers(-20, 20), min_size=len(vec), max_size=len(vec)))
    # degree 8j: integral shifts
    a = d4k_survival(FormSlot({8 * j: tuple(vec)}), 2 * j)
    b = d4k_survival(FormSlot({8 * j: tuple(v + s for v, s in zip(vec, shift))}), 2 * j)
    assert a[0] == b[0] and a[1].values == b[1].values
    # degree 8j-4: even shifts
    c = d4k_survival(FormSlot({8 * j - 4: tuple(vec)}), 2 * j - 1)
    d = d4k_survival(FormSlot({8 * j - 4: tuple(v + 2 * s for v, s in zip(vec, shift))}), 2 * j - 1)
    assert c[0] == d[0] and c[1].values == d[1].values


# --- degree-8 criterion --------------------------------------------------------------------

def test_degree8_sphere():
    v = degree8_criterion(builtin("S8"))
    assert v.applies and v.verdict == "Ph_8 liftable iff integral periods"


def test_degree8_rp4_fails_h1():
    v = degree8_criterion(builtin("RP4"))
    assert not v.applies and "H^1(M;Z/2) = 0" in v.failing


def test_degree8_synthetic(odd_h4):
    assert degree8_criterion(odd_h4).applies


def test_degree8_cp2_fails_h2():
    v = degree8_criterion(builtin("CP2"))
    assert v.failing == ("H^2(M;Z/2) = 0",)


# --- admissible pairs -----------------------------------------------------------------------

def test_candidates():
    assert (1, 2) in candidate_pairs(16, 3, PROOF)
    assert candidate_pairs(16, 3, PROOF) == [(1, 2)]
    assert (4, 2) in candidate_pairs(16, 3, STATEMENT)
    with pytest.raises(ValueError):
        candidate_pairs(16, 3, "other")


@pytest.mark.parametrize("n", [4, 8, 12, 16])
def test_spheres_have_no_admissible_pairs(n):
    rep = admissible_pairs(n, 3, builtin(f"S{n}"))
    assert rep.admissible == [] and rep.s == 0 and rep.denominator == 1


def test_engineered_admissible_pair(odd_torsion):
    rep = admissible_pairs(16, 3, odd_torsion)
    assert rep.admissible == [(1, 2)]
    assert rep.s == 1 and rep.denominator == 3 and rep.complete


def test_missing_power_data_is_undetermined():
    doc = load_data("odd_torsion_16.json")
    del doc["odd_primary"]
    rep = admissible_pairs(16, 3, load_presentation(doc))
    assert rep.pairs[0].status == "undetermined" and not rep.complete


def test_wrong_divisibility_is_not_admissible():
    doc = load_data("odd_torsion_16.json")
    doc["odd_primary"][0]["divisibility"] = 2
    rep = admissible_pairs(16, 3, load_presentation(doc))
    assert rep.pairs[0].status == "not admissible"


def test_impossible_divisibility_rejected():
    doc = load_data("odd_torsion_16.json")
    doc["odd_primary"][0]["divisibility"] = 3   # 27 * y = 0, so y cannot be divisible by 27
    with pytest.raises(InvariantViolation):
        load_presentation(doc)


def test_admissible_pairs_rejects_even_prime(odd_torsion):
    with pytest.raises(ValueError):
        admissible_pairs(16, 2, odd_torsion)


# --- obstruction examples ----------------------------------------------------------------------

def test_obstructions():
    ex = obstruction_examples()
    assert ex["ph4"]["value"] == "p1" and ex["ph4"]["denominator"] == 1
    assert ex["ph8_p1_zero"]["value"] == "-1/6*p2"
    assert ex["ph8_p1_zero"]["denominator"] == 6
    assert ex["half_ph12_p1_p2_zero"]["value"] == "1/240*p3"
    assert ex["hp2"]["a_hat"] == "0"
    assert ex["hp2"]["p2_minus_half_p1_squared_over_48"] == "1/8*x1^2"
