import copy
import json
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from diffko.abelian import GroupDescriptor
from diffko.ahss import (EVALUATED, KO_SPHERE_TABLE, LACUNARY, UNSUPPORTED, FormSlot, converge, d4k_on_form_slot,
                         e2_differential, e2_topological, ko_hat_of_sphere, ko_of_sphere, lattice_multiplier,
                         odd_primary_differential, run, sphere_presentation, slot_summary)
from diffko.errors import InvariantViolation
from diffko.presentation import builtin, load_presentation

from conftest import DATA


def adams_count(n):
    """Number of 1 <= i <= n with i = 0, 1, 2, 4 mod 8 (rank of KO~(RP^n) as a 2-group)."""
    return sum(1 for i in range(1, n + 1) if i % 8 in (0, 1, 2, 4))


# --- spheres ------------------------------------------------------------------------

@pytest.mark.parametrize("n", range(1, 33))
def test_ko_of_sphere_matches_period_eight(n):
    assert ko_of_sphere(n) == KO_SPHERE_TABLE[n % 8]


@pytest.mark.parametrize("n", range(1, 33))
def test_sphere_differentials_are_never_guessed(n):
    pres = sphere_presentation(n)
    for pages in (run(e2_topological(pres, (0, 0), reduced=True)),
                  run(e2_differential(pres, (0, 0), reduced=True,
                                      slot=FormSlot({n: (1,)}) if n % 4 == 0 else None))):
        log = pages[-1].log
        assert all(d.status in (EVALUATED, LACUNARY) for d in log)
        assert not any(d.status == UNSUPPORTED for d in log)


def test_sphere_examples():
    assert ko_of_sphere(1) == GroupDescriptor(0, (2,))
    assert ko_of_sphere(4) == GroupDescriptor(1)
    assert ko_of_sphere(12) == GroupDescriptor(1)
    with pytest.raises(ValueError):
        ko_of_sphere(33)


def test_s8_unreduced_and_reduced():
    pres = builtin("S8")
    full = converge(run(e2_topological(pres, (0, 0))))[0]
    assert full.status == "assembled" and full.group == GroupDescriptor(2)
    red = converge(run(e2_topological(pres, (0, 0), reduced=True)))[0]
    assert red.group == GroupDescriptor(1)
    s3 = converge(run(e2_topological(builtin("S3"), (0, 0), reduced=True)))[0]
    assert s3.group == GroupDescriptor()


def test_s8_differentials_are_lacunary():
    pages = run(e2_topological(builtin("S8"), (-2, 2), reduced=True))
    assert pages[-1].log and all(d.status == LACUNARY for d in pages[-1].log)


# --- differential variant on spheres ----------------------------------------------------

def test_ko_hat_sphere_examples():
    s4 = ko_hat_of_sphere(4)
    assert (s4.multiplier, s4.exact_summands, s4.torsion) == (2, (3,), ())
    s8 = ko_hat_of_sphere(8)
    assert (s8.multiplier, s8.exact_summands, s8.torsion) == (1, (3, 7), ())
    s9 = ko_hat_of_sphere(9)
    assert (s9.multiplier, s9.exact_summands, s9.torsion) == (None, (3, 7), (2,))
    assert str(s9) == "Z/2 ⊕ dΩ^3 ⊕ dΩ^7"


@pytest.mark.parametrize("n", range(1, 33))
def test_ko_hat_sphere_pattern(n):
    h = ko_hat_of_sphere(n)
    assert h.exact_summands == tuple(range(3, n, 4))
    expected_multiplier = {0: 1, 4: 2}.get(n % 8)
    assert h.multiplier == expected_multiplier
    assert h.torsion == ((2,) if n % 8 in (1, 2) else ())


# --- form slot -------------------------------------------------------------------------

def test_d4k_examples():
    assert d4k_on_form_slot(FormSlot({4: (1,)}), 1).values == (Fraction(1, 2),)
    assert d4k_on_form_slot(FormSlot({4: (2,)}), 1).is_zero
    assert d4k_on_form_slot(FormSlot({8: (3, -5)}), 2).is_zero
    assert lattice_multiplier(4) == 2 and lattice_multiplier(8) == 1 and lattice_multiplier(12) == 2


def test_form_slot_validation():
    with pytest.raises(ValueError):
        FormSlot({6: (1,)})
    with pytest.raises(ValueError):
        FormSlot({4: (1, 2)}).check_against(builtin("S4"))
    with pytest.raises(ValueError):
        d4k_on_form_slot(FormSlot({4: (1,)}), 2)


@given(st.integers(1, 6), st.fractions(min_value=-5, max_value=5, max_denominator=12))
def test_surviving_periods_are_the_multiplier_lattice(k, period):
    survives = d4k_on_form_slot(FormSlot({4 * k: (period,)}), k).is_zero
    m = lattice_multiplier(4 * k)
    assert survives == (period.denominator == 1 and period.numerator % m == 0)


# --- projective spaces --------------------------------------------------------------------

@pytest.mark.parametrize("n", range(1, 8))
def test_real_projective_pieces(n):
    pages = run(e2_topological(builtin(f"RP{n}"), (0, 0), reduced=True))
    result = converge(pages)[0]
    assert all(g == GroupDescriptor(0, (2,)) for _, _, g in result.pieces)
    assert len(result.pieces) == adams_count(n)
    assert result.status == ("assembled" if n == 1 else "extension-unresolved")


def test_rp2_extension_is_flagged_not_guessed():
    result = converge(run(e2_topological(builtin("RP2"), (0, 0), reduced=True)))[0]
    assert result.status == "extension-unresolved" and result.group is None


def test_rp4_second_differential():
    page = e2_topological(builtin("RP4"), (-2, 2), reduced=True)
    nxt = run(page)[1]
    d2 = {(d.source, d.target): d for d in nxt.differentials(2)}
    # Sq^2 a = 0 and Sq^2 a^2 = a^4 on Z/2 rows t = -1
    assert d2[((1, -1), (3, -2))].note == "zero"
    assert d2[((2, -1), (4, -2))].note == "nonzero"


def test_unidentified_differential_refuses_convergence():
    result = converge(run(e2_topological(builtin("RP8"), (0, 0), reduced=True)))[0]
    assert result.status == "refused" and result.group is None
    assert result.blockers and all(b.status == UNSUPPORTED for b in result.blockers)


def test_converge_needs_final_page():
    page = e2_topological(builtin("S4"), (0, 0), reduced=True)
    with pytest.raises(ValueError):
        converge([page])


# --- structural properties -----------------------------------------------------------------

PRESENTATIONS = ["S5", "S8", "RP2", "RP4", "RP6", "RP8", "CP2", "CP3", "CP4"]


@pytest.mark.parametrize("name", PRESENTATIONS)
@pytest.mark.parametrize("variant", ["topological", "differential"])
def test_boundaries_inside_cycles(name, variant):
    """d o d = 0: every page keeps B_r inside Z_r, and consecutive evaluated
    matrices compose to zero modulo the target's boundaries."""
    build = e2_topological if variant == "topological" else e2_differential
    pages = run(build(builtin(name), (-3, 3), reduced=True))
    for page in pages:
        for e in page.entries.values():
            if e.kind != "forms":
                assert e.cycles.contains_lattice(e.boundaries)
    for page, nxt in zip(pages, pages[1:]):
        recs = [d for d in nxt.differentials(page.r) if d.matrix is not None]
        by_source = {d.source: d for d in recs}
        for d in recs:
            follow = by_source.get(d.target)
            if follow is None:
                continue
            tgt = page.entries[follow.target]
            src = page.entries[d.source]
            for v in src.cycles.basis:
                mid = [sum(a * b for a, b in zip(row, v)) for row in d.matrix]
                out = [sum(a * b for a, b in zip(row, mid)) for row in follow.matrix]
                assert (tgt.boundaries + _diag(tgt.orders)).contains(out)


def _diag(orders):
    from diffko.abelian import Lattice
    return Lattice.diagonal(orders)


@pytest.mark.parametrize("name", PRESENTATIONS)
def test_entries_stabilize(name):
    pages = run(e2_topological(builtin(name), (-3, 3), reduced=True))
    dim = pages[0].dimension
    for i, page in enumerate(pages):
        r = page.r
        for key, e in page.entries.items():
            s = key[0]
            if s - r < 0 and s + r > dim:
                for later in pages[i:]:
                    assert later.entries[key].descriptor() == e.descriptor()


@pytest.mark.parametrize("name", PRESENTATIONS)
def test_variants_agree_in_the_first_quadrant(name):
    pres = builtin(name)
    top = run(e2_topological(pres, (1, 12), reduced=True))
    dif = run(e2_differential(pres, (1, 12), reduced=True))
    for a, b in zip(top, dif):
        for key, e in a.entries.items():
            if key[1] > 0 and key in b.entries and not e.tainted and not b.entries[key].tainted:
                assert e.descriptor() == b.entries[key].descriptor(), (a.r, key)
        da = {(d.source, d.target): d.note for d in a.log if d.source[1] > 0 and d.target[1] > 0}
        db = {(d.source, d.target): d.note for d in b.log if d.source[1] > 0 and d.target[1] > 0}
        assert {k: v for k, v in da.items() if k in db} == {k: v for k, v in db.items() if k in da}


def test_slot_summary_lists_lattices():
    pages = run(e2_differential(builtin("CP4"), (0, 0), reduced=False, slot=FormSlot({4: (1,), 8: (1,)})))
    summary = slot_summary(pages[-1])
    assert summary["period_lattices"][4]["multiplier"] == 2
    assert summary["period_lattices"][8]["multiplier"] == 1
    assert summary["exact_summands"] == [3, 7]


# --- odd-primary component -----------------------------------------------------------------

def _odd_doc():
    return json.loads((DATA / "odd_torsion_16.json").read_text())


def test_odd_primary_nonzero_is_flagged():
    pres = load_presentation(_odd_doc())
    page = e2_differential(pres, (0, 0), reduced=True)
    ev = odd_primary_differential(page, 3, 1, (7, -7))
    assert ev.length == 9 and ev.target == (16, -15)
    assert ev.image == "nonzero" and ev.unit_ambiguous


def test_odd_primary_excess_on_degree_three():
    doc = {
        "schema_version": 1, "name": "three-torsion-4", "dimension": 12,
        "integral": {"0": {"free": 1, "torsion": [], "labels": ["1"]},
                     "4": {"free": 0, "torsion": [9], "labels": ["z"]},
                     "12": {"free": 1, "torsion": [], "labels": ["t"]}},
        "mod2": {"0": ["1"], "12": ["t"]},
        "rho2": {"0": [[1]], "12": [[1]]},
        "sq": {"12": {"0": [[0]]}},
        "odd_primary": [{"class": "z", "prime": 3, "divisibility": 1,
                         "reduced_powers": {"2": {"nonzero": True, "bockstein_zero": True}}}],
    }
    page = e2_differential(load_presentation(doc), (0, 0), reduced=True)
    ev = odd_primary_differential(page, 3, 1, (3, -3))
    assert ev.image == "zero" and not ev.unit_ambiguous and "excess" in ev.reason
    rp = e2_differential(builtin("RP8"), (0, 0), reduced=True)
    ev2 = odd_primary_differential(rp, 2, 1, (3, -3))
    assert ev2.image == "zero" and ev2.operation == "Sq^8"


def test_odd_primary_insufficient_divisibility_is_unsupported():
    doc = _odd_doc()
    doc["odd_primary"][0]["divisibility"] = 0
    page = e2_differential(load_presentation(doc), (0, 0), reduced=True)
    ev = odd_primary_differential(page, 3, 1, (7, -7))
    assert ev.status == UNSUPPORTED and ev.image == "unknown"


def test_odd_primary_without_data_is_unsupported():
    doc = _odd_doc()
    del doc["odd_primary"]
    page = e2_differential(load_presentation(doc), (0, 0), reduced=True)
    assert odd_primary_differential(page, 3, 1, (7, -7)).status == UNSUPPORTED


def test_odd_primary_rejects_bad_rows():
    page = e2_differential(builtin("S8"), (0, 0), reduced=True)
    with pytest.raises(ValueError):
        odd_primary_differential(page, 3, 1, (2, -2))
    with pytest.raises(ValueError):
        odd_primary_differential(page, 4, 1, (3, -3))
