import copy
import json
import subprocess
import sys
from math import comb
from pathlib import Path

import pytest

from diffko.errors import InvariantViolation, PresentationError, UnsupportedOperation
from diffko.presentation import BUILTIN_NAMES, builtin, kunneth_product, load_presentation, u1_cohomology

ROOT = Path(__file__).resolve().parent.parent


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_builtins_load(name):
    p = builtin(name)
    assert p.name == name
    assert load_presentation(p.to_document()).degrees() == p.degrees()


def test_builtin_files_are_current():
    out = subprocess.run([sys.executable, str(ROOT / "scripts" / "generate_presentations.py"), "--check"],
                         capture_output=True, text=True)
    assert out.returncode == 0, out.stdout + out.stderr


def test_sphere_is_free_in_two_degrees():
    p = builtin("S8")
    assert [d for d in p.degrees() if p.integral(d).free] == [0, 8]
    assert all(not p.integral(d).torsion for d in p.degrees())


@pytest.mark.parametrize("n", range(1, 9))
def test_real_projective_squares_are_binomial(n):
    p = builtin(f"RP{n}")
    for j in range(1, n + 1):
        for i in range(0, n - j + 1):
            m = p.sq_matrix(i, j)
            assert m == [[comb(j, i) % 2]]


def test_rp4_ring():
    p = builtin("RP4")
    assert [p.mod2_dim(d) for d in range(6)] == [1, 1, 1, 1, 1, 0]
    assert p.cup_mod2("a", "a^3") == ["a^4"]
    assert p.cup_mod2("a^2", "a^3") == []


def _broken_sq(doc):
    doc = copy.deepcopy(doc)
    doc["sq"]["1"]["2"] = [[1]]   # Sq^1 a^2 = a^3, so Sq^1 Sq^1 a != 0
    return doc


def test_sq1_sq1_violation_detected():
    with pytest.raises(InvariantViolation):
        load_presentation(_broken_sq(builtin("RP4").to_document()))


def test_schema_errors_are_reported():
    doc = builtin("S2").to_document()
    del doc["integral"]
    with pytest.raises(PresentationError, match="schema"):
        load_presentation(doc)
    with pytest.raises(PresentationError):
        load_presentation("{not json")


def test_shape_mismatch_detected():
    doc = builtin("RP2").to_document()
    doc["rho2"]["2"] = [[1, 0]]
    with pytest.raises(InvariantViolation):
        load_presentation(doc)


def test_duplicate_labels_rejected():
    doc = builtin("RP2").to_document()
    doc["mod2"]["2"] = ["a"]
    with pytest.raises(PresentationError):
        load_presentation(doc)


def test_missing_data_is_unsupported_not_zero():
    doc = builtin("RP4").to_document()
    del doc["sq"]["2"]
    p = load_presentation(doc)
    with pytest.raises(UnsupportedOperation):
        p.sq_matrix(2, 2)


def test_load_from_path(tmp_path):
    f = tmp_path / "s3.json"
    f.write_text(json.dumps(builtin("S3").to_document()))
    assert load_presentation(str(f)).betti(3) == 1


def test_u1_cohomology_examples():
    g = u1_cohomology(builtin("S8"), 8)
    assert (g.circles, g.torsion) == (1, ())
    g = u1_cohomology(builtin("RP4"), 1)
    assert (g.circles, g.torsion) == (0, (2,))
    assert all(u1_cohomology(builtin("point"), k).is_zero for k in range(1, 5))


@pytest.mark.parametrize("name", ["S3", "S8", "CP3", "CP4"])
def test_u1_cohomology_torsion_free_is_torus(name):
    p = builtin(name)
    for k in range(p.top_degree + 1):
        g = u1_cohomology(p, k)
        assert g.torsion == () and g.circles == p.betti(k)


def test_kunneth_examples():
    p = kunneth_product(builtin("S4"), builtin("S8"))
    assert [d for d in range(13) if p.betti(d)] == [0, 4, 8, 12]
    t = kunneth_product(builtin("S1"), builtin("S1"))
    assert [t.betti(d) for d in range(3)] == [1, 2, 1]
    with pytest.raises(UnsupportedOperation):
        kunneth_product(builtin("RP2"), builtin("S1"))


@pytest.mark.parametrize("a,b", [("S2", "CP2"), ("S3", "S5"), ("CP1", "CP3")])
def test_kunneth_commutes_on_betti(a, b):
    x = kunneth_product(builtin(a), builtin(b))
    y = kunneth_product(builtin(b), builtin(a))
    assert [x.betti(d) for d in range(x.top_degree + 1)] == [y.betti(d) for d in range(y.top_degree + 1)]
