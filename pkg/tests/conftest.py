import json
from fractions import Fraction
from pathlib import Path

import pytest
from hypothesis import settings

from diffko.presentation import load_presentation

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")

DATA = Path(__file__).parent / "data"
GOLDEN = Path(__file__).parent / "golden"


def load_data(name: str) -> dict:
    return json.loads((DATA / name).read_text())


@pytest.fixture
def odd_torsion():
    return load_presentation(load_data("odd_torsion_16.json"))


@pytest.fixture
def odd_h4():
    return load_presentation(load_data("odd_h4_8.json"))


def evaluate(poly, values) -> Fraction:
    """Numeric value of a polynomial; ``values`` maps generator keys to numbers."""
    total = Fraction(0)
    for mono, c in poly.terms.items():
        term = Fraction(c)
        for key in mono:
            term *= Fraction(values[key])
        total += term
    return total
