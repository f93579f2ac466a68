from fractions import Fraction

import pytest

from xxz.perturb import (
    E2_TABLE,
    e2_coefficient,
    e2_alt_formula,
    e2_table,
    spectrum_symmetry_defect,
)

# exact second-order coefficients produced by the rational engine
FROZEN = {
    (1.0, 0): Fraction(-1, 3),
    (1.5, 0): Fraction(11, 12),
    (2.0, 0): Fraction(7, 3),
    (2.0, 1): Fraction(-1, 4),
    (2.0, 2): Fraction(-46, 5),
}


@pytest.mark.parametrize("key", sorted(FROZEN))
def test_frozen_engine_values(key):
    assert e2_coefficient(*key) == FROZEN[key]


@pytest.mark.parametrize("two_s", range(2, 7))
def test_particle_hole_symmetry(two_s):
    S = two_s / 2
    for n in range(two_s + 1):
        if (two_s, n) == (2, 1):
            continue
        assert e2_coefficient(S, n) == e2_coefficient(S, two_s - n)


def test_window_independent():
    assert e2_coefficient(1.5, 1, half=4) == e2_coefficient(1.5, 1, half=6)


def test_invalid_inputs():
    with pytest.raises(ValueError):
        e2_coefficient(1.0, 1)
    with pytest.raises(ValueError):
        e2_coefficient(1.0, 3)
    with pytest.raises(ArithmeticError):
        e2_coefficient(0.5, 0)


def test_table_shape():
    rows = e2_table(4)
    assert len(rows) == 3 + 4 + 5
    assert ("1", 1, "**") in rows


def test_tabulated_values_kept_for_comparison():
    assert E2_TABLE[1][0] == Fraction(-1, 6)
    assert e2_alt_formula(1.5, 3) == e2_alt_formula(1.5, 0)


@pytest.mark.parametrize("S,L,N", [(0.5, 7, 3), (1.0, 5, 4), (1.5, 4, 5)])
def test_spectrum_even_in_t(S, L, N):
    assert spectrum_symmetry_defect(L, S, N, 0.3) < 1e-11
