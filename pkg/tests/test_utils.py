import math
import random
import pytest
import numpy as np
from ptchain.utils import (
    principal_sqrt,
    real_if_close,
    interior_grid,
    scan_grid,
    bisect_predicate,
    sort_complex,
    match_spectra,
    spectra_match,
    conjugation_residual,
)


TRIALS = 100


def test_principal_sqrt_negative_real():
    assert principal_sqrt(-4.0) == 2j
    assert principal_sqrt(complex(-4.0, -0.0)) == 2j


def test_principal_sqrt_non_negative_real_part():
    for _ in range(TRIALS):
        value = complex(random.uniform(-5, 5), random.uniform(-5, 5))
        root = principal_sqrt(value)
        assert root.real >= 0
        assert abs(root * root - value) < 1e-12


def test_real_if_close():
    assert real_if_close(complex(2.0, 0.0)) == 2.0
    assert isinstance(real_if_close(complex(2.0, 0.0)), float)
    assert real_if_close(2.0 + 1e-20j) == 2.0 + 1e-20j


def test_interior_grid():
    grid = interior_grid(9)
    assert len(grid) == 9
    np.testing.assert_allclose(grid, np.arange(1, 10) * math.pi / 10)
    assert grid[0] > 0
    assert grid[-1] < math.pi


def test_interior_grid_too_small():
    with pytest.raises(ValueError):
        interior_grid(1)


def test_scan_grid_has_special_momenta():
    grid = scan_grid(10)
    assert grid[0] == 0.0
    assert grid[-1] == math.pi
    assert math.pi / 2 in grid
    assert np.all(np.diff(grid) > 0)


def test_bisect_predicate():
    def test():
        target = random.uniform(0.1, 0.9)
        found = bisect_predicate(lambda x: x <= target, 0.0, 1.0, 1e-10)
        assert found <= target
        assert target - found < 1e-10

    for _ in range(TRIALS):
        test()


def test_bisect_predicate_reversed_bracket():
    found = bisect_predicate(lambda x: x >= 0.3, 1.0, 0.0, 1e-10)
    assert found >= 0.3
    assert found - 0.3 < 1e-10


def test_bisect_predicate_tol_below_float_spacing():
    found = bisect_predicate(lambda x: x <= 1.6, 0.0, 3.0, 1e-17)
    assert found <= 1.6
    assert found == pytest.approx(1.6, abs=1e-15)
    found = bisect_predicate(lambda x: x >= 0.3, 1.0, 0.0, 1e-300)
    assert found >= 0.3
    assert found - 0.3 < 1e-15


def test_bisect_predicate_bad_tol():
    with pytest.raises(ValueError):
        bisect_predicate(lambda x: True, 0.0, 1.0, 0.0)


def test_sort_complex():
    values = [1 + 2j, -1 + 0j, 1 - 2j, 0.5j]
    assert list(sort_complex(values)) == [-1 + 0j, 0.5j, 1 - 2j, 1 + 2j]


def test_match_spectra_permutation():
    def test():
        values = np.random.randn(20) + 1j * np.random.randn(20)
        shuffled = np.random.permutation(values)
        assert match_spectra(values, shuffled) == 0.0
        assert spectra_match(values, shuffled)

    for _ in range(TRIALS):
        test()


def test_match_spectra_offset():
    values = np.array([0.0, 1.0, 2.0], dtype=complex)
    assert match_spectra(values, values + 1e-3) == pytest.approx(1e-3)
    assert not spectra_match(values, values + 1e-3)


def test_match_spectra_size_mismatch():
    with pytest.raises(ValueError):
        match_spectra([1.0], [1.0, 2.0])


def test_match_spectra_empty():
    assert match_spectra([], []) == 0.0


def test_conjugation_residual():
    assert conjugation_residual([1 + 1j, 1 - 1j, 3.0]) == 0.0
    assert conjugation_residual([1 + 1j]) == pytest.approx(2.0)
