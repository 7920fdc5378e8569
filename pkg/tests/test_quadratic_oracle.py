import numpy as np
import pytest

from sympdefect.defect import analyze
from sympdefect.integrators import Scheme, SchemeConfig
from sympdefect.quadratic_oracle import coupling_power, predicted_defect_blocks
from sympdefect.state import PhaseState


def test_first_power_band_signs():
    cp = coupling_power(4, 1)
    for offset in range(-3, 4):
        expected = 0 if offset == 0 else (-2 if offset < 0 else 1)
        assert cp.diagonal_value(offset) == expected
    assert cp.matrix.dtype == np.int64


def test_zeroth_power_is_identity():
    cp = coupling_power(5, 0)
    assert np.array_equal(cp.matrix, np.eye(5, dtype=np.int64))
    assert cp.is_symmetric


def test_two_dimensional_even_powers_collapse_to_scaled_identity():
    sq = coupling_power(2, 2)
    assert np.array_equal(sq.matrix, [[-2, 0], [0, -2]])
    assert sq.is_symmetric
    for k in (1, 2, 3):
        cp = coupling_power(2, 2 * k)
        assert np.array_equal(cp.matrix, (-2) ** k * np.eye(2, dtype=np.int64))


def test_symmetry_only_in_the_degenerate_cases():
    for n in range(2, 9):
        for m in range(0, 7):
            cp = coupling_power(n, m)
            assert cp.is_symmetric == (m == 0 or (n == 2 and m % 2 == 0))


def test_band_matches_matrix_across_grid():
    for n in (2, 3, 5, 8):
        for m in (1, 2, 4, 6):
            cp = coupling_power(n, m)
            for offset, value in cp.band.items():
                row = max(0, offset)
                assert cp.matrix[row, row - offset] == value


def test_power_matches_repeated_multiplication():
    base = coupling_power(5, 1).matrix
    acc = np.eye(5, dtype=np.int64)
    for m in range(0, 5):
        assert np.array_equal(coupling_power(5, m).matrix, acc)
        acc = acc @ base


def test_range_validation():
    with pytest.raises(ValueError):
        coupling_power(1, 2)
    with pytest.raises(ValueError):
        coupling_power(65, 2)
    with pytest.raises(ValueError):
        coupling_power(3, -1)
    with pytest.raises(ValueError):
        coupling_power(3, 17)


def test_overflow_guard():
    # (64, 8) still fits int64; (64, 16) is refused rather than wrapped
    assert coupling_power(64, 8).band[0] == -501221085642
    with pytest.raises(ValueError, match="overflow"):
        coupling_power(64, 16)


def test_predicted_blocks_frozen_two_dimensional_case():
    h = 0.1
    diag, antidiag = predicted_defect_blocks(2, 1, h)
    np.testing.assert_allclose(
        diag, [[0.0, 3.0 * h**2], [-3.0 * h**2, 0.0]], rtol=1e-15
    )
    np.testing.assert_allclose(antidiag, (1.0 + 2.0 * h**2) * np.eye(2), rtol=1e-15)


def test_predicted_blocks_follow_the_closed_form():
    # diag = 2 (-1)^m h^(m+1) skew(C^m), antidiag = I + (-1)^m h^(m+1) C^(m+1)
    h = 0.1
    for m in (1, 2, 3):
        sign = (-1.0) ** m
        c_m = coupling_power(3, m).matrix.astype(float)
        c_m1 = coupling_power(3, m + 1).matrix.astype(float)
        diag, antidiag = predicted_defect_blocks(3, m, h)
        np.testing.assert_allclose(
            diag, sign * h ** (m + 1) * (c_m - c_m.T), rtol=1e-15
        )
        np.testing.assert_allclose(
            antidiag, np.eye(3) + sign * h ** (m + 1) * c_m1, rtol=1e-15
        )


def test_predicted_blocks_validation():
    with pytest.raises(ValueError):
        predicted_defect_blocks(3, 2, -0.1)
    with pytest.raises(ValueError):
        predicted_defect_blocks(3, 2, np.inf)


def test_prediction_matches_measured_defect(quad3):
    state = PhaseState(np.full(3, 0.3), np.full(3, -0.2))
    pred_diag, pred_anti = predicted_defect_blocks(3, 2, 0.1)
    rep = analyze(quad3, SchemeConfig(Scheme.P_IMPLICIT, 0.1, M=2), state)
    np.testing.assert_allclose(rep.diag_q, pred_diag, rtol=1e-9, atol=1e-13)
    np.testing.assert_allclose(rep.antidiag, pred_anti, rtol=1e-9, atol=1e-13)
