import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sgboost import NumericalError, ValidationError
from sgboost.design import thin_svd
from sgboost.ridge import (RidgePenalty, boosted_rss, effective_df, lambda_for_df,
                           lambda_for_df_single, lambda_for_trace_df, ridge_fit, ridge_fitted,
                           rss_one_step, trace_df)


def hat(M, lam):
    return M @ np.linalg.solve(M.T @ M + lam * np.eye(M.shape[1]), M.T)


def test_penalty_validation():
    with pytest.raises(ValidationError):
        RidgePenalty(-1.0)
    with pytest.raises(ValidationError):
        RidgePenalty(float("nan"))
    assert float(RidgePenalty(2.5)) == 2.5


def test_ridge_fit_identity():
    np.testing.assert_allclose(ridge_fit(np.eye(2), [2.0, 4.0], 1.0), [1.0, 2.0])


def test_ridge_fit_scalar():
    x = np.array([[2.0], [0.0]])
    y = np.array([4.0, 7.0])
    np.testing.assert_allclose(ridge_fit(x, y, 4.0), [1.0])


def test_ridge_fit_least_squares_orthogonality(rng):
    M = rng.standard_normal((10, 3))
    y = rng.standard_normal(10)
    b = ridge_fit(M, y, 0.0)
    assert np.linalg.norm(M.T @ (y - M @ b)) <= 1e-8


def test_ridge_fit_matches_normal_equations(rng):
    M = rng.standard_normal((12, 4))
    y = rng.standard_normal(12)
    direct = np.linalg.solve(M.T @ M + 2.0 * np.eye(4), M.T @ y)
    np.testing.assert_allclose(ridge_fit(M, y, 2.0), direct, rtol=1e-10)
    np.testing.assert_allclose(ridge_fitted(M, y, 2.0), M @ direct, rtol=1e-10)


def test_ridge_fit_rank_deficient_unpenalized():
    M = np.array([[1.0, 1.0], [2.0, 2.0], [0.0, 0.0]])
    with pytest.raises(ValidationError):
        ridge_fit(M, [1.0, 2.0, 3.0], 0.0)


def test_effective_df_examples():
    assert effective_df([2.0], 4.0) == pytest.approx(0.75, abs=1e-15)
    assert effective_df([1.0, 1.0, 1.0], 0.0) == 3.0
    assert effective_df([1.0], 1e12) <= 1e-11


def test_trace_df_examples():
    assert trace_df([2.0], 4.0) == pytest.approx(0.5)
    assert trace_df([1.0, 1.0], 1.0) == pytest.approx(1.0)


def test_effective_df_matches_hat_matrix(rng):
    M = rng.standard_normal((9, 4))
    H = hat(M, 1.7)
    direct = np.trace(2 * H - H.T @ H)
    assert effective_df(thin_svd(M).d, 1.7) == pytest.approx(direct, rel=1e-12)
    assert trace_df(thin_svd(M).d, 1.7) == pytest.approx(np.trace(H), rel=1e-12)


def test_lambda_for_df_single_examples():
    assert lambda_for_df_single(2.0, 0.75) == pytest.approx(4.0, rel=1e-12)
    assert lambda_for_df_single(3.0, 1.0) == 0.0
    assert lambda_for_df_single(1.0, 0.5) == pytest.approx((0.5 + math.sqrt(0.5)) / 0.5, rel=1e-12)


def test_lambda_for_df_single_domain():
    for t in (0.0, -0.1, 1.1):
        with pytest.raises(ValidationError):
            lambda_for_df_single(1.0, t)


def test_lambda_for_df_examples():
    assert lambda_for_df([2.0], 0.75) == pytest.approx(4.0, rel=1e-9)
    assert lambda_for_df([1.0, 1.0, 1.0], 3 - 1e-12) == pytest.approx(0.0, abs=1e-6)
    lam = lambda_for_df([3.0, 1.0], 1.0)
    assert abs(effective_df([3.0, 1.0], lam) - 1.0) <= 1e-10


def test_lambda_for_df_against_grid_scan():
    grid = np.linspace(0.0, 50.0, 500_001)
    d2 = np.array([9.0, 1.0])[:, None]
    s = grid / (d2 + grid)
    df = np.sum(1 - s ** 2, axis=0)
    scan = grid[np.argmin(np.abs(df - 1.0))]
    assert lambda_for_df([3.0, 1.0], 1.0) == pytest.approx(scan, abs=2e-4)


def test_lambda_for_df_rank_error():
    with pytest.raises(ValidationError, match="target exceeds rank"):
        lambda_for_df([1.0, 2.0], 2.0)


def test_lambda_for_trace_df():
    lam = lambda_for_trace_df([2.0, 1.0], 1.2)
    assert trace_df([2.0, 1.0], lam) == pytest.approx(1.2, abs=1e-10)


def test_lambda_for_df_unreachable_target_is_error():
    # squared singular values underflow to 0, so df jumps from 2 to 0
    with pytest.raises(NumericalError):
        lambda_for_df([1e-300, 1e-300], 0.5)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.floats(0.05, 20.0), min_size=1, max_size=5),
       st.floats(0.0, 1e4), st.floats(1e-4, 1e3))
def test_effective_df_decreasing_and_above_trace(d, lam, delta):
    hi, lo = effective_df(d, lam), effective_df(d, lam + delta)
    assert lo <= hi + 1e-12
    assert 0 <= lo <= len(d)
    assert effective_df(d, lam) >= trace_df(d, lam) - 1e-12


@settings(max_examples=200, deadline=None)
@given(st.floats(0.05, 50.0), st.floats(0.01, 1.0))
def test_single_closed_form_round_trip(d, t):
    assert effective_df([d], lambda_for_df_single(d, t)) == pytest.approx(t, abs=1e-9)


def test_rss_one_step_examples(rng):
    M = np.array([[1.0], [0.0], [0.0]])
    y = np.array([0.0, 2.0, 1.0])
    assert rss_one_step(M, y, 0.5) == pytest.approx(5.0)
    assert rss_one_step(np.eye(4), rng.standard_normal(4), 0.0) == pytest.approx(0.0, abs=1e-12)
    M = rng.standard_normal((8, 2))
    y = rng.standard_normal(8)
    r = y - hat(M, 3.0) @ y
    assert rss_one_step(M, y, 3.0) == pytest.approx(r @ r, rel=1e-10)


def test_rss_one_step_batch(rng):
    M = rng.standard_normal((8, 3))
    Y = rng.standard_normal((8, 5))
    batch = rss_one_step(M, Y, 1.5)
    np.testing.assert_allclose(batch, [rss_one_step(M, Y[:, i], 1.5) for i in range(5)], rtol=1e-12)


def test_rss_large_penalty_limit(rng):
    M = rng.standard_normal((6, 2))
    y = rng.standard_normal(6)
    assert rss_one_step(M, y, 1e12) == pytest.approx(y @ y, rel=1e-9)


def test_boosted_rss_matches_hat_power(rng):
    M = rng.standard_normal((7, 3))
    y = rng.standard_normal(7)
    H = hat(M, 2.0)
    for m in (0, 1, 4):
        R = np.linalg.matrix_power(np.eye(7) - H, m + 1)
        assert boosted_rss(M, y, 2.0, m) == pytest.approx(np.sum((R @ y) ** 2), rel=1e-10)


def test_boosted_rss_limits(rng):
    M = rng.standard_normal((5, 5))
    y = rng.standard_normal(5)
    assert boosted_rss(M, y, 3.0, 0) == pytest.approx(rss_one_step(M, y, 3.0))
    assert boosted_rss(M, y, 0.0, 0) == pytest.approx(0.0, abs=1e-10)


def test_boosted_rss_monotone_to_projection(rng):
    M = rng.standard_normal((10, 3))
    y = rng.standard_normal(10)
    vals = [boosted_rss(M, y, 5.0, m) for m in range(201)]
    assert all(b <= a + 1e-12 for a, b in zip(vals, vals[1:]))
    r = y - hat(M, 0.0) @ y
    assert vals[-1] == pytest.approx(r @ r, rel=1e-6)
