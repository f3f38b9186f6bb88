import math

import numpy as np
import pytest

from fbmbt.fgn import (
    CapacityError,
    cov_fbm,
    increment_cov_matrix,
    rho,
    sample_fbm_2d,
    sample_increments,
    sum_rho_cubed,
)
from fbmbt.rng import generator


def test_rho_basic_values():
    for H in (0.1, 1 / 6, 0.3, 0.49):
        assert float(rho(0, H)) == 1.0
        assert float(rho(1, H)) == pytest.approx(2 ** (2 * H - 1) - 1, abs=1e-15)
        assert float(rho(-5, H)) == float(rho(5, H))


def test_rho_brownian_case_is_exact_zero():
    k = np.arange(-10, 11)
    vals = rho(k, 0.5)
    assert vals[10] == 1.0
    assert np.all(vals[k != 0] == 0.0)


def test_rho_large_lag_matches_direct_formula():
    # the expm1 branch must agree with the naive second difference where
    # the naive form is still accurate
    for H in (0.1, 0.3, 0.49):
        for k in (9, 20, 1000):
            naive = 0.5 * ((k + 1) ** (2 * H) + (k - 1) ** (2 * H) - 2 * k ** (2 * H))
            assert float(rho(k, H)) == pytest.approx(naive, rel=1e-9)


def test_rho_negative_for_small_hurst():
    assert float(rho(1, 0.1)) < 0
    assert float(rho(1, 1 / 6)) < 0


def test_rho_invalid_hurst():
    with pytest.raises(ValueError):
        rho(1, 0.0)
    with pytest.raises(ValueError):
        rho(1, 1.0)


def test_cov_fbm_values():
    H = 0.3
    assert cov_fbm(1.0, 1.0, H) == pytest.approx(1.0)
    assert cov_fbm(1.0, 0.0, H) == 0.0
    # two-sided covariance between t and -t
    assert cov_fbm(1.0, -1.0, H) == pytest.approx(1.0 - 0.5 * 2 ** (2 * H))
    assert cov_fbm(0.5, 2.0, H) == cov_fbm(2.0, 0.5, H)


def test_increment_cov_matrix_matches_cov_differences():
    H, n, count = 0.3, 4, 6
    spacing = 2.0 ** (-n / 2)
    mat = increment_cov_matrix(H, n, count)
    for a in range(count):
        for b in range(count):
            want = (
                cov_fbm((a + 1) * spacing, (b + 1) * spacing, H)
                - cov_fbm((a + 1) * spacing, b * spacing, H)
                - cov_fbm(a * spacing, (b + 1) * spacing, H)
                + cov_fbm(a * spacing, b * spacing, H)
            )
            assert mat[a, b] == pytest.approx(want, abs=1e-14)


def test_sum_rho_cubed_matches_bruteforce():
    for H in (0.1, 1 / 6, 0.3):
        res = sum_rho_cubed(H, 50)
        brute = sum(float(rho(r, H)) ** 3 for r in range(-50, 51))
        assert res.value == pytest.approx(brute, rel=1e-12)
        assert res.tail_bound > 0


def test_sum_rho_cubed_tail_decreases():
    t1 = sum_rho_cubed(1 / 6, 100).tail_bound
    t2 = sum_rho_cubed(1 / 6, 10000).tail_bound
    assert t2 < t1


def test_sum_rho_cubed_domain_errors():
    with pytest.raises(ValueError):
        sum_rho_cubed(0.9, 100)
    with pytest.raises(ValueError):
        sum_rho_cubed(0.3, 1)


def test_sample_fbm_marginal_variance():
    # X at time 1 (grid index 2^{n/2}) must have unit variance
    H, n = 1 / 6, 6
    m = 8  # 2^{n/2}
    vals = []
    for seed in range(400):
        path = sample_fbm_2d(H, n, 0, m, seed)
        vals.append(path.value(1, m))
    var = np.var(vals, ddof=1)
    assert var == pytest.approx(1.0, abs=0.25)


def test_sample_fbm_two_sided_covariance():
    # empirical cov between X(t) and X(-t) matches the two-sided formula
    H, n, m = 0.3, 6, 8
    pairs = np.array(
        [
            [sample_fbm_2d(H, n, -m, m, seed).value(1, m),
             sample_fbm_2d(H, n, -m, m, seed).value(1, -m)]
            for seed in range(600)
        ]
    )
    emp = np.mean(pairs[:, 0] * pairs[:, 1])
    assert emp == pytest.approx(cov_fbm(1.0, -1.0, H), abs=0.15)


def test_sample_fbm_components_independent():
    H, n, m = 0.3, 6, 8
    prods = [
        sample_fbm_2d(H, n, 0, m, seed).value(1, m)
        * sample_fbm_2d(H, n, 0, m, seed).value(2, m)
        for seed in range(600)
    ]
    assert abs(np.mean(prods)) < 0.15


def test_sample_fbm_anchored_and_reproducible():
    path = sample_fbm_2d(0.3, 8, -5, 11, 987)
    assert path.value(1, 0) == 0.0
    assert path.value(2, 0) == 0.0
    again = sample_fbm_2d(0.3, 8, -5, 11, 987)
    assert np.array_equal(path.values1, again.values1)
    assert np.array_equal(path.values2, again.values2)


def test_sample_fbm_nested_ranges_consistent():
    # padding must not change the values on a shared grid
    small = sample_fbm_2d(0.3, 8, 0, 5, 55)
    big = sample_fbm_2d(0.3, 8, 0, 8, 55)
    np.testing.assert_allclose(small.values1, big.values1[:6], rtol=0, atol=1e-12)


def test_sample_increments_circulant_vs_cholesky_covariance():
    # both samplers must produce the target increment covariance
    from fbmbt.fgn import _cholesky_factor

    H, spacing, size = 1 / 6, 0.125, 16
    target = spacing ** (2 * H) * np.array([float(rho(k, H)) for k in range(size)])
    chol = _cholesky_factor(H, spacing, size)
    cov_c = chol @ chol.T
    np.testing.assert_allclose(cov_c[0], target, atol=1e-12)
    draws = np.array(
        [sample_increments(H, spacing, size, generator(s, 1)) for s in range(3000)]
    )
    emp = draws.T @ draws / len(draws)
    assert np.max(np.abs(emp[0] - target)) < 0.05


def test_grid_must_contain_origin():
    with pytest.raises(ValueError):
        sample_fbm_2d(0.3, 8, 1, 5, 1)


def test_capacity_limit():
    with pytest.raises(CapacityError):
        sample_fbm_2d(0.3, 60, 0, 1 << 23, 1)


def test_segment_bounds_checked():
    path = sample_fbm_2d(0.3, 8, -2, 4, 3)
    with pytest.raises(ValueError):
        path.segment(1, -3, 2)
    with pytest.raises(ValueError):
        path.value(1, 5)
