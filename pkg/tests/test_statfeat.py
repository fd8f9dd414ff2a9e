import math

import numpy as np
import pytest
from scipy.special import gamma as gamma_fn

from s2oiqa.errors import InvalidArgument, ShapeError
from s2oiqa.raster import Raster
from s2oiqa.statfeat import (GP_DIM, LBP_BINS, LP_DIM, STAT_DIM,
                             aggregate_viewports, extract_viewport_features,
                             fit_aggd, fit_ggd, lbp_histogram, mscn_features,
                             mscn_map)


def gamma_ratio(alpha):
    return gamma_fn(2 / alpha) ** 2 / (gamma_fn(1 / alpha) * gamma_fn(3 / alpha))


def brute_force_shape(target, grid=None):
    """Independent moment-matching oracle: exhaustive scan of the shape grid."""
    if grid is None:
        grid = np.arange(0.2, 10.0, 1e-3)
    return grid[np.argmin(np.abs(gamma_ratio(grid) - target))]


def sample_ggd(rng, alpha, sigma2, n):
    beta = math.sqrt(sigma2 * gamma_fn(1 / alpha) / gamma_fn(3 / alpha))
    mag = beta * rng.gamma(1 / alpha, 1.0, n) ** (1 / alpha)
    return mag * rng.choice([-1.0, 1.0], n)


def sample_aggd(rng, alpha, sigma_l2, sigma_r2, n):
    beta_l = math.sqrt(sigma_l2 * gamma_fn(1 / alpha) / gamma_fn(3 / alpha))
    beta_r = math.sqrt(sigma_r2 * gamma_fn(1 / alpha) / gamma_fn(3 / alpha))
    p_left = beta_l / (beta_l + beta_r)
    side = rng.uniform(size=n) < p_left
    mag = rng.gamma(1 / alpha, 1.0, n) ** (1 / alpha)
    return np.where(side, -beta_l * mag, beta_r * mag)


class TestLbp:
    def test_constant_indicator(self):
        h = lbp_histogram(Raster(np.full((16, 16), 42.0)))
        assert h.shape == (LBP_BINS,)
        assert h.sum() == pytest.approx(1.0, abs=1e-12)
        # all-ones code (255) is uniform; all mass lands in its single bin
        assert h.max() == pytest.approx(1.0)
        assert np.count_nonzero(h) == 1

    def test_step_image_few_bins(self):
        a = np.zeros((32, 32))
        a[:, 16:] = 255.0
        h = lbp_histogram(Raster(a))
        assert h.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.count_nonzero(h) <= 4

    def test_normalized_nonnegative(self):
        rng = np.random.default_rng(0)
        for _ in range(5):
            h = lbp_histogram(Raster(rng.uniform(0, 255, (24, 31))))
            assert h.sum() == pytest.approx(1.0, abs=1e-9)
            assert np.all(h >= 0)

    def test_too_small(self):
        with pytest.raises(ShapeError):
            lbp_histogram(Raster(np.zeros((2, 5))))


class TestMscn:
    def test_gaussian_noise_shape(self):
        rng = np.random.default_rng(1)
        a = np.clip(128 + 30 * rng.standard_normal((256, 256)), 0, 255)
        feats = mscn_features(Raster(a))
        assert feats.shape == (36,)
        # the fitted shape must agree with the independent moment-matching
        # oracle applied to the same MSCN map
        m = mscn_map(a)
        target = np.mean(np.abs(m)) ** 2 / np.mean(m ** 2)
        assert feats[0] == pytest.approx(brute_force_shape(target), abs=2e-3)
        # normalizing by a true (far-field) sigma recovers the Gaussian shape;
        # the 7x7 local window shortens tails and sits near 3
        true_shape, _ = fit_ggd((a - 128.0) / 31.0)
        assert 1.8 <= true_shape <= 2.2
        assert 1.8 <= feats[0] <= 3.2

    def test_constant_degenerate_floors(self):
        feats = mscn_features(Raster(np.full((32, 32), 99.0)))
        assert feats[0] == 10.0 and feats[1] == 1e-6
        # each AGGD block: (shape, mean, var_l, var_r)
        for k in range(4):
            blk = feats[2 + 4 * k: 6 + 4 * k]
            assert blk[0] == 10.0 and blk[1] == 0.0
            assert blk[2] == 1e-6 and blk[3] == 1e-6

    def test_all_finite_36(self):
        rng = np.random.default_rng(7)
        feats = mscn_features(rng.uniform(-40, 40, (48, 64)))
        assert feats.shape == (36,)
        assert np.all(np.isfinite(feats))

    def test_too_small(self):
        with pytest.raises(ShapeError):
            mscn_features(Raster(np.zeros((8, 8))))

    def test_mscn_map_statistics(self):
        rng = np.random.default_rng(3)
        a = np.clip(128 + 40 * rng.standard_normal((128, 128)), 0, 255)
        m = mscn_map(a)
        assert abs(m.mean()) < 0.1
        assert 0 < m.var() < 4


class TestFits:
    def test_ggd_recovery(self):
        rng = np.random.default_rng(11)
        for alpha in (0.7, 1.0, 2.0):
            x = sample_ggd(rng, alpha, 1.0, 100_000)
            shape, var = fit_ggd(x)
            target = np.mean(np.abs(x)) ** 2 / np.mean(x ** 2)
            assert shape == pytest.approx(brute_force_shape(target), abs=2e-3)
            assert abs(shape - alpha) <= 0.15

    def test_aggd_recovery(self):
        rng = np.random.default_rng(13)
        x = sample_aggd(rng, 0.7, 1.0, 4.0, 100_000)
        shape, mean, var_l, var_r = fit_aggd(x)
        assert abs(shape - 0.7) <= 0.15
        assert var_r / var_l == pytest.approx(4.0, rel=0.20)
        assert mean > 0  # right-heavy distribution

    def test_aggd_matches_brute_force_oracle(self):
        rng = np.random.default_rng(17)
        x = sample_aggd(rng, 1.2, 2.0, 0.5, 50_000)
        shape, *_ = fit_aggd(x)
        sigma_l = math.sqrt(np.mean(x[x < 0] ** 2))
        sigma_r = math.sqrt(np.mean(x[x >= 0] ** 2))
        gh = sigma_l / sigma_r
        rh = np.mean(np.abs(x)) ** 2 / np.mean(x ** 2)
        target = rh * (gh ** 3 + 1) * (gh + 1) / (gh ** 2 + 1) ** 2
        assert shape == pytest.approx(brute_force_shape(target), abs=2e-3)


class TestViewportFeatures:
    def test_length_249(self):
        rng = np.random.default_rng(2)
        v = Raster(rng.uniform(0, 255, (256, 256)))
        f = extract_viewport_features(v)
        assert f.shape == (STAT_DIM,)
        assert GP_DIM + LP_DIM == STAT_DIM == 249
        for k in range(3):
            assert f[k * LBP_BINS:(k + 1) * LBP_BINS].sum() == pytest.approx(1.0, abs=1e-9)

    def test_constant_viewport(self):
        f = extract_viewport_features(Raster(np.full((64, 64), 50.0)))
        h0 = f[:LBP_BINS]
        assert np.count_nonzero(h0) == 1
        np.testing.assert_array_equal(f[:LBP_BINS], f[LBP_BINS:2 * LBP_BINS])
        lp = f[GP_DIM:]
        assert lp[0] == 10.0  # degenerate GGD floor

    def test_deterministic(self):
        rng = np.random.default_rng(5)
        v = Raster(rng.uniform(0, 255, (128, 128)))
        np.testing.assert_array_equal(extract_viewport_features(v),
                                      extract_viewport_features(v))


class TestAggregate:
    def test_single(self):
        v = np.arange(249.0)
        np.testing.assert_array_equal(aggregate_viewports([v]), v)

    def test_mean_of_two(self):
        a, b = np.zeros(5), np.ones(5)
        np.testing.assert_allclose(aggregate_viewports([a, b]), 0.5)

    def test_idempotent_and_permutation_invariant(self):
        rng = np.random.default_rng(6)
        vs = [rng.uniform(size=10) for _ in range(4)]
        fwd = aggregate_viewports(vs)
        np.testing.assert_allclose(aggregate_viewports(vs[::-1]), fwd)
        np.testing.assert_allclose(aggregate_viewports([vs[0]] * 3), vs[0])

    def test_empty(self):
        with pytest.raises(InvalidArgument):
            aggregate_viewports([])
