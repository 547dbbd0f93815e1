import numpy as np
import pytest
from scipy import stats

from mvemu.linalg import FactorizationError
from mvemu.matvar import (InverseWishartParams, MatrixNormalParams, MatrixTParams,
                          MNIWParams, matrix_t_marginal, sample_inverse_wishart,
                          sample_matrix_normal, sample_matrix_t, sample_mniw)

from conftest import random_spd


class TestInverseWishart:
    def test_mean_formula(self):
        s = np.array([[4.0, 1.0], [1.0, 3.0]])
        p = InverseWishartParams(s, dof=6.0)
        assert np.allclose(p.mean(), s / 4.0)

    def test_mean_requires_dof(self):
        with pytest.raises(ValueError):
            InverseWishartParams(np.eye(2), dof=2.0).mean()

    def test_improper_not_sampleable(self):
        p = InverseWishartParams(np.eye(3), dof=-2.0)
        assert not p.is_proper
        with pytest.raises(ValueError, match="not sampleable"):
            sample_inverse_wishart(p, np.random.default_rng(0))

    def test_k1_reduces_to_inverse_gamma(self):
        # IW_1(S, delta) = InverseGamma(delta/2, S/2): compare the sample
        # CDF against the analytic inverse-gamma law
        s, delta = 3.0, 7.0
        rng = np.random.default_rng(5)
        draws = sample_inverse_wishart(
            InverseWishartParams([[s]], delta), rng, size=40_000).ravel()
        ig = stats.invgamma(a=delta / 2.0, scale=s / 2.0)
        ks = stats.kstest(draws, ig.cdf)
        assert ks.pvalue > 1e-3
        assert draws.mean() == pytest.approx(s / (delta - 2.0), rel=0.05)

    def test_moment_matches_convention(self):
        rng = np.random.default_rng(7)
        s = random_spd(rng, 3)
        delta = 8.0
        draws = sample_inverse_wishart(InverseWishartParams(s, delta), rng, size=40_000)
        assert np.allclose(draws.mean(axis=0), s / (delta - 2.0), rtol=0.08)

    def test_degenerate_scale_rejected(self):
        with pytest.raises(FactorizationError, match="SPD tolerance"):
            InverseWishartParams(np.zeros((2, 2)), dof=5.0)


class TestMatrixNormal:
    def test_vec_covariance_is_kronecker(self):
        # vec (column-stacking) of a draw has covariance Sigma (x) A
        rng = np.random.default_rng(11)
        a = random_spd(rng, 3)
        sigma = random_spd(rng, 2)
        params = MatrixNormalParams(np.zeros((3, 2)), sigma, a)
        draws = sample_matrix_normal(params, rng, size=60_000)
        vecs = draws.reshape(60_000, -1, order="F")
        emp = np.cov(vecs.T)
        assert np.allclose(emp, np.kron(sigma, a), atol=0.08)

    def test_mean_shift(self):
        rng = np.random.default_rng(12)
        mean = np.arange(6.0).reshape(3, 2)
        params = MatrixNormalParams(mean, np.eye(2), np.eye(3))
        draws = sample_matrix_normal(params, rng, size=20_000)
        assert np.allclose(draws.mean(axis=0), mean, atol=0.05)

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            MatrixNormalParams(np.zeros((2, 2)), np.eye(3), np.eye(2))


class TestMatrixT:
    def test_marginal_hand_value(self):
        # entry (1, 0): scale2 = R_11 * S_00 / dof = 3 * 0.8 / 10 = 0.24
        r = np.diag([1.0, 3.0])
        s = np.array([[0.8, 0.1], [0.1, 2.0]])
        params = MatrixTParams(np.array([[1.0, 2.0], [3.0, 4.0]]), s, r, dof=10.0)
        q, scale2, dof = matrix_t_marginal(params, 1, 0)
        assert (q, dof) == (3.0, 10.0)
        assert scale2 == pytest.approx(0.24)

    def test_marginal_out_of_range(self):
        params = MatrixTParams(np.zeros((2, 2)), np.eye(2), np.eye(2), dof=5.0)
        with pytest.raises(IndexError):
            matrix_t_marginal(params, 2, 0)

    def test_entry_follows_t_distribution(self):
        rng = np.random.default_rng(21)
        r = random_spd(rng, 2)
        s = random_spd(rng, 2)
        dof = 9.0
        params = MatrixTParams(np.zeros((2, 2)), s, r, dof=dof)
        draws = sample_matrix_t(params, rng, size=60_000)
        q, scale2, _ = matrix_t_marginal(params, 0, 1)
        std = (draws[:, 0, 1] - q) / np.sqrt(scale2)
        ks = stats.kstest(std, stats.t(df=dof).cdf)
        assert ks.pvalue > 1e-3

    def test_zero_row_scale_returns_location(self):
        loc = np.array([[1.0, 2.0]])
        params = MatrixTParams(loc, np.eye(2), np.zeros((1, 1)), dof=5.0)
        out = sample_matrix_t(params, np.random.default_rng(0), size=3)
        assert np.array_equal(out, np.broadcast_to(loc, (3, 1, 2)))

    def test_negative_row_scale_rejected(self):
        with pytest.raises(FactorizationError):
            MatrixTParams(np.zeros((2, 2)), np.eye(2),
                          np.array([[1.0, 0.0], [0.0, -1.0]]), dof=5.0)


class TestMniw:
    def test_coefficient_moments(self):
        # B | Sigma ~ MN(M, Sigma, Omega) integrates to a matrix t with
        # E[B] = M and Cov(vec B) = Omega (x) S / (dof - 2)
        rng = np.random.default_rng(31)
        m = np.array([[1.0, -1.0], [0.5, 2.0]])
        omega = random_spd(rng, 2)
        s = random_spd(rng, 2)
        dof = 12.0
        params = MNIWParams(m, omega, s, dof)
        bs = np.stack([sample_mniw(params, rng)[0] for _ in range(30_000)])
        assert np.allclose(bs.mean(axis=0), m, atol=0.05)
        vecs = bs.reshape(len(bs), -1, order="F")
        target = np.kron(s, omega) / (dof - 2.0)
        assert np.allclose(np.cov(vecs.T), target, atol=0.15 * np.max(np.abs(target)) + 0.02)

    def test_shape_validation(self):
        with pytest.raises(ValueError):
            MNIWParams(np.zeros((2, 3)), np.eye(2), np.eye(2), 5.0)
