import itertools

import numpy as np
import pytest

from csnet.errors import ConfigurationError
from csnet.linalg import least_squares
from csnet.sensing import _draw_raw, gaussian_measurement, omp


def best_ksparse_fit(y, phi_cols, k):
    """Exhaustive minimum-residual K-sparse solution (oracle).

    Tries every size-k support, solves least squares on it, and keeps the
    smallest residual. Exponential, only for tiny instances.
    """
    d = phi_cols.shape[1]
    best = (np.inf, None, None)
    for support in itertools.combinations(range(d), k):
        a = phi_cols[:, support]
        coef = least_squares(a, y)
        r = np.linalg.norm(y - a @ coef)
        if r < best[0]:
            best = (r, support, coef)
    vec = np.zeros(d)
    vec[list(best[1])] = best[2]
    return vec, best[0]


def erc_margin(phi_cols, support):
    """Exact-recovery condition value max_j ||pinv(Phi_S) phi_j||_1 over
    columns outside the support; below 1.0 greedy selection is provably
    exact, so greedy and exhaustive recovery must coincide."""
    a = phi_cols[:, list(support)]
    pinv = np.linalg.pinv(a)
    outside = [j for j in range(phi_cols.shape[1]) if j not in set(support)]
    return np.abs(pinv @ phi_cols[:, outside]).sum(axis=0).max()


def random_erc_instance(rng, d, m, k, mag_lo=0.5, mag_hi=4.0):
    """Random exactly-k-sparse instance on which exact recovery is certified."""
    while True:
        phi = gaussian_measurement(d, m, seed=int(rng.integers(0, 2**31)))
        support = rng.choice(d, size=k, replace=False)
        if erc_margin(phi.phi, support) < 1.0:
            break
    x = np.zeros(d)
    x[support] = rng.uniform(mag_lo, mag_hi, size=k) * rng.choice([-1.0, 1.0], size=k)
    return phi, x, set(int(s) for s in support)


class TestGaussianMeasurement:
    def test_columns_unit_norm(self):
        phi = gaussian_measurement(4, 4, seed=5)
        np.testing.assert_allclose(np.linalg.norm(phi.phi, axis=0), 1.0, atol=1e-12)

    def test_deterministic(self):
        a = gaussian_measurement(32, 16, seed=9)
        b = gaussian_measurement(32, 16, seed=9)
        assert np.array_equal(a.phi, b.phi)

    def test_seed_changes_matrix(self):
        a = gaussian_measurement(32, 16, seed=9)
        b = gaussian_measurement(32, 16, seed=10)
        assert not np.array_equal(a.phi, b.phi)

    def test_raw_entry_statistics(self):
        d, m = 1000, 500
        raw = _draw_raw(d, m, seed=123)
        n = d * m
        sigma_mean = np.sqrt(1.0 / m) / np.sqrt(n)
        assert abs(raw.mean()) < 4 * sigma_mean
        assert abs(raw.var() - 1.0 / m) < 0.1 / m

    def test_m_larger_than_d_rejected(self):
        with pytest.raises(ConfigurationError):
            gaussian_measurement(4, 5, seed=0)


class TestOmp:
    def test_single_atom_exact(self):
        phi = gaussian_measurement(16, 8, seed=3)
        res = omp(phi.phi[:, 3].copy(), phi, k=1)
        assert res.support == (3,)
        np.testing.assert_allclose(res.coefficients, [1.0], atol=1e-12)
        assert res.residual_norm < 1e-10

    def test_early_stop_on_zero_residual(self):
        phi = gaussian_measurement(16, 8, seed=4)
        res = omp(2.0 * phi.phi[:, 1], phi, k=2, tol=1e-8)
        assert res.support == (1,)
        np.testing.assert_allclose(res.coefficients, [2.0], atol=1e-12)

    def test_matches_exhaustive_oracle(self, rng):
        # d=12, M=8, K=3, well-separated magnitudes on a certified instance.
        phi, x, support = random_erc_instance(rng, d=12, m=8, k=3, mag_lo=1.0, mag_hi=1.0)
        x[sorted(support)] = [8.0, -2.0, 0.5]
        y = phi.phi @ x
        res = omp(y, phi, k=3, tol=0.0)
        oracle_vec, oracle_resid = best_ksparse_fit(y, phi.phi, 3)
        assert np.abs(res.sparse_vector - oracle_vec).max() < 1e-6
        assert res.residual_norm <= oracle_resid + 1e-10

    def test_residual_monotone_and_orthogonal(self, rng):
        for _ in range(20):
            phi = gaussian_measurement(24, 12, seed=int(rng.integers(0, 2**31)))
            y = rng.normal(size=12)
            res = omp(y, phi, k=6, tol=0.0)
            norms = (np.linalg.norm(y),) + res.residual_norms
            assert all(b <= a + 1e-12 for a, b in zip(norms, norms[1:]))
            # final residual orthogonal to every selected atom
            resid = y - phi.phi[:, list(res.support)] @ res.coefficients
            for lam in res.support:
                assert abs(resid @ phi.phi[:, lam]) < 1e-8

    def test_no_index_selected_twice(self, rng):
        for _ in range(20):
            phi = gaussian_measurement(20, 10, seed=int(rng.integers(0, 2**31)))
            res = omp(rng.normal(size=10), phi, k=10, tol=0.0)
            assert len(set(res.support)) == len(res.support)

    def test_exact_recovery_rate(self):
        # M = 50 >= 4 K ln d = 49.9 at d=64, K=3: >= 95% support recovery.
        rng = np.random.default_rng(7)
        successes = 0
        for _ in range(200):
            phi = gaussian_measurement(64, 50, seed=int(rng.integers(0, 2**31)))
            support = rng.choice(64, size=3, replace=False)
            x = np.zeros(64)
            x[support] = rng.normal(size=3)
            res = omp(phi.phi @ x, phi, k=3, tol=0.0)
            successes += set(res.support) == set(int(s) for s in support)
        assert successes >= 190

    def test_deterministic(self, rng):
        phi = gaussian_measurement(20, 10, seed=77)
        y = rng.normal(size=10)
        a = omp(y, phi, k=4, tol=0.0)
        b = omp(y, phi, k=4, tol=0.0)
        assert a.support == b.support
        assert np.array_equal(a.sparse_vector, b.sparse_vector)

    def test_k_exceeding_m_rejected(self):
        phi = gaussian_measurement(16, 8, seed=0)
        with pytest.raises(ConfigurationError):
            omp(np.ones(8), phi, k=9)

    def test_zero_signal_empty_support(self):
        phi = gaussian_measurement(16, 8, seed=0)
        res = omp(np.zeros(8), phi, k=3, tol=0.0)
        assert res.support == ()
        assert res.residual_norm == 0.0
