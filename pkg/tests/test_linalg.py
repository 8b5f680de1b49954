import numpy as np
import pytest

from csnet.errors import ConfigurationError, SingularMatrixError
from csnet.linalg import conv2d_same, conv2d_same_batch, dct_matrix, least_squares


def naive_conv2d_same(img, filt):
    """Quadruple-loop cross-correlation with zero padding (oracle)."""
    h, w = img.shape
    k1, k2 = filt.shape
    out = np.zeros((h, w))
    for i in range(h):
        for j in range(w):
            acc = 0.0
            for a in range(k1):
                for b in range(k2):
                    ii = i + a - k1 // 2
                    jj = j + b - k2 // 2
                    if 0 <= ii < h and 0 <= jj < w:
                        acc += img[ii, jj] * filt[a, b]
            out[i, j] = acc
    return out


class TestDctMatrix:
    def test_d1(self):
        assert np.array_equal(dct_matrix(1), [[1.0]])

    def test_d2_closed_form(self):
        s = 1.0 / np.sqrt(2.0)
        expected = np.array([[s, s], [s, -s]])
        np.testing.assert_allclose(dct_matrix(2), expected, atol=1e-15)

    def test_d49_orthonormal(self):
        psi = dct_matrix(49)
        assert np.abs(psi @ psi.T - np.eye(49)).max() < 1e-12

    @pytest.mark.parametrize("d", range(1, 65))
    def test_orthonormality_sweep(self, d):
        psi = dct_matrix(d)
        assert np.abs(psi @ psi.T - np.eye(d)).max() < 1e-10

    def test_rejects_zero_dim(self):
        with pytest.raises(ConfigurationError):
            dct_matrix(0)


class TestConv2dSame:
    def test_zero_filter(self, rng):
        img = rng.random((9, 11))
        out = conv2d_same(img, np.zeros((3, 3)))
        assert out.shape == img.shape
        assert np.array_equal(out, np.zeros_like(img))

    def test_impulse_reproduces_filter(self, rng):
        # cross-correlation orientation: the impulse response is the filter
        # pattern mirrored about the impulse
        filt = rng.normal(size=(3, 3))
        img = np.zeros((7, 7))
        img[3, 3] = 1.0
        out = conv2d_same(img, filt)
        np.testing.assert_allclose(out[2:5, 2:5], filt[::-1, ::-1], atol=1e-15)
        assert np.count_nonzero(out) == 9

    def test_matches_naive_loop(self, rng):
        img = rng.normal(size=(8, 8))
        filt = rng.normal(size=(3, 3))
        np.testing.assert_allclose(conv2d_same(img, filt), naive_conv2d_same(img, filt), atol=1e-12)

    @pytest.mark.parametrize("shape,kshape", [((10, 12), (5, 3)), ((7, 7), (7, 7)), ((6, 9), (1, 5))])
    def test_matches_naive_loop_shapes(self, rng, shape, kshape):
        img = rng.normal(size=shape)
        filt = rng.normal(size=kshape)
        np.testing.assert_allclose(conv2d_same(img, filt), naive_conv2d_same(img, filt), atol=1e-12)

    def test_linearity(self, rng):
        x, y = rng.normal(size=(2, 8, 8))
        w = rng.normal(size=(5, 5))
        a, b = 2.7, -0.3
        lhs = conv2d_same(a * x + b * y, w)
        rhs = a * conv2d_same(x, w) + b * conv2d_same(y, w)
        np.testing.assert_allclose(lhs, rhs, atol=1e-10)

    def test_even_filter_rejected(self, rng):
        with pytest.raises(ConfigurationError):
            conv2d_same(rng.random((8, 8)), rng.random((2, 3)))

    def test_oversized_filter_rejected(self, rng):
        with pytest.raises(ConfigurationError):
            conv2d_same(rng.random((3, 3)), rng.random((5, 5)))

    def test_batch_matches_single(self, rng):
        imgs = rng.normal(size=(4, 10, 10))
        filts = rng.normal(size=(3, 5, 5))
        batched = conv2d_same_batch(imgs, filts)
        for i in range(4):
            for l in range(3):
                np.testing.assert_allclose(batched[i, l], conv2d_same(imgs[i], filts[l]), atol=1e-12)


class TestLeastSquares:
    def test_identity(self):
        x = least_squares(np.eye(3), np.array([1.0, 2.0, 3.0]))
        np.testing.assert_allclose(x, [1.0, 2.0, 3.0], atol=1e-14)

    def test_mean_of_two_points(self):
        x = least_squares(np.array([[1.0], [1.0]]), np.array([0.0, 2.0]))
        np.testing.assert_allclose(x, [1.0], atol=1e-14)

    def test_matches_pinv_oracle(self, rng):
        a = rng.normal(size=(10, 4))
        y = rng.normal(size=10)
        x = least_squares(a, y)
        x_ref = np.linalg.pinv(a) @ y  # SVD-based reference route
        assert np.abs(x - x_ref).max() < 1e-8

    def test_residual_orthogonality(self, rng):
        for _ in range(10):
            a = rng.normal(size=(12, 5))
            y = rng.normal(size=12)
            x = least_squares(a, y)
            resid = y - a @ x
            assert np.abs(a.T @ resid).max() < 1e-8 * np.linalg.norm(y)

    def test_rank_deficient_names_column(self, rng):
        col = rng.normal(size=(6, 1))
        a = np.hstack([col, col])  # second column duplicates the first
        with pytest.raises(SingularMatrixError) as exc_info:
            least_squares(a, rng.normal(size=6))
        assert exc_info.value.column == 1

    def test_underdetermined_rejected(self, rng):
        with pytest.raises(ConfigurationError):
            least_squares(rng.normal(size=(3, 5)), rng.normal(size=3))
