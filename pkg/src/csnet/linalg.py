"""Dense matrix/image primitives: orthonormal DCT basis, same-size 2-D
convolution, and least squares.

Images and matrices are plain float64 ``numpy.ndarray`` values; nothing here
mutates its inputs.
"""

import numpy as np

from .errors import ConfigurationError, SingularMatrixError

# Pivots of the triangular factor below this are treated as rank deficiency.
RANK_TOL = 1e-12


def dct_matrix(d: int) -> np.ndarray:
    """Orthonormal DCT-II basis as a ``d x d`` matrix.

    Row 0 is the constant 1/sqrt(d); row ``u`` holds
    sqrt(2/d) * cos(pi * (2v + 1) * u / (2d)) over columns ``v``. The rows
    form an orthonormal basis, so the transpose is the inverse transform.
    """
    if d < 1:
        raise ConfigurationError(f"DCT dimension must be >= 1, got {d}")
    u = np.arange(d)[:, None]
    v = np.arange(d)[None, :]
    psi = np.sqrt(2.0 / d) * np.cos(np.pi * (2 * v + 1) * u / (2.0 * d))
    psi[0, :] = 1.0 / np.sqrt(d)
    return psi


def conv2d_same(img: np.ndarray, filt: np.ndarray) -> np.ndarray:
    """2-D convolution with zero padding, output sized like the input.

    Implemented as cross-correlation (no filter flip), the sliding-window
    convention used throughout the library; training and inference share it,
    so the orientation choice never leaks into results. The input is padded
    with (k1-1)/2 rows and (k2-1)/2 columns of zeros, which is why both
    filter dimensions must be odd.
    """
    img = np.asarray(img, dtype=np.float64)
    filt = np.asarray(filt, dtype=np.float64)
    k1, k2 = filt.shape
    if k1 % 2 == 0 or k2 % 2 == 0:
        raise ConfigurationError(f"filter dimensions must be odd, got {k1}x{k2}")
    if k1 > img.shape[0] or k2 > img.shape[1]:
        raise ConfigurationError(
            f"filter {k1}x{k2} larger than image {img.shape[0]}x{img.shape[1]}"
        )
    padded = np.pad(img, ((k1 // 2, k1 // 2), (k2 // 2, k2 // 2)))
    windows = np.lib.stride_tricks.sliding_window_view(padded, (k1, k2))
    return np.einsum("ijkl,kl->ij", windows, filt)


def conv2d_same_batch(images: np.ndarray, filters: np.ndarray) -> np.ndarray:
    """Cross-correlate a stack of images with a stack of filters at once.

    ``images`` is (n, h, w); ``filters`` is (L, k1, k2) with odd k1, k2.
    Returns (n, L, h, w). Equivalent to calling :func:`conv2d_same` per
    image/filter pair, but routed through one matrix product.
    """
    images = np.asarray(images, dtype=np.float64)
    filters = np.asarray(filters, dtype=np.float64)
    n, h, w = images.shape
    L, k1, k2 = filters.shape
    if k1 % 2 == 0 or k2 % 2 == 0:
        raise ConfigurationError(f"filter dimensions must be odd, got {k1}x{k2}")
    padded = np.pad(images, ((0, 0), (k1 // 2, k1 // 2), (k2 // 2, k2 // 2)))
    windows = np.lib.stride_tricks.sliding_window_view(padded, (k1, k2), axis=(1, 2))
    cols = windows.reshape(n * h * w, k1 * k2)
    out = cols @ filters.reshape(L, k1 * k2).T
    return out.reshape(n, h, w, L).transpose(0, 3, 1, 2)


def least_squares(a: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Solve ``argmin_x ||y - A x||_2`` for a tall full-rank ``A``.

    Uses a QR factorization, so the residual is orthogonal to the column
    span of ``A`` up to rounding. Rank deficiency (a pivot of R below
    ``RANK_TOL``) raises :class:`SingularMatrixError` carrying the index of
    the offending column.
    """
    a = np.asarray(a, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).ravel()
    if a.ndim != 2:
        raise ConfigurationError("least_squares expects a 2-D coefficient matrix")
    m, t = a.shape
    if t > m:
        raise ConfigurationError(f"system is underdetermined: {m} rows < {t} columns")
    if y.shape[0] != m:
        raise ConfigurationError(f"rhs length {y.shape[0]} != row count {m}")
    q, r = np.linalg.qr(a)
    pivots = np.abs(np.diag(r))
    small = np.flatnonzero(pivots < RANK_TOL)
    if small.size:
        j = int(small[0])
        raise SingularMatrixError(
            f"rank-deficient system: column {j} has pivot {pivots[j]:.3e}", column=j
        )
    return np.linalg.solve(r, q.T @ y)
