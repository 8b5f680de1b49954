"""Random Gaussian measurements and orthogonal matching pursuit.

The pair implements the compressed-sensing recovery core used for filter
learning: observe ``y = Phi s`` for a vector ``s`` that is sparse in some
basis, then greedily rebuild the sparse vector one atom at a time.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, SingularMatrixError
from .linalg import least_squares


@dataclass(frozen=True)
class MeasurementMatrix:
    """Seeded random Gaussian measurement operator with unit-norm columns.

    ``phi`` is (M, d): entries are drawn i.i.d. from N(0, 1/M) and each
    column is then rescaled to unit l2 norm, so correlation magnitudes are
    comparable across atoms.
    """

    phi: np.ndarray
    seed: int
    m_measurements: int
    signal_dim: int


@dataclass(frozen=True)
class OmpResult:
    """Sparse recovery output.

    ``support`` lists selected column indices in selection order and
    ``coefficients`` holds the final least-squares fit over that support.
    ``sparse_vector`` is the length-d vector with the coefficients scattered
    onto the support and zeros elsewhere.
    """

    support: tuple
    coefficients: np.ndarray
    residual_norm: float
    sparse_vector: np.ndarray
    residual_norms: tuple = field(default=())

    @property
    def n_selected(self) -> int:
        return len(self.support)


def _draw_raw(d: int, m: int, seed: int) -> np.ndarray:
    """Raw N(0, 1/M) draws before column normalization (test hook)."""
    rng = np.random.default_rng(seed)
    return rng.normal(0.0, np.sqrt(1.0 / m), size=(m, d))


def gaussian_measurement(d: int, m: int, seed: int) -> MeasurementMatrix:
    """Build an (M, d) Gaussian measurement matrix, deterministic per seed."""
    if not 1 <= m <= d:
        raise ConfigurationError(f"need 1 <= M <= d, got M={m}, d={d}")
    phi = _draw_raw(d, m, seed)
    phi /= np.linalg.norm(phi, axis=0, keepdims=True)
    phi.setflags(write=False)
    return MeasurementMatrix(phi=phi, seed=int(seed), m_measurements=m, signal_dim=d)


def omp(y: np.ndarray, phi: MeasurementMatrix, k: int, tol: float = 1e-6) -> OmpResult:
    """Orthogonal matching pursuit over the columns of ``phi``.

    Starts from residual ``r_0 = y``. Each iteration picks the not-yet-chosen
    column most correlated with the residual (ties go to the lowest index),
    re-fits all chosen columns by least squares, and recomputes the residual,
    which therefore never grows. Stops after ``k`` atoms or as soon as
    ``||r|| <= tol * ||y||``. Use ``tol=0`` to force exactly ``k`` iterations
    on any nonzero input.

    Returns an :class:`OmpResult`; per-iteration residual norms are kept in
    ``residual_norms`` so callers can audit monotonicity.
    """
    if tol < 0:
        raise ConfigurationError(f"tolerance must be >= 0, got {tol}")
    a = phi.phi
    m, d = a.shape
    if not 1 <= k <= m:
        raise ConfigurationError(f"sparsity K must satisfy 1 <= K <= M={m}, got {k}")
    y = np.asarray(y, dtype=np.float64).ravel()
    if y.shape[0] != m:
        raise ConfigurationError(f"measurement length {y.shape[0]} != M={m}")

    y_norm = np.linalg.norm(y)
    support: list[int] = []
    coeffs = np.zeros(0)
    residual = y.copy()
    norms = []
    available = np.ones(d, dtype=bool)

    for _ in range(k):
        if np.linalg.norm(residual) <= tol * y_norm:
            break
        corr = np.abs(a.T @ residual)
        corr[~available] = -1.0
        lam = int(np.argmax(corr))
        support.append(lam)
        available[lam] = False
        chosen = a[:, support]
        try:
            coeffs = least_squares(chosen, y)
        except SingularMatrixError as exc:
            raise SingularMatrixError(
                f"measurement matrix degenerate: atoms {support} are rank "
                f"deficient ({exc})",
                column=exc.column,
            ) from exc
        residual = y - chosen @ coeffs
        norms.append(float(np.linalg.norm(residual)))

    sparse = np.zeros(d)
    sparse[support] = coeffs
    return OmpResult(
        support=tuple(support),
        coefficients=np.asarray(coeffs, dtype=np.float64),
        residual_norm=float(np.linalg.norm(residual)),
        sparse_vector=sparse,
        residual_norms=tuple(norms),
    )
