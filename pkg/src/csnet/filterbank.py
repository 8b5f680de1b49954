"""Convolution filter banks learned from image patches.

A bank holds one filter set per stage. The main learning rule recovers each
filter as a K-sparse vector in the DCT domain: the patch autocorrelation is
transformed into the DCT basis, compressed through a random Gaussian
measurement matrix, and the highest-energy measurement columns are inverted
by orthogonal matching pursuit. PCA filters (top eigenvectors of the patch
autocorrelation) and plain random filters are available as baselines under
the identical cascade.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DegenerateInputError, InputError
from .linalg import conv2d_same_batch, dct_matrix
from .sensing import gaussian_measurement, omp

METHOD_CS = "cs"
METHOD_PCA = "pca"
METHOD_RANDOM = "random"
METHODS = (METHOD_CS, METHOD_PCA, METHOD_RANDOM)


@dataclass(frozen=True)
class PatchConfig:
    """Patch geometry for filter learning: odd k1 x k2 windows, dense or
    strided sampling over valid positions (no padding while learning)."""

    k1: int
    k2: int
    stride: int = 1

    def __post_init__(self):
        if self.k1 % 2 == 0 or self.k2 % 2 == 0 or self.k1 < 3 or self.k2 < 3:
            raise ConfigurationError(
                f"patch dims must be odd and >= 3, got {self.k1}x{self.k2}"
            )
        if self.stride < 1:
            raise ConfigurationError(f"stride must be >= 1, got {self.stride}")

    @property
    def dim(self) -> int:
        return self.k1 * self.k2


@dataclass(frozen=True)
class StageFilters:
    """Filters of one stage: ``filters`` is (L, k1, k2).

    For CS stages ``dct_vectors`` holds the (L, k1*k2) sparse DCT-domain
    vectors the filters were recovered from (scaled along with the filter
    normalization, so ``dct @ vec(filter) == dct_vectors[l]``), and
    ``column_energies`` the l2 norms of the measurement columns each filter
    came from, in the returned (descending) order.
    """

    filters: np.ndarray
    method: str
    seed: int | None = None
    k_sparsity: int | None = None
    m_measurements: int | None = None
    dct_vectors: np.ndarray | None = None
    column_energies: np.ndarray | None = None

    def __post_init__(self):
        if self.filters.ndim != 3 or self.filters.shape[0] < 1:
            raise ConfigurationError("stage needs at least one k1 x k2 filter")
        if not np.all(np.isfinite(self.filters)):
            raise ConfigurationError("stage filters contain non-finite values")

    @property
    def n_filters(self) -> int:
        return self.filters.shape[0]


@dataclass(frozen=True)
class FilterBank:
    """Learned filters for every stage of the cascade."""

    stages: tuple
    k1: int
    k2: int

    def __post_init__(self):
        if len(self.stages) < 1:
            raise ConfigurationError("filter bank needs at least one stage")

    @property
    def widths(self) -> tuple:
        return tuple(s.n_filters for s in self.stages)

    @property
    def n_stages(self) -> int:
        return len(self.stages)


@dataclass(frozen=True)
class CascadeOutput:
    """Final-stage feature maps, grouped by parent map.

    ``maps`` is (n_images, n_groups, L_last, h, w): for a two-stage bank the
    groups are the L1 first-stage parents and each group holds L2 maps; a
    single-stage bank yields one group of L1 maps. Total maps per image is
    always the product of the stage widths.
    """

    maps: np.ndarray
    widths: tuple

    @property
    def n_images(self) -> int:
        return self.maps.shape[0]

    @property
    def n_groups(self) -> int:
        return self.maps.shape[1]

    @property
    def group_size(self) -> int:
        return self.maps.shape[2]


def _as_image_stack(images) -> np.ndarray:
    """Stack a list of equally-sized 2-D images into (n, h, w)."""
    if isinstance(images, np.ndarray) and images.ndim == 3:
        return np.asarray(images, dtype=np.float64)
    if isinstance(images, np.ndarray) and images.ndim == 2:
        return np.asarray(images, dtype=np.float64)[None]
    arrs = [np.asarray(im, dtype=np.float64) for im in images]
    if not arrs:
        raise InputError("no images given")
    shape = arrs[0].shape
    for i, a in enumerate(arrs):
        if a.ndim != 2:
            raise InputError(f"image {i} is not 2-D")
        if a.shape != shape:
            raise InputError(
                f"image {i} has shape {a.shape}, expected {shape}; "
                "batch operations need equally sized images"
            )
    return np.stack(arrs)


def mean_removed_patch_rows(stack: np.ndarray, cfg: PatchConfig) -> np.ndarray:
    """All valid patches of an (n, h, w) stack as rows of an (P, k1*k2)
    matrix, each row minus its own mean. Row order is image-major, then
    raster scan of the patch grid."""
    windows = np.lib.stride_tricks.sliding_window_view(
        stack, (cfg.k1, cfg.k2), axis=(1, 2)
    )[:, :: cfg.stride, :: cfg.stride]
    rows = windows.reshape(-1, cfg.dim).astype(np.float64)
    rows -= rows.mean(axis=1, keepdims=True)
    return rows


def extract_patches(images, cfg: PatchConfig) -> np.ndarray:
    """Vectorized mean-removed patches as columns of a (k1*k2, P) matrix.

    Patches are taken densely (at ``cfg.stride``) over valid positions only;
    vectorization is row-major (patch rows stacked top to bottom). Columns
    are ordered image-major, then raster scan.
    """
    if isinstance(images, np.ndarray) and images.ndim == 2:
        images = [images]
    blocks = []
    for i, img in enumerate(images):
        img = np.asarray(img, dtype=np.float64)
        if img.ndim != 2 or img.shape[0] < cfg.k1 or img.shape[1] < cfg.k2:
            raise InputError(
                f"image {i} (shape {img.shape}) is smaller than the "
                f"{cfg.k1}x{cfg.k2} patch"
            )
        blocks.append(mean_removed_patch_rows(img[None], cfg))
    if not blocks:
        raise InputError("no images given")
    return np.vstack(blocks).T


def patch_gram(rows_iter, dim: int):
    """Accumulate the scaled patch autocorrelation C = X X^T / P over chunks
    of patch rows. Exact (up to summation order) match of computing the
    full patch matrix at once; used to keep memory flat on large sets."""
    gram = np.zeros((dim, dim))
    count = 0
    for rows in rows_iter:
        gram += rows.T @ rows
        count += rows.shape[0]
    if count == 0:
        raise InputError("no patches accumulated")
    return gram / count, count


def learn_cs_filters(
    patches: np.ndarray,
    n_filters: int,
    k_sparsity: int,
    m_measurements: int,
    seed: int,
    cfg: PatchConfig,
    omp_tol: float = 0.0,
) -> StageFilters:
    """Learn one stage of filters by sparse recovery from compressed patch
    statistics.

    From the (d, P) mean-removed patch matrix: form C = X X^T / P, express
    it in the DCT basis (S = Psi C), compress to Y = Phi S, pick the
    ``n_filters`` highest-energy columns of Y (ties to the lower index), and
    recover each as a K-sparse DCT-domain vector by matching pursuit. With
    the default ``omp_tol=0`` the pursuit runs for exactly K iterations; a
    positive tolerance lets it stop early on a tiny residual. Each spatial
    filter is the inverse DCT of its recovered vector, reshaped to k1 x k2
    and scaled to unit Frobenius norm. Filters come back ordered by
    descending source-column energy.
    """
    patches = np.asarray(patches, dtype=np.float64)
    if patches.ndim != 2 or patches.shape[0] != cfg.dim:
        raise ConfigurationError(
            f"patch matrix must be ({cfg.dim}, P), got {patches.shape}"
        )
    gram = patches @ patches.T / patches.shape[1]
    return cs_filters_from_gram(
        gram, n_filters, k_sparsity, m_measurements, seed, cfg, omp_tol=omp_tol
    )


def cs_filters_from_gram(
    gram: np.ndarray,
    n_filters: int,
    k_sparsity: int,
    m_measurements: int,
    seed: int,
    cfg: PatchConfig,
    omp_tol: float = 0.0,
) -> StageFilters:
    """Core of :func:`learn_cs_filters`, starting from the scaled patch
    autocorrelation instead of the raw patch matrix."""
    d = cfg.dim
    if n_filters > d:
        raise ConfigurationError(f"cannot learn {n_filters} filters from {d}-dim patches")
    if not 1 <= k_sparsity <= m_measurements <= d:
        raise ConfigurationError(
            f"need 1 <= K <= M <= d, got K={k_sparsity}, M={m_measurements}, d={d}"
        )
    gram = np.asarray(gram, dtype=np.float64)
    if gram.shape != (d, d):
        raise ConfigurationError(f"gram must be ({d}, {d}), got {gram.shape}")
    if not np.any(gram):
        raise DegenerateInputError(
            "patch autocorrelation is identically zero (constant input images?)"
        )

    psi = dct_matrix(d)
    measured = gaussian_measurement(d, m_measurements, seed)
    y_mat = measured.phi @ (psi @ gram)

    energies = np.linalg.norm(y_mat, axis=0)
    order = np.argsort(-energies, kind="stable")[:n_filters]
    if energies[order[-1]] == 0.0:
        n_usable = int(np.count_nonzero(energies))
        raise DegenerateInputError(
            f"only {n_usable} nonzero measurement columns, need {n_filters}"
        )

    filters = np.empty((n_filters, cfg.k1, cfg.k2))
    dct_vectors = np.empty((n_filters, d))
    for out, col in enumerate(order):
        recovered = omp(y_mat[:, col], measured, k_sparsity, tol=omp_tol)
        spatial = (psi.T @ recovered.sparse_vector).reshape(cfg.k1, cfg.k2)
        norm = np.linalg.norm(spatial)
        if norm == 0.0:
            raise DegenerateInputError(f"recovered filter {out} is identically zero")
        filters[out] = spatial / norm
        dct_vectors[out] = recovered.sparse_vector / norm

    return StageFilters(
        filters=filters,
        method=METHOD_CS,
        seed=int(seed),
        k_sparsity=k_sparsity,
        m_measurements=m_measurements,
        dct_vectors=dct_vectors,
        column_energies=energies[order],
    )


def learn_pca_filters(patches: np.ndarray, n_filters: int, cfg: PatchConfig) -> StageFilters:
    """Baseline filters: top eigenvectors of the patch autocorrelation,
    descending eigenvalue, sign fixed so each filter's largest-magnitude
    entry is positive."""
    patches = np.asarray(patches, dtype=np.float64)
    if patches.ndim != 2 or patches.shape[0] != cfg.dim:
        raise ConfigurationError(
            f"patch matrix must be ({cfg.dim}, P), got {patches.shape}"
        )
    gram = patches @ patches.T / patches.shape[1]
    return pca_filters_from_gram(gram, n_filters, cfg)


def pca_filters_from_gram(gram: np.ndarray, n_filters: int, cfg: PatchConfig) -> StageFilters:
    d = cfg.dim
    if n_filters > d:
        raise ConfigurationError(f"cannot learn {n_filters} filters from {d}-dim patches")
    eigvals, eigvecs = np.linalg.eigh(np.asarray(gram, dtype=np.float64))
    order = np.argsort(eigvals, kind="stable")[::-1][:n_filters]
    filters = np.empty((n_filters, cfg.k1, cfg.k2))
    for out, idx in enumerate(order):
        v = eigvecs[:, idx]
        if v[np.argmax(np.abs(v))] < 0:
            v = -v
        filters[out] = v.reshape(cfg.k1, cfg.k2)
    return StageFilters(filters=filters, method=METHOD_PCA)


def learn_random_filters(n_filters: int, seed: int, cfg: PatchConfig) -> StageFilters:
    """Seeded i.i.d. Gaussian filters at unit Frobenius norm (control bank)."""
    rng = np.random.default_rng(seed)
    filters = rng.standard_normal((n_filters, cfg.k1, cfg.k2))
    filters /= np.linalg.norm(filters.reshape(n_filters, -1), axis=1)[:, None, None]
    return StageFilters(filters=filters, method=METHOD_RANDOM, seed=int(seed))


def cascade(images, bank: FilterBank) -> CascadeOutput:
    """Run images through every stage of the bank.

    Stage 1 convolves each image with its L1 filters; every later stage
    convolves each existing map with its own filters, multiplying the map
    count. All convolutions keep the input size (zero padding).
    """
    stack = _as_image_stack(images)
    n = stack.shape[0]
    maps = stack[:, None]  # (n, 1, h, w)
    for stage in bank.stages:
        flat = maps.reshape(-1, *maps.shape[2:])
        out = conv2d_same_batch(flat, stage.filters)
        maps = out.reshape(n, -1, *out.shape[2:])
    last = bank.stages[-1].n_filters
    grouped = maps.reshape(n, maps.shape[1] // last, last, *maps.shape[2:])
    return CascadeOutput(maps=grouped, widths=bank.widths)


def learn_stage2_filters(
    stage1_maps,
    n_filters: int,
    k_sparsity: int,
    m_measurements: int,
    seed: int,
    cfg: PatchConfig,
    omp_tol: float = 0.0,
) -> StageFilters:
    """Learn a later stage from the previous stage's output maps.

    Pools mean-removed patches from every map of every image into one patch
    matrix and learns exactly like the first stage.
    """
    if isinstance(stage1_maps, CascadeOutput):
        stack = stage1_maps.maps.reshape(-1, *stage1_maps.maps.shape[-2:])
    elif isinstance(stage1_maps, np.ndarray) and stage1_maps.ndim >= 3:
        stack = stage1_maps.reshape(-1, *stage1_maps.shape[-2:])
    else:
        stack = _as_image_stack(stage1_maps)
    patches = extract_patches(list(stack), cfg)
    return learn_cs_filters(
        patches, n_filters, k_sparsity, m_measurements, seed, cfg, omp_tol=omp_tol
    )


def learn_filter_bank(
    images,
    widths,
    cfg: PatchConfig,
    method: str = METHOD_CS,
    k_sparsity: int | None = None,
    m_measurements: int | None = None,
    seed: int = 0,
    stage_seeds=None,
    chunk_size: int = 256,
    omp_tol: float = 0.0,
) -> FilterBank:
    """Learn all stages over a training set, chunked so memory stays flat.

    Later stages see the cascade of everything learned so far; per-stage
    patch statistics are accumulated with :func:`patch_gram`, which matches
    pooling all patches into one matrix. ``stage_seeds`` overrides the
    per-stage seeds (defaults to ``seed`` for stage 1, then ``seed + s``).
    """
    if method not in METHODS:
        raise ConfigurationError(f"unknown filter method {method!r}")
    stack = _as_image_stack(images)
    d = cfg.dim
    k_sparsity = cfg.k1 if k_sparsity is None else k_sparsity
    m_measurements = (d + 1) // 2 if m_measurements is None else m_measurements
    if stage_seeds is None:
        stage_seeds = [seed + s for s in range(len(widths))]

    stages = []
    for s, width in enumerate(widths):
        if method == METHOD_RANDOM:
            stages.append(learn_random_filters(width, stage_seeds[s], cfg))
            continue

        def rows_chunks():
            partial = FilterBank(stages=tuple(stages), k1=cfg.k1, k2=cfg.k2) if stages else None
            for start in range(0, stack.shape[0], chunk_size):
                chunk = stack[start : start + chunk_size]
                if partial is not None:
                    maps = cascade(chunk, partial).maps
                    chunk = maps.reshape(-1, *maps.shape[-2:])
                yield mean_removed_patch_rows(chunk, cfg)

        gram, _ = patch_gram(rows_chunks(), d)
        if method == METHOD_CS:
            stages.append(
                cs_filters_from_gram(
                    gram, width, k_sparsity, m_measurements, stage_seeds[s], cfg,
                    omp_tol=omp_tol,
                )
            )
        else:
            stages.append(pca_filters_from_gram(gram, width, cfg))
    return FilterBank(stages=tuple(stages), k1=cfg.k1, k2=cfg.k2)
