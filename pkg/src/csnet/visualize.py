"""Filter visualization as binary (P5) PGM images.

Each filter is written twice: the spatial kernel and its DCT-domain
representation (for sparse-recovered filters that is the stored sparse
vector; for other methods it is computed by applying the DCT basis).
"""

from pathlib import Path

import numpy as np

from .errors import InputError
from .filterbank import FilterBank
from .linalg import dct_matrix


def to_gray(arr: np.ndarray) -> np.ndarray:
    """Min-max normalize a 2-D array to uint8; a constant array maps to 128."""
    arr = np.asarray(arr, dtype=np.float64)
    lo, hi = arr.min(), arr.max()
    if hi == lo:
        return np.full(arr.shape, 128, dtype=np.uint8)
    return np.round((arr - lo) / (hi - lo) * 255.0).astype(np.uint8)


def write_pgm(path, gray: np.ndarray) -> None:
    """Write a uint8 image as binary PGM: 'P5', dims, 255, raw rows."""
    gray = np.asarray(gray)
    if gray.ndim != 2 or gray.dtype != np.uint8:
        raise InputError("PGM output expects a 2-D uint8 array")
    h, w = gray.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{w} {h}\n255\n".encode("ascii"))
        f.write(gray.tobytes())


def dct_domain_view(bank: FilterBank, stage_index: int) -> np.ndarray:
    """(L, k1, k2) DCT-domain images for one stage's filters."""
    stage = bank.stages[stage_index]
    if stage.dct_vectors is not None:
        vectors = stage.dct_vectors
    else:
        psi = dct_matrix(bank.k1 * bank.k2)
        flat = stage.filters.reshape(stage.n_filters, -1)
        vectors = flat @ psi.T
    return vectors.reshape(stage.n_filters, bank.k1, bank.k2)


def write_filter_images(bank: FilterBank, out_dir) -> list:
    """Write spatial + DCT-domain PGMs for every filter; returns the paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for s, stage in enumerate(bank.stages):
        dct_imgs = dct_domain_view(bank, s)
        for l in range(stage.n_filters):
            spatial_path = out / f"stage{s + 1}_filter{l:02d}_spatial.pgm"
            write_pgm(spatial_path, to_gray(stage.filters[l]))
            dct_path = out / f"stage{s + 1}_filter{l:02d}_dct.pgm"
            write_pgm(dct_path, to_gray(dct_imgs[l]))
            written += [spatial_path, dct_path]
    return written
