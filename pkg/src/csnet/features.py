"""Nonlinear output stage: binarization, binary-to-decimal hashing, and
block-wise histograms.

The cascade's real-valued maps are squashed to bits (strictly positive ->
1), each group of maps is fused into one integer-coded map by weighting map
``l`` with 2^(l-1), and the coded map is summarized by per-block count
histograms. Concatenating the histograms over blocks and groups gives the
image's feature vector of length (2^L_last) * n_groups * n_blocks.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, InputError
from .filterbank import CascadeOutput


@dataclass(frozen=True)
class BlockSpec:
    """Histogram block geometry. The stride between block origins is
    round(block_size * (1 - overlap_ratio)) per axis and must be >= 1."""

    block_h: int
    block_w: int
    overlap_ratio: float = 0.0

    def __post_init__(self):
        if self.block_h < 1 or self.block_w < 1:
            raise ConfigurationError("block dimensions must be >= 1")
        if not 0.0 <= self.overlap_ratio < 1.0:
            raise ConfigurationError(
                f"overlap ratio must lie in [0, 1), got {self.overlap_ratio}"
            )
        if min(self.stride_h, self.stride_w) < 1:
            raise ConfigurationError(
                f"overlap ratio {self.overlap_ratio} rounds the block stride to zero"
            )

    @property
    def stride_h(self) -> int:
        return int(self.block_h * (1.0 - self.overlap_ratio) + 0.5)

    @property
    def stride_w(self) -> int:
        return int(self.block_w * (1.0 - self.overlap_ratio) + 0.5)


def heaviside(map_: np.ndarray) -> np.ndarray:
    """Per-pixel step: 1 where the value is strictly positive, else 0."""
    return (np.asarray(map_) > 0).astype(np.uint8)


def hash_group(group) -> np.ndarray:
    """Fuse a group of binary maps into one integer-coded map.

    Map ``l`` (1-based) contributes 2^(l-1), i.e. the first map is the least
    significant bit. Codes land in [0, 2^L - 1] for L maps; L <= 32.
    """
    maps = [np.asarray(m) for m in group]
    if not maps:
        raise InputError("empty map group")
    if len(maps) > 32:
        raise InputError(f"group of {len(maps)} maps exceeds the 32-bit code range")
    shape = maps[0].shape
    codes = np.zeros(shape, dtype=np.int64)
    for l, m in enumerate(maps):
        if m.shape != shape:
            raise InputError(
                f"map {l} has shape {m.shape}, expected {shape}"
            )
        codes += (m.astype(np.int64) & 1) << l
    return codes


def block_histograms(hashed: np.ndarray, spec: BlockSpec, bins: int) -> np.ndarray:
    """Count histograms over tiled blocks of an integer-coded map.

    Blocks start at the top-left and advance by the overlap-determined
    stride, left to right then top to bottom; trailing positions where a
    full block no longer fits are dropped. Returns (B, bins) raw counts.
    """
    hashed = np.asarray(hashed)
    h, w = hashed.shape
    if spec.block_h > h or spec.block_w > w:
        raise ConfigurationError(
            f"{spec.block_h}x{spec.block_w} block exceeds {h}x{w} map"
        )
    if hashed.min() < 0 or hashed.max() >= bins:
        raise InputError(
            f"codes outside [0, {bins}): found range "
            f"[{int(hashed.min())}, {int(hashed.max())}]"
        )
    windows = np.lib.stride_tricks.sliding_window_view(
        hashed, (spec.block_h, spec.block_w)
    )[:: spec.stride_h, :: spec.stride_w]
    blocks = windows.reshape(-1, spec.block_h * spec.block_w)
    n_blocks = blocks.shape[0]
    offset = np.arange(n_blocks, dtype=np.int64)[:, None] * bins
    flat = (blocks.astype(np.int64) + offset).ravel()
    counts = np.bincount(flat, minlength=n_blocks * bins)
    return counts.reshape(n_blocks, bins).astype(np.float64)


def assemble_feature(group_histograms) -> np.ndarray:
    """Concatenate per-group block histograms into one feature vector.

    Order is group-major, then block raster order, then bin index, giving
    length bins * n_groups * n_blocks.
    """
    hists = [np.asarray(h, dtype=np.float64) for h in group_histograms]
    if not hists:
        raise InputError("no group histograms given")
    shape = hists[0].shape
    for g, h in enumerate(hists):
        if h.shape != shape:
            raise InputError(
                f"group {g} produced {h.shape} histograms, expected {shape}"
            )
    return np.concatenate([h.ravel() for h in hists])


def n_blocks(map_h: int, map_w: int, spec: BlockSpec) -> int:
    """Number of full block positions in a map of the given size."""
    if spec.block_h > map_h or spec.block_w > map_w:
        raise ConfigurationError(
            f"{spec.block_h}x{spec.block_w} block exceeds {map_h}x{map_w} map"
        )
    bh = (map_h - spec.block_h) // spec.stride_h + 1
    bw = (map_w - spec.block_w) // spec.stride_w + 1
    return bh * bw


def feature_length(widths, map_h: int, map_w: int, spec: BlockSpec) -> int:
    """Feature dimension for a bank with the given stage widths."""
    groups = int(np.prod(widths[:-1], initial=1))
    return (2 ** widths[-1]) * groups * n_blocks(map_h, map_w, spec)


def features_from_cascade(out: CascadeOutput, spec: BlockSpec) -> np.ndarray:
    """Full nonlinear path for a batch: binarize, hash each group, histogram
    each block. Returns (n_images, feature_length) raw counts."""
    n, groups, l_last, h, w = out.maps.shape
    if l_last > 32:
        raise InputError(f"last stage width {l_last} exceeds the 32-bit code range")
    n_blocks(h, w, spec)  # validates that a block fits
    bins = 2 ** l_last
    bits = out.maps > 0
    weights = (1 << np.arange(l_last, dtype=np.int64))[None, None, :, None, None]
    codes = np.sum(bits * weights, axis=2)  # (n, groups, h, w)

    windows = np.lib.stride_tricks.sliding_window_view(
        codes, (spec.block_h, spec.block_w), axis=(2, 3)
    )[:, :, :: spec.stride_h, :: spec.stride_w]
    blocks = windows.reshape(n, -1, spec.block_h * spec.block_w)
    per_image = blocks.shape[1]  # groups * n_blocks
    offset = np.arange(n * per_image, dtype=np.int64)[:, None] * bins
    flat = (blocks.reshape(n * per_image, -1) + offset).ravel()
    counts = np.bincount(flat, minlength=n * per_image * bins)
    return counts.reshape(n, per_image * bins).astype(np.float64)
