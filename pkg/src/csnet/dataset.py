"""MNIST-style IDX loading, the pooled 50000/12000 split, and Gaussian
noise injection for robustness experiments.
"""

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, IdxFormatError, InputError
from .seeding import rng_for

IMAGE_MAGIC = 0x00000803
LABEL_MAGIC = 0x00000801

TRAIN_SIZE = 50000
TEST_SIZE = 12000


@dataclass
class LabeledSet:
    """Images (n, h, w) with pixel values in [0, 1] plus integer labels."""

    images: np.ndarray
    labels: np.ndarray
    split_meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.images.shape[0] != self.labels.shape[0]:
            raise InputError(
                f"{self.images.shape[0]} images but {self.labels.shape[0]} labels"
            )

    def __len__(self) -> int:
        return self.images.shape[0]

    def take(self, n: int) -> "LabeledSet":
        """First ``n`` samples (sets are already shuffled by the split)."""
        if n > len(self):
            raise InputError(f"requested {n} samples from a set of {len(self)}")
        meta = dict(self.split_meta, limited_to=n)
        return LabeledSet(self.images[:n], self.labels[:n], meta)

    def class_counts(self) -> dict:
        values, counts = np.unique(self.labels, return_counts=True)
        return {int(v): int(c) for v, c in zip(values, counts)}


@dataclass(frozen=True)
class NoiseSpec:
    """Zero-mean Gaussian pixel noise at the given variance (unit scale)."""

    variance: float
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.variance <= 1.0:
            raise ConfigurationError(
                f"noise variance must lie in [0, 1], got {self.variance}"
            )


def _read_be_u32(buf: bytes, offset: int, path: str) -> int:
    if offset + 4 > len(buf):
        raise IdxFormatError(
            f"{path}: truncated header, needed 4 bytes at offset {offset} "
            f"but file ends at {len(buf)}",
            offset=offset,
        )
    return struct.unpack_from(">I", buf, offset)[0]


def load_idx(images_path, labels_path) -> LabeledSet:
    """Parse a big-endian IDX image/label file pair.

    The image file must carry magic 0x00000803 with (count, rows, cols)
    dimensions; the label file magic 0x00000801 with a matching count.
    Pixels are scaled from bytes into [0, 1].
    """
    with open(images_path, "rb") as f:
        img_buf = f.read()
    with open(labels_path, "rb") as f:
        lbl_buf = f.read()

    magic = _read_be_u32(img_buf, 0, str(images_path))
    if magic != IMAGE_MAGIC:
        raise IdxFormatError(
            f"{images_path}: bad image magic 0x{magic:08x} at offset 0 "
            f"(expected 0x{IMAGE_MAGIC:08x})",
            offset=0,
        )
    count = _read_be_u32(img_buf, 4, str(images_path))
    rows = _read_be_u32(img_buf, 8, str(images_path))
    cols = _read_be_u32(img_buf, 12, str(images_path))
    expected = 16 + count * rows * cols
    if len(img_buf) < expected:
        raise IdxFormatError(
            f"{images_path}: truncated pixel data, expected {expected} bytes "
            f"but file ends at offset {len(img_buf)}",
            offset=len(img_buf),
        )

    lbl_magic = _read_be_u32(lbl_buf, 0, str(labels_path))
    if lbl_magic != LABEL_MAGIC:
        raise IdxFormatError(
            f"{labels_path}: bad label magic 0x{lbl_magic:08x} at offset 0 "
            f"(expected 0x{LABEL_MAGIC:08x})",
            offset=0,
        )
    lbl_count = _read_be_u32(lbl_buf, 4, str(labels_path))
    if lbl_count != count:
        raise IdxFormatError(
            f"{labels_path}: {lbl_count} labels for {count} images",
            offset=4,
        )
    if len(lbl_buf) < 8 + count:
        raise IdxFormatError(
            f"{labels_path}: truncated label data, expected {8 + count} bytes "
            f"but file ends at offset {len(lbl_buf)}",
            offset=len(lbl_buf),
        )

    pixels = np.frombuffer(img_buf, dtype=np.uint8, count=count * rows * cols, offset=16)
    images = pixels.reshape(count, rows, cols).astype(np.float64) / 255.0
    labels = np.frombuffer(lbl_buf, dtype=np.uint8, count=count, offset=8).astype(np.int64)
    meta = {"images_path": str(images_path), "labels_path": str(labels_path)}
    return LabeledSet(images=images, labels=labels, split_meta=meta)


def write_idx(dataset: LabeledSet, images_path, labels_path) -> None:
    """Serialize a set back to the IDX pair (inverse of :func:`load_idx`)."""
    n, rows, cols = dataset.images.shape
    pixels = np.clip(np.round(dataset.images * 255.0), 0, 255).astype(np.uint8)
    with open(images_path, "wb") as f:
        f.write(struct.pack(">IIII", IMAGE_MAGIC, n, rows, cols))
        f.write(pixels.tobytes())
    with open(labels_path, "wb") as f:
        f.write(struct.pack(">II", LABEL_MAGIC, n))
        f.write(dataset.labels.astype(np.uint8).tobytes())


def pooled_split(full: LabeledSet, seed: int, swap: bool = False):
    """Deterministic seeded shuffle of the pooled samples into a 50000-image
    training set and a 12000-image test set (the remainder goes unused).

    ``swap`` flips the roles (12000 train / 50000 test).
    """
    n = len(full)
    if n < TRAIN_SIZE + TEST_SIZE:
        raise InputError(
            f"pooled split needs at least {TRAIN_SIZE + TEST_SIZE} samples, got {n}"
        )
    perm = np.random.default_rng(seed).permutation(n)
    a, b = (TEST_SIZE, TRAIN_SIZE) if swap else (TRAIN_SIZE, TEST_SIZE)
    idx_train = perm[:a]
    idx_test = perm[a : a + b]

    def build(idx, role):
        part = LabeledSet(full.images[idx], full.labels[idx])
        part.split_meta = {
            "role": role,
            "seed": int(seed),
            "swap": bool(swap),
            "size": int(idx.shape[0]),
            "class_counts": part.class_counts(),
        }
        return part

    return build(idx_train, "train"), build(idx_test, "test")


def add_noise(dataset: LabeledSet, spec: NoiseSpec) -> LabeledSet:
    """Add i.i.d. zero-mean Gaussian noise per pixel, clamped back to [0, 1].

    Variance 0 returns the pixels unchanged. Each image draws from its own
    sub-seeded stream, so the operation is order-independent per image.
    """
    if spec.variance == 0.0:
        return LabeledSet(dataset.images.copy(), dataset.labels.copy(), dict(dataset.split_meta))
    sigma = float(np.sqrt(spec.variance))
    noisy = np.empty_like(dataset.images)
    for i in range(len(dataset)):
        noise = rng_for(spec.seed, i).normal(0.0, sigma, size=dataset.images.shape[1:])
        np.clip(dataset.images[i] + noise, 0.0, 1.0, out=noisy[i])
    meta = dict(dataset.split_meta, noise_variance=spec.variance, noise_seed=int(spec.seed))
    return LabeledSet(noisy, dataset.labels.copy(), meta)
