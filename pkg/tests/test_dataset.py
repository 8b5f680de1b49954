import struct

import numpy as np
import pytest
from scipy.stats import norm

from csnet.dataset import (
    LabeledSet,
    NoiseSpec,
    add_noise,
    load_idx,
    pooled_split,
    write_idx,
)
from csnet.errors import ConfigurationError, IdxFormatError, InputError

from conftest import make_blob_set


def write_raw_idx(tmp_path, images_u8, labels_u8, prefix=""):
    n, rows, cols = images_u8.shape
    img_path = tmp_path / f"{prefix}img.idx"
    lbl_path = tmp_path / f"{prefix}lbl.idx"
    with open(img_path, "wb") as f:
        f.write(struct.pack(">IIII", 0x803, n, rows, cols))
        f.write(images_u8.tobytes())
    with open(lbl_path, "wb") as f:
        f.write(struct.pack(">II", 0x801, n))
        f.write(labels_u8.tobytes())
    return img_path, lbl_path


def clipped_normal_variance(variance, center=0.5, lo=0.0, hi=1.0):
    """Analytic variance of clip(center + N(0, variance), lo, hi) (oracle)."""
    sigma = np.sqrt(variance)
    a = (lo - center) / sigma
    b = (hi - center) / sigma
    # moments of the clipped (not truncated) variable
    phi_a, phi_b = norm.pdf(a), norm.pdf(b)
    cdf_a, cdf_b = norm.cdf(a), norm.cdf(b)
    mid = cdf_b - cdf_a
    ez = -phi_b + phi_a + a * cdf_a + b * (1 - cdf_b)
    ez2 = (mid + a * phi_a - b * phi_b) + a * a * cdf_a + b * b * (1 - cdf_b)
    return variance * (ez2 - ez * ez)


class TestLoadIdx:
    def test_all_255_pixels(self, tmp_path):
        images = np.full((2, 28, 28), 255, dtype=np.uint8)
        labels = np.array([3, 7], dtype=np.uint8)
        img_path, lbl_path = write_raw_idx(tmp_path, images, labels)
        ds = load_idx(img_path, lbl_path)
        assert len(ds) == 2
        assert np.array_equal(ds.images, np.ones((2, 28, 28)))
        assert np.array_equal(ds.labels, [3, 7])

    def test_round_trip(self, tmp_path):
        original = make_blob_set(5, seed=3)
        write_idx(original, tmp_path / "i.idx", tmp_path / "l.idx")
        reloaded = load_idx(tmp_path / "i.idx", tmp_path / "l.idx")
        assert np.array_equal(reloaded.labels, original.labels)
        # pixels survive the byte quantization exactly (they came from bytes)
        write_idx(reloaded, tmp_path / "i2.idx", tmp_path / "l2.idx")
        assert (tmp_path / "i.idx").read_bytes() == (tmp_path / "i2.idx").read_bytes()
        assert (tmp_path / "l.idx").read_bytes() == (tmp_path / "l2.idx").read_bytes()

    def test_truncated_label_file(self, tmp_path):
        images = np.zeros((3, 4, 4), dtype=np.uint8)
        labels = np.zeros(3, dtype=np.uint8)
        img_path, lbl_path = write_raw_idx(tmp_path, images, labels)
        data = lbl_path.read_bytes()
        lbl_path.write_bytes(data[:-1])
        with pytest.raises(IdxFormatError) as exc_info:
            load_idx(img_path, lbl_path)
        assert exc_info.value.offset == len(data) - 1

    def test_bad_image_magic(self, tmp_path):
        images = np.zeros((1, 2, 2), dtype=np.uint8)
        labels = np.zeros(1, dtype=np.uint8)
        img_path, lbl_path = write_raw_idx(tmp_path, images, labels)
        raw = bytearray(img_path.read_bytes())
        raw[3] = 0x01
        img_path.write_bytes(bytes(raw))
        with pytest.raises(IdxFormatError) as exc_info:
            load_idx(img_path, lbl_path)
        assert exc_info.value.offset == 0

    def test_count_mismatch(self, tmp_path):
        images = np.zeros((2, 2, 2), dtype=np.uint8)
        labels = np.zeros(2, dtype=np.uint8)
        img_path, _ = write_raw_idx(tmp_path, images, labels)
        _, lbl3 = write_raw_idx(
            tmp_path, np.zeros((3, 2, 2), dtype=np.uint8), np.zeros(3, dtype=np.uint8), prefix="b-"
        )
        with pytest.raises(IdxFormatError, match="3 labels for 2 images"):
            load_idx(img_path, lbl3)

    def test_truncated_pixel_data(self, tmp_path):
        images = np.zeros((2, 3, 3), dtype=np.uint8)
        labels = np.zeros(2, dtype=np.uint8)
        img_path, lbl_path = write_raw_idx(tmp_path, images, labels)
        data = img_path.read_bytes()
        img_path.write_bytes(data[:-2])
        with pytest.raises(IdxFormatError, match="truncated pixel data"):
            load_idx(img_path, lbl_path)


@pytest.fixture(scope="module")
def pool():
    rng = np.random.default_rng(0)
    return LabeledSet(
        images=rng.random((62_000, 4, 4)),
        labels=rng.integers(0, 10, size=62_000),
    )


class TestPooledSplit:

    def test_sizes(self, pool):
        train, test = pooled_split(pool, seed=1)
        assert len(train) == 50_000
        assert len(test) == 12_000

    def test_swap(self, pool):
        train, test = pooled_split(pool, seed=1, swap=True)
        assert len(train) == 12_000
        assert len(test) == 50_000

    def test_deterministic(self, pool):
        a_train, a_test = pooled_split(pool, seed=5)
        b_train, b_test = pooled_split(pool, seed=5)
        assert np.array_equal(a_train.images, b_train.images)
        assert np.array_equal(a_test.labels, b_test.labels)

    def test_disjoint_partition(self):
        n = 62_000
        ids = np.arange(n, dtype=np.float64).reshape(n, 1, 1) / n
        pool = LabeledSet(images=ids, labels=np.zeros(n, dtype=np.int64))
        train, test = pooled_split(pool, seed=9)
        train_ids = set(np.round(train.images.ravel() * n).astype(int))
        test_ids = set(np.round(test.images.ravel() * n).astype(int))
        assert not train_ids & test_ids
        assert len(train_ids) == 50_000 and len(test_ids) == 12_000

    def test_class_counts_logged(self, pool):
        train, test = pooled_split(pool, seed=2)
        assert sum(train.split_meta["class_counts"].values()) == 50_000
        assert sum(test.split_meta["class_counts"].values()) == 12_000

    def test_insufficient_samples(self):
        pool = LabeledSet(images=np.zeros((100, 2, 2)), labels=np.zeros(100, dtype=np.int64))
        with pytest.raises(InputError):
            pooled_split(pool, seed=0)


class TestAddNoise:
    def test_variance_zero_identity(self, rng):
        ds = LabeledSet(images=rng.random((4, 8, 8)), labels=np.arange(4))
        out = add_noise(ds, NoiseSpec(variance=0.0, seed=3))
        assert np.array_equal(out.images, ds.images)

    def test_deterministic(self, rng):
        ds = LabeledSet(images=rng.random((4, 8, 8)), labels=np.arange(4))
        a = add_noise(ds, NoiseSpec(variance=0.1, seed=3))
        b = add_noise(ds, NoiseSpec(variance=0.1, seed=3))
        assert np.array_equal(a.images, b.images)

    def test_unclamped_noise_statistics(self):
        # small variance on mid-gray pixels: essentially nothing clips,
        # so sample mean/variance follow the raw generator
        variance = 0.01
        n_imgs, size = 160, 28
        ds = LabeledSet(images=np.full((n_imgs, size, size), 0.5), labels=np.zeros(n_imgs, dtype=np.int64))
        noisy = add_noise(ds, NoiseSpec(variance=variance, seed=11))
        delta = (noisy.images - 0.5).ravel()
        n = delta.size
        assert abs(delta.mean()) < 4 * np.sqrt(variance / n)
        assert abs(delta.var() - variance) < 0.1 * variance

    def test_clamped_variance_matches_analytic_oracle(self):
        # at variance 0.25 the clamp bites hard; compare against the
        # closed-form clipped-normal moments
        variance = 0.25
        expected = clipped_normal_variance(variance)
        n_imgs, size = 160, 28
        ds = LabeledSet(images=np.full((n_imgs, size, size), 0.5), labels=np.zeros(n_imgs, dtype=np.int64))
        noisy = add_noise(ds, NoiseSpec(variance=variance, seed=13))
        pixels = noisy.images.ravel()
        assert pixels.min() >= 0.0 and pixels.max() <= 1.0
        assert abs(pixels.mean() - 0.5) < 0.02
        assert abs(pixels.var() - expected) < 0.03 * expected

    def test_negative_variance_rejected(self):
        with pytest.raises(ConfigurationError):
            NoiseSpec(variance=-0.1, seed=0)

    def test_pixels_stay_in_range(self, rng):
        ds = LabeledSet(images=rng.random((6, 10, 10)), labels=np.zeros(6, dtype=np.int64))
        noisy = add_noise(ds, NoiseSpec(variance=0.3, seed=1))
        assert noisy.images.min() >= 0.0
        assert noisy.images.max() <= 1.0
