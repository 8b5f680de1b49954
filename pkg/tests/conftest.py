import os

import numpy as np
import pytest

from csnet.dataset import LabeledSet

MNIST_NAMES = {
    "train_images": "train-images-idx3-ubyte",
    "train_labels": "train-labels-idx1-ubyte",
    "test_images": "t10k-images-idx3-ubyte",
    "test_labels": "t10k-labels-idx1-ubyte",
}


def mnist_paths():
    """Locate the four MNIST IDX files, or None if they are not available.

    Looks in $CSNET_MNIST_DIR, falling back to <repo>/data/mnist.
    """
    root = os.environ.get(
        "CSNET_MNIST_DIR",
        os.path.join(os.path.dirname(__file__), "..", "data", "mnist"),
    )
    paths = {k: os.path.join(root, v) for k, v in MNIST_NAMES.items()}
    if all(os.path.exists(p) for p in paths.values()):
        return paths
    return None


def make_blob_set(n_per_class: int, seed: int, size: int = 28) -> LabeledSet:
    """Synthetic 3-class set: a bright block in a class-specific quadrant
    over dim background noise, with small positional jitter. Cleanly
    separable through the histogram pipeline."""
    rng = np.random.default_rng(seed)
    centers = [(size // 4, size // 4), (size // 4, 3 * size // 4), (3 * size // 4, size // 4)]
    images, labels = [], []
    for label, (ci, cj) in enumerate(centers):
        for _ in range(n_per_class):
            img = rng.random((size, size)) * 0.15
            di, dj = rng.integers(-2, 3, size=2)
            lo_i, lo_j = max(ci - 4 + di, 0), max(cj - 4 + dj, 0)
            img[lo_i : ci + 4 + di, lo_j : cj + 4 + dj] += 0.8
            images.append(np.clip(img, 0.0, 1.0))
            labels.append(label)
    order = rng.permutation(len(images))
    return LabeledSet(np.array(images)[order], np.array(labels, dtype=np.int64)[order])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(scope="session")
def toy_idx_files(tmp_path_factory):
    """Toy train/test IDX file pairs on disk (session-scoped)."""
    from csnet.dataset import write_idx

    root = tmp_path_factory.mktemp("toy_idx")
    train = make_blob_set(30, seed=11)
    test = make_blob_set(10, seed=22)
    paths = {
        "train_images": str(root / "train-images.idx"),
        "train_labels": str(root / "train-labels.idx"),
        "test_images": str(root / "test-images.idx"),
        "test_labels": str(root / "test-labels.idx"),
    }
    write_idx(train, paths["train_images"], paths["train_labels"])
    write_idx(test, paths["test_images"], paths["test_labels"])
    return paths
