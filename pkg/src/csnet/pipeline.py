"""End-to-end training and evaluation.

``train_model`` runs split -> noise -> filter learning -> cascade ->
hashing/histograms -> SVM and returns the trained model plus a metrics
record; ``evaluate_model`` replays the stored feature pipeline on a chosen
split. Feature extraction streams over image chunks and accumulates a CSR
matrix, so memory stays flat at MNIST scale.
"""

import time
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import seeding
from .config import SPLIT_FILES, SPLIT_POOLED_SWAPPED, ExperimentConfig
from .dataset import LabeledSet, NoiseSpec, add_noise, load_idx, pooled_split
from .errors import ConfigurationError, CsnetError
from .features import features_from_cascade
from .filterbank import FilterBank, cascade, learn_filter_bank
from .svm import SvmModel, evaluate, train_svm


@dataclass
class TrainedModel:
    """Everything needed to classify new images: the configuration it was
    trained under, the filter bank, and the SVM."""

    config: ExperimentConfig
    bank: FilterBank
    svm: SvmModel
    format_version: int = 1


@dataclass
class PhaseClock:
    """Wall-clock accounting per pipeline phase; errors raised inside a
    phase get tagged with the phase name for the CLI."""

    seconds: dict = field(default_factory=dict)

    @contextmanager
    def phase(self, name: str):
        start = time.perf_counter()
        try:
            yield
        except CsnetError as exc:
            if not getattr(exc, "phase", None):
                exc.phase = name
            raise
        finally:
            self.seconds[name] = self.seconds.get(name, 0.0) + (
                time.perf_counter() - start
            )


def extract_feature_matrix(
    images: np.ndarray, bank: FilterBank, block_spec, chunk_size: int = 256
) -> sp.csr_matrix:
    """Cascade + nonlinear stage for a whole image stack, chunked into a
    sparse feature matrix (histograms are mostly zeros)."""
    parts = []
    for start in range(0, images.shape[0], chunk_size):
        chunk = images[start : start + chunk_size]
        dense = features_from_cascade(cascade(chunk, bank), block_spec)
        parts.append(sp.csr_matrix(dense))
    return sp.vstack(parts, format="csr")


def load_splits(config: ExperimentConfig):
    """Materialize the train/test split the configuration asks for."""
    for name in ("train_images", "train_labels", "test_images", "test_labels"):
        if getattr(config, name) is None:
            raise ConfigurationError(f"config is missing the {name} path")
    first = load_idx(config.train_images, config.train_labels)
    second = load_idx(config.test_images, config.test_labels)
    if config.split_mode == SPLIT_FILES:
        train, test = first, second
        train.split_meta.update(role="train", class_counts=train.class_counts())
        test.split_meta.update(role="test", class_counts=test.class_counts())
    else:
        pooled = LabeledSet(
            np.concatenate([first.images, second.images]),
            np.concatenate([first.labels, second.labels]),
        )
        train, test = pooled_split(
            pooled,
            seed=seeding.derive_seed(config.seed, seeding.TAG_SPLIT),
            swap=config.split_mode == SPLIT_POOLED_SWAPPED,
        )
    if config.train_limit is not None:
        train = train.take(config.train_limit)
    if config.test_limit is not None:
        test = test.take(config.test_limit)
    return train, test


def _noisy(config: ExperimentConfig, dataset: LabeledSet, tag: int) -> LabeledSet:
    if config.noise_variance == 0.0:
        return dataset
    spec = NoiseSpec(
        variance=config.noise_variance,
        seed=seeding.derive_seed(config.seed, tag),
    )
    return add_noise(dataset, spec)


def train_model(config: ExperimentConfig, clock: PhaseClock | None = None):
    """Train filters and the classifier; returns (model, metrics dict).

    The metrics record echoes the configuration, the split composition, the
    training error, and per-phase wall-clock seconds.
    """
    clock = clock or PhaseClock()
    with clock.phase("load"):
        train, _ = load_splits(config)
    with clock.phase("noise"):
        train = _noisy(config, train, seeding.TAG_NOISE_TRAIN)
    with clock.phase("learn_filters"):
        stage_seeds = [
            seeding.derive_seed(config.seed, seeding.TAG_MEASUREMENT, s)
            if config.method != "random"
            else seeding.derive_seed(config.seed, seeding.TAG_RANDOM_FILTERS, s)
            for s in range(len(config.stage_widths))
        ]
        bank = learn_filter_bank(
            train.images,
            config.stage_widths,
            config.patch_config(),
            method=config.method,
            k_sparsity=config.resolved_k,
            m_measurements=config.resolved_m,
            seed=config.seed,
            stage_seeds=stage_seeds,
            chunk_size=config.chunk_size,
            omp_tol=config.omp_tol,
        )
    with clock.phase("features_train"):
        features = extract_feature_matrix(
            train.images, bank, config.block_spec(), config.chunk_size
        )
    with clock.phase("train_svm"):
        svm = train_svm(
            features,
            train.labels,
            c=config.svm_c,
            tol=config.svm_tol,
            max_iter=config.svm_max_iter,
            seed=seeding.derive_seed(config.seed, seeding.TAG_SVM),
        )
    with clock.phase("train_error"):
        report = evaluate(svm, features, train.labels)

    model = TrainedModel(config=config, bank=bank, svm=svm)
    metrics = {
        "record": "train",
        "config": config.to_dict(),
        "n_train": len(train),
        "train_class_counts": train.class_counts(),
        "train_error": report.error_rate,
        "feature_dim": int(features.shape[1]),
        "svm_sweeps": svm.training_meta["sweeps"],
        "phase_seconds": {k: round(v, 3) for k, v in clock.seconds.items()},
    }
    return model, metrics


def evaluate_model(
    model: TrainedModel,
    on: str = "test",
    noise_variance: float | None = None,
    config_overrides: dict | None = None,
    clock: PhaseClock | None = None,
):
    """Replay the stored pipeline on the train or test split.

    ``noise_variance`` (and any path/limit overrides) replace the stored
    config for data preparation only; the filter bank and SVM are used as
    trained. Returns (EvalReport, metrics dict).
    """
    if on not in ("train", "test"):
        raise ConfigurationError(f"eval split must be 'train' or 'test', got {on!r}")
    clock = clock or PhaseClock()
    config = model.config
    if config_overrides:
        config = config.replace(**config_overrides)
    if noise_variance is not None:
        config = config.replace(noise_variance=noise_variance)

    with clock.phase("load"):
        train, test = load_splits(config)
        chosen = train if on == "train" else test
    with clock.phase("noise"):
        tag = seeding.TAG_NOISE_TRAIN if on == "train" else seeding.TAG_NOISE_TEST
        chosen = _noisy(config, chosen, tag)
    with clock.phase("features_eval"):
        features = extract_feature_matrix(
            chosen.images, model.bank, config.block_spec(), config.chunk_size
        )
    with clock.phase("evaluate"):
        report = evaluate(model.svm, features, chosen.labels)

    metrics = {
        "record": "eval",
        "on": on,
        "noise_variance": config.noise_variance,
        "n_test": report.n_test,
        "error_rate": report.error_rate,
        "confusion": report.confusion.tolist(),
        "classes": model.svm.classes.tolist(),
        "phase_seconds": {k: round(v, 3) for k, v in clock.seconds.items()},
    }
    return report, metrics
