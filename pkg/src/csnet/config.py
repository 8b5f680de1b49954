"""Experiment configuration: one record holding every tunable.

Defaults reproduce the headline run: two stages of 8 filters, 7x7 patches,
7x7 histogram blocks with no overlap, SVM trade-off C=1.
"""

import json
import math
from dataclasses import asdict, dataclass, fields

from .errors import ConfigurationError
from .filterbank import METHODS, PatchConfig
from .features import BlockSpec

SPLIT_POOLED = "pooled"
SPLIT_POOLED_SWAPPED = "pooled-swapped"
SPLIT_FILES = "files"
SPLIT_MODES = (SPLIT_POOLED, SPLIT_POOLED_SWAPPED, SPLIT_FILES)


@dataclass
class ExperimentConfig:
    method: str = "cs"
    stage_widths: tuple = (8, 8)
    k1: int = 7
    k2: int = 7
    stride: int = 1
    k_sparsity: int | None = None  # None -> k1
    m_measurements: int | None = None  # None -> ceil(k1*k2 / 2)
    block_h: int = 7
    block_w: int = 7
    overlap_ratio: float = 0.0
    noise_variance: float = 0.0
    svm_c: float = 1.0
    svm_tol: float = 1e-3
    svm_max_iter: int = 200
    omp_tol: float = 0.0
    seed: int = 0
    split_mode: str = SPLIT_POOLED
    train_limit: int | None = None
    test_limit: int | None = None
    scale: float = 1.0  # recorded for config fidelity; no effect on the pipeline
    train_images: str | None = None
    train_labels: str | None = None
    test_images: str | None = None
    test_labels: str | None = None
    chunk_size: int = 256

    def __post_init__(self):
        self.stage_widths = tuple(int(w) for w in self.stage_widths)
        self.validate()

    # -- derived values ----------------------------------------------------
    @property
    def patch_dim(self) -> int:
        return self.k1 * self.k2

    @property
    def resolved_k(self) -> int:
        return self.k1 if self.k_sparsity is None else self.k_sparsity

    @property
    def resolved_m(self) -> int:
        if self.m_measurements is None:
            return math.ceil(self.patch_dim / 2)
        return self.m_measurements

    def patch_config(self) -> PatchConfig:
        return PatchConfig(k1=self.k1, k2=self.k2, stride=self.stride)

    def block_spec(self) -> BlockSpec:
        return BlockSpec(
            block_h=self.block_h, block_w=self.block_w, overlap_ratio=self.overlap_ratio
        )

    # -- validation ---------------------------------------------------------
    def validate(self):
        if self.method not in METHODS:
            raise ConfigurationError(
                f"method must be one of {METHODS}, got {self.method!r}"
            )
        if self.split_mode not in SPLIT_MODES:
            raise ConfigurationError(
                f"split_mode must be one of {SPLIT_MODES}, got {self.split_mode!r}"
            )
        if len(self.stage_widths) < 1 or any(w < 1 for w in self.stage_widths):
            raise ConfigurationError(f"invalid stage widths {self.stage_widths}")
        if any(w > self.patch_dim for w in self.stage_widths):
            raise ConfigurationError(
                f"a stage width exceeds the patch dimension {self.patch_dim}"
            )
        if self.stage_widths[-1] > 32:
            raise ConfigurationError("last stage width is capped at 32 (hash bits)")
        self.patch_config()  # validates k1, k2, stride
        self.block_spec()  # validates block/overlap
        if not 1 <= self.resolved_k <= self.resolved_m <= self.patch_dim:
            raise ConfigurationError(
                f"need 1 <= K <= M <= d: K={self.resolved_k}, "
                f"M={self.resolved_m}, d={self.patch_dim}"
            )
        if not 0.0 <= self.noise_variance <= 1.0:
            raise ConfigurationError(
                f"noise variance must lie in [0, 1], got {self.noise_variance}"
            )
        if self.svm_c <= 0:
            raise ConfigurationError(f"svm_c must be positive, got {self.svm_c}")
        if self.svm_max_iter < 1:
            raise ConfigurationError("svm_max_iter must be >= 1")
        if self.omp_tol < 0:
            raise ConfigurationError("omp_tol must be >= 0")
        if self.chunk_size < 1:
            raise ConfigurationError("chunk_size must be >= 1")
        for lim in (self.train_limit, self.test_limit):
            if lim is not None and lim < 1:
                raise ConfigurationError(f"sample limit must be >= 1, got {lim}")

    # -- serialization ------------------------------------------------------
    def to_dict(self) -> dict:
        d = asdict(self)
        d["stage_widths"] = list(self.stage_widths)
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"unknown config fields: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def from_json(cls, path) -> "ExperimentConfig":
        with open(path) as f:
            try:
                data = json.load(f)
            except json.JSONDecodeError as exc:
                raise ConfigurationError(f"{path}: invalid JSON ({exc})") from exc
        return cls.from_dict(data)

    def replace(self, **updates) -> "ExperimentConfig":
        d = self.to_dict()
        d.update(updates)
        return ExperimentConfig.from_dict(d)
