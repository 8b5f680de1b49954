"""csnet: image classification with filter banks learned by sparse recovery.

Convolution filters are recovered as K-sparse DCT-domain vectors from random
Gaussian measurements of patch statistics (orthogonal matching pursuit does
the inversion). A cascade of such filter stages feeds a binarize/hash/block-
histogram output stage, and a linear one-vs-rest SVM classifies the result.
PCA-eigenvector and random filter banks are included as baselines behind the
same pipeline.
"""

from .config import ExperimentConfig
from .dataset import LabeledSet, NoiseSpec, add_noise, load_idx, pooled_split, write_idx
from .errors import (
    ConfigurationError,
    CsnetError,
    DegenerateInputError,
    IdxFormatError,
    InputError,
    ModelFormatError,
    SingularMatrixError,
)
from .features import (
    BlockSpec,
    assemble_feature,
    block_histograms,
    feature_length,
    features_from_cascade,
    hash_group,
    heaviside,
)
from .filterbank import (
    CascadeOutput,
    FilterBank,
    PatchConfig,
    StageFilters,
    cascade,
    extract_patches,
    learn_cs_filters,
    learn_filter_bank,
    learn_pca_filters,
    learn_random_filters,
    learn_stage2_filters,
)
from .linalg import conv2d_same, dct_matrix, least_squares
from .model_io import load_model, save_model
from .pipeline import TrainedModel, evaluate_model, extract_feature_matrix, train_model
from .sensing import MeasurementMatrix, OmpResult, gaussian_measurement, omp
from .svm import EvalReport, SvmModel, evaluate, predict, train_svm

__version__ = "0.1.0"

__all__ = [
    "BlockSpec",
    "CascadeOutput",
    "ConfigurationError",
    "CsnetError",
    "DegenerateInputError",
    "EvalReport",
    "ExperimentConfig",
    "FilterBank",
    "IdxFormatError",
    "InputError",
    "LabeledSet",
    "MeasurementMatrix",
    "ModelFormatError",
    "NoiseSpec",
    "OmpResult",
    "PatchConfig",
    "SingularMatrixError",
    "StageFilters",
    "SvmModel",
    "TrainedModel",
    "add_noise",
    "assemble_feature",
    "block_histograms",
    "cascade",
    "conv2d_same",
    "dct_matrix",
    "evaluate",
    "evaluate_model",
    "extract_feature_matrix",
    "extract_patches",
    "feature_length",
    "features_from_cascade",
    "gaussian_measurement",
    "hash_group",
    "heaviside",
    "learn_cs_filters",
    "learn_filter_bank",
    "learn_pca_filters",
    "learn_random_filters",
    "learn_stage2_filters",
    "least_squares",
    "load_idx",
    "load_model",
    "omp",
    "pooled_split",
    "predict",
    "save_model",
    "train_model",
    "train_svm",
    "write_idx",
]
