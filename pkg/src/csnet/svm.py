"""Multiclass linear SVM trained by dual coordinate descent.

One L2-regularized hinge-loss problem per class (one vs rest), solved in the
dual with liblinear-style coordinate updates. The bias is handled by the
usual augmented-feature trick (a constant 1 appended to every sample), so it
is regularized along with the weights; with histogram features of this scale
the difference from an unregularized bias is negligible.

Feature matrices may be dense or ``scipy.sparse.csr_matrix``; training
always runs on CSR internally, with the per-sample loop compiled by numba.
"""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from numba import njit

from .errors import ConfigurationError, InputError
from .seeding import TAG_SVM, derive_seed


@dataclass
class SvmModel:
    """One-vs-rest linear model: per-class weights and biases over the raw
    feature dimension. ``training_meta`` records convergence diagnostics;
    ``dual_coefs`` keeps each class's dual variables for auditing."""

    classes: np.ndarray
    weights: np.ndarray
    biases: np.ndarray
    c_param: float
    training_meta: dict = field(default_factory=dict)
    dual_coefs: np.ndarray | None = None

    @property
    def n_features(self) -> int:
        return self.weights.shape[1]


@dataclass(frozen=True)
class EvalReport:
    """Classification outcome: ``confusion[i, j]`` counts samples of true
    class i predicted as class j (indices follow the model's class order)."""

    error_rate: float
    confusion: np.ndarray
    n_test: int


@njit(cache=True)
def _cd_sweep(data, indices, indptr, y, alpha, w, q_diag, c, order):
    """One pass of dual coordinate descent over ``order``.

    ``w`` has one extra trailing slot for the bias feature. Returns the
    maximal projected-gradient violation seen during the sweep.
    """
    bias_slot = w.shape[0] - 1
    max_violation = 0.0
    for t in range(order.shape[0]):
        i = order[t]
        lo, hi = indptr[i], indptr[i + 1]
        score = w[bias_slot]
        for p in range(lo, hi):
            score += w[indices[p]] * data[p]
        g = y[i] * score - 1.0
        a = alpha[i]
        if a <= 0.0:
            pg = g if g < 0.0 else 0.0
        elif a >= c:
            pg = g if g > 0.0 else 0.0
        else:
            pg = g
        viol = -pg if pg < 0.0 else pg
        if viol > max_violation:
            max_violation = viol
        if viol > 1e-12:
            a_new = a - g / q_diag[i]
            if a_new < 0.0:
                a_new = 0.0
            elif a_new > c:
                a_new = c
            delta = (a_new - a) * y[i]
            if delta != 0.0:
                alpha[i] = a_new
                for p in range(lo, hi):
                    w[indices[p]] += delta * data[p]
                w[bias_slot] += delta
    return max_violation


def _as_csr(features):
    if sp.issparse(features):
        x = features.tocsr().astype(np.float64)
    else:
        arr = np.asarray(features, dtype=np.float64)
        if arr.ndim != 2:
            raise InputError("feature matrix must be 2-D (n_samples, n_features)")
        x = sp.csr_matrix(arr)
    x.sort_indices()
    return x


def _dual_objective(w_aug, alpha):
    # CD minimizes f(a) = 0.5 ||w_aug||^2 - sum(a); monotone per sweep.
    return 0.5 * float(w_aug @ w_aug) - float(alpha.sum())


def primal_objective(weights, bias, x, y, c):
    """0.5 (||w||^2 + b^2) + C * total hinge loss for one binary problem."""
    scores = x @ weights + bias
    hinge = np.maximum(0.0, 1.0 - y * scores)
    return 0.5 * (float(weights @ weights) + bias * bias) + c * float(hinge.sum())


def train_svm(
    features,
    labels,
    c: float = 1.0,
    tol: float = 1e-3,
    max_iter: int = 200,
    seed: int = 0,
    log_objective: bool = False,
) -> SvmModel:
    """Fit a one-vs-rest linear SVM.

    Each class's dual problem is swept in a seeded random permutation order
    (the same permutation sequence for every class, so results are
    deterministic and the two-class problems are exact mirror images).
    A class converges when the largest projected-gradient violation in a
    sweep drops below ``tol``, or after ``max_iter`` sweeps.
    """
    if c <= 0:
        raise ConfigurationError(f"C must be positive, got {c}")
    x = _as_csr(features)
    labels = np.asarray(labels).ravel()
    if labels.shape[0] != x.shape[0]:
        raise InputError(
            f"{x.shape[0]} feature rows but {labels.shape[0]} labels"
        )
    classes = np.unique(labels)
    if classes.shape[0] < 2:
        raise ConfigurationError("training needs at least two classes")

    n, dim = x.shape
    sq_norms = np.asarray(x.multiply(x).sum(axis=1)).ravel()
    q_diag = sq_norms + 1.0  # + bias feature

    # Sweep orders are derived lazily and shared across classes, so class
    # subproblems stay independent (parallelizable) yet deterministic.
    orders: dict[int, np.ndarray] = {}

    def order_for(sweep: int) -> np.ndarray:
        if sweep not in orders:
            rng = np.random.default_rng(derive_seed(seed, TAG_SVM, sweep))
            orders[sweep] = rng.permutation(n)
        return orders[sweep]

    weights = np.zeros((classes.shape[0], dim))
    biases = np.zeros(classes.shape[0])
    dual = np.zeros((classes.shape[0], n))
    meta = {
        "seed": int(seed),
        "tol": float(tol),
        "max_iter": int(max_iter),
        "sweeps": [],
        "final_violation": [],
        "converged": [],
    }
    traces = [] if log_objective else None

    for ci in range(classes.shape[0]):
        y = np.where(labels == classes[ci], 1.0, -1.0)
        alpha = np.zeros(n)
        w_aug = np.zeros(dim + 1)
        trace = []
        sweeps = 0
        violation = np.inf
        for sweep in range(max_iter):
            violation = _cd_sweep(
                x.data, x.indices, x.indptr, y, alpha, w_aug, q_diag, c, order_for(sweep)
            )
            sweeps += 1
            if log_objective:
                trace.append(_dual_objective(w_aug, alpha))
            if violation < tol:
                break
        weights[ci] = w_aug[:dim]
        biases[ci] = w_aug[dim]
        dual[ci] = alpha
        meta["sweeps"].append(sweeps)
        meta["final_violation"].append(float(violation))
        meta["converged"].append(bool(violation < tol))
        if log_objective:
            traces.append(trace)
    if log_objective:
        meta["objective_trace"] = traces

    return SvmModel(
        classes=classes,
        weights=weights,
        biases=biases,
        c_param=float(c),
        training_meta=meta,
        dual_coefs=dual,
    )


def decision_scores(model: SvmModel, features) -> np.ndarray:
    """Per-class scores w.x + b as an (n, n_classes) array."""
    if sp.issparse(features):
        if features.shape[1] != model.n_features:
            raise InputError(
                f"feature dim {features.shape[1]} != model dim {model.n_features}"
            )
        return np.asarray(features @ model.weights.T) + model.biases
    arr = np.asarray(features, dtype=np.float64)
    squeeze = arr.ndim == 1
    if squeeze:
        arr = arr[None]
    if arr.shape[1] != model.n_features:
        raise InputError(
            f"feature dim {arr.shape[1]} != model dim {model.n_features}"
        )
    scores = arr @ model.weights.T + model.biases
    return scores[0] if squeeze else scores


def predict(model: SvmModel, feature):
    """Label with the maximal score; ties go to the lowest class index."""
    scores = decision_scores(model, feature)
    if scores.ndim == 1:
        return model.classes[int(np.argmax(scores))]
    return model.classes[np.argmax(scores, axis=1)]


def evaluate(model: SvmModel, features, labels) -> EvalReport:
    """Error rate and confusion matrix over a labeled set."""
    labels = np.asarray(labels).ravel()
    if labels.shape[0] == 0:
        raise InputError("empty evaluation set")
    predicted = predict(model, features)
    k = model.classes.shape[0]
    true_idx = np.searchsorted(model.classes, labels)
    bad = (true_idx >= k) | (model.classes[np.minimum(true_idx, k - 1)] != labels)
    if np.any(bad):
        raise InputError(
            f"labels {np.unique(labels[bad])} were never seen during training"
        )
    pred_idx = np.searchsorted(model.classes, predicted)
    confusion = np.zeros((k, k), dtype=np.int64)
    np.add.at(confusion, (true_idx, pred_idx), 1)
    n = labels.shape[0]
    error = 1.0 - float(np.trace(confusion)) / n
    return EvalReport(error_rate=error, confusion=confusion, n_test=n)
