"""Bona fide vs. attack scoring: linear max-margin classifier and GMM LLR.

The SVM minimizes 0.5*||w||^2 + sum_i C_i * max(0, 1 - y_i (w.x_i + b)) by
dual coordinate descent with shrinking and seeded shuffling, stopping when
the duality gap drops below 1e-3 of the primal. The bias is handled with an
augmented constant feature (so it carries a small regularization term, as
in liblinear). Features are standardized with statistics from the training
split, stored in the model and applied again at scoring time. With
class-balanced costs (the default), C_i = C * n / (2 * n_class(y_i)).

Model file format: magic "LSVM1\n", ASCII "dim\n", then the
standardization mean and scale vectors, w, and b as little-endian float64.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .encoding import GmmModel, gmm_log_likelihood
from .errors import DataError, NumericError

__all__ = ["SvmModel", "svm_train", "svm_score", "svm_score_batch",
           "gmm_llr_score", "save_svm", "load_svm"]

_SVM_MAGIC = b"LSVM1\n"


@dataclass(frozen=True)
class SvmModel:
    """Linear decision function w.x + b over standardized features."""

    weights: np.ndarray
    bias: float
    c: float
    feature_mean: np.ndarray
    feature_scale: np.ndarray

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=np.float64)
        mean = np.asarray(self.feature_mean, dtype=np.float64)
        scale = np.asarray(self.feature_scale, dtype=np.float64)
        if weights.ndim != 1 or mean.shape != weights.shape or scale.shape != weights.shape:
            raise DataError("inconsistent SVM parameter shapes")
        if not (np.all(np.isfinite(weights)) and np.isfinite(self.bias)
                and np.all(np.isfinite(mean)) and np.all(np.isfinite(scale))):
            raise DataError("non-finite SVM parameters")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "feature_mean", mean)
        object.__setattr__(self, "feature_scale", scale)

    @property
    def feature_dim(self) -> int:
        return self.weights.shape[0]


def identity_svm(weights, bias: float, c: float = 1.0) -> SvmModel:
    """Model with no standardization (mean 0, scale 1); handy for tests."""
    weights = np.asarray(weights, dtype=np.float64)
    return SvmModel(weights=weights, bias=float(bias), c=c,
                    feature_mean=np.zeros_like(weights),
                    feature_scale=np.ones_like(weights))


def svm_train(features, labels, c: float = 1.0, epochs: int = 1000, seed: int = 0,
              balanced: bool = True, gap_tol: float = 1e-3) -> SvmModel:
    """Train the linear hinge-loss classifier by dual coordinate descent.

    `labels` are +1 (bona fide) / -1 (attack); both classes must be
    present. Deterministic for fixed inputs and seed.
    """
    x = np.asarray(features, dtype=np.float64)
    y = np.asarray(labels, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != y.shape[0]:
        raise DataError("features must be (n, d) with one label per row")
    if not np.all(np.isfinite(x)):
        raise DataError("non-finite feature values")
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise DataError("labels must be +1 or -1")
    n_pos = int(np.sum(y > 0))
    n_neg = int(np.sum(y < 0))
    if n_pos == 0 or n_neg == 0:
        raise DataError("both classes must be present")
    if c <= 0:
        raise DataError("C must be positive")
    n, dim = x.shape

    mean = x.mean(axis=0)
    scale = x.std(axis=0)
    scale[scale == 0.0] = 1.0
    xs = np.empty((n, dim + 1))
    xs[:, :dim] = (x - mean) / scale
    xs[:, dim] = 1.0  # augmented bias feature

    if balanced:
        cost = np.where(y > 0, c * n / (2.0 * n_pos), c * n / (2.0 * n_neg))
    else:
        cost = np.full(n, c)

    sq_norm = np.einsum("ij,ij->i", xs, xs)
    alpha = np.zeros(n)
    w = np.zeros(dim + 1)
    rng = np.random.default_rng(seed)

    active = np.arange(n)
    pg_max_old = np.inf
    pg_min_old = -np.inf
    for _ in range(epochs):
        rng.shuffle(active)
        pg_max_new = -np.inf
        pg_min_new = np.inf
        kept = []
        for i in active:
            grad = y[i] * (w @ xs[i]) - 1.0
            violation = 0.0
            if alpha[i] == 0.0:
                if grad > pg_max_old:
                    continue  # shrink
                if grad < 0.0:
                    violation = grad
            elif alpha[i] == cost[i]:
                if grad < pg_min_old:
                    continue  # shrink
                if grad > 0.0:
                    violation = grad
            else:
                violation = grad
            kept.append(i)
            pg_max_new = max(pg_max_new, violation)
            pg_min_new = min(pg_min_new, violation)
            if violation != 0.0:
                old = alpha[i]
                alpha[i] = min(max(old - grad / sq_norm[i], 0.0), cost[i])
                if alpha[i] != old:
                    w += (alpha[i] - old) * y[i] * xs[i]

        margins = 1.0 - y * (xs @ w)
        primal = 0.5 * (w @ w) + float(np.sum(cost * np.clip(margins, 0.0, None)))
        dual = float(alpha.sum()) - 0.5 * (w @ w)
        if primal - dual <= gap_tol * max(primal, 1e-300):
            break
        if kept:
            active = np.array(kept)
        else:
            active = np.arange(n)
        if len(kept) == n:
            pg_max_old = np.inf
            pg_min_old = -np.inf
        else:
            pg_max_old = pg_max_new if pg_max_new > 0 else np.inf
            pg_min_old = pg_min_new if pg_min_new < 0 else -np.inf

    return SvmModel(weights=w[:dim].copy(), bias=float(w[dim]), c=c,
                    feature_mean=mean, feature_scale=scale)


def _standardize(model: SvmModel, x: np.ndarray) -> np.ndarray:
    return (x - model.feature_mean) / model.feature_scale


def svm_score(model: SvmModel, x) -> float:
    """Decision value w.x + b on the standardized feature; higher = more bona fide."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.feature_dim,):
        raise DataError(f"feature dim {x.shape} does not match model ({model.feature_dim})")
    return float(model.weights @ _standardize(model, x) + model.bias)


def svm_score_batch(model: SvmModel, features) -> np.ndarray:
    x = np.asarray(features, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.feature_dim:
        raise DataError(f"features must be (n, {model.feature_dim})")
    return _standardize(model, x) @ model.weights + model.bias


def gmm_llr_score(bona_model: GmmModel, attack_model: GmmModel, frames) -> float:
    """Mean log-likelihood ratio of the two-GMM back end; higher = more bona fide."""
    if bona_model.dim != attack_model.dim:
        raise DataError("bona fide and attack models have different dimensions")
    return gmm_log_likelihood(bona_model, frames) - gmm_log_likelihood(attack_model, frames)


def save_svm(path, model: SvmModel) -> None:
    with open(path, "wb") as fh:
        fh.write(_SVM_MAGIC)
        fh.write(f"{model.feature_dim}\n".encode("ascii"))
        fh.write(model.feature_mean.astype("<f8").tobytes())
        fh.write(model.feature_scale.astype("<f8").tobytes())
        fh.write(model.weights.astype("<f8").tobytes())
        fh.write(np.array([model.bias], dtype="<f8").tobytes())


def load_svm(path) -> SvmModel:
    with open(path, "rb") as fh:
        magic = fh.read(len(_SVM_MAGIC))
        if magic != _SVM_MAGIC:
            raise DataError(f"{path}: bad SVM magic {magic!r}")
        try:
            dim = int(fh.readline())
        except ValueError as exc:
            raise DataError(f"{path}: malformed SVM header") from exc
        need = 8 * (3 * dim + 1)
        payload = fh.read(need)
        if len(payload) < need:
            raise DataError(f"{path}: truncated SVM payload")
    floats = np.frombuffer(payload, dtype="<f8")
    return SvmModel(weights=floats[2 * dim:3 * dim].copy(), bias=float(floats[3 * dim]),
                    c=1.0, feature_mean=floats[:dim].copy(),
                    feature_scale=floats[dim:2 * dim].copy())
