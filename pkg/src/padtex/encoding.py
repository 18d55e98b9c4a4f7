"""Diagonal-covariance Gaussian mixtures and Fisher vector encoding.

The GMM is fit by EM with k-means++/k-means initialization and a per-
dimension variance floor; it serves both as the generative codebook for
Fisher vectors and as the back-end density for the log-likelihood-ratio
baselines. The Fisher vector stacks, for every component, the averaged
first-order and second-order differences between a descriptor set and the
component's Gaussian, giving a 2*K*d vector; weight-gradient terms are
omitted.

Model file format: magic "GMM1\n", ASCII header "K d\n", then weights,
means, variances as little-endian float64.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, NumericError

__all__ = [
    "GmmModel",
    "FisherVector",
    "gmm_fit",
    "gmm_posteriors",
    "gmm_log_likelihood",
    "fisher_vector",
    "save_gmm",
    "load_gmm",
]

_GMM_MAGIC = b"GMM1\n"

# Relative variance floor: 1e-4 of the global per-dimension training
# variance, with a tiny absolute floor so degenerate (constant) dimensions
# still define a proper density.
VARIANCE_FLOOR_FRACTION = 1e-4
VARIANCE_FLOOR_ABS = 1e-12

DEFAULT_POSTERIOR_FLOOR = 1e-8


@dataclass(frozen=True)
class GmmModel:
    """Mixture weights, means and per-dimension (diagonal) variances."""

    weights: np.ndarray        # (K,)
    means: np.ndarray          # (K, d)
    variances: np.ndarray      # (K, d)
    variance_floor: np.ndarray | None = None   # (d,), recorded at fit time
    log_likelihoods: tuple = field(default=(), compare=False)  # per-EM-iteration history

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=np.float64)
        means = np.atleast_2d(np.asarray(self.means, dtype=np.float64))
        variances = np.atleast_2d(np.asarray(self.variances, dtype=np.float64))
        if means.shape != variances.shape or weights.shape[0] != means.shape[0]:
            raise DataError("inconsistent GMM parameter shapes")
        if abs(weights.sum() - 1.0) > 1e-9 or np.any(weights <= 0):
            raise DataError("mixture weights must be positive and sum to 1")
        if np.any(variances <= 0):
            raise DataError("variances must be positive")
        floor = self.variance_floor
        if floor is not None:
            floor = np.asarray(floor, dtype=np.float64)
            if np.any(variances < floor - 1e-15):
                raise DataError("variances below the recorded floor")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "variances", variances)
        object.__setattr__(self, "variance_floor", floor)

    @property
    def n_components(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.means.shape[1]


@dataclass(frozen=True)
class FisherVector:
    """2*K*d encoding of a descriptor set against a GmmModel."""

    values: np.ndarray
    power_normalized: bool
    l2_normalized: bool

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if not np.all(np.isfinite(values)):
            raise DataError("Fisher vector contains non-finite values")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size


def _log_densities(model: GmmModel, x: np.ndarray) -> np.ndarray:
    """log(pi_k) + log N(x; mu_k, var_k) for every row of x; shape (n, K)."""
    inv_var = 1.0 / model.variances
    log_det = np.sum(np.log(model.variances), axis=1)
    const = -0.5 * (model.dim * np.log(2.0 * np.pi) + log_det) + np.log(model.weights)
    quad = (x * x) @ inv_var.T - 2.0 * (x @ (model.means * inv_var).T) \
        + np.sum(model.means ** 2 * inv_var, axis=1)
    return const - 0.5 * quad


def _logsumexp(rows: np.ndarray) -> np.ndarray:
    peak = rows.max(axis=1)
    return peak + np.log(np.sum(np.exp(rows - peak[:, None]), axis=1))


def _posterior_matrix(model: GmmModel, x: np.ndarray) -> np.ndarray:
    log_joint = _log_densities(model, x)
    log_norm = _logsumexp(log_joint)
    return np.exp(log_joint - log_norm[:, None])


def _as_matrix(frames, dim: int | None = None) -> np.ndarray:
    x = np.asarray(frames, dtype=np.float64)
    if x.ndim == 1:
        x = x[:, None]
    if x.ndim != 2 or x.size == 0:
        raise DataError("expected a non-empty (n, d) array of vectors")
    if dim is not None and x.shape[1] != dim:
        raise DataError(f"dimension mismatch: got {x.shape[1]}, model has {dim}")
    if not np.all(np.isfinite(x)):
        raise DataError("non-finite values in input vectors")
    return x


def gmm_posteriors(model: GmmModel, x) -> np.ndarray:
    """Responsibilities gamma_k proportional to pi_k * N(x; mu_k, var_k).

    Computed in the log domain with max subtraction; sums to 1.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DataError("gmm_posteriors expects a single d-vector")
    return _posterior_matrix(model, _as_matrix(x[None, :], model.dim))[0]


def gmm_log_likelihood(model: GmmModel, frames) -> float:
    """Mean over frames of log sum_k pi_k N(x; mu_k, var_k)."""
    x = _as_matrix(frames, model.dim)
    return float(np.mean(_logsumexp(_log_densities(model, x))))


def _kmeans_init(x: np.ndarray, k: int, rng: np.random.Generator,
                 lloyd_iters: int = 5) -> np.ndarray:
    n = x.shape[0]
    centers = np.empty((k, x.shape[1]))
    centers[0] = x[rng.integers(n)]
    d2 = np.sum((x - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total <= 0:
            centers[j] = x[rng.integers(n)]
        else:
            centers[j] = x[rng.choice(n, p=d2 / total)]
        d2 = np.minimum(d2, np.sum((x - centers[j]) ** 2, axis=1))

    for _ in range(lloyd_iters):
        dist = (np.sum(x * x, axis=1)[:, None] - 2.0 * x @ centers.T
                + np.sum(centers * centers, axis=1))
        assign = dist.argmin(axis=1)
        for j in range(k):
            mask = assign == j
            if mask.any():
                centers[j] = x[mask].mean(axis=0)
            else:
                centers[j] = x[dist.min(axis=1).argmax()]
    return centers


def gmm_fit(data, n_components: int, max_iters: int = 200, tol: float = 1e-6,
            seed: int = 0) -> GmmModel:
    """EM fit with diagonal covariances.

    Initialization is k-means++ seeding plus 5 k-means iterations under the
    given seed; the fit is deterministic for fixed data and seed. Stops
    when the mean log-likelihood improves by less than `tol` or after
    `max_iters` iterations; the per-iteration history is stored on the
    returned model. A component emptied by the M-step is reseeded once from
    the point farthest from its nearest center; a second occurrence is an
    error.
    """
    x = _as_matrix(data)
    n, d = x.shape
    if n < 10 * n_components:
        raise DataError(f"need at least {10 * n_components} points for K={n_components}")
    rng = np.random.default_rng(seed)

    global_var = x.var(axis=0)
    floor = np.maximum(VARIANCE_FLOOR_FRACTION * global_var, VARIANCE_FLOOR_ABS)

    means = _kmeans_init(x, n_components, rng)
    dist = (np.sum(x * x, axis=1)[:, None] - 2.0 * x @ means.T
            + np.sum(means * means, axis=1))
    assign = dist.argmin(axis=1)
    weights = np.empty(n_components)
    variances = np.empty((n_components, d))
    for j in range(n_components):
        mask = assign == j
        weights[j] = max(mask.sum(), 1) / n
        variances[j] = np.maximum(x[mask].var(axis=0) if mask.any() else global_var, floor)
    weights /= weights.sum()

    history: list[float] = []
    reseeded = False
    iters = 0
    while iters < max_iters:
        log_joint = _log_densities(
            GmmModel(weights=weights, means=means, variances=variances), x)
        log_norm = _logsumexp(log_joint)
        gamma = np.exp(log_joint - log_norm[:, None])
        mass = gamma.sum(axis=0)
        empty = np.nonzero(mass <= 1e-10)[0]
        if empty.size:
            # Reseed from the points farthest from any current mean, then
            # redo the E-step; allowed once per fit.
            if reseeded:
                raise NumericError(
                    f"components {empty.tolist()} empty after reseeding; reduce K"
                )
            reseeded = True
            dist = (np.sum(x * x, axis=1)[:, None] - 2.0 * x @ means.T
                    + np.sum(means * means, axis=1))
            farthest = np.argsort(dist.min(axis=1))[::-1]
            for rank, j in enumerate(empty):
                means[j] = x[farthest[rank % n]]
                variances[j] = np.maximum(global_var, floor)
            weights[empty] = 1.0 / n
            weights /= weights.sum()
            continue
        history.append(float(np.mean(log_norm)))
        if len(history) > 1 and history[-1] - history[-2] < tol:
            break
        weights = mass / mass.sum()
        means = (gamma.T @ x) / mass[:, None]
        second = (gamma.T @ (x * x)) / mass[:, None]
        variances = np.maximum(second - means ** 2, floor)
        iters += 1

    return GmmModel(weights=weights, means=means, variances=variances,
                    variance_floor=floor, log_likelihoods=tuple(history))


def fisher_vector(model: GmmModel, descriptors, power_norm: bool = True,
                  l2_norm: bool = True,
                  posterior_floor: float = DEFAULT_POSTERIOR_FLOOR) -> FisherVector:
    """Encode a descriptor set as the 2*K*d Fisher vector of the model.

    With T descriptors x_t and responsibilities gamma_t(k):

        G_mu_k    = 1/(T sqrt(pi_k))   * sum_t gamma_t(k) (x_t - mu_k)/sigma_k
        G_sigma_k = 1/(T sqrt(2 pi_k)) * sum_t gamma_t(k) [((x_t - mu_k)/sigma_k)^2 - 1]

    concatenated as all G_mu then all G_sigma. Responsibilities below
    `posterior_floor` are dropped (pass 0 to disable; the induced error is
    bounded well under 1e-6 per component). Optional power and L2
    normalization follow; a zero vector passes through L2 unchanged.
    Accumulation runs component-major over the descriptor list, so the
    result is permutation-invariant to within roundoff.
    """
    x = _as_matrix(descriptors, model.dim)
    t_count = x.shape[0]
    gamma = _posterior_matrix(model, x)
    sigma = np.sqrt(model.variances)

    k, d = model.n_components, model.dim
    g_mu = np.zeros((k, d))
    g_sigma = np.zeros((k, d))
    for j in range(k):
        weights_j = gamma[:, j]
        if posterior_floor > 0.0:
            keep = np.nonzero(weights_j >= posterior_floor)[0]
            if keep.size == 0:
                continue
            weights_j = weights_j[keep]
            rows = x[keep]
        else:
            rows = x
        scaled = (rows - model.means[j]) / sigma[j]
        g_mu[j] = weights_j @ scaled
        g_sigma[j] = weights_j @ (scaled * scaled - 1.0)
    g_mu /= t_count * np.sqrt(model.weights)[:, None]
    g_sigma /= t_count * np.sqrt(2.0 * model.weights)[:, None]

    values = np.concatenate([g_mu.ravel(), g_sigma.ravel()])
    if power_norm:
        values = np.sign(values) * np.sqrt(np.abs(values))
    if l2_norm:
        norm = float(np.linalg.norm(values))
        if norm > 0.0:
            values = values / norm
    return FisherVector(values=values, power_normalized=power_norm,
                        l2_normalized=l2_norm)


def save_gmm(path, model: GmmModel) -> None:
    with open(path, "wb") as fh:
        fh.write(_GMM_MAGIC)
        fh.write(f"{model.n_components} {model.dim}\n".encode("ascii"))
        fh.write(model.weights.astype("<f8").tobytes())
        fh.write(model.means.astype("<f8").tobytes())
        fh.write(model.variances.astype("<f8").tobytes())


def load_gmm(path) -> GmmModel:
    with open(path, "rb") as fh:
        magic = fh.read(len(_GMM_MAGIC))
        if magic != _GMM_MAGIC:
            raise DataError(f"{path}: bad GMM magic {magic!r}")
        header = fh.readline().split()
        if len(header) != 2:
            raise DataError(f"{path}: malformed GMM header")
        k, d = int(header[0]), int(header[1])
        need = 8 * (k + 2 * k * d)
        payload = fh.read(need)
        if len(payload) < need:
            raise DataError(f"{path}: truncated GMM payload")
    floats = np.frombuffer(payload, dtype="<f8")
    weights = floats[:k]
    means = floats[k:k + k * d].reshape(k, d)
    variances = floats[k + k * d:].reshape(k, d)
    return GmmModel(weights=weights.copy(), means=means.copy(),
                    variances=variances.copy())
