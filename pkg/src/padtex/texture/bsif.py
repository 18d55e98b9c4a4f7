"""Binarized statistical image features and ICA filter-bank learning.

A bank of N zero-mean l x l filters is correlated with each pixel's
neighborhood; the N response signs form an N-bit code. Filters are
zero-mean, so responses are computed on window-mean-removed patches: the
identity in exact arithmetic, but it makes codes exactly invariant to
constant intensity shifts and exactly zero-response on constant patches.
Accumulation runs in fixed row-major tap order so the vectorized path is
bit-identical to a scalar implementation.

Bank file format: magic "BSIF1\n", ASCII header "l N\n", then l*l*N
little-endian float64 taps, filter-major, row-major within each filter.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import BankFormatError, DataError, NumericError
from .descriptor import DescriptorVector
from .lbp import integral_image

__all__ = ["FilterBank", "save_filter_bank", "load_filter_bank",
           "learn_filters_ica", "bsif_code_image", "bsif_histogram",
           "BSIF_HISTOGRAM_DIM"]

BSIF_HISTOGRAM_DIM = 128

_BANK_MAGIC = b"BSIF1\n"
_ZERO_MEAN_TOL = 1e-4


@dataclass(frozen=True)
class FilterBank:
    """N square zero-mean filters of odd side l, shape (N, l, l)."""

    filters: np.ndarray

    def __post_init__(self):
        filters = np.asarray(self.filters, dtype=np.float64)
        if filters.ndim != 3 or filters.shape[1] != filters.shape[2]:
            raise DataError("filters must have shape (N, l, l)")
        n, side, _ = filters.shape
        if not 1 <= n <= 16:
            raise DataError(f"filter count must be in [1, 16], got {n}")
        if side % 2 == 0:
            raise DataError(f"filter side must be odd, got {side}")
        if not np.all(np.isfinite(filters)):
            raise DataError("filters contain non-finite taps")
        means = filters.reshape(n, -1).mean(axis=1)
        if np.max(np.abs(means)) > 1e-6:
            raise DataError("filters are not zero-mean within 1e-6")
        object.__setattr__(self, "filters", filters)

    @property
    def n_filters(self) -> int:
        return self.filters.shape[0]

    @property
    def side(self) -> int:
        return self.filters.shape[1]


def _recenter(filters: np.ndarray) -> np.ndarray:
    means = filters.reshape(filters.shape[0], -1).mean(axis=1)
    return filters - means[:, None, None]


def save_filter_bank(path, bank: FilterBank) -> None:
    with open(path, "wb") as fh:
        fh.write(_BANK_MAGIC)
        fh.write(f"{bank.side} {bank.n_filters}\n".encode("ascii"))
        fh.write(bank.filters.astype("<f8").tobytes())


def load_filter_bank(path) -> FilterBank:
    """Read and validate a bank file.

    Filters with |mean| in (1e-6, 1e-4] are re-centered; larger means are
    rejected. Already zero-mean filters are left untouched, so writing a
    valid bank and reading it back preserves every tap bit-exactly.
    """
    path = Path(path)
    with open(path, "rb") as fh:
        magic = fh.read(len(_BANK_MAGIC))
        if magic != _BANK_MAGIC:
            raise BankFormatError(f"{path}: bad magic {magic!r}")
        header = fh.readline().split()
        if len(header) != 2:
            raise BankFormatError(f"{path}: malformed bank header")
        try:
            side, count = int(header[0]), int(header[1])
        except ValueError as exc:
            raise BankFormatError(f"{path}: malformed bank header") from exc
        if side < 1 or side % 2 == 0:
            raise BankFormatError(f"{path}: filter side must be odd, got {side}")
        if not 1 <= count <= 16:
            raise BankFormatError(f"{path}: filter count {count} outside [1, 16]")
        payload = fh.read(8 * side * side * count)
        if len(payload) < 8 * side * side * count:
            raise BankFormatError(f"{path}: truncated filter payload")
    filters = np.frombuffer(payload, dtype="<f8").reshape(count, side, side)
    if not np.all(np.isfinite(filters)):
        raise BankFormatError(f"{path}: non-finite filter taps")
    means = filters.reshape(count, -1).mean(axis=1)
    if np.max(np.abs(means)) > _ZERO_MEAN_TOL:
        raise BankFormatError(
            f"{path}: filter mean {np.max(np.abs(means)):.2e} exceeds {_ZERO_MEAN_TOL}"
        )
    filters = filters.copy()
    if np.max(np.abs(means)) > 1e-6:
        filters = _recenter(filters)
    return FilterBank(filters=filters)


def _symmetric_orthogonalize(w: np.ndarray) -> np.ndarray:
    eigvals, eigvecs = np.linalg.eigh(w @ w.T)
    if eigvals.min() <= 0:
        raise NumericError("degenerate unmixing matrix during ICA")
    inv_sqrt = eigvecs @ np.diag(1.0 / np.sqrt(eigvals)) @ eigvecs.T
    return inv_sqrt @ w


def learn_filters_ica(patches: np.ndarray, side: int, n_filters: int, seed: int,
                      max_iters: int = 500, tol: float = 1e-6) -> FilterBank:
    """Learn a BSIF bank with PCA whitening + fixed-point symmetric ICA (tanh).

    `patches` is (n, l, l) or (n, l*l) with n >= 50*l*l. Each patch's own
    mean is removed first (so learned filters are zero-mean), the data is
    whitened to n_filters dimensions, and the ICA unmixing rows are
    back-projected through the whitening matrix to form image-domain
    filters. Deterministic for a fixed seed.
    """
    dim = side * side
    data = np.asarray(patches, dtype=np.float64).reshape(-1, dim)
    if data.shape[0] < 50 * dim:
        raise DataError(f"need at least {50 * dim} patches, got {data.shape[0]}")
    if not 1 <= n_filters <= min(16, dim - 1):
        raise DataError(f"filter count {n_filters} outside [1, min(16, l*l - 1)]")

    data = data - data.mean(axis=1, keepdims=True)
    mu = data.mean(axis=0)
    centered = data - mu
    cov = centered.T @ centered / data.shape[0]
    eigvals, eigvecs = np.linalg.eigh(cov)
    order = np.argsort(eigvals)[::-1][:n_filters]
    top_vals = eigvals[order]
    if top_vals[-1] <= 1e-10 * max(top_vals[0], 1e-300):
        raise NumericError(
            f"patch covariance rank below {n_filters}; supply richer patches"
        )
    whitening = eigvecs[:, order].T / np.sqrt(top_vals)[:, None]
    z = centered @ whitening.T

    rng = np.random.default_rng(seed)
    w = _symmetric_orthogonalize(rng.standard_normal((n_filters, n_filters)))
    for _ in range(max_iters):
        s = z @ w.T
        g = np.tanh(s)
        g_prime_mean = (1.0 - g * g).mean(axis=0)
        w_new = _symmetric_orthogonalize(g.T @ z / z.shape[0] - g_prime_mean[:, None] * w)
        delta = np.max(np.abs(np.abs(np.sum(w_new * w, axis=1)) - 1.0))
        w = w_new
        if delta < tol:
            break
    else:
        raise NumericError(f"ICA did not converge within {max_iters} iterations")

    filters = (w @ whitening).reshape(n_filters, side, side)
    for f in filters:  # canonical sign: largest-magnitude tap positive
        if f.flat[np.argmax(np.abs(f))] < 0:
            f *= -1.0
    return FilterBank(filters=_recenter(filters))


def bsif_code_image(pixels: np.ndarray, bank: FilterBank) -> np.ndarray:
    """BSIF codes for interior pixels (margin (l-1)/2).

    Filter i (0-based) contributes bit 2^i when its response on the
    mean-removed window is strictly positive. Shape (H-l+1, W-l+1).
    """
    img = np.asarray(pixels, dtype=np.float64)
    h, w = img.shape
    side = bank.side
    if h < side or w < side:
        raise DataError(f"image {h}x{w} smaller than filters ({side}x{side})")
    out_h = h - side + 1
    out_w = w - side + 1

    table = integral_image(img)
    window_sum = (table[side:, side:] - table[:-side, side:]
                  - table[side:, :-side] + table[:-side, :-side])
    window_mean = window_sum / float(side * side)

    codes = np.zeros((out_h, out_w), dtype=np.uint32)
    for i in range(bank.n_filters):
        taps = bank.filters[i]
        response = None
        for u in range(side):
            for v in range(side):
                term = taps[u, v] * (img[u:u + out_h, v:v + out_w] - window_mean)
                response = term if response is None else response + term
        codes |= (response > 0.0).astype(np.uint32) << np.uint32(i)
    return codes


def reduce_histogram(counts: np.ndarray, target: int = BSIF_HISTOGRAM_DIM) -> np.ndarray:
    """Fold a 2^N-bin histogram onto `target` bins.

    Longer histograms sum consecutive groups of len/target bins; shorter
    ones are zero-padded. Mass is preserved exactly in the folding case.
    """
    n_bins = counts.size
    if n_bins == target:
        return counts.astype(np.float64)
    if n_bins > target:
        if n_bins % target != 0:
            raise DataError(f"cannot fold {n_bins} bins onto {target}")
        return counts.reshape(target, n_bins // target).sum(axis=1).astype(np.float64)
    padded = np.zeros(target)
    padded[:n_bins] = counts
    return padded


def bsif_histogram(pixels: np.ndarray, bank: FilterBank) -> DescriptorVector:
    """Code histogram folded to 128 components and L1-normalized."""
    codes = bsif_code_image(pixels, bank)
    counts = np.bincount(codes.ravel(), minlength=2 ** bank.n_filters)
    reduced = reduce_histogram(counts)
    return DescriptorVector(values=reduced / reduced.sum(), descriptor_id="BSIF",
                            config=f"bsif:l={bank.side},n={bank.n_filters}")
