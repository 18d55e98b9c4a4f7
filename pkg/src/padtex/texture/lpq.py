"""Local phase quantization: windowed-DFT phase signs over l x l patches.

Four spatial frequencies are analysed with a uniform window: (a, 0), (0, a),
(a, a) and (a, -a) in (row, col) cycles per pixel with a = 1/l. Each pixel's
8-vector of real and imaginary parts is (optionally) decorrelated with the
rotation derived from a Gaussian image-correlation model and quantized by
sign into an 8-bit code.

The window mean is removed before applying the transform; the analysis
frequencies are nonzero, so this is the identity in exact arithmetic, but it
makes responses exactly zero on constant patches and the codes exactly
invariant to constant intensity shifts. Accumulation order is fixed
(row-major over window offsets), so the vectorized path is bit-identical to
a scalar implementation of the same formulas.
"""

from __future__ import annotations

import numpy as np

from ..errors import DataError
from .descriptor import DescriptorVector
from .lbp import integral_image

__all__ = ["lpq_frequencies", "lpq_basis", "lpq_whitening_rotation",
           "lpq_code_image", "lpq_histogram"]


def lpq_frequencies(window_side: int) -> np.ndarray:
    """The four (row, col) frequency pairs with a = 1/l."""
    a = 1.0 / window_side
    return np.array([[a, 0.0], [0.0, a], [a, a], [a, -a]])


def lpq_basis(window_side: int) -> tuple[np.ndarray, np.ndarray]:
    """Real/imaginary weight tables of exp(-2j*pi*u.y), shape (4, l, l).

    y runs over window offsets (dr, dc) in [-h, h]^2, row-major.
    """
    half = (window_side - 1) // 2
    offsets = np.arange(-half, half + 1, dtype=np.float64)
    dr = offsets[:, None]
    dc = offsets[None, :]
    re = np.empty((4, window_side, window_side))
    im = np.empty((4, window_side, window_side))
    for i, (ur, uc) in enumerate(lpq_frequencies(window_side)):
        phase = 2.0 * np.pi * (ur * dr + uc * dc)
        re[i] = np.cos(phase)
        im[i] = -np.sin(phase)
    return re, im


def lpq_whitening_rotation(window_side: int, rho: float) -> np.ndarray:
    """Decorrelating rotation for the 8 LPQ components.

    Pixel covariance is modelled as rho^distance; the 8x8 component
    covariance M C M^T is eigendecomposed, eigenvectors ordered by
    descending eigenvalue, each with its largest-magnitude entry made
    positive. Returns the 8x8 matrix whose rows are those eigenvectors.
    """
    half = (window_side - 1) // 2
    coords = np.array([(r, c) for r in range(-half, half + 1)
                       for c in range(-half, half + 1)], dtype=np.float64)
    dists = np.sqrt(((coords[:, None, :] - coords[None, :, :]) ** 2).sum(axis=2))
    pixel_cov = rho ** dists
    re, im = lpq_basis(window_side)
    m = np.concatenate([re.reshape(4, -1), im.reshape(4, -1)], axis=0)
    comp_cov = m @ pixel_cov @ m.T
    eigvals, eigvecs = np.linalg.eigh(comp_cov)
    order = np.argsort(eigvals)[::-1]
    rotation = eigvecs[:, order].T.copy()
    for row in rotation:
        if row[np.argmax(np.abs(row))] < 0:
            row *= -1.0
    return rotation


def lpq_code_image(pixels: np.ndarray, window_side: int = 7,
                   whitening_rho: float = 0.9) -> np.ndarray:
    """LPQ codes for interior pixels (margin (l-1)/2), shape (H-l+1, W-l+1).

    Component i of the per-pixel 8-vector is [Re F_0..3, Im F_0..3][i] and
    contributes bit 2^i when strictly positive (after decorrelation when
    whitening_rho > 0).
    """
    if window_side < 3 or window_side % 2 == 0:
        raise DataError(f"window side must be odd and >= 3, got {window_side}")
    if not 0.0 <= whitening_rho < 1.0:
        raise DataError(f"whitening rho must be in [0, 1), got {whitening_rho}")
    img = np.asarray(pixels, dtype=np.float64)
    h, w = img.shape
    if h < window_side or w < window_side:
        raise DataError(f"image {h}x{w} smaller than window {window_side}")
    half = (window_side - 1) // 2
    out_h = h - 2 * half
    out_w = w - 2 * half

    table = integral_image(img)
    window_sum = (table[window_side:, window_side:] - table[:-window_side, window_side:]
                  - table[window_side:, :-window_side] + table[:-window_side, :-window_side])
    window_mean = window_sum / float(window_side * window_side)

    re_w, im_w = lpq_basis(window_side)
    components = np.zeros((8, out_h, out_w))
    for u in range(window_side):
        for v in range(window_side):
            plane = img[u:u + out_h, v:v + out_w] - window_mean
            for i in range(4):
                components[i] += re_w[i, u, v] * plane
                components[4 + i] += im_w[i, u, v] * plane

    if whitening_rho > 0.0:
        rotation = lpq_whitening_rotation(window_side, whitening_rho)
        rotated = np.empty_like(components)
        for i in range(8):
            acc = rotation[i, 0] * components[0]
            for j in range(1, 8):
                acc = acc + rotation[i, j] * components[j]
            rotated[i] = acc
        components = rotated

    codes = np.zeros((out_h, out_w), dtype=np.uint32)
    for i in range(8):
        codes |= (components[i] > 0.0).astype(np.uint32) << np.uint32(i)
    return codes


def lpq_histogram(pixels: np.ndarray, window_side: int = 7,
                  whitening_rho: float = 0.9) -> DescriptorVector:
    """L1-normalized 256-bin histogram of LPQ codes."""
    codes = lpq_code_image(pixels, window_side, whitening_rho)
    counts = np.bincount(codes.ravel(), minlength=256).astype(np.float64)
    return DescriptorVector(values=counts / counts.sum(), descriptor_id="LPQ",
                            config=f"lpq:l={window_side},rho={whitening_rho}")
