"""Local binary patterns (circular, interpolated) and multi-block LBP.

Neighbor differences are formed against the center value before the
bilinear weights are applied (the interpolation is linear, so this is the
same quantity), which makes the codes exactly invariant to adding a
constant intensity. All per-pixel accumulations run in a fixed row-major
term order so vectorized output is bit-identical to a straightforward
scalar implementation of the same formulas.
"""

from __future__ import annotations

import numpy as np

from ..errors import DataError
from .descriptor import DescriptorVector

__all__ = [
    "lbp_code_image",
    "lbp_histogram",
    "lbp_multiscale_histogram",
    "uniform_bin_count",
    "uniform_codes",
    "uniform_bin_index",
    "mb_lbp_code_image",
    "mb_lbp_histogram",
    "integral_image",
    "LBP_MULTISCALE_GRID",
]

LBP_MULTISCALE_GRID = ((1, 8), (2, 16), (3, 24))

_SNAP_TOL = 1e-6  # circle offsets this close to an integer are sampled exactly


def _neighbor_offsets(radius: int, neighbors: int) -> list[tuple[float, float]]:
    offsets = []
    for i in range(neighbors):
        theta = 2.0 * np.pi * i / neighbors
        dr = radius * np.sin(theta)
        dc = radius * np.cos(theta)
        if abs(dr - round(dr)) < _SNAP_TOL:
            dr = float(round(dr))
        if abs(dc - round(dc)) < _SNAP_TOL:
            dc = float(round(dc))
        offsets.append((float(dr), float(dc)))
    return offsets


def lbp_code_image(pixels: np.ndarray, radius: int, neighbors: int) -> np.ndarray:
    """LBP codes for all interior pixels (border of width `radius` excluded).

    Neighbor i sits at angle 2*pi*i/N on the circle and contributes bit 2^i
    when its (bilinearly interpolated) value is >= the center value.
    Returns an integer matrix of shape (H - 2r, W - 2r).
    """
    if radius < 1 or neighbors < 4:
        raise DataError("need radius >= 1 and at least 4 neighbors")
    img = np.asarray(pixels, dtype=np.float64)
    h, w = img.shape
    if h - 2 * radius < 1 or w - 2 * radius < 1:
        raise DataError(f"image {h}x{w} too small for radius {radius}")
    rows = slice(radius, h - radius)
    cols = slice(radius, w - radius)
    center = img[rows, cols]
    codes = np.zeros(center.shape, dtype=np.uint32)
    for i, (dr, dc) in enumerate(_neighbor_offsets(radius, neighbors)):
        r0 = int(np.floor(dr))
        c0 = int(np.floor(dc))
        fr = dr - r0
        fc = dc - c0
        if fr == 0.0 and fc == 0.0:
            diff = img[radius + r0:h - radius + r0, radius + c0:w - radius + c0] - center
        else:

            def plane(ro, co):
                ro = min(ro, radius)  # zero-weight corners may index past the
                co = min(co, radius)  # margin; clamping is safe because the
                return img[radius + ro:h - radius + ro, radius + co:w - radius + co]

            w00 = (1.0 - fr) * (1.0 - fc)
            w01 = (1.0 - fr) * fc
            w10 = fr * (1.0 - fc)
            w11 = fr * fc
            diff = w00 * (plane(r0, c0) - center)
            diff = diff + w01 * (plane(r0, c0 + 1) - center)
            diff = diff + w10 * (plane(r0 + 1, c0) - center)
            diff = diff + w11 * (plane(r0 + 1, c0 + 1) - center)
        codes |= (diff >= 0.0).astype(np.uint32) << np.uint32(i)
    return codes


def uniform_bin_count(neighbors: int) -> int:
    """Histogram length for the uniform-pattern mapping: N(N-1)+3."""
    return neighbors * (neighbors - 1) + 3


def uniform_codes(neighbors: int) -> np.ndarray:
    """All codes with at most two circular 0/1 transitions, sorted ascending."""
    mask = (1 << neighbors) - 1
    found = {0, mask}
    for ones in range(1, neighbors):
        base = (1 << ones) - 1
        for rot in range(neighbors):
            found.add(((base << rot) | (base >> (neighbors - rot))) & mask)
    return np.array(sorted(found), dtype=np.uint32)


def uniform_bin_index(code: int, neighbors: int) -> int:
    """Bin of a code under the uniform mapping (last bin = non-uniform)."""
    table = uniform_codes(neighbors)
    pos = int(np.searchsorted(table, code))
    if pos < table.size and table[pos] == code:
        return pos
    return table.size


def _uniform_histogram(codes: np.ndarray, neighbors: int) -> np.ndarray:
    table = uniform_codes(neighbors)
    mask = np.uint32((1 << neighbors) - 1)
    flat = codes.ravel().astype(np.uint32)
    rotated = ((flat >> np.uint32(1)) | (flat << np.uint32(neighbors - 1))) & mask
    transitions = np.bitwise_count(flat ^ rotated)
    bins = np.searchsorted(table, flat).astype(np.int64)
    bins[transitions > 2] = table.size
    counts = np.bincount(bins, minlength=table.size + 1).astype(np.float64)
    return counts / counts.sum()


def lbp_histogram(pixels: np.ndarray, radius: int, neighbors: int) -> DescriptorVector:
    """L1-normalized uniform-pattern histogram at a single (radius, N)."""
    hist = _uniform_histogram(lbp_code_image(pixels, radius, neighbors), neighbors)
    return DescriptorVector(values=hist, descriptor_id="LBP",
                            config=f"lbp:r={radius},n={neighbors}")


def lbp_multiscale_histogram(pixels: np.ndarray,
                             grid=LBP_MULTISCALE_GRID) -> DescriptorVector:
    """Concatenation of uniform-pattern histograms over the (radius, N) grid.

    The default grid (1,8), (2,16), (3,24) yields 59 + 243 + 555 = 857
    dimensions; each scale's sub-histogram is L1-normalized on its own.
    """
    parts = [_uniform_histogram(lbp_code_image(pixels, r, n), n) for r, n in grid]
    config = "lbp:" + ",".join(f"({r},{n})" for r, n in grid)
    return DescriptorVector(values=np.concatenate(parts), descriptor_id="LBP",
                            config=config)


def integral_image(pixels: np.ndarray) -> np.ndarray:
    """Zero-padded cumulative-sum table: I[r, c] = sum of pixels[:r, :c]."""
    img = np.asarray(pixels, dtype=np.float64)
    table = np.zeros((img.shape[0] + 1, img.shape[1] + 1))
    np.cumsum(np.cumsum(img, axis=0), axis=1, out=table[1:, 1:])
    return table


def _rect_sums(table: np.ndarray, half: int, rows: slice, cols: slice,
               dr: int, dc: int) -> np.ndarray:
    r0 = np.arange(rows.start + dr - half, rows.stop + dr - half)
    c0 = np.arange(cols.start + dc - half, cols.stop + dc - half)
    size = 2 * half + 1
    return (table[np.ix_(r0 + size, c0 + size)] - table[np.ix_(r0, c0 + size)]
            - table[np.ix_(r0 + size, c0)] + table[np.ix_(r0, c0)])


# Neighbor rectangle directions in the same angular order as the circular
# LBP (east, then counterclockwise in (row=sin, col=cos) coordinates).
_MBLBP_DIRECTIONS = ((0, 1), (1, 1), (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1))


def mb_lbp_code_image(pixels: np.ndarray, rect_side: int) -> np.ndarray:
    """Multi-block LBP codes: each pixel centers a 3x3 grid of rect_side^2
    rectangles; bit i is set when neighbor rectangle i's intensity sum is >=
    the central rectangle's. Rectangle sums come from an integral image,
    which is exact for 8-bit input, so ties behave identically to direct
    summation. Returns shape (H - 2m, W - 2m) with m = rect_side + half."""
    if rect_side < 1 or rect_side % 2 == 0:
        raise DataError(f"rect_side must be odd and positive, got {rect_side}")
    img = np.asarray(pixels, dtype=np.float64)
    h, w = img.shape
    if h < 3 * rect_side or w < 3 * rect_side:
        raise DataError(f"image {h}x{w} too small for rect_side {rect_side}")
    half = (rect_side - 1) // 2
    margin = rect_side + half
    rows = slice(margin, h - margin)
    cols = slice(margin, w - margin)
    table = integral_image(img)
    center = _rect_sums(table, half, rows, cols, 0, 0)
    codes = np.zeros(center.shape, dtype=np.uint32)
    for i, (dr, dc) in enumerate(_MBLBP_DIRECTIONS):
        neighbor = _rect_sums(table, half, rows, cols, dr * rect_side, dc * rect_side)
        codes |= (neighbor >= center).astype(np.uint32) << np.uint32(i)
    return codes


def mb_lbp_histogram(pixels: np.ndarray, rect_side: int) -> DescriptorVector:
    """L1-normalized 256-bin histogram of multi-block LBP codes."""
    codes = mb_lbp_code_image(pixels, rect_side)
    counts = np.bincount(codes.ravel(), minlength=256).astype(np.float64)
    return DescriptorVector(values=counts / counts.sum(), descriptor_id="MBLBP",
                            config=f"mblbp:r={rect_side}")
