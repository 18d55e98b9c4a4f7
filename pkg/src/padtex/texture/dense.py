"""Descriptor dispatch and dense block-wise extraction.

Dense extraction evaluates a descriptor independently on every block of a
regular top-left-anchored grid (trailing partial rows/columns dropped).
Because every descriptor here is a histogram of per-pixel codes whose
neighborhoods lie fully inside the block, the block's code image equals the
matching sub-region of the whole-image code image; blocks are therefore
histogrammed from codes computed once per image, which is exactly
equivalent to crop-then-describe.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError, DataError
from .bsif import FilterBank, bsif_code_image, reduce_histogram
from .descriptor import DescriptorVector
from .lbp import (LBP_MULTISCALE_GRID, _uniform_histogram, lbp_code_image,
                  mb_lbp_code_image)
from .lpq import lpq_code_image

__all__ = ["DescriptorConfig", "extract_descriptor", "dense_local_descriptors",
           "dense_grid_shape"]

DESCRIPTOR_KINDS = ("lbp", "mblbp", "lpq", "bsif")


@dataclass(frozen=True)
class DescriptorConfig:
    """Which texture descriptor to run, and with what parameters."""

    kind: str
    lbp_grid: tuple = LBP_MULTISCALE_GRID
    mblbp_rect: int = 3
    lpq_window: int = 7
    lpq_rho: float = 0.9
    bank: FilterBank | None = None

    def __post_init__(self):
        if self.kind not in DESCRIPTOR_KINDS:
            raise ConfigError(f"unknown descriptor kind {self.kind!r}")
        if self.kind == "bsif" and self.bank is None:
            raise ConfigError("bsif descriptor requires a filter bank")

    def fingerprint(self) -> str:
        if self.kind == "lbp":
            detail = ",".join(f"({r},{n})" for r, n in self.lbp_grid)
        elif self.kind == "mblbp":
            detail = f"r={self.mblbp_rect}"
        elif self.kind == "lpq":
            detail = f"l={self.lpq_window},rho={self.lpq_rho}"
        else:
            digest = hashlib.sha256(self.bank.filters.tobytes()).hexdigest()[:12]
            detail = f"l={self.bank.side},n={self.bank.n_filters},bank={digest}"
        return f"{self.kind}:{detail}"


def _code_layers(pixels: np.ndarray, config: DescriptorConfig):
    """(code image, border margin, histogram fn) per layer of the descriptor."""
    if config.kind == "lbp":
        return [
            (lbp_code_image(pixels, r, n), r, lambda codes, n=n: _uniform_histogram(codes, n))
            for r, n in config.lbp_grid
        ]
    if config.kind == "mblbp":
        rect = config.mblbp_rect
        margin = rect + (rect - 1) // 2

        def hist256(codes):
            counts = np.bincount(codes.ravel(), minlength=256).astype(np.float64)
            return counts / counts.sum()

        return [(mb_lbp_code_image(pixels, rect), margin, hist256)]
    if config.kind == "lpq":

        def hist256(codes):
            counts = np.bincount(codes.ravel(), minlength=256).astype(np.float64)
            return counts / counts.sum()

        return [(lpq_code_image(pixels, config.lpq_window, config.lpq_rho),
                 (config.lpq_window - 1) // 2, hist256)]

    bank = config.bank

    def hist_bsif(codes):
        counts = np.bincount(codes.ravel(), minlength=2 ** bank.n_filters)
        reduced = reduce_histogram(counts)
        return reduced / reduced.sum()

    return [(bsif_code_image(pixels, bank), (bank.side - 1) // 2, hist_bsif)]


def extract_descriptor(pixels: np.ndarray, config: DescriptorConfig) -> DescriptorVector:
    """Whole-image descriptor for the configured kind."""
    parts = [hist(codes) for codes, _, hist in _code_layers(pixels, config)]
    return DescriptorVector(values=np.concatenate(parts),
                            descriptor_id=config.kind.upper(),
                            config=config.fingerprint())


def dense_grid_shape(height: int, width: int, block: int, stride: int) -> tuple[int, int]:
    if block > height or block > width:
        raise DataError(f"block {block} larger than image {height}x{width}")
    if stride < 1:
        raise DataError("stride must be >= 1")
    return ((height - block) // stride + 1, (width - block) // stride + 1)


def dense_local_descriptors(pixels: np.ndarray, config: DescriptorConfig,
                            block: int, stride: int) -> list[DescriptorVector]:
    """Descriptors of all block x block crops on the grid, row-major order."""
    pixels = np.asarray(pixels)
    grid_rows, grid_cols = dense_grid_shape(pixels.shape[0], pixels.shape[1],
                                            block, stride)
    layers = _code_layers(pixels, config)
    for _, margin, _ in layers:
        if block <= 2 * margin:
            raise DataError(f"block {block} too small for descriptor margin {margin}")
    fingerprint = config.fingerprint()
    out = []
    for gr in range(grid_rows):
        for gc in range(grid_cols):
            r0, c0 = gr * stride, gc * stride
            parts = []
            for codes, margin, hist in layers:
                span = block - 2 * margin
                parts.append(hist(codes[r0:r0 + span, c0:c0 + span]))
            out.append(DescriptorVector(values=np.concatenate(parts),
                                        descriptor_id=config.kind.upper(),
                                        config=fingerprint))
    return out
