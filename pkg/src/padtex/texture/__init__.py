"""Texture descriptors over grayscale spectrogram images."""

from .descriptor import DescriptorVector
from .lbp import (LBP_MULTISCALE_GRID, integral_image, lbp_code_image,
                  lbp_histogram, lbp_multiscale_histogram, mb_lbp_code_image,
                  mb_lbp_histogram, uniform_bin_count, uniform_bin_index,
                  uniform_codes)
from .lpq import (lpq_basis, lpq_code_image, lpq_frequencies, lpq_histogram,
                  lpq_whitening_rotation)
from .bsif import (BSIF_HISTOGRAM_DIM, FilterBank, bsif_code_image,
                   bsif_histogram, learn_filters_ica, load_filter_bank,
                   reduce_histogram, save_filter_bank)
from .dense import (DescriptorConfig, dense_grid_shape, dense_local_descriptors,
                    extract_descriptor)

__all__ = [
    "DescriptorVector",
    "LBP_MULTISCALE_GRID",
    "integral_image",
    "lbp_code_image",
    "lbp_histogram",
    "lbp_multiscale_histogram",
    "mb_lbp_code_image",
    "mb_lbp_histogram",
    "uniform_bin_count",
    "uniform_bin_index",
    "uniform_codes",
    "lpq_basis",
    "lpq_code_image",
    "lpq_frequencies",
    "lpq_histogram",
    "lpq_whitening_rotation",
    "BSIF_HISTOGRAM_DIM",
    "FilterBank",
    "bsif_code_image",
    "bsif_histogram",
    "learn_filters_ica",
    "load_filter_bank",
    "reduce_histogram",
    "save_filter_bank",
    "DescriptorConfig",
    "dense_grid_shape",
    "dense_local_descriptors",
    "extract_descriptor",
]
