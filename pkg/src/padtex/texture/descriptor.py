"""Common descriptor output type."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DataError


@dataclass(frozen=True)
class DescriptorVector:
    """A texture feature vector plus the identity/parameters that produced it."""

    values: np.ndarray
    descriptor_id: str
    config: str

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1:
            raise DataError("descriptor values must be a 1-D vector")
        if not np.all(np.isfinite(values)):
            raise DataError("descriptor contains non-finite values")
        object.__setattr__(self, "values", values)

    def __len__(self) -> int:
        return self.values.size
