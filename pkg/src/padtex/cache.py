"""On-disk feature cache with integrity checking.

Format: magic "FCACHE1\n", ASCII header "rows cols\n", rows*cols
little-endian float64 values row-major, then a 4-byte little-endian CRC-32
of the float payload. Round trips are bit-exact.
"""

from __future__ import annotations

import struct
import zlib

import numpy as np

from .errors import CacheError

__all__ = ["write_feature_cache", "read_feature_cache"]

_MAGIC = b"FCACHE1\n"


def write_feature_cache(path, values) -> None:
    """Store a matrix (or list of equal-length vectors) of float64 features."""
    array = np.asarray(values, dtype=np.float64)
    if array.ndim == 1:
        array = array[None, :]
    if array.ndim != 2:
        raise CacheError("feature cache stores 2-D matrices")
    payload = array.astype("<f8").tobytes()
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(f"{array.shape[0]} {array.shape[1]}\n".encode("ascii"))
        fh.write(payload)
        fh.write(struct.pack("<I", zlib.crc32(payload)))


def read_feature_cache(path) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(len(_MAGIC))
        if magic != _MAGIC:
            raise CacheError(f"{path}: bad cache magic {magic!r}")
        header = fh.readline().split()
        if len(header) != 2:
            raise CacheError(f"{path}: malformed cache header")
        try:
            rows, cols = int(header[0]), int(header[1])
        except ValueError as exc:
            raise CacheError(f"{path}: malformed cache header") from exc
        if rows < 0 or cols < 0:
            raise CacheError(f"{path}: negative dimensions in header")
        payload = fh.read(8 * rows * cols)
        if len(payload) < 8 * rows * cols:
            raise CacheError(f"{path}: truncated payload")
        trailer = fh.read(4)
        if len(trailer) < 4:
            raise CacheError(f"{path}: missing checksum trailer")
    if struct.unpack("<I", trailer)[0] != zlib.crc32(payload):
        raise CacheError(f"{path}: checksum mismatch")
    return np.frombuffer(payload, dtype="<f8").reshape(rows, cols).copy()
