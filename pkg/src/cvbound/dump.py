"""Binary matrix dumps.

Layout: magic ``b"BENT"``, format version (u32), rows (u32), cols (u32), then
the entries in row-major order as (real, imag) pairs of little-endian float64.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

MAGIC = b"BENT"
VERSION = 1
_HEADER = struct.Struct("<4sIII")


def encode_matrix(m: np.ndarray) -> bytes:
    m = np.asarray(m)
    if m.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {m.shape}")
    body = np.ascontiguousarray(m, dtype="<c16").tobytes(order="C")
    return _HEADER.pack(MAGIC, VERSION, m.shape[0], m.shape[1]) + body


def decode_matrix(data: bytes) -> np.ndarray:
    if len(data) < _HEADER.size:
        raise ValueError("truncated header")
    magic, version, rows, cols = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise ValueError(f"bad magic {magic!r}")
    if version != VERSION:
        raise ValueError(f"unsupported dump version {version}")
    body = data[_HEADER.size :]
    if len(body) != rows * cols * 16:
        raise ValueError(f"expected {rows * cols * 16} payload bytes, found {len(body)}")
    return np.frombuffer(body, dtype="<c16").reshape(rows, cols).astype(complex)


def write_matrix(path, m: np.ndarray) -> Path:
    path = Path(path)
    path.write_bytes(encode_matrix(m))
    return path


def read_matrix(path) -> np.ndarray:
    return decode_matrix(Path(path).read_bytes())
