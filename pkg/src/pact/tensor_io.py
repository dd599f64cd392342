"""Token-tensor container and its binary file format.

File layout (version 1), all integers little-endian:

    offset  size  contents
    0       4     magic ``PACT`` (ASCII)
    4       1     format version, currently 1
    5       4     header length H (unsigned 32-bit)
    9       H     UTF-8 JSON header ``{"name": ..., "dtype": "f32", "shape": [...]}``
    9+H     4*N   raw float32 payload, row-major

The format is deliberately minimal: a JSON header keeps it language-neutral
while the raw payload round-trips bit-exactly. Only float32 is supported;
producers must up-convert half-precision dumps.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .errors import TensorFormatError, ValidationError

MAGIC = b"PACT"
FORMAT_VERSION = 1
_HEADER_PREFIX = struct.Struct("<I")


class TokenTensor:
    """A named stack of per-token float32 vectors.

    ``data`` is stored as a C-contiguous, read-only float32 array of the
    given shape, so instances are safe to share across threads.
    """

    __slots__ = ("name", "data")

    def __init__(self, name: str, data, shape=None):
        arr = np.asarray(data, dtype=np.float32)
        if shape is not None:
            shape = tuple(int(s) for s in shape)
            if any(s < 0 for s in shape):
                raise ValidationError(f"shape error: negative dimension in {shape}")
            if arr.size != int(np.prod(shape, dtype=np.int64)):
                raise ValidationError(
                    f"shape error: {arr.size} values cannot fill shape {list(shape)}"
                )
            arr = arr.reshape(shape)
        arr = np.ascontiguousarray(arr)
        if not np.isfinite(arr).all():
            raise ValidationError(f"shape error: tensor '{name}' has non-finite values")
        arr.flags.writeable = False
        self.name = str(name)
        self.data = arr

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def n_tokens(self) -> int:
        return self.data.shape[0] if self.data.ndim else 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, TokenTensor):
            return NotImplemented
        return (
            self.name == other.name
            and self.shape == other.shape
            and self.data.tobytes() == other.data.tobytes()
        )

    def __repr__(self) -> str:
        return f"TokenTensor(name={self.name!r}, shape={list(self.shape)})"


def write_tensor(t: TokenTensor, path) -> None:
    """Serialize ``t`` to ``path`` in the binary format described above."""
    header = json.dumps(
        {"name": t.name, "dtype": "f32", "shape": [int(s) for s in t.shape]},
        separators=(",", ":"),
    ).encode("utf-8")
    payload = t.data.astype("<f4", copy=False).tobytes()
    blob = MAGIC + bytes([FORMAT_VERSION]) + _HEADER_PREFIX.pack(len(header)) + header + payload
    Path(path).write_bytes(blob)


def read_tensor(path) -> TokenTensor:
    """Load a tensor, validating magic, header consistency, and finiteness."""
    blob = Path(path).read_bytes()
    if len(blob) < 5 or blob[:4] != MAGIC or blob[4] != FORMAT_VERSION:
        raise TensorFormatError(f"unrecognized format: {path}")
    if len(blob) < 9:
        raise TensorFormatError(f"corrupt header: {path}")
    (header_len,) = _HEADER_PREFIX.unpack_from(blob, 5)
    if 9 + header_len > len(blob):
        raise TensorFormatError(f"corrupt header: {path}")
    try:
        header = json.loads(blob[9 : 9 + header_len].decode("utf-8"))
        name = header["name"]
        dtype = header["dtype"]
        shape = [int(s) for s in header["shape"]]
    except (ValueError, KeyError, TypeError) as exc:
        raise TensorFormatError(f"corrupt header: {path}") from exc
    if dtype != "f32" or not isinstance(name, str) or any(s < 0 for s in shape):
        raise TensorFormatError(f"corrupt header: {path}")
    size = int(np.prod(shape, dtype=np.int64))
    payload = blob[9 + header_len :]
    if len(payload) != 4 * size:
        raise TensorFormatError(f"corrupt header: {path}")
    data = np.frombuffer(payload, dtype="<f4")
    if not np.isfinite(data).all():
        raise TensorFormatError(f"non-finite payload: {path}")
    return TokenTensor(name, data, shape)
