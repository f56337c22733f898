"""Framing helpers for the versioned binary artifact files.

Every artifact starts with a 4-byte magic, a little-endian uint32 version,
and a length-prefixed UTF-8 JSON metadata blob, followed by zero or more
length-prefixed little-endian arrays.  Writes go through a temp file and an
atomic rename.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile
from contextlib import contextmanager

import numpy as np

_DTYPES = {b"i8": "<i8", b"f8": "<f8"}
_CODES = {"<i8": b"i8", "<f8": b"f8"}


@contextmanager
def atomic_write(path):
    """Open a temp file in the target directory; rename over ``path`` on success."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "wb") as f:
            yield f
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_header(f, magic: bytes, version: int, meta: dict) -> None:
    blob = json.dumps(meta, sort_keys=True, ensure_ascii=False).encode("utf-8")
    f.write(magic)
    f.write(struct.pack("<I", version))
    f.write(struct.pack("<Q", len(blob)))
    f.write(blob)


def read_header(f, magic: bytes, version: int) -> dict:
    got = f.read(4)
    if got != magic:
        raise ValueError(f"bad magic {got!r}, expected {magic!r}")
    (ver,) = struct.unpack("<I", f.read(4))
    if ver != version:
        raise ValueError(f"unsupported format version {ver}, expected {version}")
    (n,) = struct.unpack("<Q", f.read(8))
    return json.loads(f.read(n).decode("utf-8"))


def write_array(f, arr: np.ndarray) -> None:
    arr = np.ascontiguousarray(arr)
    if arr.dtype == np.int64:
        code = _CODES["<i8"]
        data = arr.astype("<i8", copy=False)
    elif arr.dtype == np.float64:
        code = _CODES["<f8"]
        data = arr.astype("<f8", copy=False)
    else:
        raise ValueError(f"unsupported array dtype {arr.dtype}")
    f.write(code)
    f.write(struct.pack("<B", arr.ndim))
    for dim in arr.shape:
        f.write(struct.pack("<Q", dim))
    f.write(data.tobytes(order="C"))


def read_array(f) -> np.ndarray:
    code = f.read(2)
    if code not in _DTYPES:
        raise ValueError(f"unsupported array dtype code {code!r}")
    (ndim,) = struct.unpack("<B", f.read(1))
    shape = tuple(struct.unpack("<Q", f.read(8))[0] for _ in range(ndim))
    count = int(np.prod(shape)) if shape else 1
    raw = f.read(count * 8)
    if len(raw) != count * 8:
        raise ValueError("truncated array data")
    arr = np.frombuffer(raw, dtype=_DTYPES[code]).reshape(shape)
    return arr.astype(arr.dtype.newbyteorder("="), copy=True)
