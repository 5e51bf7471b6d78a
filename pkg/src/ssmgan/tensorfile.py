"""Flat little-endian float32 tensor container.

Layout::

    magic      4 bytes
    version    u16
    header_len u32
    header     UTF-8 JSON {"meta": {...}, "tensors": [{"name", "shape", "offset"}]}
    padding    zeros up to a 64-byte boundary
    data       float32 little-endian, tensors back to back in manifest order

``offset`` counts float32 elements from the start of the data section, so the
data section can be memory-mapped directly.
"""

import json
import struct
from pathlib import Path

import numpy as np

from .errors import FormatError

_PREFIX = struct.Struct("<4sHI")
_ALIGN = 64


def dumps(magic, version, tensors, meta=None):
    """Serialize an ordered ``{name: array}`` mapping to bytes."""
    manifest = []
    offset = 0
    for name, arr in tensors.items():
        arr = np.asarray(arr)
        manifest.append({"name": name, "shape": list(arr.shape), "offset": offset})
        offset += int(arr.size)
    header = json.dumps(
        {"meta": meta or {}, "tensors": manifest}, indent=1, sort_keys=True
    ).encode("utf-8")
    head = _PREFIX.pack(magic, version, len(header)) + header
    head += b"\0" * (-len(head) % _ALIGN)
    body = b"".join(
        np.ascontiguousarray(arr, dtype="<f4").tobytes() for arr in tensors.values()
    )
    return head + body


def dump(path, magic, version, tensors, meta=None):
    Path(path).write_bytes(dumps(magic, version, tensors, meta))


def _parse_header(buf, magic, version):
    if len(buf) < _PREFIX.size:
        raise FormatError("tensor file shorter than its fixed header")
    got_magic, got_version, header_len = _PREFIX.unpack_from(buf, 0)
    if got_magic != magic:
        raise FormatError(f"bad magic {got_magic!r}, expected {magic!r}")
    if got_version != version:
        raise FormatError(f"unsupported version {got_version}, expected {version}")
    end = _PREFIX.size + header_len
    if len(buf) < end:
        raise FormatError("truncated tensor file header")
    try:
        header = json.loads(bytes(buf[_PREFIX.size:end]).decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"unreadable tensor manifest: {exc}") from exc
    data_start = end + (-end % _ALIGN)
    return header, data_start


def _slice_tensors(header, data):
    out = {}
    for entry in header["tensors"]:
        shape = tuple(entry["shape"])
        size = int(np.prod(shape, dtype=np.int64))
        lo = entry["offset"]
        if lo + size > data.size:
            raise FormatError(f"tensor {entry['name']!r} runs past end of data")
        out[entry["name"]] = data[lo:lo + size].reshape(shape)
    return out


def loads(buf, magic, version):
    """Parse bytes produced by :func:`dumps`; returns ``(meta, tensors)``."""
    header, data_start = _parse_header(buf, magic, version)
    body = memoryview(buf)[data_start:]
    if len(body) % 4:
        raise FormatError("data section is not a whole number of float32 values")
    data = np.frombuffer(body, dtype="<f4").astype(np.float32)
    return header["meta"], _slice_tensors(header, data)


def load(path, magic, version, mmap=False):
    """Load a tensor file; with ``mmap=True`` tensors are read-only views of the file."""
    path = Path(path)
    if not mmap:
        return loads(path.read_bytes(), magic, version)
    with path.open("rb") as fh:
        prefix = fh.read(_PREFIX.size)
        if len(prefix) < _PREFIX.size:
            raise FormatError("tensor file shorter than its fixed header")
        header_len = _PREFIX.unpack(prefix)[2]
        fh.seek(0)
        head = fh.read(_PREFIX.size + header_len)
    header, data_start = _parse_header(head, magic, version)
    n = (path.stat().st_size - data_start) // 4
    data = np.memmap(path, dtype="<f4", mode="r", offset=data_start, shape=(n,))
    return header["meta"], _slice_tensors(header, data)
