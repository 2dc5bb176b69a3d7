"""Binary container for trained model parameters.

Layout ("SJM1", all integers little-endian):

    magic "SJM1" | version u8 | meta_len u32 | meta JSON | n_arrays u32
    | per array: name_len u16, name utf-8, ndim u8, dims u32 * ndim,
      float32 payload (C order)
    | crc32 u32 over all preceding bytes

The meta JSON says what kind of model the arrays belong to and carries
its hyperparameters; the arrays are stored in insertion order.
"""

import json
import struct
import zlib

import numpy as np

from ..errors import FormatError

MAGIC = b"SJM1"
VERSION = 1


def save_arrays(path, meta: dict, arrays: dict[str, np.ndarray]) -> None:
    blob = bytearray()
    blob += MAGIC
    blob += struct.pack("<B", VERSION)
    meta_bytes = json.dumps(meta, sort_keys=True, separators=(",", ":")).encode("utf-8")
    blob += struct.pack("<I", len(meta_bytes))
    blob += meta_bytes
    blob += struct.pack("<I", len(arrays))
    for name, arr in arrays.items():
        name_bytes = name.encode("utf-8")
        arr = np.ascontiguousarray(arr, dtype="<f4")
        blob += struct.pack("<H", len(name_bytes))
        blob += name_bytes
        blob += struct.pack("<B", arr.ndim)
        blob += struct.pack(f"<{arr.ndim}I", *arr.shape) if arr.ndim else b""
        blob += arr.tobytes()
    blob += struct.pack("<I", zlib.crc32(bytes(blob)) & 0xFFFFFFFF)
    with open(path, "wb") as fh:
        fh.write(bytes(blob))


def _need(data: bytes, offset: int, count: int) -> int:
    if offset + count > len(data):
        raise FormatError(f"file truncated: needed {count} bytes",
                          min(len(data), offset))
    return offset + count


def load_arrays(path) -> tuple[dict, dict[str, np.ndarray]]:
    with open(path, "rb") as fh:
        data = fh.read()
    _need(data, 0, 4)
    if data[:4] != MAGIC:
        raise FormatError(f"bad magic {data[:4]!r}, expected {MAGIC!r}", 0)
    _need(data, 4, 1)
    if data[4] != VERSION:
        raise FormatError(f"unsupported version {data[4]}", 4)
    if len(data) < 4:
        raise FormatError("file too short for a checksum", 0)
    crc_off = len(data) - 4
    (stored_crc,) = struct.unpack_from("<I", data, crc_off)
    actual_crc = zlib.crc32(data[:crc_off]) & 0xFFFFFFFF
    if stored_crc != actual_crc:
        raise FormatError(
            f"checksum mismatch: stored {stored_crc:#010x}, computed {actual_crc:#010x}",
            crc_off)
    off = _need(data, 5, 4)
    (meta_len,) = struct.unpack_from("<I", data, 5)
    meta_off, off = off, _need(data, off, meta_len)
    try:
        meta = json.loads(data[meta_off:meta_off + meta_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"meta block is not valid JSON: {exc}", meta_off) from None
    count_off, off = off, _need(data, off, 4)
    (n_arrays,) = struct.unpack_from("<I", data, count_off)
    arrays: dict[str, np.ndarray] = {}
    for _ in range(n_arrays):
        name_off, off = off, _need(data, off, 2)
        (name_len,) = struct.unpack_from("<H", data, name_off)
        off = _need(data, off, name_len)
        name = data[off - name_len:off].decode("utf-8")
        ndim_off, off = off, _need(data, off, 1)
        ndim = data[ndim_off]
        dims_off, off = off, _need(data, off, 4 * ndim)
        shape = struct.unpack_from(f"<{ndim}I", data, dims_off) if ndim else ()
        size = int(np.prod(shape, dtype=np.int64)) if ndim else 1
        payload_off, off = off, _need(data, off, 4 * size)
        arrays[name] = np.frombuffer(
            data, dtype="<f4", count=size, offset=payload_off).reshape(shape).copy()
    if off != crc_off:
        raise FormatError(f"{crc_off - off} unparsed bytes before checksum", off)
    return meta, arrays
