"""Binary container used for dataset caches and model checkpoints.

Layout, all integers little-endian:

====================  ========================================
bytes 0..7            8-byte magic tag
bytes 8..11           format version, uint32
bytes 12..19          header length in bytes, uint64
header                UTF-8 JSON (sorted keys)
payload               raw array bytes, concatenated
====================  ========================================

The header records ``meta`` (caller-defined), an ``arrays`` table with
dtype/shape/offset per entry, and a SHA-256 of the payload. Identical
inputs produce identical bytes, so file checksums double as state
checksums.
"""

from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

from .exceptions import ContractError, InvalidInputError

_HEAD = struct.Struct("<8sIQ")


def write_container(
    path: str | Path,
    magic: bytes,
    version: int,
    meta: dict,
    arrays: dict[str, np.ndarray],
) -> Path:
    if len(magic) != 8:
        raise InvalidInputError(f"magic must be exactly 8 bytes, got {len(magic)}")
    table = {}
    chunks = []
    offset = 0
    for name in sorted(arrays):
        arr = np.ascontiguousarray(arrays[name])
        if arr.dtype.byteorder == ">":
            arr = arr.astype(arr.dtype.newbyteorder("<"))
        raw = arr.tobytes()
        table[name] = {
            "dtype": arr.dtype.str,
            "shape": list(arr.shape),
            "offset": offset,
            "nbytes": len(raw),
        }
        chunks.append(raw)
        offset += len(raw)
    payload = b"".join(chunks)
    header = {
        "arrays": table,
        "meta": meta,
        "payload_sha256": hashlib.sha256(payload).hexdigest(),
    }
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "wb") as fh:
        fh.write(_HEAD.pack(magic, version, len(header_bytes)))
        fh.write(header_bytes)
        fh.write(payload)
    return path


def read_container(
    path: str | Path,
    magic: bytes,
    max_version: int | None = None,
) -> tuple[int, dict, dict[str, np.ndarray]]:
    path = Path(path)
    with open(path, "rb") as fh:
        head = fh.read(_HEAD.size)
        if len(head) < _HEAD.size:
            raise InvalidInputError(f"{path}: truncated container header")
        got_magic, version, header_len = _HEAD.unpack(head)
        if got_magic != magic:
            raise InvalidInputError(
                f"{path}: magic mismatch, expected {magic!r} got {got_magic!r}"
            )
        if max_version is not None and version > max_version:
            raise InvalidInputError(
                f"{path}: container version {version} newer than supported {max_version}"
            )
        header = json.loads(fh.read(header_len).decode())
        payload = fh.read()
    digest = hashlib.sha256(payload).hexdigest()
    if digest != header["payload_sha256"]:
        raise ContractError(f"{path}: payload checksum mismatch")
    arrays = {}
    for name, entry in header["arrays"].items():
        start, nbytes = entry["offset"], entry["nbytes"]
        arr = np.frombuffer(payload[start : start + nbytes], dtype=np.dtype(entry["dtype"]))
        arrays[name] = arr.reshape(entry["shape"]).copy()
    return version, header["meta"], arrays


def file_sha256(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()
