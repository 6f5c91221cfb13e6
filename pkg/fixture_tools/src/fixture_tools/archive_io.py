"""Independent reader/writer for the embedding-archive byte layout.

Layout (little-endian): 8-byte magic "MACEARC1", u32 version 1, u32 dim,
then records sorted by digest, each 32-byte SHA-256(UTF-8 key) followed
by dim float32 values.  Count is implied by file size.  Kept separate
from the evaluator's implementation on purpose: this side only shares
the published format.
"""

from __future__ import annotations

import hashlib
import struct
from pathlib import Path
from typing import Dict, Iterable, Tuple, Union

import numpy as np

MAGIC = b"MACEARC1"
VERSION = 1


class ArchiveError(Exception):
    pass


def digest(key: str) -> bytes:
    return hashlib.sha256(key.encode("utf-8")).digest()


def write(path: Union[str, Path], entries: Iterable[Tuple[str, np.ndarray]]) -> None:
    rows = []
    dim = None
    seen = set()
    for key, vector in entries:
        if key in seen:
            raise ArchiveError(f"duplicate key {key!r}")
        seen.add(key)
        arr = np.asarray(vector, dtype="<f4").reshape(-1)
        if dim is None:
            dim = arr.size
        if arr.size != dim or dim == 0:
            raise ArchiveError(f"inconsistent dimension for {key!r}")
        rows.append((digest(key), arr.tobytes()))
    if dim is None:
        raise ArchiveError("no entries")
    rows.sort(key=lambda row: row[0])
    with open(path, "wb") as fh:
        fh.write(MAGIC + struct.pack("<II", VERSION, dim))
        for row_digest, payload in rows:
            fh.write(row_digest + payload)


def read(path: Union[str, Path]) -> Tuple[int, Dict[bytes, np.ndarray]]:
    raw = Path(path).read_bytes()
    if raw[:8] != MAGIC:
        raise ArchiveError(f"{path}: bad magic")
    version, dim = struct.unpack_from("<II", raw, 8)
    if version != VERSION:
        raise ArchiveError(f"{path}: unsupported version {version}")
    record = 32 + 4 * dim
    body = len(raw) - 16
    if body % record:
        raise ArchiveError(f"{path}: truncated records")
    table: Dict[bytes, np.ndarray] = {}
    for i in range(body // record):
        offset = 16 + i * record
        key_digest = raw[offset : offset + 32]
        table[key_digest] = np.frombuffer(raw, dtype="<f4", count=dim, offset=offset + 32).copy()
    return dim, table


def lookup(path: Union[str, Path], key: str) -> np.ndarray:
    _, table = read(path)
    try:
        return table[digest(key)]
    except KeyError:
        raise ArchiveError(f"{path}: key {key!r} not found") from None
