"""Bit-exact keyed store for precomputed embeddings and fluency scores.

File layout, all little-endian:

    offset 0   magic  b"MACEARC1"            (8 bytes)
    offset 8   u32    format version, 1      (4 bytes)
    offset 12  u32    embedding dimension    (4 bytes)
    offset 16  records, sorted by digest:
                   32-byte SHA-256 of the UTF-8 key
                   dim float32 values

The record count is implied by the file size: every record is exactly
32 + 4 * dim bytes, so a well-formed file is 16 + n * (32 + 4 * dim)
bytes long.  Keys are hashed, never stored, and must match byte-for-byte
on lookup.  Fluency probabilities reuse the same layout with dim == 1.
"""

from __future__ import annotations

import hashlib
import struct
from pathlib import Path
from typing import Iterable, Tuple, Union

import numpy as np

from .errors import (
    ArchiveFormatError,
    ArchiveIOError,
    DimensionError,
    DuplicateKeyError,
    KeyNotFoundError,
)

MAGIC = b"MACEARC1"
FORMAT_VERSION = 1
HEADER_BYTES = 16
DIGEST_BYTES = 32


def _digest(key: str) -> bytes:
    return hashlib.sha256(key.encode("utf-8")).digest()


def write_archive(path: Union[str, Path], entries: Iterable[Tuple[str, object]]) -> None:
    """Write (key, vector) pairs to ``path`` in the archive layout.

    Keys must be unique and vectors must share one dimension; values are
    stored as float32.  Output bytes are a pure function of the entries,
    so rewriting the same entries reproduces the file exactly.
    """
    records = []
    seen_keys = set()
    dim = None
    for key, vector in entries:
        if key in seen_keys:
            raise DuplicateKeyError(f"duplicate archive key {key!r}")
        seen_keys.add(key)
        arr = np.asarray(vector, dtype="<f4")
        if arr.ndim != 1 or arr.size == 0:
            raise DimensionError(
                f"archive vectors must be nonempty 1-D, got shape {arr.shape} for key {key!r}"
            )
        if dim is None:
            dim = arr.size
        elif arr.size != dim:
            raise DimensionError(
                f"archive dimension mismatch: expected {dim}, got {arr.size} for key {key!r}"
            )
        records.append((_digest(key), arr.tobytes()))
    if dim is None:
        raise DimensionError("cannot write an archive with no entries")

    records.sort(key=lambda rec: rec[0])
    try:
        with open(path, "wb") as fh:
            fh.write(MAGIC)
            fh.write(struct.pack("<II", FORMAT_VERSION, dim))
            for digest, payload in records:
                fh.write(digest)
                fh.write(payload)
    except OSError as exc:
        raise ArchiveIOError(f"failed to write archive {path}: {exc}") from exc


class EmbeddingArchive:
    """Read-only view over an archive file: open once, look up by key.

    Immutable after open and safe to share across threads.  Lookups return
    float32 vectors that are byte-identical to what was written.
    """

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)
        try:
            raw = self.path.read_bytes()
        except OSError as exc:
            raise ArchiveIOError(f"failed to read archive {path}: {exc}") from exc

        if len(raw) < HEADER_BYTES or raw[:8] != MAGIC:
            raise ArchiveFormatError(f"{path}: bad or missing archive magic")
        version, dim = struct.unpack_from("<II", raw, 8)
        if version != FORMAT_VERSION:
            raise ArchiveFormatError(f"{path}: unsupported archive version {version}")
        if dim == 0:
            raise ArchiveFormatError(f"{path}: zero embedding dimension")

        record_bytes = DIGEST_BYTES + 4 * dim
        body = len(raw) - HEADER_BYTES
        if body % record_bytes != 0:
            raise ArchiveFormatError(
                f"{path}: body of {body} bytes is not a whole number of {record_bytes}-byte records"
            )

        self.dim = int(dim)
        self.count = body // record_bytes
        self._raw = raw
        self._record_bytes = record_bytes
        self._index = {}
        prev = b""
        for i in range(self.count):
            off = HEADER_BYTES + i * record_bytes
            digest = raw[off : off + DIGEST_BYTES]
            if digest <= prev and i > 0:
                raise ArchiveFormatError(f"{path}: records not sorted by digest")
            prev = digest
            self._index[digest] = off + DIGEST_BYTES

    def __contains__(self, key: str) -> bool:
        return _digest(key) in self._index

    def __len__(self) -> int:
        return self.count

    def lookup(self, key: str) -> np.ndarray:
        """Return the stored float32 vector for ``key``.

        Raises KeyNotFoundError when the exact key bytes were never stored.
        """
        offset = self._index.get(_digest(key))
        if offset is None:
            raise KeyNotFoundError(f"key not found in {self.path.name}: {key!r}")
        vec = np.frombuffer(self._raw, dtype="<f4", count=self.dim, offset=offset)
        return vec.copy()
