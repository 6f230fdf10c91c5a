"""Byte-string datasets and order-preserving chunk keys.

A chunk key is ``K`` consecutive bytes of a string packed into an unsigned
big-endian integer.  Strings that run out of bytes are padded on the right
with ``0x00``, which is why NUL is banned from dataset keys.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Iterable, Sequence

RECOMMENDED_K = (8, 16)
MAX_K = 16
PAD_BYTE = 0x00
RECORD_SEPARATOR = 0x0A


class DatasetError(ValueError):
    """Base class for dataset validation failures."""

    def __init__(self, index: int, message: str):
        super().__init__(message)
        self.index = index


class NotSorted(DatasetError):
    def __init__(self, index: int):
        super().__init__(index, f"key at index {index} is smaller than its predecessor")


class DuplicateKey(DatasetError):
    def __init__(self, index: int):
        super().__init__(index, f"key at index {index} duplicates its predecessor")


class ForbiddenByte(DatasetError):
    def __init__(self, index: int, offset: int):
        super().__init__(index, f"key at index {index} has a forbidden byte at offset {offset}")
        self.offset = offset


class EmptyDataset(DatasetError):
    def __init__(self):
        super().__init__(0, "dataset is empty")


@dataclass(frozen=True, eq=False)
class Dataset:
    """Immutable, strictly ascending list of NUL- and newline-free byte strings."""

    keys: tuple[bytes, ...]

    def __len__(self) -> int:
        return len(self.keys)

    def __getitem__(self, i):
        return self.keys[i]

    def __iter__(self):
        return iter(self.keys)

    @property
    def count(self) -> int:
        return len(self.keys)

    def raw_bytes(self) -> int:
        return sum(len(k) for k in self.keys)


def validate_dataset(lines: Iterable[bytes]) -> Dataset:
    """Check ordering and byte restrictions, raising on the first violation."""
    keys = tuple(bytes(k) for k in lines)
    prev = None
    for i, key in enumerate(keys):
        for bad in (PAD_BYTE, RECORD_SEPARATOR):
            off = key.find(bad)
            if off >= 0:
                raise ForbiddenByte(i, off)
        if prev is not None:
            if key == prev:
                raise DuplicateKey(i)
            if key < prev:
                raise NotSorted(i)
        prev = key
    return Dataset(keys)


def extract_chunk(s: bytes, depth: int, k: int) -> int:
    """Bytes ``[depth*k, (depth+1)*k)`` of ``s`` as a big-endian integer, zero padded."""
    start = depth * k
    piece = s[start:start + k]
    return int.from_bytes(piece, "big") << (8 * (k - len(piece)))


def chunk_exhausted(s: bytes, depth: int, k: int) -> bool:
    return len(s) <= depth * k


def chunk_to_bytes(value: int, k: int) -> bytes:
    return value.to_bytes(k, "big")


def check_k(k: int) -> int:
    # widths other than 8 and 16 are for small worked examples
    if not 1 <= k <= MAX_K:
        raise ValueError(f"chunk width must be in [1, {MAX_K}] bytes, got {k}")
    return k


def split_records(blob: bytes) -> list[bytes]:
    """Split a newline-delimited blob; a single trailing newline is optional."""
    if not blob:
        return []
    if blob.endswith(b"\n"):
        blob = blob[:-1]
    return blob.split(b"\n")


def read_dataset(path: str | os.PathLike, sort_dedup: bool = False) -> Dataset:
    with open(path, "rb") as fh:
        lines = split_records(fh.read())
    if sort_dedup:
        lines = sorted(set(lines))
    if not lines:
        raise EmptyDataset()
    return validate_dataset(lines)


def write_dataset(path: str | os.PathLike, keys: Sequence[bytes]) -> None:
    with open(path, "wb") as fh:
        fh.write(b"\n".join(keys))
        if keys:
            fh.write(b"\n")
