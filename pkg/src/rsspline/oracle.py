"""Plain binary search over the full sorted array: ground truth and benchmark baseline."""

from __future__ import annotations

from bisect import bisect_left
from typing import Optional, Sequence


def oracle_lower_bound(keys: Sequence[bytes], q: bytes) -> int:
    return bisect_left(keys, q)


def oracle_lookup_eq(keys: Sequence[bytes], q: bytes) -> Optional[int]:
    r = bisect_left(keys, q)
    if r < len(keys) and keys[r] == q:
        return r
    return None


class OracleIndex:
    """Same query surface as :class:`~rsspline.rss.RssIndex`, backed by ``bisect``."""

    backend = "bisect"

    def __init__(self, dataset):
        self.dataset = dataset
        self.keys = dataset.keys

    def lookup_eq(self, q: bytes) -> Optional[int]:
        return oracle_lookup_eq(self.keys, q)

    def lower_bound(self, q: bytes) -> int:
        return bisect_left(self.keys, q)

    def lookup_eq_many(self, qs: Sequence[bytes]) -> list[Optional[int]]:
        keys = self.keys
        n = len(keys)
        out = []
        for q in qs:
            r = bisect_left(keys, q)
            out.append(r if r < n and keys[r] == q else None)
        return out

    def lower_bound_many(self, qs: Sequence[bytes]) -> list[int]:
        keys = self.keys
        return [bisect_left(keys, q) for q in qs]

    def memory_bytes(self) -> dict:
        return {"total_bytes": 0}
