"""Signed-byte offset table that turns a bounded prediction into an exact rank.

Each key is hashed once with 128-bit MurmurHash3; the four 32-bit lanes of the
digest, reduced modulo the table size, are its probe slots.  A key's offset
``true rank - predicted rank`` goes into the first empty slot among them.
Lookups try every probe; a wrong candidate still narrows the binary-search
window because the keys are sorted.
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

from rsspline.rss import RssIndex

EMPTY = -128
DEFAULT_LOAD = Fraction(2, 3)
DEFAULT_PROBES = 4
DEFAULT_SEED = 0x9E3779B97F4A7C15


class ErrorBoundTooLarge(ValueError):
    pass


def as_load_fraction(load) -> Fraction:
    """Read a load factor as a small-denominator fraction, so 0.6667 means 2/3."""
    frac = Fraction(load).limit_denominator(100)
    if not 0 < frac <= 1:
        raise ValueError(f"load factor must be in (0, 1], got {load}")
    return frac


def table_size(n_keys: int, load=DEFAULT_LOAD) -> int:
    frac = as_load_fraction(load)
    return max(1, -(-n_keys * frac.denominator // frac.numerator))


@dataclass(frozen=True, eq=False)
class HashCorrector:
    slots: array
    load_factor: Fraction
    probes: int
    seed: int
    inserted: int
    n_keys: int

    def __len__(self) -> int:
        return len(self.slots)

    @property
    def occupancy(self) -> float:
        return self.inserted / len(self.slots)

    def report(self) -> dict:
        return {
            "slots": len(self.slots),
            "bytes": hc_memory_bytes(self),
            "load_factor": str(self.load_factor),
            "probes": self.probes,
            "seed": self.seed,
            "inserted": self.inserted,
            "inserted_fraction": round(self.inserted / self.n_keys, 6),
        }


def build_hc(index: RssIndex, load=DEFAULT_LOAD, probes: int = DEFAULT_PROBES,
             seed: int = DEFAULT_SEED) -> HashCorrector:
    if index.config.error > 127:
        raise ErrorBoundTooLarge(f"offsets need error <= 127, index has {index.config.error}")
    if probes < 1:
        raise ValueError("need at least one probe")
    if not 0 <= seed < 1 << 64:
        raise ValueError("seed must be an unsigned 64-bit value")
    frac = as_load_fraction(load)
    n = len(index.dataset)
    slots = array("b", [EMPTY]) * table_size(n, frac)
    inserted = index.tree.build_hc(slots, probes, seed)
    return HashCorrector(slots, frac, probes, seed, inserted, n)


def probe_set(index: RssIndex, hc: HashCorrector, q: bytes) -> list[int]:
    return index._kernels.probe_slots(q, len(hc.slots), hc.probes, hc.seed)


def lookup_eq_hc_detail(index: RssIndex, hc: HashCorrector, q: bytes) -> tuple[Optional[int], bool]:
    """``(rank or None, fast_path)``; ``fast_path`` is true when a probe resolved the key."""
    return index.tree.lookup_eq_hc(q, hc.slots, hc.probes, hc.seed)


def lookup_eq_hc(index: RssIndex, hc: HashCorrector, q: bytes) -> Optional[int]:
    return lookup_eq_hc_detail(index, hc, q)[0]


def lookup_eq_hc_many(index: RssIndex, hc: HashCorrector,
                      qs: Sequence[bytes]) -> tuple[list[Optional[int]], int]:
    return index.tree.lookup_eq_hc_many(qs, hc.slots, hc.probes, hc.seed)


def hc_memory_bytes(hc: HashCorrector) -> int:
    return len(hc.slots) * hc.slots.itemsize


def fast_path_hit_rate(index: RssIndex, hc: HashCorrector, qs: Sequence[bytes]) -> float:
    if not qs:
        return 0.0
    _, hits = lookup_eq_hc_many(index, hc, qs)
    return hits / len(qs)
