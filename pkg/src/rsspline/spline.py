"""Error-bounded linear spline over (chunk key, rank) points, fronted by a radix table."""

from __future__ import annotations

import math
from bisect import bisect_left
from dataclasses import dataclass
from typing import NamedTuple, Sequence

from rsspline import kernels

RADIX_FLOOR_BITS = 6
RADIX_CEIL_BITS = 20


class EmptyInput(ValueError):
    pass


class SplinePoint(NamedTuple):
    key: int
    rank: float


@dataclass(frozen=True, eq=False)
class SplineModel:
    """Knots are actual input points; predictions interpolate between them.

    ``radix_table[b]`` is the index of the first knot whose top ``radix_bits``
    bits are ``>= b``; the last entry equals the knot count.
    """

    knot_keys: tuple[int, ...]
    knot_ranks: tuple[float, ...]
    error_bound: int
    radix_bits: int
    radix_table: tuple[int, ...]
    key_bits: int

    @property
    def knots(self) -> list[SplinePoint]:
        return [SplinePoint(k, r) for k, r in zip(self.knot_keys, self.knot_ranks)]

    @property
    def shift(self) -> int:
        return self.key_bits - self.radix_bits

    def __len__(self) -> int:
        return len(self.knot_keys)


def collapse_points(points: Sequence[tuple[int, int]]) -> tuple[list[int], list[int], list[int]]:
    """Group sorted ``(key, rank)`` pairs into runs: distinct keys, first ranks, last ranks."""
    keys: list[int] = []
    firsts: list[int] = []
    lasts: list[int] = []
    prev = None
    for key, rank in points:
        if prev is not None and key < prev:
            raise ValueError("points must be sorted by key")
        if key == prev:
            lasts[-1] = rank
        else:
            keys.append(key)
            firsts.append(rank)
            lasts.append(rank)
            prev = key
    return keys, firsts, lasts


def radix_bits_for(n_points: int, floor_bits: int = RADIX_FLOOR_BITS,
                   ceil_bits: int = RADIX_CEIL_BITS) -> int:
    """``ceil(log2(n_points))`` clamped to ``[floor_bits, ceil_bits]``."""
    return min(max((n_points - 1).bit_length(), floor_bits), ceil_bits)


def fit_spline(points: Sequence[tuple[int, int]], error_bound: int, radix_bits: int | None = None,
               key_bits: int = 128, backend: str | None = None) -> SplineModel:
    """Fit a spline so every collapsed point is predicted within ``error_bound``.

    Runs of equal keys are represented by their midpoint rank.  When
    ``radix_bits`` is omitted it is sized from the number of distinct keys.
    """
    if not points:
        raise EmptyInput("cannot fit a spline to no points")
    if error_bound < 0:
        raise ValueError("error bound must be non-negative")
    k = kernels.get(backend)
    keys, firsts, lasts = collapse_points(points)
    if keys[-1] >> key_bits:
        raise ValueError(f"key does not fit in {key_bits} bits")
    ys2 = [f + l for f, l in zip(firsts, lasts)]
    idx = k.fit_knots(keys, ys2, 2 * error_bound)
    knot_keys = [keys[i] for i in idx]
    knot_ranks = [ys2[i] / 2.0 for i in idx]
    if radix_bits is None:
        radix_bits = radix_bits_for(len(keys))
    if not 0 < radix_bits <= key_bits:
        raise ValueError("radix_bits must be in (0, key_bits]")
    table = k.radix_table(knot_keys, radix_bits, key_bits)
    return SplineModel(tuple(knot_keys), tuple(knot_ranks), error_bound, radix_bits,
                       tuple(table), key_bits)


def radix_lookup(model: SplineModel, key: int) -> tuple[int, int]:
    """Knot index range ``(lo, hi)``; the knots bracketing ``key`` lie in ``[max(lo-1, 0), hi]``."""
    b = key >> model.shift
    return model.radix_table[b], model.radix_table[b + 1]


def predict(model: SplineModel, key: int) -> float:
    kk = model.knot_keys
    kr = model.knot_ranks
    lo, hi = radix_lookup(model, key)
    j = bisect_left(kk, key, lo, hi)
    if j == 0:
        return kr[0]
    if j == len(kk):
        return kr[-1]
    if kk[j] == key:
        return kr[j]
    k0, r0 = kk[j - 1], kr[j - 1]
    return min(r0 + float(key - k0) * (kr[j] - r0) / float(kk[j] - k0), kr[j])


def round_rank(estimate: float) -> int:
    """Round half up, the rounding used at build and query time alike."""
    return math.floor(estimate + 0.5)


def max_residual(model: SplineModel, points: Sequence[tuple[int, int]]) -> float:
    """Largest ``|predict - rank|`` over the collapsed representatives of ``points``."""
    keys, firsts, lasts = collapse_points(points)
    return max(abs(predict(model, k) - (f + l) / 2) for k, f, l in zip(keys, firsts, lasts))
