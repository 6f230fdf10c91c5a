"""Pure-Python kernels.

Reference behaviour for the compiled ``_speedups`` extension; both modules
expose the same functions and a ``Tree`` class with the same methods, and the
test suite checks that they agree result-for-result.
"""

from __future__ import annotations

import math
from bisect import bisect_left

NAME = "python"
EMPTY_SLOT = -128
_M64 = (1 << 64) - 1
_M32 = (1 << 32) - 1


def extract_chunk(s, depth, k):
    start = depth * k
    piece = s[start:start + k]
    return int.from_bytes(piece, "big") << (8 * (k - len(piece)))


def _slope_cmp(dya, dxa, dyb, dxb):
    # sign of dya/dxa - dyb/dxb, all dx > 0
    lhs = dya * dxb
    rhs = dyb * dxa
    return (lhs > rhs) - (lhs < rhs)


def fit_knots(xs, ys, err):
    """Indices of the knots of a greedy error-corridor spline.

    ``xs`` strictly ascending, ``ys`` integer targets, ``err`` the allowed
    absolute deviation in the same units as ``ys``.  Knots are input points, so
    the spline passes through them exactly.
    """
    n = len(xs)
    if n == 0:
        raise ValueError("cannot fit an empty point set")
    if n == 1:
        return [0]
    knots = [0]
    base = 0
    bx, by = xs[0], ys[0]
    dx = xs[1] - bx
    up_dy, up_dx = ys[1] + err - by, dx
    lo_dy, lo_dx = ys[1] - err - by, dx
    for i in range(2, n):
        dx = xs[i] - bx
        dy = ys[i] - by
        if _slope_cmp(dy, dx, up_dy, up_dx) > 0 or _slope_cmp(dy, dx, lo_dy, lo_dx) < 0:
            base = i - 1
            knots.append(base)
            bx, by = xs[base], ys[base]
            dx = xs[i] - bx
            up_dy, up_dx = ys[i] + err - by, dx
            lo_dy, lo_dx = ys[i] - err - by, dx
            continue
        if _slope_cmp(dy + err, dx, up_dy, up_dx) < 0:
            up_dy, up_dx = dy + err, dx
        if _slope_cmp(dy - err, dx, lo_dy, lo_dx) > 0:
            lo_dy, lo_dx = dy - err, dx
    knots.append(n - 1)
    return knots


def radix_bits_for(n_points, floor_bits, ceil_bits):
    return min(max((n_points - 1).bit_length(), floor_bits), ceil_bits)


def radix_table(knot_keys, radix_bits, key_bits):
    shift = key_bits - radix_bits
    size = 1 << radix_bits
    n = len(knot_keys)
    table = [0] * (size + 1)
    j = 0
    for b in range(size):
        while j < n and (knot_keys[j] >> shift) < b:
            j += 1
        table[b] = j
    table[size] = n
    return table


def predict(knot_keys, knot_ranks, table, shift, x):
    b = x >> shift
    j = bisect_left(knot_keys, x, table[b], table[b + 1])
    if j == 0:
        return knot_ranks[0]
    if j == len(knot_keys):
        return knot_ranks[-1]
    k1 = knot_keys[j]
    if k1 == x:
        return knot_ranks[j]
    k0 = knot_keys[j - 1]
    r0 = knot_ranks[j - 1]
    # float rounding must not overshoot the next knot
    return min(r0 + float(x - k0) * (knot_ranks[j] - r0) / float(k1 - k0), knot_ranks[j])


def _fit(xs, ys2, error, key_bits, floor_bits, ceil_bits):
    idx = fit_knots(xs, ys2, 2 * error)
    kk = [xs[i] for i in idx]
    kr = [ys2[i] / 2.0 for i in idx]
    rbits = radix_bits_for(len(xs), floor_bits, ceil_bits)
    return kk, kr, rbits, radix_table(kk, rbits, key_bits)


def _failing_runs(model, chunks, firsts, lasts, error, key_bits):
    kk, kr, rbits, table = model
    shift = key_bits - rbits
    bad = []
    for i, c in enumerate(chunks):
        p = math.floor(predict(kk, kr, table, shift, c) + 0.5)
        if abs(p - firsts[i]) > error or abs(p - lasts[i]) > error:
            bad.append(i)
    return bad


def build_node(keys, lo, hi, depth, k, error, floor_bits, ceil_bits, refit=False):
    """Fit one node over ranks ``[lo, hi)`` at chunk ``depth``.

    Returns ``(knot_keys, knot_ranks, radix_bits, radix_table, n_points,
    redirects)`` with ``redirects`` a list of ``(chunk, first, last)`` runs
    that fail the error check.
    """
    key_bits = 8 * k
    chunks, firsts, lasts = [], [], []
    prev = None
    for r in range(lo, hi):
        c = extract_chunk(keys[r], depth, k)
        if c == prev:
            lasts[-1] = r
        else:
            chunks.append(c)
            firsts.append(r)
            lasts.append(r)
            prev = c
    ys2 = [f + l for f, l in zip(firsts, lasts)]
    model = _fit(chunks, ys2, error, key_bits, floor_bits, ceil_bits)
    bad = _failing_runs(model, chunks, firsts, lasts, error, key_bits)
    if refit and bad and len(bad) < len(chunks):
        failed = set(bad)
        keep = [i for i in range(len(chunks)) if i not in failed]
        model = _fit([chunks[i] for i in keep], [ys2[i] for i in keep],
                     error, key_bits, floor_bits, ceil_bits)
        bad = _failing_runs(model, chunks, firsts, lasts, error, key_bits)
    kk, kr, rbits, table = model
    redirects = [(chunks[i], firsts[i], lasts[i]) for i in bad]
    return kk, kr, rbits, table, len(chunks), redirects


def _fmix64(k):
    k ^= k >> 33
    k = (k * 0xFF51AFD7ED558CCD) & _M64
    k ^= k >> 33
    k = (k * 0xC4CEB9FE1A85EC53) & _M64
    k ^= k >> 33
    return k


def _rotl64(x, r):
    return ((x << r) | (x >> (64 - r))) & _M64


def murmur3_128(data, seed=0):
    """MurmurHash3_x64_128; returns the two 64-bit output words ``(h1, h2)``."""
    c1 = 0x87C37B91114253D5
    c2 = 0x4CF5AD432745937F
    n = len(data)
    h1 = h2 = seed & _M64
    nblocks = n // 16
    for i in range(nblocks):
        k1 = int.from_bytes(data[16 * i:16 * i + 8], "little")
        k2 = int.from_bytes(data[16 * i + 8:16 * i + 16], "little")
        k1 = (k1 * c1) & _M64
        k1 = _rotl64(k1, 31)
        k1 = (k1 * c2) & _M64
        h1 ^= k1
        h1 = _rotl64(h1, 27)
        h1 = (h1 + h2) & _M64
        h1 = (h1 * 5 + 0x52DCE729) & _M64
        k2 = (k2 * c2) & _M64
        k2 = _rotl64(k2, 33)
        k2 = (k2 * c1) & _M64
        h2 ^= k2
        h2 = _rotl64(h2, 31)
        h2 = (h2 + h1) & _M64
        h2 = (h2 * 5 + 0x38495AB5) & _M64
    tail = data[16 * nblocks:]
    if len(tail) > 8:
        k2 = int.from_bytes(tail[8:], "little")
        k2 = (k2 * c2) & _M64
        k2 = _rotl64(k2, 33)
        k2 = (k2 * c1) & _M64
        h2 ^= k2
    if tail:
        k1 = int.from_bytes(tail[:8], "little")
        k1 = (k1 * c1) & _M64
        k1 = _rotl64(k1, 31)
        k1 = (k1 * c2) & _M64
        h1 ^= k1
    h1 ^= n
    h2 ^= n
    h1 = (h1 + h2) & _M64
    h2 = (h2 + h1) & _M64
    h1 = _fmix64(h1)
    h2 = _fmix64(h2)
    h1 = (h1 + h2) & _M64
    h2 = (h2 + h1) & _M64
    return h1, h2


def probe_slots(q, n_slots, probes, seed):
    """Slot indices for ``q``: 32-bit lanes of the 128-bit hash, modulo ``n_slots``.

    Every group of four probes uses a fresh hash with the seed bumped by one.
    """
    out = []
    rnd = 0
    while len(out) < probes:
        h1, h2 = murmur3_128(q, (seed + rnd) & _M64)
        for lane in (h1 & _M32, h1 >> 32, h2 & _M32, h2 >> 32):
            if len(out) == probes:
                break
            out.append(lane % n_slots)
        rnd += 1
    return out


class Tree:
    """Query engine over a preorder-flattened RSS.

    ``nodes`` holds one tuple per node: ``(lo, hi, depth, knot_keys,
    knot_ranks, radix_bits, radix_table, redirect_keys, redirect_children)``
    where ``redirect_children`` are indices into ``nodes``.
    """

    def __init__(self, keys, nodes, k, error):
        self.keys = keys
        self.n = len(keys)
        self.k = k
        self.error = error
        key_bits = 8 * k
        self._nodes = [
            (lo, hi, depth, list(kk), list(kr), key_bits - rbits, list(table),
             list(rkeys), list(rkids))
            for lo, hi, depth, kk, kr, rbits, table, rkeys, rkids in nodes
        ]

    def predict_rank(self, q):
        nodes = self._nodes
        k = self.k
        node_id = 0
        while True:
            lo, hi, depth, kk, kr, shift, table, rkeys, rkids = nodes[node_id]
            c = extract_chunk(q, depth, k)
            if rkeys:
                j = bisect_left(rkeys, c)
                if j < len(rkeys) and rkeys[j] == c:
                    node_id = rkids[j]
                    continue
            p = math.floor(predict(kk, kr, table, shift, c) + 0.5)
            if p < lo:
                p = lo
            elif p > hi - 1:
                p = hi - 1
            return node_id, p

    def _window(self, q):
        node_id, p = self.predict_rank(q)
        lo, hi = self._nodes[node_id][:2]
        return p, max(lo, p - self.error), min(hi - 1, p + self.error)

    def lookup_eq(self, q):
        keys = self.keys
        _, left, right = self._window(q)
        r = bisect_left(keys, q, left, right + 1)
        if r <= right and keys[r] == q:
            return r
        return None

    def lower_bound(self, q):
        keys = self.keys
        n = self.n
        _, left, right = self._window(q)
        step = 1
        while left > 0 and not keys[left - 1] < q:
            left = max(0, left - step)
            step *= 2
        step = 1
        while right < n - 1 and keys[right] < q:
            right = min(n - 1, right + step)
            step *= 2
        return bisect_left(keys, q, left, right + 1)

    def build_hc(self, slots, probes, seed):
        """Fill ``slots`` (signed bytes, all empty) with rank offsets; returns inserted count."""
        m = len(slots)
        inserted = 0
        for r, key in enumerate(self.keys):
            _, p = self.predict_rank(key)
            off = r - p
            if not -127 <= off <= 127:
                raise ValueError(f"offset {off} for rank {r} does not fit a signed byte")
            for h in probe_slots(key, m, probes, seed):
                if slots[h] == EMPTY_SLOT:
                    slots[h] = off
                    inserted += 1
                    break
        return inserted

    def lookup_eq_hc(self, q, slots, probes, seed):
        """Equality lookup through the offset table; returns ``(rank or None, fast_path)``."""
        keys = self.keys
        p, left, right = self._window(q)
        for h in probe_slots(q, len(slots), probes, seed):
            off = slots[h]
            if off == EMPTY_SLOT:
                continue
            cand = p + off
            if cand < left or cand > right:
                continue
            key = keys[cand]
            if key == q:
                return cand, True
            if key < q:
                left = cand + 1
            else:
                right = cand - 1
        r = bisect_left(keys, q, left, max(left, right + 1))
        if r <= right and keys[r] == q:
            return r, False
        return None, False

    def lookup_eq_many(self, qs):
        return [self.lookup_eq(q) for q in qs]

    def lower_bound_many(self, qs):
        return [self.lower_bound(q) for q in qs]

    def lookup_eq_hc_many(self, qs, slots, probes, seed):
        out = []
        hits = 0
        for q in qs:
            r, fast = self.lookup_eq_hc(q, slots, probes, seed)
            out.append(r)
            hits += fast
        return out, hits
