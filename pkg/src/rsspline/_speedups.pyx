# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels; drop-in replacement for ``rsspline._purekernels``.

Chunk keys are carried as 128-bit unsigned integers in C.  Spline corridor
slopes are compared exactly with 192-bit products, so fitted knots match the
pure-Python reference bit for bit.
"""

from cpython.bytes cimport PyBytes_AS_STRING, PyBytes_GET_SIZE, PyBytes_Check
from libc.stdint cimport uint64_t, int64_t, int8_t
from libc.stdlib cimport malloc, free
from libc.string cimport memcmp
from libc.math cimport floor

cdef extern from *:
    """
    #include <stdint.h>
    typedef unsigned __int128 rss_u128;

    static inline rss_u128 rss_join(uint64_t hi, uint64_t lo) {
        return ((rss_u128)hi << 64) | lo;
    }
    static inline uint64_t rss_hi(rss_u128 v) { return (uint64_t)(v >> 64); }
    static inline uint64_t rss_lo(rss_u128 v) { return (uint64_t)v; }

    /* compare a*b with c*d as exact 192-bit products */
    static inline int rss_cmp_mag(uint64_t a, rss_u128 b, uint64_t c, rss_u128 d) {
        rss_u128 lo1 = (rss_u128)a * (uint64_t)b;
        rss_u128 hi1 = (rss_u128)a * (uint64_t)(b >> 64) + (lo1 >> 64);
        rss_u128 lo2 = (rss_u128)c * (uint64_t)d;
        rss_u128 hi2 = (rss_u128)c * (uint64_t)(d >> 64) + (lo2 >> 64);
        if (hi1 != hi2) return hi1 < hi2 ? -1 : 1;
        uint64_t l1 = (uint64_t)lo1, l2 = (uint64_t)lo2;
        return (l1 > l2) - (l1 < l2);
    }

    /* sign of dya/dxa - dyb/dxb, dx > 0 */
    static inline int rss_slope_cmp(int64_t dya, rss_u128 dxa, int64_t dyb, rss_u128 dxb) {
        int sa = (dya > 0) - (dya < 0);
        int sb = (dyb > 0) - (dyb < 0);
        if (sa != sb) return sa < sb ? -1 : 1;
        if (sa == 0) return 0;
        uint64_t ma = sa > 0 ? (uint64_t)dya : (uint64_t)0 - (uint64_t)dya;
        uint64_t mb = sb > 0 ? (uint64_t)dyb : (uint64_t)0 - (uint64_t)dyb;
        int c = rss_cmp_mag(ma, dxb, mb, dxa);
        return sa > 0 ? c : -c;
    }
    """
    ctypedef unsigned long long rss_u128
    rss_u128 rss_join(uint64_t hi, uint64_t lo) nogil
    uint64_t rss_hi(rss_u128 v) nogil
    uint64_t rss_lo(rss_u128 v) nogil
    int rss_slope_cmp(int64_t dya, rss_u128 dxa, int64_t dyb, rss_u128 dxb) nogil

NAME = "cython"
EMPTY_SLOT = -128

cdef enum:
    C_EMPTY = -128

cdef object _PY_M64 = (1 << 64) - 1


cdef inline rss_u128 to_u128(object v) except? 0:
    if v < 0 or v >> 128:
        raise OverflowError("chunk key out of the 128-bit range")
    return rss_join(<uint64_t>(v >> 64), <uint64_t>(v & _PY_M64))


cdef inline object from_u128(rss_u128 v):
    cdef uint64_t hi = rss_hi(v)
    if hi == 0:
        return rss_lo(v)
    return (<object>hi << 64) | rss_lo(v)


cdef inline rss_u128 chunk_at(const unsigned char* s, Py_ssize_t n, Py_ssize_t depth, int k) noexcept nogil:
    cdef Py_ssize_t start = depth * k
    cdef Py_ssize_t i
    cdef rss_u128 v = 0
    for i in range(start, start + k):
        v = v << 8
        if i < n:
            v = v | s[i]
    return v


cdef inline bytes as_bytes(object q):
    if PyBytes_Check(q):
        return <bytes>q
    return bytes(q)


def extract_chunk(s, Py_ssize_t depth, int k):
    cdef bytes b = as_bytes(s)
    return from_u128(chunk_at(<const unsigned char*>PyBytes_AS_STRING(b), PyBytes_GET_SIZE(b), depth, k))


cdef Py_ssize_t c_fit(const rss_u128* xs, const int64_t* ys, Py_ssize_t n, int64_t err,
                      Py_ssize_t* knots) noexcept nogil:
    """Greedy corridor fit; writes knot indices, returns their count."""
    cdef Py_ssize_t nk = 1, base = 0, i
    cdef rss_u128 bx, dx, up_dx, lo_dx
    cdef int64_t by, dy, up_dy, lo_dy
    knots[0] = 0
    if n == 1:
        return 1
    bx = xs[0]
    by = ys[0]
    dx = xs[1] - bx
    up_dy = ys[1] + err - by
    up_dx = dx
    lo_dy = ys[1] - err - by
    lo_dx = dx
    for i in range(2, n):
        dx = xs[i] - bx
        dy = ys[i] - by
        if rss_slope_cmp(dy, dx, up_dy, up_dx) > 0 or rss_slope_cmp(dy, dx, lo_dy, lo_dx) < 0:
            base = i - 1
            knots[nk] = base
            nk += 1
            bx = xs[base]
            by = ys[base]
            dx = xs[i] - bx
            up_dy = ys[i] + err - by
            up_dx = dx
            lo_dy = ys[i] - err - by
            lo_dx = dx
            continue
        if rss_slope_cmp(dy + err, dx, up_dy, up_dx) < 0:
            up_dy = dy + err
            up_dx = dx
        if rss_slope_cmp(dy - err, dx, lo_dy, lo_dx) > 0:
            lo_dy = dy - err
            lo_dx = dx
    knots[nk] = n - 1
    return nk + 1


def fit_knots(xs, ys, err):
    cdef Py_ssize_t n = len(xs), i, nk
    if n == 0:
        raise ValueError("cannot fit an empty point set")
    cdef rss_u128* cx = <rss_u128*>malloc(n * sizeof(rss_u128))
    cdef int64_t* cy = <int64_t*>malloc(n * sizeof(int64_t))
    cdef Py_ssize_t* kn = <Py_ssize_t*>malloc(n * sizeof(Py_ssize_t))
    if cx == NULL or cy == NULL or kn == NULL:
        free(cx); free(cy); free(kn)
        raise MemoryError()
    try:
        for i in range(n):
            cx[i] = to_u128(xs[i])
            cy[i] = ys[i]
        nk = c_fit(cx, cy, n, err, kn)
        return [kn[i] for i in range(nk)]
    finally:
        free(cx); free(cy); free(kn)


cdef inline int c_radix_bits(Py_ssize_t n_points, int floor_bits, int ceil_bits) noexcept nogil:
    cdef int bits = 0
    cdef Py_ssize_t v = n_points - 1
    while v > 0:
        bits += 1
        v >>= 1
    if bits < floor_bits:
        bits = floor_bits
    if bits > ceil_bits:
        bits = ceil_bits
    return bits


def radix_bits_for(Py_ssize_t n_points, int floor_bits, int ceil_bits):
    return c_radix_bits(n_points, floor_bits, ceil_bits)


cdef void c_radix_table(const rss_u128* kk, Py_ssize_t n, int rbits, int shift, int64_t* table) noexcept nogil:
    cdef Py_ssize_t size = (<Py_ssize_t>1) << rbits, b, j = 0
    for b in range(size):
        while j < n and (kk[j] >> shift) < <rss_u128>b:
            j += 1
        table[b] = j
    table[size] = n


def radix_table(knot_keys, int radix_bits, int key_bits):
    cdef Py_ssize_t n = len(knot_keys), i
    cdef Py_ssize_t size = (<Py_ssize_t>1) << radix_bits
    cdef rss_u128* kk = <rss_u128*>malloc((n + 1) * sizeof(rss_u128))
    cdef int64_t* tab = <int64_t*>malloc((size + 1) * sizeof(int64_t))
    if kk == NULL or tab == NULL:
        free(kk); free(tab)
        raise MemoryError()
    try:
        for i in range(n):
            kk[i] = to_u128(knot_keys[i])
        c_radix_table(kk, n, radix_bits, key_bits - radix_bits, tab)
        return [tab[i] for i in range(size + 1)]
    finally:
        free(kk); free(tab)


cdef inline double c_predict(const rss_u128* kk, const double* kr, Py_ssize_t n,
                             const int64_t* table, int shift, rss_u128 x) noexcept nogil:
    cdef Py_ssize_t b = <Py_ssize_t>(x >> shift)
    cdef Py_ssize_t lo = table[b], hi = table[b + 1], mid
    cdef rss_u128 k0, k1
    cdef double r0, v
    while lo < hi:
        mid = (lo + hi) >> 1
        if kk[mid] < x:
            lo = mid + 1
        else:
            hi = mid
    if lo == 0:
        return kr[0]
    if lo == n:
        return kr[n - 1]
    k1 = kk[lo]
    if k1 == x:
        return kr[lo]
    k0 = kk[lo - 1]
    r0 = kr[lo - 1]
    v = r0 + (<double>(x - k0)) * (kr[lo] - r0) / (<double>(k1 - k0))
    return v if v < kr[lo] else kr[lo]


def predict(knot_keys, knot_ranks, table, int shift, x):
    cdef Py_ssize_t n = len(knot_keys), i, size = len(table)
    cdef rss_u128* kk = <rss_u128*>malloc(n * sizeof(rss_u128))
    cdef double* kr = <double*>malloc(n * sizeof(double))
    cdef int64_t* tab = <int64_t*>malloc(size * sizeof(int64_t))
    if kk == NULL or kr == NULL or tab == NULL:
        free(kk); free(kr); free(tab)
        raise MemoryError()
    try:
        for i in range(n):
            kk[i] = to_u128(knot_keys[i])
            kr[i] = knot_ranks[i]
        for i in range(size):
            tab[i] = table[i]
        return c_predict(kk, kr, n, tab, shift, to_u128(x))
    finally:
        free(kk); free(kr); free(tab)


cdef Py_ssize_t c_failing(const rss_u128* kk, const double* kr, Py_ssize_t nk,
                          const int64_t* table, int shift,
                          const rss_u128* chunks, const int64_t* firsts, const int64_t* lasts,
                          Py_ssize_t n, int64_t err, Py_ssize_t* bad) noexcept nogil:
    cdef Py_ssize_t i, nbad = 0
    cdef int64_t p
    for i in range(n):
        p = <int64_t>floor(c_predict(kk, kr, nk, table, shift, chunks[i]) + 0.5)
        if p - firsts[i] > err or firsts[i] - p > err or p - lasts[i] > err or lasts[i] - p > err:
            bad[nbad] = i
            nbad += 1
    return nbad


cdef class _NodeFit:
    # scratch buffers for one node's spline
    cdef rss_u128* kk
    cdef double* kr
    cdef int64_t* table
    cdef Py_ssize_t nk
    cdef int rbits

    def __dealloc__(self):
        free(self.kk); free(self.kr); free(self.table)

    cdef int fit(self, const rss_u128* xs, const int64_t* ys2, Py_ssize_t n, int64_t err,
                 int key_bits, int floor_bits, int ceil_bits) except -1:
        cdef Py_ssize_t* idx = <Py_ssize_t*>malloc(n * sizeof(Py_ssize_t))
        cdef Py_ssize_t i, size
        if idx == NULL:
            raise MemoryError()
        free(self.kk); free(self.kr); free(self.table)
        self.kk = NULL; self.kr = NULL; self.table = NULL
        try:
            self.nk = c_fit(xs, ys2, n, 2 * err, idx)
            self.rbits = c_radix_bits(n, floor_bits, ceil_bits)
            size = (<Py_ssize_t>1) << self.rbits
            self.kk = <rss_u128*>malloc(self.nk * sizeof(rss_u128))
            self.kr = <double*>malloc(self.nk * sizeof(double))
            self.table = <int64_t*>malloc((size + 1) * sizeof(int64_t))
            if self.kk == NULL or self.kr == NULL or self.table == NULL:
                raise MemoryError()
            for i in range(self.nk):
                self.kk[i] = xs[idx[i]]
                self.kr[i] = ys2[idx[i]] / 2.0
            c_radix_table(self.kk, self.nk, self.rbits, key_bits - self.rbits, self.table)
        finally:
            free(idx)
        return 0


def build_node(keys, Py_ssize_t lo, Py_ssize_t hi, Py_ssize_t depth, int k, int64_t error,
               int floor_bits, int ceil_bits, bint refit=False):
    cdef Py_ssize_t n = hi - lo, nruns = 0, r, i, nbad, nkeep, j
    cdef int key_bits = 8 * k
    cdef rss_u128 c
    cdef bytes key
    cdef rss_u128* chunks = <rss_u128*>malloc(n * sizeof(rss_u128))
    cdef int64_t* firsts = <int64_t*>malloc(n * sizeof(int64_t))
    cdef int64_t* lasts = <int64_t*>malloc(n * sizeof(int64_t))
    cdef int64_t* ys2 = <int64_t*>malloc(n * sizeof(int64_t))
    cdef Py_ssize_t* bad = <Py_ssize_t*>malloc(n * sizeof(Py_ssize_t))
    cdef rss_u128* kx = NULL
    cdef int64_t* ky = NULL
    cdef _NodeFit model = _NodeFit()
    try:
        if chunks == NULL or firsts == NULL or lasts == NULL or ys2 == NULL or bad == NULL:
            raise MemoryError()
        for r in range(lo, hi):
            key = keys[r]
            c = chunk_at(<const unsigned char*>PyBytes_AS_STRING(key), PyBytes_GET_SIZE(key), depth, k)
            if nruns > 0 and chunks[nruns - 1] == c:
                lasts[nruns - 1] = r
            else:
                chunks[nruns] = c
                firsts[nruns] = r
                lasts[nruns] = r
                nruns += 1
        for i in range(nruns):
            ys2[i] = firsts[i] + lasts[i]
        model.fit(chunks, ys2, nruns, error, key_bits, floor_bits, ceil_bits)
        nbad = c_failing(model.kk, model.kr, model.nk, model.table, key_bits - model.rbits,
                         chunks, firsts, lasts, nruns, error, bad)
        if refit and nbad > 0 and nbad < nruns:
            kx = <rss_u128*>malloc(nruns * sizeof(rss_u128))
            ky = <int64_t*>malloc(nruns * sizeof(int64_t))
            if kx == NULL or ky == NULL:
                raise MemoryError()
            nkeep = 0
            j = 0
            for i in range(nruns):
                if j < nbad and bad[j] == i:
                    j += 1
                    continue
                kx[nkeep] = chunks[i]
                ky[nkeep] = ys2[i]
                nkeep += 1
            model.fit(kx, ky, nkeep, error, key_bits, floor_bits, ceil_bits)
            nbad = c_failing(model.kk, model.kr, model.nk, model.table, key_bits - model.rbits,
                             chunks, firsts, lasts, nruns, error, bad)
        knot_keys = [from_u128(model.kk[i]) for i in range(model.nk)]
        knot_ranks = [model.kr[i] for i in range(model.nk)]
        table = [model.table[i] for i in range(((<Py_ssize_t>1) << model.rbits) + 1)]
        redirects = [(from_u128(chunks[bad[i]]), firsts[bad[i]], lasts[bad[i]]) for i in range(nbad)]
        return knot_keys, knot_ranks, model.rbits, table, nruns, redirects
    finally:
        free(chunks); free(firsts); free(lasts); free(ys2); free(bad); free(kx); free(ky)


cdef inline uint64_t rotl64(uint64_t x, int r) noexcept nogil:
    return (x << r) | (x >> (64 - r))


cdef inline uint64_t fmix64(uint64_t k) noexcept nogil:
    k ^= k >> 33
    k *= 0xFF51AFD7ED558CCDULL
    k ^= k >> 33
    k *= 0xC4CEB9FE1A85EC53ULL
    k ^= k >> 33
    return k


cdef inline uint64_t load_le(const unsigned char* p, Py_ssize_t n) noexcept nogil:
    cdef uint64_t v = 0
    cdef Py_ssize_t i
    for i in range(n - 1, -1, -1):
        v = (v << 8) | p[i]
    return v


cdef void c_murmur3(const unsigned char* data, Py_ssize_t n, uint64_t seed,
                    uint64_t* out1, uint64_t* out2) noexcept nogil:
    cdef uint64_t c1 = 0x87C37B91114253D5ULL
    cdef uint64_t c2 = 0x4CF5AD432745937FULL
    cdef uint64_t h1 = seed, h2 = seed, k1, k2
    cdef Py_ssize_t nblocks = n // 16, i, rem
    cdef const unsigned char* tail
    for i in range(nblocks):
        k1 = load_le(data + 16 * i, 8)
        k2 = load_le(data + 16 * i + 8, 8)
        k1 *= c1
        k1 = rotl64(k1, 31)
        k1 *= c2
        h1 ^= k1
        h1 = rotl64(h1, 27)
        h1 += h2
        h1 = h1 * 5 + 0x52DCE729
        k2 *= c2
        k2 = rotl64(k2, 33)
        k2 *= c1
        h2 ^= k2
        h2 = rotl64(h2, 31)
        h2 += h1
        h2 = h2 * 5 + 0x38495AB5
    tail = data + 16 * nblocks
    rem = n & 15
    if rem > 8:
        k2 = load_le(tail + 8, rem - 8)
        k2 *= c2
        k2 = rotl64(k2, 33)
        k2 *= c1
        h2 ^= k2
    if rem > 0:
        k1 = load_le(tail, rem if rem < 8 else 8)
        k1 *= c1
        k1 = rotl64(k1, 31)
        k1 *= c2
        h1 ^= k1
    h1 ^= <uint64_t>n
    h2 ^= <uint64_t>n
    h1 += h2
    h2 += h1
    h1 = fmix64(h1)
    h2 = fmix64(h2)
    h1 += h2
    h2 += h1
    out1[0] = h1
    out2[0] = h2


def murmur3_128(data, uint64_t seed=0):
    cdef bytes b = as_bytes(data)
    cdef uint64_t h1, h2
    c_murmur3(<const unsigned char*>PyBytes_AS_STRING(b), PyBytes_GET_SIZE(b), seed, &h1, &h2)
    return h1, h2


cdef void c_probes(const unsigned char* q, Py_ssize_t qn, int64_t m, int probes, uint64_t seed,
                   int64_t* out) noexcept nogil:
    cdef int i = 0, lane
    cdef uint64_t rnd = 0, h1, h2, v
    while i < probes:
        c_murmur3(q, qn, seed + rnd, &h1, &h2)
        for lane in range(4):
            if i == probes:
                break
            if lane == 0:
                v = h1 & 0xFFFFFFFFULL
            elif lane == 1:
                v = h1 >> 32
            elif lane == 2:
                v = h2 & 0xFFFFFFFFULL
            else:
                v = h2 >> 32
            out[i] = <int64_t>(v % <uint64_t>m)
            i += 1
        rnd += 1


def probe_slots(q, int64_t n_slots, int probes, uint64_t seed):
    cdef bytes b = as_bytes(q)
    cdef int64_t* out = <int64_t*>malloc(probes * sizeof(int64_t))
    cdef int i
    if out == NULL:
        raise MemoryError()
    try:
        c_probes(<const unsigned char*>PyBytes_AS_STRING(b), PyBytes_GET_SIZE(b), n_slots, probes, seed, out)
        return [out[i] for i in range(probes)]
    finally:
        free(out)


cdef inline int cmp_bytes(const unsigned char* a, Py_ssize_t an,
                          const unsigned char* b, Py_ssize_t bn) noexcept nogil:
    cdef Py_ssize_t m = an if an < bn else bn
    cdef int c = memcmp(a, b, m) if m > 0 else 0
    if c != 0:
        return c
    return (an > bn) - (an < bn)


cdef class Tree:
    """Query engine over a preorder-flattened RSS; see ``_purekernels.Tree``."""

    cdef readonly object keys
    cdef readonly Py_ssize_t n
    cdef readonly int k
    cdef readonly int64_t error
    cdef const unsigned char** kp
    cdef Py_ssize_t* kl
    cdef Py_ssize_t n_nodes
    cdef int64_t* node_lo
    cdef int64_t* node_hi
    cdef Py_ssize_t* node_depth
    cdef int* node_shift
    cdef Py_ssize_t* node_knot_off
    cdef Py_ssize_t* node_knot_cnt
    cdef Py_ssize_t* node_table_off
    cdef Py_ssize_t* node_redir_off
    cdef Py_ssize_t* node_redir_cnt
    cdef rss_u128* knot_keys
    cdef double* knot_ranks
    cdef int64_t* tables
    cdef rss_u128* redir_keys
    cdef Py_ssize_t* redir_child

    def __cinit__(self):
        self.kp = NULL

    def __init__(self, keys, nodes, int k, int64_t error):
        cdef Py_ssize_t i, j, nk = 0, nt = 0, nr = 0, ko = 0, to = 0, ro = 0
        cdef bytes key
        self.keys = keys
        self.n = len(keys)
        self.k = k
        self.error = error
        self.n_nodes = len(nodes)
        for node in nodes:
            nk += len(node[3])
            nt += len(node[6])
            nr += len(node[7])
        self.kp = <const unsigned char**>malloc((self.n + 1) * sizeof(char*))
        self.kl = <Py_ssize_t*>malloc((self.n + 1) * sizeof(Py_ssize_t))
        self.node_lo = <int64_t*>malloc(self.n_nodes * sizeof(int64_t))
        self.node_hi = <int64_t*>malloc(self.n_nodes * sizeof(int64_t))
        self.node_depth = <Py_ssize_t*>malloc(self.n_nodes * sizeof(Py_ssize_t))
        self.node_shift = <int*>malloc(self.n_nodes * sizeof(int))
        self.node_knot_off = <Py_ssize_t*>malloc(self.n_nodes * sizeof(Py_ssize_t))
        self.node_knot_cnt = <Py_ssize_t*>malloc(self.n_nodes * sizeof(Py_ssize_t))
        self.node_table_off = <Py_ssize_t*>malloc(self.n_nodes * sizeof(Py_ssize_t))
        self.node_redir_off = <Py_ssize_t*>malloc(self.n_nodes * sizeof(Py_ssize_t))
        self.node_redir_cnt = <Py_ssize_t*>malloc(self.n_nodes * sizeof(Py_ssize_t))
        self.knot_keys = <rss_u128*>malloc((nk + 1) * sizeof(rss_u128))
        self.knot_ranks = <double*>malloc((nk + 1) * sizeof(double))
        self.tables = <int64_t*>malloc((nt + 1) * sizeof(int64_t))
        self.redir_keys = <rss_u128*>malloc((nr + 1) * sizeof(rss_u128))
        self.redir_child = <Py_ssize_t*>malloc((nr + 1) * sizeof(Py_ssize_t))
        if (self.kp == NULL or self.kl == NULL or self.node_lo == NULL or self.node_hi == NULL
                or self.node_depth == NULL or self.node_shift == NULL or self.node_knot_off == NULL
                or self.node_knot_cnt == NULL or self.node_table_off == NULL
                or self.node_redir_off == NULL or self.node_redir_cnt == NULL
                or self.knot_keys == NULL or self.knot_ranks == NULL or self.tables == NULL
                or self.redir_keys == NULL or self.redir_child == NULL):
            raise MemoryError()
        for i in range(self.n):
            key = keys[i]
            self.kp[i] = <const unsigned char*>PyBytes_AS_STRING(key)
            self.kl[i] = PyBytes_GET_SIZE(key)
        for i, node in enumerate(nodes):
            lo, hi, depth, kk, kr, rbits, table, rkeys, rkids = node
            self.node_lo[i] = lo
            self.node_hi[i] = hi
            self.node_depth[i] = depth
            self.node_shift[i] = 8 * k - rbits
            self.node_knot_off[i] = ko
            self.node_knot_cnt[i] = len(kk)
            for j in range(len(kk)):
                self.knot_keys[ko + j] = to_u128(kk[j])
                self.knot_ranks[ko + j] = kr[j]
            ko += len(kk)
            self.node_table_off[i] = to
            for j in range(len(table)):
                self.tables[to + j] = table[j]
            to += len(table)
            self.node_redir_off[i] = ro
            self.node_redir_cnt[i] = len(rkeys)
            for j in range(len(rkeys)):
                self.redir_keys[ro + j] = to_u128(rkeys[j])
                self.redir_child[ro + j] = rkids[j]
            ro += len(rkeys)

    def __dealloc__(self):
        free(self.kp); free(self.kl)
        free(self.node_lo); free(self.node_hi); free(self.node_depth); free(self.node_shift)
        free(self.node_knot_off); free(self.node_knot_cnt); free(self.node_table_off)
        free(self.node_redir_off); free(self.node_redir_cnt)
        free(self.knot_keys); free(self.knot_ranks); free(self.tables)
        free(self.redir_keys); free(self.redir_child)

    cdef int64_t c_predict_rank(self, const unsigned char* q, Py_ssize_t qn, Py_ssize_t* node_out) noexcept nogil:
        cdef Py_ssize_t node = 0, lo, hi, mid, off
        cdef rss_u128 c
        cdef int64_t p
        while True:
            c = chunk_at(q, qn, self.node_depth[node], self.k)
            off = self.node_redir_off[node]
            lo = 0
            hi = self.node_redir_cnt[node]
            while lo < hi:
                mid = (lo + hi) >> 1
                if self.redir_keys[off + mid] < c:
                    lo = mid + 1
                else:
                    hi = mid
            if lo < self.node_redir_cnt[node] and self.redir_keys[off + lo] == c:
                node = self.redir_child[off + lo]
                continue
            off = self.node_knot_off[node]
            p = <int64_t>floor(c_predict(self.knot_keys + off, self.knot_ranks + off,
                                         self.node_knot_cnt[node],
                                         self.tables + self.node_table_off[node],
                                         self.node_shift[node], c) + 0.5)
            if p < self.node_lo[node]:
                p = self.node_lo[node]
            elif p > self.node_hi[node] - 1:
                p = self.node_hi[node] - 1
            node_out[0] = node
            return p

    cdef inline int cmp_key(self, Py_ssize_t r, const unsigned char* q, Py_ssize_t qn) noexcept nogil:
        return cmp_bytes(self.kp[r], self.kl[r], q, qn)

    cdef Py_ssize_t c_bisect(self, const unsigned char* q, Py_ssize_t qn,
                             Py_ssize_t lo, Py_ssize_t hi) noexcept nogil:
        # first rank in [lo, hi) whose key is >= q
        cdef Py_ssize_t mid
        while lo < hi:
            mid = (lo + hi) >> 1
            if self.cmp_key(mid, q, qn) < 0:
                lo = mid + 1
            else:
                hi = mid
        return lo

    cdef inline void c_window(self, const unsigned char* q, Py_ssize_t qn,
                              int64_t* p, int64_t* left, int64_t* right) noexcept nogil:
        cdef Py_ssize_t node
        p[0] = self.c_predict_rank(q, qn, &node)
        left[0] = p[0] - self.error
        if left[0] < self.node_lo[node]:
            left[0] = self.node_lo[node]
        right[0] = p[0] + self.error
        if right[0] > self.node_hi[node] - 1:
            right[0] = self.node_hi[node] - 1

    cdef int64_t c_lookup_eq(self, const unsigned char* q, Py_ssize_t qn) noexcept nogil:
        cdef int64_t p, left, right, r
        self.c_window(q, qn, &p, &left, &right)
        r = self.c_bisect(q, qn, left, right + 1)
        if r <= right and self.cmp_key(r, q, qn) == 0:
            return r
        return -1

    cdef int64_t c_lower_bound(self, const unsigned char* q, Py_ssize_t qn) noexcept nogil:
        cdef int64_t p, left, right, step
        cdef int64_t n = self.n
        self.c_window(q, qn, &p, &left, &right)
        step = 1
        while left > 0 and self.cmp_key(left - 1, q, qn) >= 0:
            left = left - step
            if left < 0:
                left = 0
            step *= 2
        step = 1
        while right < n - 1 and self.cmp_key(right, q, qn) < 0:
            right = right + step
            if right > n - 1:
                right = n - 1
            step *= 2
        return self.c_bisect(q, qn, left, right + 1)

    cdef int64_t c_lookup_eq_hc(self, const unsigned char* q, Py_ssize_t qn, const int8_t* slots,
                                int64_t m, int probes, uint64_t seed, int64_t* hpos,
                                bint* fast) noexcept nogil:
        cdef int64_t p, left, right, cand, r
        cdef int i, c
        cdef int8_t off
        fast[0] = False
        self.c_window(q, qn, &p, &left, &right)
        c_probes(q, qn, m, probes, seed, hpos)
        for i in range(probes):
            off = slots[hpos[i]]
            if off == C_EMPTY:
                continue
            cand = p + off
            if cand < left or cand > right:
                continue
            c = self.cmp_key(cand, q, qn)
            if c == 0:
                fast[0] = True
                return cand
            if c < 0:
                left = cand + 1
            else:
                right = cand - 1
        if left > right:
            return -1
        r = self.c_bisect(q, qn, left, right + 1)
        if r <= right and self.cmp_key(r, q, qn) == 0:
            return r
        return -1

    def predict_rank(self, q):
        cdef bytes b = as_bytes(q)
        cdef Py_ssize_t node
        cdef int64_t p = self.c_predict_rank(<const unsigned char*>PyBytes_AS_STRING(b),
                                             PyBytes_GET_SIZE(b), &node)
        return node, p

    def lookup_eq(self, q):
        cdef bytes b = as_bytes(q)
        cdef int64_t r = self.c_lookup_eq(<const unsigned char*>PyBytes_AS_STRING(b), PyBytes_GET_SIZE(b))
        return None if r < 0 else r

    def lower_bound(self, q):
        cdef bytes b = as_bytes(q)
        return self.c_lower_bound(<const unsigned char*>PyBytes_AS_STRING(b), PyBytes_GET_SIZE(b))

    def build_hc(self, int8_t[::1] slots, int probes, uint64_t seed):
        cdef int64_t m = slots.shape[0], p, off
        cdef Py_ssize_t r, node, inserted = 0
        cdef int i
        cdef int64_t* hpos = <int64_t*>malloc(probes * sizeof(int64_t))
        if hpos == NULL:
            raise MemoryError()
        try:
            with nogil:
                for r in range(self.n):
                    p = self.c_predict_rank(self.kp[r], self.kl[r], &node)
                    off = r - p
                    if off < -127 or off > 127:
                        with gil:
                            raise ValueError(f"offset {off} for rank {r} does not fit a signed byte")
                    c_probes(self.kp[r], self.kl[r], m, probes, seed, hpos)
                    for i in range(probes):
                        if slots[hpos[i]] == C_EMPTY:
                            slots[hpos[i]] = <int8_t>off
                            inserted += 1
                            break
            return inserted
        finally:
            free(hpos)

    def lookup_eq_hc(self, q, int8_t[::1] slots, int probes, uint64_t seed):
        cdef bytes b = as_bytes(q)
        cdef bint fast
        cdef int64_t r
        cdef int64_t* hpos = <int64_t*>malloc(probes * sizeof(int64_t))
        if hpos == NULL:
            raise MemoryError()
        try:
            r = self.c_lookup_eq_hc(<const unsigned char*>PyBytes_AS_STRING(b), PyBytes_GET_SIZE(b),
                                    &slots[0], slots.shape[0], probes, seed, hpos, &fast)
        finally:
            free(hpos)
        return (None if r < 0 else r), bool(fast)

    def _batch(self, qs, int mode, int8_t[::1] slots=None, int probes=0, uint64_t seed=0):
        # mode 0: eq, 1: lower bound, 2: eq through the offset table
        cdef Py_ssize_t nq = len(qs), i, hits = 0
        cdef list held = [as_bytes(q) for q in qs]
        cdef const unsigned char** qp = <const unsigned char**>malloc((nq + 1) * sizeof(char*))
        cdef Py_ssize_t* ql = <Py_ssize_t*>malloc((nq + 1) * sizeof(Py_ssize_t))
        cdef int64_t* res = <int64_t*>malloc((nq + 1) * sizeof(int64_t))
        cdef int64_t* hpos = <int64_t*>malloc((probes + 1) * sizeof(int64_t))
        cdef const int8_t* sp = NULL
        cdef int64_t m = 0
        cdef bint fast
        cdef bytes b
        try:
            if qp == NULL or ql == NULL or res == NULL or hpos == NULL:
                raise MemoryError()
            if mode == 2:
                sp = &slots[0]
                m = slots.shape[0]
            for i in range(nq):
                b = held[i]
                qp[i] = <const unsigned char*>PyBytes_AS_STRING(b)
                ql[i] = PyBytes_GET_SIZE(b)
            with nogil:
                if mode == 0:
                    for i in range(nq):
                        res[i] = self.c_lookup_eq(qp[i], ql[i])
                elif mode == 1:
                    for i in range(nq):
                        res[i] = self.c_lower_bound(qp[i], ql[i])
                else:
                    for i in range(nq):
                        res[i] = self.c_lookup_eq_hc(qp[i], ql[i], sp, m, probes, seed, hpos, &fast)
                        hits += fast
            if mode == 1:
                return [res[i] for i in range(nq)], hits
            return [None if res[i] < 0 else res[i] for i in range(nq)], hits
        finally:
            free(qp); free(ql); free(res); free(hpos)

    def lookup_eq_many(self, qs):
        return self._batch(qs, 0)[0]

    def lower_bound_many(self, qs):
        return self._batch(qs, 1)[0]

    def lookup_eq_hc_many(self, qs, int8_t[::1] slots, int probes, uint64_t seed):
        return self._batch(qs, 2, slots, probes, seed)
