"""Benchmark harness: workload construction, oracle verification, timing."""

from __future__ import annotations

import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from typing import Callable, Optional, Sequence

from rsspline import hash_corrector as hc_mod
from rsspline.keyspace import Dataset
from rsspline.oracle import OracleIndex
from rsspline.rss import RssConfig, RssIndex

MIN_OPS = 100_000
REPETITIONS = 3


class OracleMismatch(RuntimeError):
    pass


@dataclass
class BenchReport:
    dataset_name: str
    N: int
    config: dict
    build_ns_per_item: float
    lookup_ns_mean: float
    lower_bound_ns_mean: float
    index_bytes: int
    hc_bytes: int
    fast_path_hit_rate: Optional[float]
    memory: dict

    def to_dict(self) -> dict:
        return asdict(self)


def non_members(dataset: Dataset, count: int, rng: random.Random) -> list[bytes]:
    """Keys absent from the dataset, made by editing random members."""
    keys = dataset.keys
    present = set(keys)
    out: list[bytes] = []
    alphabet = b"abcdefghijklmnopqrstuvwxyz0123456789 ./"
    while len(out) < count:
        base = keys[rng.randrange(len(keys))]
        pos = rng.randint(0, len(base))
        q = base[:pos] + bytes([rng.choice(alphabet)]) + base[pos + rng.randint(0, 1):]
        if q not in present:
            out.append(q)
    return out


def make_workload(dataset: Dataset, miss_rate: float = 0.0, seed: int = 0,
                  size: Optional[int] = None) -> list[bytes]:
    """Member keys in random order, with a ``miss_rate`` share replaced by non-members."""
    if not 0.0 <= miss_rate <= 1.0:
        raise ValueError("miss rate must be in [0, 1]")
    rng = random.Random(seed)
    keys = dataset.keys
    size = len(keys) if size is None else size
    n_miss = round(size * miss_rate)
    n_hit = size - n_miss
    members = rng.sample(keys, n_hit) if n_hit <= len(keys) else rng.choices(keys, k=n_hit)
    queries = members + non_members(dataset, n_miss, rng)
    rng.shuffle(queries)
    return queries


def verify_against_oracle(index, queries: Sequence[bytes], hc=None) -> None:
    """Raise :class:`OracleMismatch` on the first query where ``index`` disagrees with bisect."""
    oracle = OracleIndex(index.dataset)
    want_eq = oracle.lookup_eq_many(queries)
    want_lb = oracle.lower_bound_many(queries)
    checks = [("lookup_eq", index.lookup_eq_many(queries), want_eq),
              ("lower_bound", index.lower_bound_many(queries), want_lb)]
    if hc is not None:
        checks.append(("lookup_eq_hc", hc_mod.lookup_eq_hc_many(index, hc, queries)[0], want_eq))
    for name, got, want in checks:
        if got != want:
            i = next(j for j, (a, b) in enumerate(zip(got, want)) if a != b)
            raise OracleMismatch(f"{name}({queries[i]!r}) = {got[i]}, oracle says {want[i]}")


def _shards(queries: Sequence[bytes], threads: int) -> list[Sequence[bytes]]:
    step = -(-len(queries) // threads)
    return [queries[i:i + step] for i in range(0, len(queries), step)]


def time_batches(run: Callable[[Sequence[bytes]], object], queries: Sequence[bytes],
                 threads: int = 1, reps: int = REPETITIONS, min_ops: int = MIN_OPS) -> float:
    """Best-of-``reps`` nanoseconds per query over at least ``min_ops`` queries."""
    if not queries:
        return 0.0
    rounds = max(1, -(-min_ops // len(queries)))
    shards = _shards(queries, threads)
    best = float("inf")
    with ThreadPoolExecutor(max_workers=threads) as pool:
        for _ in range(reps):
            t0 = time.perf_counter_ns()
            for _ in range(rounds):
                if threads == 1:
                    run(queries)
                else:
                    list(pool.map(run, shards))
            best = min(best, (time.perf_counter_ns() - t0) / (rounds * len(queries)))
    return best


def time_build(dataset: Dataset, build: Callable[[], object], reps: int = REPETITIONS) -> float:
    best = float("inf")
    for _ in range(reps):
        t0 = time.perf_counter_ns()
        build()
        best = min(best, time.perf_counter_ns() - t0)
    return best / len(dataset)


def run_bench(dataset: Dataset, dataset_name: str, config: RssConfig, *, index_kind: str = "rss",
              hash_corrector: bool = False, hc_load=hc_mod.DEFAULT_LOAD,
              hc_probes: int = hc_mod.DEFAULT_PROBES, queries: Optional[Sequence[bytes]] = None,
              miss_rate: float = 0.0, threads: int = 1, seed: int = 0, backend: Optional[str] = None,
              reps: int = REPETITIONS, min_ops: int = MIN_OPS) -> BenchReport:
    if threads < 1:
        raise ValueError("threads must be positive")
    workload = "file" if queries is not None else f"shuffled members, miss_rate={miss_rate}"
    if queries is None:
        queries = make_workload(dataset, miss_rate, seed)
    queries = list(queries)

    hc = None
    if index_kind == "oracle":
        def build():
            return OracleIndex(dataset)
    elif index_kind == "rss":
        def build():
            ix = RssIndex.build(dataset, config, backend=backend)
            return ix, (hc_mod.build_hc(ix, hc_load, hc_probes) if hash_corrector else None)
    else:
        raise ValueError(f"unknown index kind {index_kind!r}")

    build_ns = time_build(dataset, build, reps)
    built = build()
    if index_kind == "rss":
        index, hc = built
        index.verify_error_bound()
        verify_against_oracle(index, queries, hc)
        memory = index.memory_bytes()
        backend_name = index.backend
    else:
        index = built
        memory = index.memory_bytes()
        backend_name = index.backend

    if hc is not None:
        def eq(qs):
            return hc_mod.lookup_eq_hc_many(index, hc, qs)
        members = [q for q, r in zip(queries, index.lookup_eq_many(queries)) if r is not None]
        hit_rate = round(hc_mod.fast_path_hit_rate(index, hc, members), 6) if members else 0.0
    else:
        eq = index.lookup_eq_many
        hit_rate = None

    lookup_ns = time_batches(eq, queries, threads, reps, min_ops)
    lb_ns = time_batches(index.lower_bound_many, queries, threads, reps, min_ops)
    echo = dict(asdict(config), index=index_kind, hash_corrector=hash_corrector,
                hc_load=str(hc_mod.as_load_fraction(hc_load)), hc_probes=hc_probes,
                threads=threads, miss_rate=miss_rate, queries=len(queries), workload=workload,
                backend=backend_name, seed=seed)
    return BenchReport(
        dataset_name=dataset_name,
        N=len(dataset),
        config=echo,
        build_ns_per_item=round(build_ns, 3),
        lookup_ns_mean=round(lookup_ns, 3),
        lower_bound_ns_mean=round(lb_ns, 3),
        index_bytes=memory["total_bytes"],
        hc_bytes=hc_mod.hc_memory_bytes(hc) if hc is not None else 0,
        fast_path_hit_rate=hit_rate,
        memory=memory,
    )
