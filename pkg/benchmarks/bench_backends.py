"""Compare the compiled and pure-Python kernel backends on build and query speed.

    python3 benchmarks/bench_backends.py -n 200000 --kind prefix-heavy

Every backend is first checked against the bisect oracle on the same workload;
timings are best-of-``--reps`` nanoseconds per key (build) or per query.
"""

from __future__ import annotations

import argparse
import json

from rsspline import hash_corrector as hcm
from rsspline import kernels
from rsspline.bench import make_workload, time_batches, time_build, verify_against_oracle
from rsspline.gen import KINDS, generate
from rsspline.keyspace import validate_dataset
from rsspline.rss import RssConfig, RssIndex


def measure(name, ds, config, queries, reps, min_ops):
    build = lambda: RssIndex.build(ds, config, backend=name)  # noqa: E731
    ix = build()
    hc = hcm.build_hc(ix)
    verify_against_oracle(ix, queries, hc)
    return {
        "build_ns_per_key": round(time_build(ds, build, reps), 1),
        "hc_build_ns_per_key": round(time_build(ds, lambda: hcm.build_hc(ix), reps), 1),
        "lookup_eq_ns": round(time_batches(ix.lookup_eq_many, queries, 1, reps, min_ops), 1),
        "lookup_eq_hc_ns": round(time_batches(lambda qs: hcm.lookup_eq_hc_many(ix, hc, qs),
                                              queries, 1, reps, min_ops), 1),
        "lower_bound_ns": round(time_batches(ix.lower_bound_many, queries, 1, reps, min_ops), 1),
    }


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("-n", type=int, default=100_000)
    p.add_argument("--kind", choices=KINDS, default="uniform")
    p.add_argument("--k", type=int, default=16)
    p.add_argument("--error", type=int, default=127)
    p.add_argument("--miss-rate", type=float, default=0.0)
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--min-ops", type=int, default=100_000)
    args = p.parse_args(argv)

    ds = validate_dataset(generate(args.kind, args.n, seed=0))
    config = RssConfig(k=args.k, error=args.error)
    queries = make_workload(ds, args.miss_rate, seed=1)
    results = {name: measure(name, ds, config, queries, args.reps, args.min_ops)
               for name in kernels.available()}
    if len(results) == 2:
        py, cy = results["python"], results["cython"]
        results["speedup"] = {key: round(py[key] / cy[key], 1) for key in py if cy[key]}
    print(json.dumps({"kind": args.kind, "N": args.n, "k": args.k, "error": args.error,
                      "backends": results}, indent=2))


if __name__ == "__main__":
    main()
