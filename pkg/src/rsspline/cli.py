"""Command-line front-end: ``rss gen | build | bench | query``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys

from rsspline import hash_corrector as hc_mod
from rsspline.bench import OracleMismatch, run_bench
from rsspline.gen import DEFAULT_PREFIX_LEN, KINDS, generate
from rsspline.keyspace import DatasetError, read_dataset, split_records, write_dataset
from rsspline.rss import RssConfig, RssIndex

log = logging.getLogger("rsspline")

EXIT_INVALID = 2
EXIT_MISMATCH = 3


def _add_index_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("input", help="newline-delimited sorted key file")
    p.add_argument("--k", type=int, default=16, help="chunk width in bytes (default 16)")
    p.add_argument("--error", type=int, default=127, help="error bound 0..127 (default 127)")
    p.add_argument("--radix-floor", type=int, default=6)
    p.add_argument("--radix-ceil", type=int, default=20)
    p.add_argument("--refit", action="store_true",
                   help="refit each node's spline after removing redirected runs")
    p.add_argument("--sort-dedup", action="store_true", help="sort and deduplicate input first")
    p.add_argument("--hash-corrector", action="store_true")
    p.add_argument("--hc-load", type=float, default=0.6667)
    p.add_argument("--hc-probes", type=int, default=4)
    p.add_argument("--backend", choices=["auto", "cython", "python"], default="auto")
    p.add_argument("--json", metavar="PATH", help="also write the report to PATH")


def _config(args) -> RssConfig:
    return RssConfig(k=args.k, error=args.error, radix_floor=args.radix_floor,
                     radix_ceil=args.radix_ceil, refit=args.refit)


def _emit(report: dict, path: str | None) -> None:
    text = json.dumps(report, indent=2, sort_keys=True)
    print(text)
    if path:
        with open(path, "w") as fh:
            fh.write(text + "\n")


def _name(path: str) -> str:
    return os.path.splitext(os.path.basename(path))[0]


def _build(args):
    dataset = read_dataset(args.input, sort_dedup=args.sort_dedup)
    index = RssIndex.build(dataset, _config(args), backend=args.backend)
    index.verify_error_bound()
    hc = hc_mod.build_hc(index, args.hc_load, args.hc_probes) if args.hash_corrector else None
    return dataset, index, hc


def cmd_gen(args) -> int:
    keys = generate(args.kind, args.n, args.seed, prefix_len=args.prefix_len)
    write_dataset(args.out, keys)
    log.info("wrote %d %s keys to %s", len(keys), args.kind, args.out)
    return 0


def cmd_build(args) -> int:
    dataset, index, hc = _build(args)
    report = {
        "dataset_name": _name(args.input),
        "N": len(dataset),
        "stats": index.stats(),
        "memory": index.memory_bytes(),
        "max_error": index.max_error(),
        "hash_corrector": hc.report() if hc is not None else None,
    }
    _emit(report, args.json)
    return 0


def cmd_bench(args) -> int:
    dataset = read_dataset(args.input, sort_dedup=args.sort_dedup)
    queries = None
    if args.queries:
        with open(args.queries, "rb") as fh:
            queries = split_records(fh.read())
    report = run_bench(
        dataset, _name(args.input), _config(args), index_kind=args.index,
        hash_corrector=args.hash_corrector, hc_load=args.hc_load, hc_probes=args.hc_probes,
        queries=queries, miss_rate=args.miss_rate, threads=args.threads, seed=args.seed,
        backend=args.backend, reps=args.reps, min_ops=args.min_ops)
    _emit(report.to_dict(), args.json)
    return 0


def cmd_query(args) -> int:
    _, index, hc = _build(args)
    q = os.fsencode(args.q)
    if args.mode == "lb":
        print(index.lower_bound(q))
        return 0
    r = hc_mod.lookup_eq_hc(index, hc, q) if hc is not None else index.lookup_eq(q)
    print("absent" if r is None else r)
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rss", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="write a synthetic sorted key file")
    p.add_argument("--kind", choices=KINDS, default="uniform")
    p.add_argument("-n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--prefix-len", type=int, default=DEFAULT_PREFIX_LEN)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("build", help="build the index and print stats and memory as JSON")
    _add_index_flags(p)
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("bench", help="verify against the oracle, then time build and queries")
    _add_index_flags(p)
    p.add_argument("--index", choices=["rss", "oracle"], default="rss")
    p.add_argument("--queries", help="query file; default is the shuffled member keys")
    p.add_argument("--miss-rate", type=float, default=0.0)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--reps", type=int, default=3)
    p.add_argument("--min-ops", type=int, default=100_000)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("query", help="answer one query")
    _add_index_flags(p)
    p.add_argument("q")
    p.add_argument("--mode", choices=["eq", "lb"], default="eq")
    p.set_defaults(func=cmd_query)
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except DatasetError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OracleMismatch as exc:
        print(f"error: oracle mismatch: {exc}", file=sys.stderr)
        return EXIT_MISMATCH
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
