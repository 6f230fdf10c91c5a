"""Acceptance criteria, each run at its stated tolerance.

Every criterion is one test; the terminal summary (see ``conftest.py``) prints
one PASSED/FAILED line per criterion.  Large corpora are generated once per
module and shared between criteria.
"""

import json
import math
import random
from functools import lru_cache

import pytest

from rsspline import hash_corrector as hcm
from rsspline.bench import non_members
from rsspline.cli import main as cli_main
from rsspline.gen import generate
from rsspline.keyspace import validate_dataset, write_dataset
from rsspline.oracle import OracleIndex
from rsspline.rss import RssConfig, RssIndex, chunk_runs

from conftest import TOY_KEYS

pytestmark = pytest.mark.slow

QUERIES_PER_SIDE = 100_000

# (kind, N, seed, config): 3 kinds x {1e3, 1e3, 1e4, 1e4, 1e5, 1e6} plus two more at 1e5
CORPORA = [
    (kind, n, seed, cfg)
    for kind in ("uniform", "prefix-heavy", "natural-ish")
    for n, seed, cfg in [
        (10**3, 1, RssConfig(k=8, error=0)),
        (10**3, 2, RssConfig(k=16, error=7)),
        (10**4, 3, RssConfig(k=8, error=31)),
        (10**4, 4, RssConfig(k=16, error=127)),
        (10**5, 5, RssConfig(k=8, error=127)),
        (10**6, 6, RssConfig()),
    ]
] + [("uniform", 10**5, 7, RssConfig(k=16, error=3)),
     ("natural-ish", 10**5, 8, RssConfig(k=16, error=63))]


@lru_cache(maxsize=None)
def dataset(kind, n, seed):
    return validate_dataset(generate(kind, n, seed))


def report(line):
    print(f"\n    {line}")


def member_and_non_member_queries(ds, seed):
    rng = random.Random(seed)
    members = rng.choices(ds.keys, k=QUERIES_PER_SIDE)
    # edited members sit next to real keys; raw random bytes (NUL included) probe odd corners
    misses = non_members(ds, QUERIES_PER_SIDE * 9 // 10, rng)
    present = set(ds.keys)
    while len(misses) < QUERIES_PER_SIDE:
        q = bytes(rng.randrange(256) for _ in range(rng.randint(0, 24)))
        if q not in present:
            misses.append(q)
    return members + misses


@pytest.fixture(scope="module")
def oracle_runs():
    """Mismatch counts of every query path against bisect, per criterion-1 corpus."""
    rows = []
    for kind, n, seed, cfg in CORPORA:
        ds = dataset(kind, n, seed)
        ix = RssIndex.build(ds, cfg)
        hc = hcm.build_hc(ix)
        qs = member_and_non_member_queries(ds, seed)
        oracle = OracleIndex(ds)
        want_eq, want_lb = oracle.lookup_eq_many(qs), oracle.lower_bound_many(qs)
        got_eq, got_lb = ix.lookup_eq_many(qs), ix.lower_bound_many(qs)
        got_hc, _ = hcm.lookup_eq_hc_many(ix, hc, qs)
        rows.append({
            "corpus": f"{kind}/{n}/seed{seed}/k{cfg.k}/e{cfg.error}",
            "queries": len(qs),
            "eq": sum(a != b for a, b in zip(got_eq, want_eq)),
            "lb": sum(a != b for a, b in zip(got_lb, want_lb)),
            "hc": sum(a != b for a, b in zip(got_hc, want_eq)),
        })
    return rows


def test_criterion_1(oracle_runs):
    """lookup_eq and lower_bound agree with bisect on 20 corpora, 2x10^5 queries each."""
    assert len(oracle_runs) == 20
    assert {n for _, n, _, _ in CORPORA} == {10**3, 10**4, 10**5, 10**6}
    for row in oracle_runs:
        assert row["queries"] == 2 * QUERIES_PER_SIDE
    bad = [r for r in oracle_runs if r["eq"] or r["lb"]]
    total = sum(r["queries"] for r in oracle_runs)
    report(f"criterion 1: {total} queries over {len(oracle_runs)} corpora, "
           f"{sum(r['eq'] + r['lb'] for r in oracle_runs)} mismatches")
    assert not bad, bad


@pytest.mark.parametrize("k", [8, 16])
@pytest.mark.parametrize("error", [0, 7, 127])
def test_criterion_2(k, error):
    """|predicted - true rank| <= E for every key, by exhaustive sweep."""
    worst = 0
    violations = 0
    for kind in ("uniform", "prefix-heavy", "natural-ish"):
        ds = dataset(kind, 10**5, 5)
        ix = RssIndex.build(ds, RssConfig(k=k, error=error))
        predict = ix.tree.predict_rank
        for r, key in enumerate(ds.keys):
            d = abs(predict(key)[1] - r)
            worst = max(worst, d)
            violations += d > error
    report(f"criterion 2: k={k} E={error}: worst error {worst}, {violations} violations")
    assert violations == 0


def run_dataset(e, lengths):
    """Chunk runs of the given lengths on evenly spaced chunks (K=8), so the
    midpoint spline through them is a single straight line."""
    keys = []
    for i, length in enumerate(lengths):
        head = b"aaaaaa" + bytes([0x41 + i // 26, 0x61 + i % 26])
        keys += [head + b"%03d" % j for j in range(length)]
    return validate_dataset(keys)


@pytest.mark.parametrize("error", [0, 3])
def test_criterion_3(error):
    """Runs of 2E+2 keys are always redirected; collinear runs of 2E+1 stay in the node."""
    cfg = RssConfig(k=8, error=error)
    long_run, short_run = 2 * error + 2, 2 * error + 1

    ix = RssIndex.build(run_dataset(error, [short_run] * 40), cfg)
    assert ix.root.redirect_keys == ()

    ix = RssIndex.build(run_dataset(error, [long_run] * 40), cfg)
    assert len(ix.root.redirect_keys) == 40

    # irregular mix of run lengths: the spline is no longer straight, but every
    # run longer than 2E+1 must still be redirected
    rng = random.Random(error)
    forced = checked = 0
    for trial in range(30):
        lengths = [rng.choice([1, 1, 2, short_run, long_run, long_run + 5]) for _ in range(60)]
        ix = RssIndex.build(run_dataset(error, lengths), cfg)
        redirected = set(ix.root.redirect_keys)
        for c, first, last in chunk_runs(ix.dataset.keys, 0, len(ix.dataset), 0, 8):
            if last - first + 1 >= long_run:
                checked += 1
                forced += c in redirected
    report(f"criterion 3: E={error}: {forced}/{checked} long runs redirected")
    assert forced == checked


def test_criterion_4(tmp_path, capsys):
    """Toy dataset, K=2, E=0: exactly three nodes, root redirector {ab, cd}."""
    path = tmp_path / "toy.txt"
    write_dataset(path, TOY_KEYS)
    assert cli_main(["build", str(path), "--k", "2", "--error", "0"]) == 0
    stats = json.loads(capsys.readouterr().out)["stats"]
    roots = [bytes.fromhex(h) for h in stats["root_redirector"]]
    report(f"criterion 4: nodes={stats['nodes']} root redirector={roots}")
    assert stats["nodes"] == 3
    assert roots == [b"ab", b"cd"]


def test_criterion_5(oracle_runs):
    """HC lookups match plain lookups; hit rate >= 0.90 on 10^6 uniform keys; ceil(1.5N) bytes."""
    hc_bad = [r for r in oracle_runs if r["hc"]]
    ds = dataset("uniform", 10**6, 6)
    ix = RssIndex.build(ds, RssConfig())
    hc = hcm.build_hc(ix, load=hcm.DEFAULT_LOAD, probes=4)
    rate = hcm.fast_path_hit_rate(ix, hc, ds.keys)
    size = hcm.hc_memory_bytes(hc)
    report(f"criterion 5: {sum(r['hc'] for r in oracle_runs)} HC mismatches, "
           f"hit rate {rate:.4f}, {size} bytes for N={len(ds)}")
    assert not hc_bad, hc_bad
    assert rate >= 0.90
    assert size == math.ceil(1.5 * len(ds))
    assert hcm.hc_memory_bytes(hcm.build_hc(ix, load=0.6667)) == math.ceil(1.5 * len(ds))


def test_criterion_6():
    """Prefix-heavy, 10^6 keys: index bytes at most 10% of raw key bytes."""
    ds = dataset("prefix-heavy", 10**6, 6)
    ix = RssIndex.build(ds, RssConfig())
    index_bytes = ix.memory_bytes()["total_bytes"]
    raw = ds.raw_bytes()
    report(f"criterion 6: index {index_bytes} B vs raw {raw} B ({index_bytes / raw:.2%})")
    assert index_bytes <= 0.10 * raw


def test_criterion_7(tmp_path, capsys):
    """Two builds of the same file with the same flags print byte-identical JSON."""
    path = tmp_path / "d.txt"
    write_dataset(path, dataset("natural-ish", 10**5, 5).keys)
    outs, files = [], []
    for i in range(2):
        dest = tmp_path / f"r{i}.json"
        flags = ["build", str(path), "--k", "8", "--error", "15", "--hash-corrector", "--json", str(dest)]
        assert cli_main(flags) == 0
        outs.append(capsys.readouterr().out)
        files.append(dest.read_bytes())
    report(f"criterion 7: {len(outs[0])} bytes of JSON, identical={outs[0] == outs[1]}")
    assert outs[0] == outs[1]
    assert files[0] == files[1]


def test_criterion_8():
    """64-byte shared prefixes with K=16: depth <= 5 and within 1 of ceil(64/16) + 1."""
    prefix_len, k = 64, 16
    ds = dataset("prefix-heavy", 10**6, 6)
    assert sum(key.startswith(b"http://www.") for key in ds.keys) > 0.95 * len(ds)
    ix = RssIndex.build(ds, RssConfig(k=k))
    predicted = math.ceil(prefix_len / k) + 1
    report(f"criterion 8: max depth {ix.max_depth}, predicted {predicted}")
    assert ix.max_depth <= 5
    assert abs(ix.max_depth - predicted) <= 1
