"""Synthetic string corpora.

``uniform``       16 random lowercase alphanumerics; high-entropy leading bytes.
``prefix-heavy``  nearly every key extends one of eight long shared prefixes,
                  the adversarial shape of URL or file-path data.
``natural-ish``   space-separated words from a small vocabulary, headline-like.
"""

from __future__ import annotations

import random

KINDS = ("uniform", "prefix-heavy", "natural-ish")
ALNUM = "abcdefghijklmnopqrstuvwxyz0123456789"
N_PREFIXES = 8
DEFAULT_PREFIX_LEN = 64
PREFIX_SHARE = 0.97

VOCAB = """
the a of to in for on with at by from new report city state world market police
school council study health game team season win loses plan vote court judge
water fire storm rain snow road bridge park music art film show star night day
week year month local national early late best worst top first last big small
open close rise fall price tax budget bill law rule deal trade job work home
family child kids dog cat food wine beer coffee review guide tips ways how why
what when who where says warns finds calls asks gets makes takes gives shows
""".split()


def _uniform(rng: random.Random) -> str:
    return "".join(rng.choices(ALNUM, k=16))


def _prefixes(rng: random.Random, prefix_len: int) -> list[str]:
    out = []
    while len(out) < N_PREFIXES:
        host = "".join(rng.choices("abcdefghijklmnopqrstuvwxyz", k=10))
        head = f"http://www.{host}.com/"
        body = "".join(rng.choices(ALNUM + "/", k=max(0, prefix_len - len(head))))
        p = (head + body)[:prefix_len]
        if p not in out:
            out.append(p)
    return out


def generate(kind: str, n: int, seed: int, prefix_len: int = DEFAULT_PREFIX_LEN) -> list[bytes]:
    """``n`` distinct keys, sorted; identical arguments give identical output."""
    if kind not in KINDS:
        raise ValueError(f"unknown kind {kind!r}; choose from {KINDS}")
    if n < 1:
        raise ValueError("n must be at least 1")
    rng = random.Random(seed)
    if kind == "uniform":
        make = lambda: _uniform(rng)  # noqa: E731
    elif kind == "prefix-heavy":
        prefixes = _prefixes(rng, prefix_len)

        def make():
            if rng.random() < PREFIX_SHARE:
                return rng.choice(prefixes) + "".join(rng.choices(ALNUM, k=rng.randint(6, 20)))
            return "http://" + "".join(rng.choices(ALNUM + "./", k=rng.randint(12, 40)))
    else:
        def make():
            return " ".join(rng.choices(VOCAB, k=rng.randint(3, 9)))
    seen: set[str] = set()
    while len(seen) < n:
        seen.add(make())
    return sorted(s.encode("ascii") for s in seen)
