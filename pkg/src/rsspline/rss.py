"""RadixStringSpline: a tree of radix splines, each modelling one K-byte chunk."""

from __future__ import annotations

from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Iterator, Optional, Sequence

from rsspline import kernels
from rsspline.keyspace import (Dataset, EmptyDataset, check_k, chunk_exhausted, chunk_to_bytes,
                               extract_chunk)
from rsspline.spline import RADIX_CEIL_BITS, RADIX_FLOOR_BITS, SplineModel

MAX_ERROR = 127

# Declared on-disk layout used for memory accounting.
CHILD_REF_BYTES = 4
KNOT_RANK_BYTES = 8
RADIX_ENTRY_BYTES = 4
NODE_HEADER_BYTES = 32


@dataclass(frozen=True)
class RssConfig:
    k: int = 16
    error: int = MAX_ERROR
    radix_floor: int = RADIX_FLOOR_BITS
    radix_ceil: int = RADIX_CEIL_BITS
    refit: bool = False

    def __post_init__(self):
        check_k(self.k)
        if not 0 <= self.error <= MAX_ERROR:
            raise ValueError(f"error bound must be in [0, {MAX_ERROR}], got {self.error}")
        if not 1 <= self.radix_floor <= self.radix_ceil:
            raise ValueError("need 1 <= radix_floor <= radix_ceil")

    @property
    def radix_range(self) -> tuple[int, int]:
        """Radix bit bounds, capped at the chunk key width."""
        bits = 8 * self.k
        return min(self.radix_floor, bits), min(self.radix_ceil, bits)


@dataclass(eq=False)
class RssNode:
    lo: int
    hi: int
    depth: int
    spline: SplineModel
    n_points: int
    redirect_keys: tuple[int, ...] = ()
    children: tuple["RssNode", ...] = ()
    node_id: int = field(default=-1)

    @property
    def redirector(self) -> list[tuple[int, "RssNode"]]:
        return list(zip(self.redirect_keys, self.children))

    @property
    def level(self) -> int:
        return self.depth + 1

    def walk(self) -> Iterator["RssNode"]:
        """Preorder traversal."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))


class RssIndex:
    """Immutable learned index over a :class:`Dataset`.

    Queries run on a flattened copy of the tree inside the selected kernel
    backend; the ``RssNode`` objects are kept for inspection and reporting.
    """

    def __init__(self, dataset: Dataset, config: RssConfig, root: RssNode, backend: str | None = None):
        self.dataset = dataset
        self.config = config
        self.root = root
        self.nodes = list(root.walk())
        for i, node in enumerate(self.nodes):
            node.node_id = i
        self._kernels = kernels.get(backend)
        self._tree = self._kernels.Tree(dataset.keys, self._flat_nodes(), config.k, config.error)

    @property
    def backend(self) -> str:
        return self._kernels.NAME

    @property
    def tree(self):
        return self._tree

    @classmethod
    def build(cls, dataset: Dataset, config: RssConfig | None = None,
              backend: str | None = None) -> "RssIndex":
        config = config or RssConfig()
        if len(dataset) == 0:
            raise EmptyDataset()
        kern = kernels.get(backend)
        keys = dataset.keys
        root, runs = _build_node(kern, keys, 0, len(keys), 0, config)
        pending = [(root, runs)]
        while pending:
            node, runs = pending.pop()
            kids = []
            for _, first, last in runs:
                _check_not_exhausted(keys, first, last, node.depth + 1, config.k)
                child, child_runs = _build_node(kern, keys, first, last + 1, node.depth + 1, config)
                kids.append(child)
                pending.append((child, child_runs))
            node.children = tuple(kids)
        return cls(dataset, config, root, backend=kern.NAME)

    def _flat_nodes(self):
        out = []
        for node in self.nodes:
            s = node.spline
            out.append((node.lo, node.hi, node.depth, s.knot_keys, s.knot_ranks, s.radix_bits,
                        s.radix_table, node.redirect_keys, [c.node_id for c in node.children]))
        return out

    def __len__(self) -> int:
        return len(self.dataset)

    def predict_rank(self, q: bytes) -> tuple[RssNode, int]:
        node_id, p = self._tree.predict_rank(q)
        return self.nodes[node_id], p

    def search_window(self, q: bytes) -> tuple[int, int, int]:
        """``(p, left, right)``: the estimate and the inclusive window searched for members."""
        node, p = self.predict_rank(q)
        e = self.config.error
        return p, max(node.lo, p - e), min(node.hi - 1, p + e)

    def lookup_eq(self, q: bytes) -> Optional[int]:
        return self._tree.lookup_eq(q)

    def lower_bound(self, q: bytes) -> int:
        return self._tree.lower_bound(q)

    def lookup_eq_many(self, qs: Sequence[bytes]) -> list[Optional[int]]:
        return self._tree.lookup_eq_many(qs)

    def lower_bound_many(self, qs: Sequence[bytes]) -> list[int]:
        return self._tree.lower_bound_many(qs)

    def max_error(self) -> int:
        """Largest ``|predicted - true rank|`` over every dataset key."""
        worst = 0
        predict = self._tree.predict_rank
        for r, key in enumerate(self.dataset.keys):
            d = abs(predict(key)[1] - r)
            if d > worst:
                worst = d
        return worst

    def verify_error_bound(self) -> None:
        worst = self.max_error()
        if worst > self.config.error:
            raise AssertionError(f"prediction error {worst} exceeds bound {self.config.error}")

    @property
    def max_depth(self) -> int:
        return max(node.level for node in self.nodes)

    def stats(self) -> dict:
        levels: dict[int, dict] = {}
        for node in self.nodes:
            lv = levels.setdefault(node.level, {
                "level": node.level, "nodes": 0, "keys": 0, "redirector_entries": 0,
                "spline_knots": 0, "radix_bits": Counter(),
            })
            lv["nodes"] += 1
            lv["keys"] += node.hi - node.lo
            lv["redirector_entries"] += len(node.redirect_keys)
            lv["spline_knots"] += len(node.spline)
            lv["radix_bits"][node.spline.radix_bits] += 1
        per_level = []
        for level in sorted(levels):
            lv = levels[level]
            lv["radix_bits"] = {str(b): c for b, c in sorted(lv["radix_bits"].items())}
            per_level.append(lv)
        n_nodes = len(self.nodes)
        return {
            "n_keys": len(self.dataset),
            "config": asdict(self.config),
            "nodes": n_nodes,
            "max_depth": self.max_depth,
            "mean_depth": round(sum(n.level for n in self.nodes) / n_nodes, 6),
            "redirector_entries": sum(len(n.redirect_keys) for n in self.nodes),
            "root_redirector": [chunk_to_bytes(c, self.config.k).hex() for c in self.root.redirect_keys],
            "spline_knots": sum(len(n.spline) for n in self.nodes),
            "levels": per_level,
        }

    def memory_bytes(self) -> dict:
        """Bytes of the declared layout, excluding the key strings themselves."""
        k = self.config.k
        headers = NODE_HEADER_BYTES * len(self.nodes)
        redirector = sum(len(n.redirect_keys) for n in self.nodes) * (k + CHILD_REF_BYTES)
        knots = sum(len(n.spline) for n in self.nodes) * (k + KNOT_RANK_BYTES)
        radix = sum(len(n.spline.radix_table) for n in self.nodes) * RADIX_ENTRY_BYTES
        return {
            "node_header_bytes": headers,
            "redirector_bytes": redirector,
            "spline_knot_bytes": knots,
            "radix_table_bytes": radix,
            "total_bytes": headers + redirector + knots + radix,
        }


def _build_node(kern, keys, lo, hi, depth, config: RssConfig):
    """Fit one node; returns it with the ``(chunk, first, last)`` runs it redirects."""
    kk, kr, rbits, table, n_points, redirects = kern.build_node(
        keys, lo, hi, depth, config.k, config.error, *config.radix_range, config.refit)
    spline = SplineModel(tuple(kk), tuple(kr), config.error, rbits, tuple(table), 8 * config.k)
    return RssNode(lo, hi, depth, spline, n_points, tuple(c for c, _, _ in redirects)), redirects


def _check_not_exhausted(keys, first, last, depth, k):
    # the longest key of a run sorts last; if even it has no bytes left the
    # run holds duplicate keys and recursion could never separate them
    if chunk_exhausted(keys[last], depth, k):
        raise RuntimeError(
            f"keys {first}..{last} are identical through byte {depth * k}; dataset has duplicates")


def chunk_runs(keys: Sequence[bytes], lo: int, hi: int, depth: int, k: int) -> list[tuple[int, int, int]]:
    """``(chunk, first, last)`` for every distinct chunk value in ranks ``[lo, hi)``."""
    runs: list[tuple[int, int, int]] = []
    for r in range(lo, hi):
        c = extract_chunk(keys[r], depth, k)
        if runs and runs[-1][0] == c:
            runs[-1] = (c, runs[-1][1], r)
        else:
            runs.append((c, r, r))
    return runs
