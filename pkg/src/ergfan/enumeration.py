"""Exhaustive enumeration of labeled simple graphs and the induced measure
over an integer statistic vector.

All counting is exact: the histogram of statistic vectors is accumulated in
64-bit integers over all 2**C(g,2) labeled graphs on g nodes.  The sweep
fixes the first p edge variables (one partition per assignment) and walks
the remaining edges in reflected Gray-code order so exactly one edge flips
per step; partitions are processed independently and merged by integer
addition, so the result does not depend on the worker count.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from io import StringIO
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

from . import _kernels

MIN_NODES = 3
MAX_NODES = 9
MAX_STATS = 3
DEFAULT_CELL_BUDGET = 1 << 24

_KIND_CODES = {
    "edges": _kernels.KIND_EDGES,
    "triangles": _kernels.KIND_TRIANGLES,
    "k_star": _kernels.KIND_KSTAR,
    "degree_count": _kernels.KIND_DEGREE_COUNT,
}


class EnumerationError(ValueError):
    """Invalid enumeration request (node count, statistics, or cell budget)."""


@dataclass(frozen=True)
class StatDescriptor:
    """An integer-valued graph statistic: edges, triangles, k_star(k), or
    degree_count(k)."""

    kind: str
    k: int | None = None

    def __post_init__(self):
        if self.kind not in _KIND_CODES:
            raise EnumerationError(f"unknown statistic kind {self.kind!r}")
        if self.kind == "k_star":
            if self.k is None or self.k < 2:
                raise EnumerationError("k_star requires k >= 2")
        elif self.kind == "degree_count":
            if self.k is None or self.k < 0:
                raise EnumerationError("degree_count requires k >= 0")
        elif self.k is not None:
            raise EnumerationError(f"{self.kind} takes no parameter")

    def validate_for(self, g: int) -> None:
        if self.kind == "k_star" and not 2 <= self.k <= g - 1:
            raise EnumerationError(f"k_star({self.k}) needs 2 <= k <= g-1 for g={g}")
        if self.kind == "degree_count" and not 0 <= self.k <= g - 1:
            raise EnumerationError(
                f"degree_count({self.k}) needs 0 <= k <= g-1 for g={g}"
            )

    def max_value(self, g: int) -> int:
        """Largest attainable value on any graph with g nodes."""
        if self.kind == "edges":
            return g * (g - 1) // 2
        if self.kind == "triangles":
            return math.comb(g, 3)
        if self.kind == "k_star":
            return g * math.comb(g - 1, self.k)
        return g

    @property
    def label(self) -> str:
        if self.k is None:
            return self.kind
        return f"{self.kind}:{self.k}"

    @classmethod
    def parse(cls, text: str) -> "StatDescriptor":
        """Parse labels like 'edges' or 'k_star:2'."""
        kind, _, param = text.strip().partition(":")
        if param:
            try:
                return cls(kind, int(param))
            except ValueError as exc:
                raise EnumerationError(f"bad statistic parameter in {text!r}") from exc
        return cls(kind)


def edges() -> StatDescriptor:
    return StatDescriptor("edges")


def triangles() -> StatDescriptor:
    return StatDescriptor("triangles")


def k_star(k: int) -> StatDescriptor:
    return StatDescriptor("k_star", k)


def degree_count(k: int) -> StatDescriptor:
    return StatDescriptor("degree_count", k)


@dataclass(frozen=True)
class GraphState:
    """Immutable labeled simple graph with incrementally maintainable
    summaries: adjacency bitsets, degree vector, edge and triangle counts."""

    g: int
    rows: tuple[int, ...]
    degrees: tuple[int, ...]
    edge_count: int
    triangle_count: int

    @classmethod
    def empty(cls, g: int) -> "GraphState":
        if not MIN_NODES <= g <= MAX_NODES:
            raise EnumerationError(f"node count must be in [{MIN_NODES}, {MAX_NODES}]")
        return cls(g, (0,) * g, (0,) * g, 0, 0)

    @classmethod
    def from_edges(cls, g: int, edge_list: Iterable[tuple[int, int]]) -> "GraphState":
        state = cls.empty(g)
        for u, v in edge_list:
            state = flip_edge(state, u, v)
        return state

    def has_edge(self, u: int, v: int) -> bool:
        return bool((self.rows[u] >> v) & 1)


def flip_edge(state: GraphState, u: int, v: int) -> GraphState:
    """Toggle the edge (u, v), updating degrees, edge count, and triangle
    count via the common-neighbor bitset intersection."""
    if u == v:
        raise EnumerationError("cannot flip a loop")
    rows = list(state.rows)
    rows[u] ^= 1 << v
    rows[v] ^= 1 << u
    sgn = 1 if (rows[u] >> v) & 1 else -1
    common = (rows[u] & rows[v]).bit_count()
    degrees = list(state.degrees)
    degrees[u] += sgn
    degrees[v] += sgn
    return GraphState(
        state.g,
        tuple(rows),
        tuple(degrees),
        state.edge_count + sgn,
        state.triangle_count + sgn * common,
    )


def eval_stat(desc: StatDescriptor, state: GraphState) -> int:
    """Exact value of the statistic on the graph."""
    desc.validate_for(state.g)
    if desc.kind == "edges":
        return state.edge_count
    if desc.kind == "triangles":
        return state.triangle_count
    if desc.kind == "k_star":
        return sum(math.comb(d, desc.k) for d in state.degrees)
    return sum(1 for d in state.degrees if d == desc.k)


class InducedMeasure:
    """Exact counts of labeled graphs per integer statistic vector t,
    stored densely over the bounding lattice box [0, max(stat_i)]."""

    def __init__(self, g: int, stats: Sequence[StatDescriptor], hist: np.ndarray):
        self.g = g
        self.stats = tuple(stats)
        if hist.ndim != len(self.stats):
            raise EnumerationError("histogram rank must match statistic count")
        if hist.dtype != np.int64:
            hist = hist.astype(np.int64)
        if (hist < 0).any():
            raise EnumerationError("negative count in histogram")
        self.hist = hist
        self.dims = hist.shape
        self.total = int(hist.sum())

    @property
    def k(self) -> int:
        return len(self.stats)

    @classmethod
    def from_points(
        cls,
        counts: Mapping[tuple[int, ...], int],
        g: int,
        stats: Sequence[StatDescriptor],
    ) -> "InducedMeasure":
        """Build a measure from an explicit point -> count mapping (used by
        deserialization and synthetic test measures)."""
        stats = tuple(stats)
        k = len(stats)
        dims = [0] * k
        for t in counts:
            if len(t) != k:
                raise EnumerationError("point dimension mismatch")
            for a, ta in enumerate(t):
                if ta < 0:
                    raise EnumerationError("negative statistic value")
                dims[a] = max(dims[a], ta + 1)
        hist = np.zeros(tuple(dims), dtype=np.int64)
        for t, c in counts.items():
            hist[t] = c
        return cls(g, stats, hist)

    def count(self, t: Sequence[int]) -> int:
        t = tuple(t)
        if any(ta < 0 or ta >= d for ta, d in zip(t, self.dims)):
            return 0
        return int(self.hist[t])

    def support_items(self) -> Iterator[tuple[tuple[int, ...], int]]:
        """(t, count) pairs with count > 0, lexicographically sorted by t."""
        flat = self.hist.reshape(-1)
        for j in np.flatnonzero(flat):
            yield np.unravel_index(j, self.dims), int(flat[j])

    def support_points(self) -> list[tuple[int, ...]]:
        return [tuple(int(x) for x in t) for t, _ in self.support_items()]

    def positive_counts(self) -> list[int]:
        flat = self.hist.reshape(-1)
        return [int(c) for c in flat[flat > 0]]

    def n_support(self) -> int:
        return int((self.hist > 0).sum())

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, InducedMeasure)
            and self.g == other.g
            and self.stats == other.stats
            and self.dims == other.dims
            and bool((self.hist == other.hist).all())
        )


def _pick_partition_bits(m: int, workers: int) -> int:
    p = 0
    while (1 << p) < 4 * workers:
        p += 1
    return min(p, m)


def enumerate_measure(
    g: int,
    stats: Sequence[StatDescriptor],
    workers: int = 1,
    cell_budget: int = DEFAULT_CELL_BUDGET,
) -> InducedMeasure:
    """Enumerate all 2**C(g,2) labeled graphs on g nodes and return the
    exact induced measure over the given statistics.

    The sweep is partitioned over assignments of the first p edges with
    2**p >= 4*workers; each partition is walked in Gray-code order and the
    per-partition histograms are merged by exact integer addition, so the
    result is bit-identical for any worker count.
    """
    if not MIN_NODES <= g <= MAX_NODES:
        raise EnumerationError(
            f"enumeration infeasible: need {MIN_NODES} <= g <= {MAX_NODES}, got {g}"
        )
    stats = tuple(stats)
    if not 1 <= len(stats) <= MAX_STATS:
        raise EnumerationError(f"need 1..{MAX_STATS} statistics, got {len(stats)}")
    for d in stats:
        d.validate_for(g)
    if workers < 1:
        raise EnumerationError("workers must be >= 1")

    dims = tuple(d.max_value(g) + 1 for d in stats)
    cells = math.prod(dims)
    if cells > cell_budget:
        raise EnumerationError(
            f"lattice box of {cells} cells exceeds the cell budget {cell_budget}"
        )

    m = g * (g - 1) // 2
    pairs = [(i, j) for i in range(g) for j in range(i + 1, g)]
    ei = np.array([i for i, _ in pairs], dtype=np.int64)
    ej = np.array([j for _, j in pairs], dtype=np.int64)
    p = _pick_partition_bits(m, workers)

    kinds = np.array([_KIND_CODES[d.kind] for d in stats], dtype=np.int64)
    kparam = np.array([d.k if d.k is not None else 0 for d in stats], dtype=np.int64)
    ck = np.zeros((len(stats), g + 1), dtype=np.int64)
    for s, d in enumerate(stats):
        if d.kind == "k_star":
            for deg in range(g + 1):
                ck[s, deg] = math.comb(deg, d.k)
    strides = np.zeros(len(stats), dtype=np.int64)
    acc = 1
    for s in range(len(stats) - 1, -1, -1):
        strides[s] = acc
        acc *= dims[s]
    pop = _kernels.popcount_table()

    n_parts = 1 << p
    bounds = [n_parts * w // workers for w in range(workers + 1)]
    chunks = [(lo, hi) for lo, hi in zip(bounds, bounds[1:]) if lo < hi]

    def run_chunk(lo: int, hi: int) -> np.ndarray:
        part_hist = np.zeros(cells, dtype=np.int64)
        _kernels.gray_sweep(
            g, ei, ej, p, lo, hi, kinds, kparam, ck, strides, pop, part_hist
        )
        return part_hist

    if len(chunks) == 1:
        flat = run_chunk(*chunks[0])
    else:
        with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
            parts = list(pool.map(lambda c: run_chunk(*c), chunks))
        flat = parts[0]
        for other in parts[1:]:
            flat += other

    measure = InducedMeasure(g, stats, flat.reshape(dims))
    if measure.total != 1 << m:
        raise EnumerationError(
            f"count overflow or kernel defect: total {measure.total} != 2**{m}"
        )
    return measure


def measure_quantiles(m: InducedMeasure, q: float) -> int:
    """Empirical quantile of the positive counts, lower (left-continuous)
    convention: the smallest value v with F(v) >= q."""
    if not 0 <= q <= 1:
        raise EnumerationError("quantile level must be in [0, 1]")
    vals = sorted(m.positive_counts())
    if not vals:
        raise EnumerationError("empty measure")
    idx = max(0, math.ceil(q * len(vals)) - 1)
    return vals[idx]


def measure_quantiles_midpoint(m: InducedMeasure, q: float) -> float:
    """Empirical quantile with midpoint positions (i - 1/2)/n and linear
    interpolation (MATLAB's default); this is the convention behind the
    published census figures this toolkit reproduces."""
    if not 0 <= q <= 1:
        raise EnumerationError("quantile level must be in [0, 1]")
    vals = sorted(m.positive_counts())
    if not vals:
        raise EnumerationError("empty measure")
    n = len(vals)
    pos = q * n + 0.5
    if pos <= 1:
        return float(vals[0])
    if pos >= n:
        return float(vals[-1])
    j = math.floor(pos)
    frac = pos - j
    return vals[j - 1] * (1 - frac) + vals[j] * frac


def measure_to_csv(m: InducedMeasure) -> str:
    """CSV serialization: header t1,...,tk,count; rows lex-sorted by t."""
    out = StringIO()
    header = ",".join(f"t{i + 1}" for i in range(m.k))
    out.write(f"{header},count\n")
    for t, c in m.support_items():
        out.write(",".join(str(int(x)) for x in t) + f",{c}\n")
    return out.getvalue()


def measure_from_csv(
    text: str, g: int, stats: Sequence[StatDescriptor]
) -> InducedMeasure:
    lines = [ln for ln in text.strip().splitlines() if ln]
    counts: dict[tuple[int, ...], int] = {}
    for ln in lines[1:]:
        parts = ln.split(",")
        counts[tuple(int(x) for x in parts[:-1])] = int(parts[-1])
    return InducedMeasure.from_points(counts, g, stats)


def measure_to_json(m: InducedMeasure) -> str:
    doc = {
        "g": m.g,
        "stats": [{"kind": d.kind, "k": d.k} for d in m.stats],
        "total": m.total,
        "rows": [[*map(int, t), c] for t, c in m.support_items()],
    }
    return json.dumps(doc, separators=(",", ":"), sort_keys=True)


def measure_from_json(text: str) -> InducedMeasure:
    doc = json.loads(text)
    stats = tuple(StatDescriptor(d["kind"], d.get("k")) for d in doc["stats"])
    counts = {tuple(row[:-1]): row[-1] for row in doc["rows"]}
    m = InducedMeasure.from_points(counts, doc["g"], stats)
    if m.total != doc["total"]:
        raise EnumerationError("serialized total does not match rows")
    return m
