"""Ground-truth brute force at tiny scale.

Every closed form and DP in this package is arbitrated here: exhaustive
Bernoulli assignments for open-path laws, exhaustive rank orderings for
increasing-path laws (only the order of continuous fitnesses matters), and
exhaustive path-pair scans for overlap counts.  Guards keep each oracle where
exhaustion is actually exhaustive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import permutations

import numpy as np

from .dp import Pmf
from .model import (
    ModelParams,
    ScaleGuardError,
    VertexAddr,
    enumerate_paths,
    tree_size,
    validate,
)

ASSIGNMENT_VERTEX_LIMIT = 22
ORDERING_VERTEX_LIMIT = 9
PAIR_VERTEX_LIMIT = 10
PAIR_PATH_LIMIT = 3000

_CHUNK = 1 << 14


@dataclass(frozen=True)
class PathIndicatorTable:
    """Per-path indicators of "open" (for a fitness assignment) or "increasing"
    (for a rank ordering), aligned with `enumerate_paths` order.

    The indicator sum is the realized path count for that assignment or
    ordering; for length = depth and open indicators it is the realized
    root-to-leaf spanning count.
    """

    paths: tuple[tuple[VertexAddr, ...], ...]
    indicators: tuple[bool, ...]

    def count(self) -> int:
        return sum(self.indicators)


def open_path_indicators(params: ModelParams, length: int, open_vertices) -> PathIndicatorTable:
    """Indicator per length-k path of "every vertex open", for one assignment.

    `open_vertices` maps (level, index) to truthiness; missing vertices count
    as closed.
    """
    lookup = {VertexAddr(*addr): bool(flag) for addr, flag in dict(open_vertices).items()}
    paths = tuple(enumerate_paths(params, length))
    flags = tuple(all(lookup.get(addr, False) for addr in path) for path in paths)
    return PathIndicatorTable(paths, flags)


def increasing_path_indicators(params: ModelParams, length: int, ranks) -> PathIndicatorTable:
    """Indicator per length-k path of "fitness strictly increases", for one
    rank ordering (`ranks` maps (level, index) to a comparable label)."""
    lookup = {VertexAddr(*addr): value for addr, value in dict(ranks).items()}
    paths = tuple(enumerate_paths(params, length))
    flags = tuple(
        all(lookup[a] < lookup[b] for a, b in zip(path, path[1:])) for path in paths
    )
    return PathIndicatorTable(paths, flags)


def _guard_assignments(params: ModelParams) -> int:
    validate(params, walks_tree=True)
    params.require_open_prob()
    v = tree_size(params.branching, params.depth)
    if v > ASSIGNMENT_VERTEX_LIMIT:
        raise ScaleGuardError(f"{v} vertices exceed the 2^V assignment guard ({ASSIGNMENT_VERTEX_LIMIT})")
    return v


def _level_slices(branching: int, depth: int) -> list[slice]:
    sizes = [branching**lvl for lvl in range(depth + 1)]
    offsets = np.concatenate(([0], np.cumsum(sizes)))
    return [slice(int(offsets[lvl]), int(offsets[lvl + 1])) for lvl in range(depth + 1)]


def _assignment_masses(params: ModelParams, statistic) -> dict[int, float]:
    """Sum assignment weights p^#open (1-p)^#closed per statistic value.

    Chunked over the 2^V assignments; per-chunk sums are combined with
    math.fsum so the comparison budget of 1e-9 survives millions of terms.
    `statistic(open_bits)` maps a (chunk, V) boolean array to integer values.
    """
    v = _guard_assignments(params)
    p = params.open_prob
    chunk_totals: dict[int, list[float]] = {}
    bit_cols = np.arange(v, dtype=np.uint64)
    for start in range(0, 1 << v, _CHUNK):
        stop = min(start + _CHUNK, 1 << v)
        codes = np.arange(start, stop, dtype=np.uint64)
        bits = ((codes[:, None] >> bit_cols[None, :]) & 1).astype(bool)
        n_open = bits.sum(axis=1)
        weights = p**n_open * (1.0 - p) ** (v - n_open)
        values = statistic(bits)
        sums = np.bincount(values - values.min(), weights=weights)
        for offset, w in enumerate(sums):
            if w:
                chunk_totals.setdefault(int(values.min()) + offset, []).append(float(w))
    return {value: math.fsum(parts) for value, parts in sorted(chunk_totals.items())}


def theta_pmf_bruteforce(params: ModelParams) -> Pmf:
    """Exact law of the open root-to-leaf path count over all 2^V assignments."""
    N, n = params.branching, params.depth
    slices = _level_slices(N, n)

    def statistic(bits: np.ndarray) -> np.ndarray:
        counts = bits[:, slices[n]].astype(np.int64)
        for lvl in range(n - 1, -1, -1):
            rolled = counts.reshape(counts.shape[0], -1, N).sum(axis=2)
            counts = rolled * bits[:, slices[lvl]]
        return counts[:, 0]

    masses = _assignment_masses(params, statistic)
    support = range(0, N**n + 1)
    return Pmf.from_arrays(support, [masses.get(v, 0.0) for v in support])


def longest_open_pmf_bruteforce(params: ModelParams) -> Pmf:
    """Exact law of the longest open downward run over all 2^V assignments."""
    N, n = params.branching, params.depth
    slices = _level_slices(N, n)

    def statistic(bits: np.ndarray) -> np.ndarray:
        runs = np.where(bits[:, slices[n]], 0, -1)
        best = runs.max(axis=1)
        for lvl in range(n - 1, -1, -1):
            child_max = runs.reshape(runs.shape[0], -1, N).max(axis=2)
            runs = np.where(bits[:, slices[lvl]], 1 + child_max, -1)
            best = np.maximum(best, runs.max(axis=1))
        return best

    masses = _assignment_masses(params, statistic)
    support = range(-1, n + 1)
    return Pmf.from_arrays(support, [masses.get(v, 0.0) for v in support])


def increasing_pmf_bruteforce(params: ModelParams) -> Pmf:
    """Exact law of the longest increasing path by enumerating rank orderings.

    Fitness laws being continuous, only relative ranks matter; the law is a
    rational count over V! permutations, returned in double precision.
    """
    validate(params, walks_tree=True)
    N, n = params.branching, params.depth
    v = tree_size(N, n)
    if v > ORDERING_VERTEX_LIMIT:
        raise ScaleGuardError(f"{v} vertices exceed the V! ordering guard ({ORDERING_VERTEX_LIMIT})")
    slices = _level_slices(N, n)
    counts = [0] * (n + 1)
    for perm in permutations(range(v)):
        best = 0
        runs: list[int] = []
        for lvl in range(n, -1, -1):
            ranks = perm[slices[lvl]]
            if lvl == n:
                runs = [0] * len(ranks)
            else:
                nxt = []
                child_ranks = perm[slices[lvl + 1]]
                for i, r in enumerate(ranks):
                    eligible = [
                        runs[i * N + c]
                        for c in range(N)
                        if child_ranks[i * N + c] > r
                    ]
                    nxt.append(1 + max(eligible) if eligible else 0)
                runs = nxt
            best = max(best, max(runs))
        counts[best] += 1
    total = math.factorial(v)
    return Pmf.from_arrays(range(n + 1), [c / total for c in counts])


def enumerate_overlap_pairs(params: ModelParams, length: int) -> tuple[int, ...]:
    """Ordered-pair counts a_1..a_{k+1} by exact shared-vertex cardinality.

    Scans all M^2 ordered pairs of length-k paths (equality included, so the
    last entry is M itself).
    """
    paths = enumerate_paths(params, length)
    if len(paths) > PAIR_PATH_LIMIT:
        raise ScaleGuardError(f"{len(paths)} paths exceed the pair-scan guard ({PAIR_PATH_LIMIT})")
    N = params.branching
    ids = np.array(
        [[(N**a.level - 1) // (N - 1) + a.index if N > 1 else a.level for a in path] for path in paths],
        dtype=np.int64,
    )
    counts = np.zeros(length + 2, dtype=np.int64)
    for row_start in range(0, len(paths), 256):
        block = ids[row_start : row_start + 256]
        shared = (block[:, None, :, None] == ids[None, :, None, :]).sum(axis=(2, 3))
        counts += np.bincount(shared.ravel(), minlength=length + 2)
    return tuple(int(c) for c in counts[1:])


def pair_increasing_bruteforce(path_a, path_b) -> Fraction:
    """Exact probability that two descending paths are both increasing.

    Enumerates every rank ordering of the distinct vertices; the result is the
    exact rational (#orderings where both paths increase) / V!.
    """
    a = [VertexAddr(*v) for v in path_a]
    b = [VertexAddr(*v) for v in path_b]
    union = sorted(set(a) | set(b))
    if len(union) > PAIR_VERTEX_LIMIT:
        raise ScaleGuardError(f"{len(union)} distinct vertices exceed the guard ({PAIR_VERTEX_LIMIT})")
    pos = {vtx: i for i, vtx in enumerate(union)}
    idx_a = [pos[vtx] for vtx in a]
    idx_b = [pos[vtx] for vtx in b]
    hits = 0
    for perm in permutations(range(len(union))):
        if all(perm[x] < perm[y] for x, y in zip(idx_a, idx_a[1:])) and all(
            perm[x] < perm[y] for x, y in zip(idx_b, idx_b[1:])
        ):
            hits += 1
    return Fraction(hits, math.factorial(len(union)))


def open_count_variance_bruteforce(params: ModelParams, length: int) -> float:
    """Exact variance of the open length-k path count over all assignments."""
    _guard_assignments(params)
    paths = enumerate_paths(params, length)
    N = params.branching
    slices = _level_slices(N, params.depth)
    offsets = [s.start for s in slices]
    path_ids = np.array(
        [[offsets[a.level] + a.index for a in path] for path in paths], dtype=np.int64
    )

    def statistic(bits: np.ndarray) -> np.ndarray:
        return bits[:, path_ids].all(axis=2).sum(axis=1)

    masses = _assignment_masses(params, statistic)
    mean = math.fsum(v * w for v, w in masses.items())
    second = math.fsum(v * v * w for v, w in masses.items())
    return second - mean**2
