"""Pure-Python/numpy fallback for the Monte Carlo kernels.

Bit-identical to the compiled extension: the same Generator yields the same
sample, because both implementations consume one uniform per visited vertex in
depth-first pre-order with children in index order.  The full-tree statistics
draw the whole pre-order block at once and scatter it into per-level arrays
through cached pre-order rank maps, trading the extension's O(depth) memory
for vectorized speed; the lazy cluster walk for the root-to-leaf count stays
a plain recursion and is the slow path that motivates the extension.
"""

from __future__ import annotations

import functools
import sys

import numpy as np


class _Abort(Exception):
    pass


def theta_sample(gen, branching: int, depth: int, open_prob: float, work_cap: int) -> int:
    """Count open root-to-leaf paths; -1 if the visit budget was exhausted."""
    budget = work_cap

    def visit(level: int) -> int:
        nonlocal budget
        u = gen.random()
        budget -= 1
        if budget < 0:
            raise _Abort
        if u >= open_prob:
            return 0
        if level == depth:
            return 1
        total = 0
        for _ in range(branching):
            total += visit(level + 1)
        return total

    if depth + 10 > sys.getrecursionlimit():
        sys.setrecursionlimit(depth + 100)
    try:
        return visit(0)
    except _Abort:
        return -1


@functools.lru_cache(maxsize=8)
def _preorder_ranks(branching: int, depth: int) -> tuple[np.ndarray, ...]:
    """Per level, the pre-order rank of each vertex in level-index order.

    Descending one edge advances the rank by 1 plus the sizes of the skipped
    sibling subtrees, so rank(level, i) = level + sum_j digit_j(i) * subtree
    size below level j.
    """
    if branching == 1:
        return tuple(np.array([lvl], dtype=np.int64) for lvl in range(depth + 1))
    sub_size = [
        (branching ** (depth - lvl + 1) - 1) // (branching - 1) for lvl in range(depth + 1)
    ]
    maps = []
    for lvl in range(depth + 1):
        idx = np.arange(branching**lvl, dtype=np.int64)
        rank = np.full(branching**lvl, lvl, dtype=np.int64)
        for j in range(1, lvl + 1):
            digit = (idx // branching ** (lvl - j)) % branching
            rank += digit * sub_size[j]
        maps.append(rank)
    return tuple(maps)


def _level_draws(gen, branching: int, depth: int) -> list[np.ndarray]:
    ranks = _preorder_ranks(branching, depth)
    flat = gen.random(int(sum(r.size for r in ranks)))
    return [flat[r] for r in ranks]


def longest_open_sample(gen, branching: int, depth: int, open_prob: float) -> int:
    """Longest open downward run in the tree; -1 when every vertex is closed."""
    levels = _level_draws(gen, branching, depth)
    best = -1
    runs = None
    for lvl in range(depth, -1, -1):
        is_open = levels[lvl] < open_prob
        if lvl == depth:
            runs = np.where(is_open, 0, -1)
        else:
            child_max = runs.reshape(-1, branching).max(axis=1)
            runs = np.where(is_open, 1 + child_max, -1)
        best = max(best, int(runs.max()))
    return best


def longest_increasing_sample(gen, branching: int, depth: int) -> int:
    """Longest strictly increasing downward path in the tree (always >= 0)."""
    levels = _level_draws(gen, branching, depth)
    best = 0
    runs = None
    for lvl in range(depth, -1, -1):
        if lvl == depth:
            runs = np.zeros(levels[lvl].size, dtype=np.int64)
        else:
            child_fit = levels[lvl + 1].reshape(-1, branching)
            child_runs = runs.reshape(-1, branching)
            eligible = child_fit > levels[lvl][:, None]
            runs = 1 + np.max(np.where(eligible, child_runs, -1), axis=1)
        best = max(best, int(runs.max()))
    return best


def increasing_count_sample(gen, branching: int, depth: int, length: int) -> int:
    """Number of increasing descending paths of exactly `length` edges."""
    levels = _level_draws(gen, branching, depth)
    total = 0
    counts = None
    for lvl in range(depth, -1, -1):
        size = levels[lvl].size
        here = np.zeros((size, length + 1), dtype=np.int64)
        here[:, 0] = 1
        if lvl < depth:
            child_fit = levels[lvl + 1].reshape(size, branching)
            child_counts = counts.reshape(size, branching, length + 1)
            eligible = child_fit > levels[lvl][:, None]
            here[:, 1:] = (child_counts[:, :, :length] * eligible[:, :, None]).sum(axis=1)
        total += int(here[:, length].sum())
        counts = here
    return total
