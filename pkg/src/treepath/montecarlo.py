"""Seeded Monte Carlo sampling of path statistics, with a deterministic
parallel batch runner.

Every replicate draws from its own Philox stream keyed by (base_seed,
replicate_index), so a batch is a pure function of its arguments: worker
count, scheduling, and backend change nothing, and reruns are bit-identical.
Scale guards reject work that cannot finish honestly; a supercritical
root-to-leaf count can instead be given an explicit work cap, in which case
replicates that exceed it abort loudly and are reported by index.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import kernels
from .model import (
    ModelParams,
    PathQuery,
    ReplicateAborted,
    RngSpec,
    ScaleGuardError,
    ValidationError,
    path_count,
    rng_stream,
    validate,
)

STATISTICS = ("theta", "longest_open", "longest_increasing", "increasing_count")

#: Full-tree samplers refuse trees with more than this many leaves.
FULL_TREE_LEAF_LIMIT = 2**24
#: The increasing-path counter refuses more than this many candidate paths.
COUNT_PATH_LIMIT = 10**7
#: Depth bound under which an uncapped supercritical count walk is still allowed.
THETA_UNCAPPED_DEPTH = 30

_NO_CAP = 2**62
_MASK64 = 2**64 - 1


class _StreamFactory:
    """Per-worker Philox re-keying.

    Reproduces rng_stream(RngSpec(base_seed, i)) draw for draw (state
    injection with key = base_seed + i * 2**64, zero counter, empty buffer)
    while skipping the costly per-replicate BitGenerator construction.  Not
    shared across threads: each worker owns one.
    """

    def __init__(self, base_seed: int):
        self._low = base_seed & _MASK64
        self._bitgen = np.random.Philox(key=0)
        self._gen = np.random.Generator(self._bitgen)

    def stream(self, replicate_index: int) -> np.random.Generator:
        state = self._bitgen.state
        state["state"]["key"][0] = self._low
        state["state"]["key"][1] = replicate_index
        state["state"]["counter"][:] = 0
        state["buffer_pos"] = 4
        state["has_uint32"] = 0
        state["uinteger"] = 0
        self._bitgen.state = state
        return self._gen


@dataclass(frozen=True)
class SampleBatch:
    """Replicated samples of one statistic with full provenance.

    `samples[i]` comes from replicate stream (base_seed, i).  Aborted
    replicates (work cap exceeded) keep a placeholder value and are listed in
    `aborted`; consumers must check it before trusting the samples.
    """

    params: ModelParams
    statistic: str
    length: int | None
    base_seed: int
    n_replicates: int
    samples: tuple[int, ...]
    aborted: tuple[int, ...]
    backend: str

    def require_clean(self) -> "SampleBatch":
        if self.aborted:
            raise ReplicateAborted(self.aborted)
        return self


def sample_theta(params: ModelParams, rng: np.random.Generator, work_cap: int | None = None) -> int:
    """One realization of the open root-to-leaf path count.

    Walks only the open cluster (O(cluster) cost).  Guarded against uncapped
    supercritical exploration; with a cap, raises ReplicateAborted when the
    visit budget runs out rather than returning a truncated count.
    """
    _guard_theta(params, work_cap)
    value = kernels.theta_sample(
        rng, params.branching, params.depth, params.open_prob, work_cap or _NO_CAP
    )
    if value < 0:
        raise ReplicateAborted((0,))
    return value


def sample_longest_open(params: ModelParams, rng: np.random.Generator) -> int:
    """One realization of the longest open downward run (-1 if all closed)."""
    _guard_full_tree(params, needs_p=True)
    return kernels.longest_open_sample(rng, params.branching, params.depth, params.open_prob)


def sample_longest_increasing(params: ModelParams, rng: np.random.Generator) -> int:
    """One realization of the longest increasing downward path (always >= 0)."""
    _guard_full_tree(params, needs_p=False)
    return kernels.longest_increasing_sample(rng, params.branching, params.depth)


def sample_increasing_count(params: ModelParams, length: int, rng: np.random.Generator) -> int:
    """One realization of the number of increasing paths of exactly `length` edges."""
    _guard_increasing_count(params, length)
    return kernels.increasing_count_sample(rng, params.branching, params.depth, length)


def run_batch(
    params: ModelParams,
    statistic: str,
    n_replicates: int,
    base_seed: int,
    *,
    workers: int = 0,
    length: int | None = None,
    work_cap: int | None = None,
) -> SampleBatch:
    """Draw `n_replicates` independent realizations of one statistic.

    workers = 0 picks the CPU count; any worker count yields byte-identical
    samples.  Per-replicate aborts (theta with a work cap) are collected and
    reported by replicate index, never silently dropped.
    """
    if statistic not in STATISTICS:
        raise ValidationError("statistic", f"unknown statistic {statistic!r}")
    if n_replicates < 0:
        raise ValidationError("n_replicates", "must be >= 0")
    RngSpec(base_seed, 0)

    if statistic == "theta":
        _guard_theta(params, work_cap)
        cap = work_cap or _NO_CAP

        def one(rng):
            return kernels.theta_sample(rng, params.branching, params.depth, params.open_prob, cap)

    elif statistic == "longest_open":
        _guard_full_tree(params, needs_p=True)

        def one(rng):
            return kernels.longest_open_sample(rng, params.branching, params.depth, params.open_prob)

    elif statistic == "longest_increasing":
        _guard_full_tree(params, needs_p=False)

        def one(rng):
            return kernels.longest_increasing_sample(rng, params.branching, params.depth)

    else:
        if length is None:
            raise ValidationError("length", "increasing_count needs k")
        _guard_increasing_count(params, length)

        def one(rng):
            return kernels.increasing_count_sample(rng, params.branching, params.depth, length)

    samples = np.zeros(n_replicates, dtype=np.int64)
    if workers == 0:
        workers = os.cpu_count() or 1
    workers = max(1, min(workers, max(1, n_replicates)))

    def run_slice(lo: int, hi: int) -> None:
        factory = _StreamFactory(base_seed)
        for i in range(lo, hi):
            samples[i] = one(factory.stream(i))

    if n_replicates:
        if workers == 1:
            run_slice(0, n_replicates)
        else:
            step = max(1, -(-n_replicates // workers))
            bounds = [(lo, min(lo + step, n_replicates)) for lo in range(0, n_replicates, step)]
            with ThreadPoolExecutor(max_workers=workers) as pool:
                for future in [pool.submit(run_slice, lo, hi) for lo, hi in bounds]:
                    future.result()

    aborted = tuple(int(i) for i in np.nonzero(samples < 0)[0]) if statistic == "theta" else ()
    return SampleBatch(
        params=params,
        statistic=statistic,
        length=length if statistic == "increasing_count" else None,
        base_seed=base_seed,
        n_replicates=n_replicates,
        samples=tuple(int(v) for v in samples),
        aborted=aborted,
        backend=kernels.BACKEND,
    )


def _guard_theta(params: ModelParams, work_cap: int | None) -> None:
    validate(params, walks_tree=True)
    p = params.require_open_prob()
    if work_cap is not None and work_cap < 1:
        raise ValidationError("work_cap", "must be >= 1")
    supercritical = p > 1.0 / params.branching
    if supercritical and params.depth > THETA_UNCAPPED_DEPTH and work_cap is None:
        raise ScaleGuardError(
            "supercritical cluster walk beyond depth "
            f"{THETA_UNCAPPED_DEPTH} needs an explicit work cap"
        )


def _guard_full_tree(params: ModelParams, *, needs_p: bool) -> None:
    validate(params, walks_tree=True)
    if needs_p:
        params.require_open_prob()
    leaves = params.branching**params.depth
    if leaves > FULL_TREE_LEAF_LIMIT:
        raise ScaleGuardError(f"{leaves} leaves exceed the full-tree guard {FULL_TREE_LEAF_LIMIT}")


def _guard_increasing_count(params: ModelParams, length: int) -> None:
    validate(params, PathQuery(length), walks_tree=True)
    total = path_count(params.branching, params.depth, length)
    if total > COUNT_PATH_LIMIT:
        raise ScaleGuardError(f"{total} candidate paths exceed the guard {COUNT_PATH_LIMIT}")
