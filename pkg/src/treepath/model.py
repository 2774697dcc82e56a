"""Tree model: parameters, vertex addressing, path enumeration, seeded RNG streams.

The tree is the rooted N-ary tree truncated at depth n.  Vertices are addressed
arithmetically as (level, index) with index in [0, N**level); no tree object is
ever materialized.  A descending path is a vertex followed by repeated child
steps.  Vertex fitnesses are i.i.d.: Bernoulli(p) for open-path statistics,
uniform on [0, 1] for increasing-path statistics.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np

UINT64_MAX = 2**64 - 1

#: Hard ceiling on the number of paths `enumerate_paths` will materialize.
ENUMERATION_LIMIT = 10**6


class ValidationError(ValueError):
    """A model parameter or query violates an invariant.

    `field` names the offending parameter.
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class ScaleGuardError(RuntimeError):
    """An operation was asked to run beyond its guarded problem size."""


class NumericalError(RuntimeError):
    """A numerical routine failed to converge or lost required precision."""


class ReplicateAborted(RuntimeError):
    """One or more Monte Carlo replicates exceeded their work cap."""

    def __init__(self, indices):
        self.indices = tuple(indices)
        super().__init__(f"replicates aborted (work cap exceeded): {self.indices}")


class VertexAddr(NamedTuple):
    """Address of a vertex: level (distance from the root) and index within the level."""

    level: int
    index: int


@dataclass(frozen=True)
class ModelParams:
    """The triple (branching, depth, open_prob) defining the random labeled tree.

    `open_prob` may be None for increasing-path statistics, where fitnesses are
    uniform on [0, 1] and no Bernoulli parameter is involved.
    """

    branching: int
    depth: int
    open_prob: float | None = None

    def __post_init__(self):
        if not isinstance(self.branching, int) or self.branching < 1:
            raise ValidationError("branching", f"must be an integer >= 1, got {self.branching!r}")
        if not isinstance(self.depth, int) or self.depth < 0:
            raise ValidationError("depth", f"must be an integer >= 0, got {self.depth!r}")
        if self.open_prob is not None:
            p = self.open_prob
            if not (isinstance(p, (int, float)) and 0.0 < p < 1.0):
                raise ValidationError("open_prob", f"p out of (0,1): {p!r}")

    def require_open_prob(self) -> float:
        if self.open_prob is None:
            raise ValidationError("open_prob", "this operation needs the Bernoulli parameter p")
        return self.open_prob

    def require_theory_branching(self) -> None:
        """Limit theorems in this package are stated for branching >= 2 only."""
        if self.branching < 2:
            raise ValidationError("branching", "theory operations require N >= 2 (N = 1 is sampler-only)")


@dataclass(frozen=True)
class PathQuery:
    """Descriptor for a class of descending paths.

    length k is mandatory; start_level j, shared-vertex count m, and the
    overlap position pair (s, t) are optional refinements.
    """

    length: int
    start_level: int | None = None
    overlap: int | None = None
    overlap_pair: tuple[int, int] | None = None

    def __post_init__(self):
        if not isinstance(self.length, int) or self.length < 0:
            raise ValidationError("length", f"k must be an integer >= 0, got {self.length!r}")
        if self.start_level is not None and self.start_level < 0:
            raise ValidationError("start_level", "j must be >= 0")
        if self.overlap is not None and not (1 <= self.overlap <= self.length + 1):
            raise ValidationError("overlap", f"m must lie in [1, k+1], got {self.overlap}")
        if self.overlap_pair is not None:
            s, t = self.overlap_pair
            if not (0 <= s <= t <= self.length):
                raise ValidationError("overlap_pair", f"need 0 <= s <= t <= k, got {(s, t)}")


@dataclass(frozen=True)
class RngSpec:
    """Identifies one replicate's random stream: (base_seed, replicate_index)."""

    base_seed: int
    replicate_index: int = 0

    def __post_init__(self):
        if not (0 <= self.base_seed <= UINT64_MAX):
            raise ValidationError("base_seed", "must fit an unsigned 64-bit integer")
        if self.replicate_index < 0:
            raise ValidationError("replicate_index", "must be >= 0")


def tree_size(branching: int, depth: int) -> int:
    """Exact vertex count of the depth-n truncation (python int, never overflows)."""
    if branching == 1:
        return depth + 1
    return (branching ** (depth + 1) - 1) // (branching - 1)


def validate(params: ModelParams, query: PathQuery | None = None, *, walks_tree: bool = False) -> ModelParams:
    """Check cross-parameter invariants; return the params unchanged if sound.

    `walks_tree` additionally requires the vertex count to fit an unsigned
    64-bit integer, the precondition for every operation that traverses
    vertices (samplers, enumeration).
    """
    # dataclass construction already enforced the per-field invariants;
    # re-run them here so dicts deserialized from the CLI go through one gate
    ModelParams(params.branching, params.depth, params.open_prob)
    if walks_tree and tree_size(params.branching, params.depth) > UINT64_MAX:
        raise ValidationError("depth", "tree size overflows the native unsigned integer")
    if query is not None:
        if query.length > params.depth:
            raise ValidationError("length", f"k > n ({query.length} > {params.depth})")
        if query.start_level is not None and query.start_level + query.length > params.depth:
            raise ValidationError("start_level", "j + k exceeds the tree depth")
    return params


def parent(addr: VertexAddr, branching: int) -> VertexAddr:
    if addr.level == 0:
        raise ValidationError("level", "the root has no parent")
    return VertexAddr(addr.level - 1, addr.index // branching)


def children(addr: VertexAddr, branching: int) -> tuple[VertexAddr, ...]:
    return tuple(
        VertexAddr(addr.level + 1, addr.index * branching + c) for c in range(branching)
    )


def path_count(branching: int, depth: int, length: int) -> int:
    """Number of descending length-k paths in the depth-n tree (exact integer).

    Sums N**(k+j) over start levels j = 0..n-k; the geometric closed form
    (N**(n+1) - N**k) / (N-1) for N >= 2.
    """
    if length > depth:
        raise ValidationError("length", f"k > n ({length} > {depth})")
    N, n, k = branching, depth, length
    if N == 1:
        return n - k + 1
    return (N ** (n + 1) - N**k) // (N - 1)


def enumerate_paths(params: ModelParams, length: int) -> list[tuple[VertexAddr, ...]]:
    """All descending length-k paths, each exactly once.

    Ordered lexicographically by (start level, start index, child choices).
    Guarded to ENUMERATION_LIMIT paths; this is an oracle-scale operation.
    """
    validate(params, PathQuery(length), walks_tree=True)
    N, n, k = params.branching, params.depth, length
    total = path_count(N, n, k)
    if total > ENUMERATION_LIMIT:
        raise ScaleGuardError(f"{total} paths exceed the enumeration limit {ENUMERATION_LIMIT}")

    def walk() -> Iterator[tuple[VertexAddr, ...]]:
        for j in range(n - k + 1):
            for i in range(N**j):
                stack = [(VertexAddr(j, i),)]
                while stack:
                    path = stack.pop()
                    if len(path) == k + 1:
                        yield path
                        continue
                    tip = path[-1]
                    # push children in reverse so index order pops first
                    for c in range(N - 1, -1, -1):
                        stack.append(path + (VertexAddr(tip.level + 1, tip.index * N + c),))
        return

    paths = list(walk())
    assert len(paths) == total
    return paths


def rng_stream(spec: RngSpec) -> np.random.Generator:
    """Deterministic uniform/Bernoulli source for one replicate.

    Each replicate gets its own counter-based Philox stream, keyed by the
    128-bit value base_seed + replicate_index * 2**64.  Distinct keys give
    statistically independent streams by construction, so replicates may be
    generated in any order or on any worker without changing a single draw.

    Draw discipline shared by every sampler in this package: one uniform is
    consumed per visited vertex, vertices are visited in depth-first pre-order
    with children in index order, and a Bernoulli(p) variable is the event
    (uniform < p).  Samplers over the full tree visit every vertex; the
    root-to-leaf path counter visits the root plus all children of visited
    open vertices and nothing else.
    """
    key = spec.base_seed | (spec.replicate_index << 64)
    return np.random.Generator(np.random.Philox(key=key))
