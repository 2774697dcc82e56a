"""Exact distributions by dynamic programming over depth.

Two laws are computed without ever materializing the tree: the open
root-to-leaf path count (convolution over child subtrees) and the longest
open downward run anywhere in the tree (joint recursion on the run starting
at the root and the tree-wide maximum).  Both carry the sentinel -1 for
"no qualifying vertex/path".
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import ModelParams, NumericalError, ScaleGuardError, validate

#: Guards: support size of the count law, depth of the run-length law.
THETA_SUPPORT_LIMIT = 10**5
LONGEST_DEPTH_LIMIT = 2000

_MASS_TOL = 1e-9
_NEG_TOL = 1e-12


@dataclass(frozen=True)
class Pmf:
    """Probability mass function on integers, sentinel -1 included.

    Total mass must sit within 1e-9 of 1 at construction; renormalization is
    deliberately not performed, so mass drift surfaces as an error instead of
    being hidden.
    """

    support: tuple[int, ...]
    probs: tuple[float, ...]

    def __post_init__(self):
        if len(self.support) != len(self.probs):
            raise ValueError("support and probs lengths differ")
        if any(b <= a for a, b in zip(self.support, self.support[1:])):
            raise ValueError("support must be strictly increasing")
        if min(self.probs, default=0.0) < -_NEG_TOL:
            raise NumericalError(f"negative mass {min(self.probs)} beyond rounding tolerance")
        total = float(np.sum(self.probs))
        if abs(total - 1.0) > _MASS_TOL:
            raise NumericalError(f"total mass {total} drifts from 1 by more than {_MASS_TOL}")

    @classmethod
    def from_arrays(cls, support, probs) -> "Pmf":
        probs = np.clip(np.asarray(probs, dtype=float), 0.0, None)
        return cls(tuple(int(v) for v in support), tuple(float(x) for x in probs))

    def as_dict(self) -> dict[int, float]:
        return dict(zip(self.support, self.probs))

    def mass(self, value: int) -> float:
        return self.as_dict().get(value, 0.0)

    def mean(self) -> float:
        return float(np.dot(self.support, self.probs))

    def moment(self, order: int) -> float:
        return float(np.dot(np.asarray(self.support, dtype=float) ** order, self.probs))

    def variance(self) -> float:
        return self.moment(2) - self.mean() ** 2

    def cdf(self, value: int) -> float:
        """P(X <= value)."""
        return float(sum(p for v, p in zip(self.support, self.probs) if v <= value))

    def tail(self, value: int) -> float:
        """P(X >= value)."""
        return float(sum(p for v, p in zip(self.support, self.probs) if v >= value))

    def median(self) -> int:
        acc = 0.0
        for v, p in zip(self.support, self.probs):
            acc += p
            if acc >= 0.5:
                return v
        return self.support[-1]


@dataclass(frozen=True)
class JointRunTable:
    """Joint tail table of (run starting at the root, tree-wide longest run).

    `tail[k, c]` = P(root run > c-1 or longest run >= k) for c = 0..k, the
    complement of the joint CDF; `cdf(r, k)` restores P(root run <= r and
    longest run < k).  Kept in complement form because the interesting mass
    lives within 1e-150 of 1 deep in the subcritical regime.
    """

    depth: int
    tail: np.ndarray

    def cdf(self, r: int, k: int) -> float:
        if not (-1 <= r and 0 <= k <= self.depth + 2):
            raise ValueError("query outside the table")
        c = min(r + 1, k)
        return 1.0 - float(self.tail[k, c])

    def longest_tail(self, k: int) -> float:
        """P(longest run >= k)."""
        return float(self.tail[k, k])


def theta_pmf(params: ModelParams) -> Pmf:
    """Exact law of the open root-to-leaf path count.

    Depth recursion: a tree of depth d+1 is a root over N independent depth-d
    subtrees, so the count is 0 if the root is closed and otherwise the N-fold
    convolution of the child counts.
    """
    validate(params)
    p = params.require_open_prob()
    N, n = params.branching, params.depth
    if N**n > THETA_SUPPORT_LIMIT:
        raise ScaleGuardError(f"support size {N**n} exceeds {THETA_SUPPORT_LIMIT}")
    law = np.array([1.0 - p, p])
    for _ in range(n):
        folded = law
        for _ in range(N - 1):
            folded = np.convolve(folded, law)
        law = p * folded
        law[0] += 1.0 - p
    return Pmf.from_arrays(range(len(law)), law)


def _one_minus_pow(x: np.ndarray, N: int) -> np.ndarray:
    """1 - (1-x)^N, factorized as x * sum_{i<N} (1-x)^i to avoid cancellation."""
    u = 1.0 - x
    s = np.ones_like(x)
    for _ in range(N - 1):
        s = 1.0 + u * s
    return x * s


def joint_run_table(params: ModelParams) -> JointRunTable:
    """Exact joint tail table for the depth-n tree (complement-space DP).

    State per (k, c): the complement D of P(root run <= c-1, longest run < k).
    One depth step roots N independent copies under a fresh vertex:

        D' = p * W(D at the shifted column) + (1-p) * W(D at the marginal),
        W(x) = 1 - (1-x)^N,

    where the shifted column caps the root-run constraint at k-1 and the
    marginal lives on the diagonal c = k.
    """
    validate(params)
    p = params.require_open_prob()
    N, n = params.branching, params.depth
    if n > LONGEST_DEPTH_LIMIT:
        raise ScaleGuardError(f"depth {n} exceeds the DP guard {LONGEST_DEPTH_LIMIT}")
    size = n + 3
    tail = np.zeros((size, size))
    tail[:, 0] = p  # r = -1: the single vertex must be closed
    idx = np.arange(size)
    for _ in range(n):
        diag = tail[idx, idx]
        shifted = np.empty_like(tail)
        shifted[:, 0] = 1.0  # virtual column r = -2 is impossible: complement 1
        shifted[:, 1:] = tail[:, :-1]
        tail = p * _one_minus_pow(shifted, N) + (1.0 - p) * _one_minus_pow(diag, N)[:, None]
    return JointRunTable(n, tail)


def longest_open_pmf(params: ModelParams) -> Pmf:
    """Exact law of the longest open downward run anywhere in the depth-n tree.

    Support -1..n with -1 meaning every vertex is closed.  Masses are the
    consecutive differences of the tail probabilities from the joint table,
    accurate to absolute rounding even when the tails sit within 1e-300 of 0.
    """
    table = joint_run_table(params)
    n = params.depth
    tails = np.array([table.longest_tail(k) for k in range(n + 2)])
    probs = np.empty(n + 2)
    probs[0] = 1.0 - tails[0]
    probs[1:] = tails[:-1] - tails[1:]
    return Pmf.from_arrays(range(-1, n + 1), probs)
