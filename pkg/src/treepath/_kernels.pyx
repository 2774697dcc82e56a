# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Monte Carlo kernels.

One realization per call, O(depth) memory, no tree materialized.  Draw
discipline (shared with the pure-Python fallback, bit for bit): one uniform
per visited vertex, depth-first pre-order, children in index order, Bernoulli
events as (uniform < p).  The caller supplies a numpy Generator; draws go
through its BitGenerator at C speed.
"""

from cpython.pycapsule cimport PyCapsule_GetPointer
from libc.stdlib cimport free, malloc
from numpy.random cimport bitgen_t


cdef bitgen_t* _bitgen(gen) except NULL:
    return <bitgen_t*>PyCapsule_GetPointer(gen.bit_generator.capsule, "BitGenerator")


# ---------------------------------------------------------------------------
# open root-to-leaf path count, lazy DFS over the open cluster

cdef long long _theta(bitgen_t* rng, int branching, int depth, double open_prob,
                      int level, long long* budget) noexcept nogil:
    cdef double u = rng.next_double(rng.state)
    cdef long long total = 0, sub
    cdef int c
    budget[0] -= 1
    if budget[0] < 0:
        return -1
    if u >= open_prob:
        return 0
    if level == depth:
        return 1
    for c in range(branching):
        sub = _theta(rng, branching, depth, open_prob, level + 1, budget)
        if sub < 0:
            return -1
        total += sub
    return total


def theta_sample(gen, int branching, int depth, double open_prob, long long work_cap):
    """Count open root-to-leaf paths; -1 if the visit budget was exhausted."""
    cdef bitgen_t* rng = _bitgen(gen)
    cdef long long budget = work_cap
    cdef long long out
    with nogil:
        out = _theta(rng, branching, depth, open_prob, 0, &budget)
    return out


# ---------------------------------------------------------------------------
# longest open downward run anywhere, full-tree DFS

cdef int _longest_open(bitgen_t* rng, int branching, int depth, double open_prob,
                       int level, int* best) noexcept nogil:
    cdef double u = rng.next_double(rng.state)
    cdef int child_max = -1, c, s, run
    if level < depth:
        for c in range(branching):
            s = _longest_open(rng, branching, depth, open_prob, level + 1, best)
            if s > child_max:
                child_max = s
    run = 1 + child_max if u < open_prob else -1
    if run > best[0]:
        best[0] = run
    return run


def longest_open_sample(gen, int branching, int depth, double open_prob):
    """Longest open downward run in the tree; -1 when every vertex is closed."""
    cdef bitgen_t* rng = _bitgen(gen)
    cdef int best = -1
    with nogil:
        _longest_open(rng, branching, depth, open_prob, 0, &best)
    return best


# ---------------------------------------------------------------------------
# longest increasing downward path, full-tree DFS with uniform fitnesses

cdef struct IncResult:
    double fitness
    int run


cdef IncResult _longest_increasing(bitgen_t* rng, int branching, int depth,
                                   int level, int* best) noexcept nogil:
    cdef IncResult out, child
    cdef int c, child_best = -1
    out.fitness = rng.next_double(rng.state)
    if level < depth:
        for c in range(branching):
            child = _longest_increasing(rng, branching, depth, level + 1, best)
            if child.fitness > out.fitness and child.run > child_best:
                child_best = child.run
    out.run = 1 + child_best if child_best >= 0 else 0
    if out.run > best[0]:
        best[0] = out.run
    return out


def longest_increasing_sample(gen, int branching, int depth):
    """Longest strictly increasing downward path in the tree (always >= 0)."""
    cdef bitgen_t* rng = _bitgen(gen)
    cdef int best = 0
    with nogil:
        _longest_increasing(rng, branching, depth, 0, &best)
    return best


# ---------------------------------------------------------------------------
# number of increasing paths of exact length k, counted at their top vertex

cdef double _increasing_count(bitgen_t* rng, int branching, int depth, int length,
                              int level, long long* table,
                              long long* total) noexcept nogil:
    # table row `level` holds the path counts C_j(v) = number of increasing
    # descents of exactly j edges starting at the vertex being visited
    cdef long long* row = table + level * (length + 1)
    cdef long long* crow
    cdef double x = rng.next_double(rng.state)
    cdef double child_fit
    cdef int c, j
    row[0] = 1
    for j in range(1, length + 1):
        row[j] = 0
    if level < depth:
        crow = table + (level + 1) * (length + 1)
        for c in range(branching):
            child_fit = _increasing_count(rng, branching, depth, length,
                                          level + 1, table, total)
            if child_fit > x:
                for j in range(1, length + 1):
                    row[j] += crow[j - 1]
    total[0] += row[length]
    return x


def increasing_count_sample(gen, int branching, int depth, int length):
    """Number of increasing descending paths of exactly `length` edges."""
    cdef bitgen_t* rng = _bitgen(gen)
    cdef long long total = 0
    cdef long long* table = <long long*>malloc((depth + 1) * (length + 1) * sizeof(long long))
    if table == NULL:
        raise MemoryError
    try:
        with nogil:
            _increasing_count(rng, branching, depth, length, 0, table, &total)
    finally:
        free(table)
    return total
