"""Closed forms: moments, extinction recursion, path/overlap counts, variance and
total-variation bounds, and the three-value window prediction for the longest
increasing path.

Everything here is a pure function of the model parameters.  Large combinatorial
quantities are computed with python integers or in log space; nothing in this
module samples or enumerates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .model import (
    ModelParams,
    NumericalError,
    PathQuery,
    ValidationError,
    path_count,
    tree_size,
    validate,
)

SQRT_TWO_PI = math.sqrt(2.0 * math.pi)

#: Metadata attached wherever `pair_increasing_formula` values are reported.
PAIR_FORMULA_NOTE = (
    "closed-form value; arbitrated by the rank-ordering oracle, which disagrees "
    "on overlapping configurations (e.g. two length-1 paths sharing their start "
    "vertex: formula 1/4 vs exact 1/3).  Evaluating the formula with both "
    "arguments shifted up by one reproduces the exact value."
)


@dataclass(frozen=True)
class MomentReport:
    """First and second moments of the open root-to-leaf path count.

    `s_correction` is the geometric correction term of the second-moment
    formula; it exists only away from criticality (p != 1/N).  `lower_bound`
    is the second-moment (Paley-Zygmund) lower bound on P(count >= 1).
    """

    first_moment: float
    second_moment: float
    s_correction: float | None
    lower_bound: float


@dataclass(frozen=True)
class SurvivalCurve:
    """Extinction probabilities Q_1..Q_n with their fixed-point limit.

    Q_k is the probability that a depth-k tree has no open root-to-leaf path;
    survival = 1 - limit.
    """

    q_values: tuple[float, ...]
    limit_q: float
    survival: float


@dataclass(frozen=True)
class CountReport:
    """Path count M, the overlap profile B(m, j), and the pair counts a_m.

    a_m counts ordered pairs of length-k paths sharing exactly m vertices,
    equality allowed, so a_{k+1} = M.  B(m, j) is the number of paths sharing
    exactly m vertices with a fixed path that starts at level j.
    """

    path_total: int
    overlap_counts: tuple[int, ...]  # a_m for m = 1..k+1
    profile: tuple[tuple[int, ...], ...]  # profile[m-1][j] = B(m, j)


@dataclass(frozen=True)
class IncreasingPrediction:
    """Three-value window prediction for the longest increasing path.

    `b` solves b*e^b = n*ln(N)/e, `f` = n*ln(N)/b - 1/2 centers the window
    ([f]-1, [f], [f]+1).  `lambdas[k]` is the expected number of increasing
    length-k paths; the predicted law is P(length < k) ~ exp(-lambdas[k]).
    `tv_bounds[k]` holds (q, D) where the Poisson total-variation bound is
    defined; D may exceed 1 and is reported as-is.  `corollary_a` estimates
    the two-point-limit parameter from the fractional part nearest 0 or 1.
    """

    b: float
    f: float
    frac: float
    lambdas: dict[int, float]
    tv_bounds: dict[int, tuple[float, float]]
    window: tuple[int, int, int]
    window_mass: float
    point_masses: dict[int, float]
    corollary_a: float | None


def expected_theta(params: ModelParams) -> float:
    """Mean number of open root-to-leaf paths: N^n * p^(n+1) (log-safe)."""
    p = params.require_open_prob()
    N, n = params.branching, params.depth
    log_val = n * math.log(N) + (n + 1) * math.log(p)
    if log_val > 700.0:
        return math.inf
    return math.exp(log_val)


def theta_moments(params: ModelParams) -> MomentReport:
    """First/second moments of the root-to-leaf count and the implied lower
    bound on the spanning probability.

    The second moment has two branches; the critical one (p == 1/N, exact
    float equality) avoids the removable singularity of the generic form.
    """
    p = params.require_open_prob()
    params.require_theory_branching()
    N, n = params.branching, params.depth
    if n < 1:
        raise ValidationError("depth", "moment formulas need n >= 1")
    first = expected_theta(params)
    if p == 1.0 / N:
        second = p + n * p * (1.0 - 1.0 / N)
        s_corr = None
        lower = p / (1.0 + n * (1.0 - 1.0 / N))
    else:
        second = (
            first
            + (N - 1) / (N * p) * first**2
            + (N - 1) / N * (N ** (n + 1) * p ** (n + 2) * (1.0 - N ** (n - 1) * p ** (n - 1))) / (1.0 - N * p)
        )
        s_corr = (N - 1) / N * (N * p - N**n * p**n) / (1.0 - N * p)
        lower = first / (1.0 + (N - 1) * first / (N * p) + s_corr)
    return MomentReport(first, second, s_corr, lower)


def _extinction_step(q: float, N: int, p: float) -> float:
    return p * q**N + 1.0 - p


def _extinction_fixed_point(N: int, p: float, q_start: float, *, tol: float = 1e-14, max_iter: int = 10**7) -> float:
    """Iterate q -> p*q^N + 1 - p to its limit from below.

    For p <= 1/N the only fixed point in [0, 1] is 1 and the iteration can
    crawl (O(1/k) at criticality), so that case returns 1 directly; for
    p > 1/N the iteration converges geometrically to the smallest root.
    """
    if p <= 1.0 / N:
        return 1.0
    q = q_start
    for _ in range(max_iter):
        nxt = _extinction_step(q, N, p)
        if abs(nxt - q) < tol:
            return nxt
        q = nxt
    raise NumericalError("extinction fixed-point iteration did not converge")


def extinction_curve(params: ModelParams, upto: int) -> SurvivalCurve:
    """Q_1..Q_upto via Q_{k+1} = p*Q_k^N + 1 - p, plus the fixed-point limit."""
    p = params.require_open_prob()
    params.require_theory_branching()
    N = params.branching
    if upto < 1:
        raise ValidationError("upto", "need at least one recursion step")
    qs = []
    q = 1.0 - p  # depth-0 tree: no open root-to-leaf path iff the root is closed
    for _ in range(upto):
        q = _extinction_step(q, N, p)
        qs.append(q)
    limit = _extinction_fixed_point(N, p, qs[-1])
    return SurvivalCurve(tuple(qs), limit, 1.0 - limit)


def survival_limit(N: int, p: float) -> float:
    """Limiting probability that an open root-to-leaf path exists.

    Zero at and below the phase transition p = 1/N; above it, 1 - Q with Q
    the smallest root of p*x^N - x + 1 - p in [0, 1), reached by fixed-point
    iteration from Q_1.
    """
    params = ModelParams(N, 1, p)
    params.require_theory_branching()
    if p <= 1.0 / N:
        return 0.0
    q1 = _extinction_step(1.0 - p, N, p)
    return 1.0 - _extinction_fixed_point(N, p, q1)


def _overlap_profile_entry(N: int, n: int, k: int, m: int, j: int) -> int:
    """B(m, j): paths sharing exactly m vertices with a fixed path starting at level j.

    The shared vertices of two descending paths always form one contiguous
    segment.  Three placements contribute, each clipped by the tree's top
    (start level >= 0) and bottom (end level <= n):

    - segment strictly inside the fixed path: the other path must start at the
      segment top and branch off below it;
    - segment at the top of the fixed path: the other path may begin up to
      k-m+1 levels higher, its upper part forced onto the ancestor chain;
    - segment at the bottom: the other path starts inside and runs free below.
    """
    if m == k + 1:
        return 1
    total = 0
    # strictly interior placements: segment top at levels j+1 .. j+k-m,
    # other path spans down to (top + k) which must stay within depth
    hi = min(j + k - m, n - k)
    if hi >= j + 1:
        total += (hi - j) * (N - 1) * N ** (k - m)
    # segment at the top of the fixed path; other path starts at level j' <= j
    for jp in range(max(0, j - (k - m + 1)), j + 1):
        below = k - m + 1 - (j - jp)  # edges of the other path below the segment
        total += (N - 1) * N ** (below - 1) if below >= 1 else 1
    # segment at the bottom of the fixed path
    if j + 2 * k - m + 1 <= n:
        total += N ** (k - m + 1)
    return total


def overlap_counts(params: ModelParams, length: int) -> CountReport:
    """Ordered-pair overlap counts a_1..a_{k+1} with the full B(m, j) profile.

    a_m = sum_j N^(k+j) * B(m, j); exact integers at every size.  Satisfies
    a_m <= 2*M*N^(k-m+1) and a_{k+1} = M.
    """
    validate(params, PathQuery(length))
    params.require_theory_branching()
    N, n, k = params.branching, params.depth, length
    profile = tuple(
        tuple(_overlap_profile_entry(N, n, k, m, j) for j in range(n - k + 1))
        for m in range(1, k + 2)
    )
    counts = tuple(
        sum(N ** (k + j) * row[j] for j in range(n - k + 1)) for row in profile
    )
    return CountReport(path_count(N, n, k), counts, profile)


def overlap_count_asymptotic(N: int, n: int, k: int, m: int) -> int:
    """Single-expression form of a_m, valid once the tree is deep enough.

    Exact for n >= 2k - 1; below that the boundary placements overlap and the
    expression undercounts (it can even go negative), so `overlap_counts` is
    the authoritative route.
    """
    return (
        (N ** (n + k - m + 2) - N ** (2 * k - m + 1)) // (N - 1)
        + (N ** (n + k - m + 1) - N ** (2 * k - m + 1)) // (N - 1)
        - (2 * k - 2 * m + 1) * N ** (2 * k - m)
    )


def expected_open_count(params: ModelParams, length: int) -> float:
    """Mean number of open length-k paths: M * p^(k+1), in log space."""
    p = params.require_open_prob()
    validate(params, PathQuery(length))
    N, n, k = params.branching, params.depth, length
    log_val = _log_path_count(N, n, k) + (k + 1) * math.log(p)
    if log_val > 700.0:
        return math.inf
    return math.exp(log_val)


def open_count_variance_bound(params: ModelParams, length: int) -> float:
    """Variance bound for the open length-k path count, by regime of N*p."""
    p = params.require_open_prob()
    params.require_theory_branching()
    validate(params, PathQuery(length))
    N, k = params.branching, length
    mean = expected_open_count(params, length)
    if p < 1.0 / N:
        return 2.0 / (1.0 - N * p) * mean
    if p == 1.0 / N:
        return 2.0 * (k + 1) * mean
    return 2.0 * (N * p) ** (k + 1) / (N * p - 1.0) * mean


def lln_limit(N: int, p: float) -> float:
    """In-probability limit of (longest open run)/depth.

    -ln(N)/ln(p) in the subcritical regime p < 1/N, and 1 from criticality up.
    """
    ModelParams(N, 1, p).require_theory_branching()
    if p < 1.0 / N:
        return -math.log(N) / math.log(p)
    return 1.0


def _log_path_count(N: int, n: int, k: int) -> float:
    # log of (N^(n+1) - N^k)/(N-1) without forming the big integers
    if N == 1:
        return math.log(n - k + 1)
    return (
        (n + 1) * math.log(N)
        + math.log1p(-math.exp((k - n - 1) * math.log(N)))
        - math.log(N - 1)
    )


def expected_increasing_count(params: ModelParams, length: int, *, as_fraction: bool = False):
    """Mean number of increasing length-k paths: M / (k+1)!.

    Exact rational with as_fraction=True (path counts are exact integers);
    float via log-gamma otherwise, safe far beyond double factorial range.
    """
    validate(params, PathQuery(length))
    N, n, k = params.branching, params.depth, length
    if as_fraction:
        return Fraction(path_count(N, n, k), math.factorial(k + 1))
    log_val = _log_path_count(N, n, k) - math.lgamma(k + 2)
    if log_val > 700.0:
        return math.inf
    return math.exp(log_val)


def solve_window_center(N: int, n: int) -> tuple[float, float, float]:
    """Solve b*e^b = n*ln(N)/e; return (b, f, frac) with f = n*ln(N)/b - 1/2.

    Bisection brackets the unique root of the increasing map x*e^x, then
    Newton polishes to the rounding floor of the target.
    """
    ModelParams(N, 1).require_theory_branching()
    if n < 1:
        raise ValidationError("depth", "window center needs n >= 1")
    target = n * math.log(N) / math.e
    lo, hi = 0.0, 1.0
    while hi * math.exp(hi) < target:
        hi *= 2.0
    for _ in range(100):
        mid = 0.5 * (lo + hi)
        if mid * math.exp(mid) < target:
            lo = mid
        else:
            hi = mid
    b = 0.5 * (lo + hi)
    for _ in range(8):
        eb = math.exp(b)
        resid = b * eb - target
        step = resid / (eb * (1.0 + b))
        if b - step <= 0.0:
            break
        b -= step
        if abs(step) < 1e-16 * max(b, 1.0):
            break
    f = n * math.log(N) / b - 0.5
    return b, f, f - math.floor(f)


def gamma_ratio(N: int, n: int, x: float) -> tuple[float, float]:
    """(N^n / Gamma(f + x + 1), Stirling equivalent exp(-x*ln(f+x))/sqrt(2*pi)).

    The two expressions share their n -> infinity limit: 0 for x > 0,
    +infinity for x < 0, 1/sqrt(2*pi) at x = 0.  Log-safe throughout.
    """
    _, f, _ = solve_window_center(N, n)
    if f + x <= 0.0 or f + x + 1.0 <= 0.0:
        raise ValidationError("x", f"need f + x > 0 (f = {f:.6g})")
    exact = math.exp(n * math.log(N) - math.lgamma(f + x + 1.0))
    stirling = math.exp(-x * math.log(f + x)) / SQRT_TWO_PI
    return exact, stirling


def poisson_tv_bound(N: int, k: int) -> tuple[float, float]:
    """(q, D): total-variation bound between the increasing-path count and a
    Poisson law of the same mean.

    Defined only for q = 8N/(2k+3) < 1, i.e. k > (8N-3)/2.  D routinely
    exceeds 1 at desk scale; it is reported as-is, vacuousness included.
    """
    ModelParams(N, 1).require_theory_branching()
    q = 8.0 * N / (2 * k + 3)
    if q >= 1.0:
        raise ValidationError("length", f"bound undefined at this k: q = {q:.4g} >= 1")
    D = (k + 2) * math.exp(k * math.log(N) - math.lgamma(k + 2)) + 4.0 * N / ((k + 2) * (1.0 - q))
    return q, D


def _envelope_lambda(N: int, n: int, k: int) -> float:
    """Expected increasing length-k path count, extended by 0 beyond the depth."""
    if k > n:
        return 0.0
    return expected_increasing_count(ModelParams(N, n), k)


def increasing_window_prediction(N: int, n: int) -> IncreasingPrediction:
    """Predicted law of the longest increasing path around its window.

    P(length < k) is approximated by exp(-lambda(k)); point masses are the
    consecutive differences, and the window mass spans the three central
    values.  The total-variation bounds are attached wherever defined.
    """
    ModelParams(N, 1).require_theory_branching()
    if n < 2:
        raise ValidationError("depth", "window prediction needs n >= 2")
    b, f, frac = solve_window_center(N, n)
    centre = math.floor(f)
    ks = range(centre - 2, centre + 4)
    lambdas = {k: _envelope_lambda(N, n, k) for k in ks}
    tv = {}
    for k in ks:
        try:
            tv[k] = poisson_tv_bound(N, k)
        except ValidationError:
            pass
    masses = {
        k: math.exp(-lambdas[k + 1]) - math.exp(-lambdas[k])
        for k in range(centre - 2, centre + 3)
    }
    window_mass = math.exp(-lambdas[centre + 2]) - math.exp(-lambdas[centre - 1])
    a_est = frac * math.log(f) if frac < 0.5 else (1.0 - frac) * math.log(f)
    return IncreasingPrediction(
        b=b,
        f=f,
        frac=frac,
        lambdas=lambdas,
        tv_bounds=tv,
        window=(centre - 1, centre, centre + 1),
        window_mass=window_mass,
        point_masses=masses,
        corollary_a=a_est,
    )


def increasing_envelope_pmf(N: int, n: int):
    """Full predicted law of the longest increasing path from the exp(-lambda)
    envelope, as a Pmf on 0..n.

    The envelope CDF is clamped to the exact boundary values P(length < 0) = 0
    and P(length < n+1) = 1, so the prediction is a proper law at every size.
    """
    from .dp import Pmf  # local import: dp depends on model only, no cycle

    ModelParams(N, 1).require_theory_branching()
    cdf = [0.0] + [math.exp(-_envelope_lambda(N, n, k)) for k in range(1, n + 1)] + [1.0]
    return Pmf.from_arrays(range(n + 1), [b - a for a, b in zip(cdf, cdf[1:])])


def two_point_mass(N: int, a: float, side: str) -> float:
    """Limiting two-point mass along subsequences with extreme fractional parts.

    side="low" (fractional part -> 0): the mass at the window's lower value,
    exp(-N*e^a / (sqrt(2*pi)*(N-1))); side="high" (fractional part -> 1): the
    mass at the central value, with e^a replaced by e^-a.  a may be math.inf.
    """
    ModelParams(N, 1).require_theory_branching()
    if a < 0.0:
        raise ValidationError("a", "parameter must lie in [0, inf]")
    if side not in ("low", "high"):
        raise ValidationError("side", "expected 'low' or 'high'")
    signed = a if side == "low" else -a
    if math.isinf(signed):
        return 0.0 if signed > 0 else 1.0
    return math.exp(-N * math.exp(signed) / (SQRT_TWO_PI * (N - 1)))


def pair_increasing_formula(k: int, s: int, t: int) -> float:
    """Joint increasing probability for an overlapping pair of length-k paths,
    as the closed form (2k+2-s-t)! / ((2k+2-s)! (k+1-s)! (k+1-t)!).

    See PAIR_FORMULA_NOTE: the rank-ordering oracle arbitrates this formula,
    and on overlapping configurations the two disagree under the documented
    (s, t) convention.  Evaluated via log-gamma.
    """
    if not (0 <= s <= t <= k + 1):
        raise ValidationError("overlap_pair", f"need 0 <= s <= t <= k+1, got {(s, t)}")
    return math.exp(
        math.lgamma(2 * k + 3 - s - t)
        - math.lgamma(2 * k + 3 - s)
        - math.lgamma(k + 2 - s)
        - math.lgamma(k + 2 - t)
    )
