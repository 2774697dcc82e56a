"""Empirical laws and the comparison machinery used by the verification suites.

Distances are the usual ones on integer supports: Kolmogorov (sup of CDF
differences) and total variation (half the l1 difference of the pmfs).  The
DKW band sqrt(ln(2/delta) / (2K)) calibrates how far an empirical law may
stray from its target by sampling alone; model slack on top of it is an
explicit, documented budget, never an implicit fudge.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from statistics import NormalDist

from .dp import Pmf
from .model import ValidationError
from .montecarlo import SampleBatch


@dataclass(frozen=True)
class EmpiricalLaw:
    """Counts of observed integer values (sentinel -1 kept as a support point)."""

    counts: dict[int, int]
    total: int

    def pmf(self) -> Pmf:
        support = sorted(self.counts)
        return Pmf(tuple(support), tuple(self.counts[v] / self.total for v in support))

    def cdf(self, value: int) -> float:
        return sum(c for v, c in self.counts.items() if v <= value) / self.total

    def frequency(self, value: int) -> float:
        return self.counts.get(value, 0) / self.total


@dataclass(frozen=True)
class ComparisonReport:
    """Distances between an empirical law and a reference, with its pass verdict.

    `passed` is (sup_distance <= dkw_band + model_slack): sampling noise is
    budgeted by the band, systematic model error by the slack.
    """

    sup_distance: float
    tv_distance: float
    per_point: dict[int, float]
    dkw_band: float
    model_slack: float
    passed: bool


@dataclass(frozen=True)
class ConvergenceReport:
    """Exceedance masses P(|X/n - limit| > eps) along an n-grid."""

    points: tuple[tuple[int, float], ...]
    nonincreasing: bool
    final: float


def empirical_law(batch: SampleBatch) -> EmpiricalLaw:
    """Tabulate a batch into an empirical law; aborted batches are refused."""
    if batch.n_replicates < 1:
        raise ValidationError("n_replicates", "empirical law needs at least one sample")
    batch.require_clean()
    return EmpiricalLaw(dict(sorted(Counter(batch.samples).items())), batch.n_replicates)


def wilson_interval(successes: int, trials: int, confidence: float = 0.95) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if trials < 1:
        raise ValidationError("trials", "need trials >= 1")
    if not 0 <= successes <= trials:
        raise ValidationError("successes", "need 0 <= successes <= trials")
    if not 0.0 < confidence < 1.0:
        raise ValidationError("confidence", "must lie in (0,1)")
    z = NormalDist().inv_cdf(0.5 + confidence / 2.0)
    phat = successes / trials
    denom = 1.0 + z * z / trials
    centre = (phat + z * z / (2 * trials)) / denom
    half = z * math.sqrt(phat * (1.0 - phat) / trials + z * z / (4 * trials * trials)) / denom
    # the endpoints are exactly 0 / 1 at the degenerate boundaries; rounding
    # in centre -/+ half must not pull them inside the proportion
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == trials else min(1.0, centre + half)
    return lo, hi


def dkw_band(n_samples: int, delta: float) -> float:
    """Dvoretzky-Kiefer-Wolfowitz confidence band at level 1 - delta."""
    if n_samples < 1:
        raise ValidationError("n_samples", "need at least one sample")
    if not 0.0 < delta < 1.0:
        raise ValidationError("delta", "must lie in (0,1)")
    return math.sqrt(math.log(2.0 / delta) / (2.0 * n_samples))


def compare_laws(
    empirical: EmpiricalLaw,
    reference: Pmf,
    delta: float = 0.01,
    *,
    model_slack: float = 0.0,
) -> ComparisonReport:
    """Kolmogorov and total-variation distances of an empirical law to a reference."""
    emp = empirical.pmf() if isinstance(empirical, EmpiricalLaw) else empirical
    support = sorted(set(emp.support) | set(reference.support))
    emp_masses = emp.as_dict()
    ref_masses = reference.as_dict()
    per_point = {v: emp_masses.get(v, 0.0) - ref_masses.get(v, 0.0) for v in support}
    tv = 0.5 * sum(abs(d) for d in per_point.values())
    sup, acc = 0.0, 0.0
    for v in support:
        acc += per_point[v]
        sup = max(sup, abs(acc))
    band = dkw_band(empirical.total, delta) if isinstance(empirical, EmpiricalLaw) else dkw_band(1, delta)
    return ComparisonReport(
        sup_distance=sup,
        tv_distance=tv,
        per_point=per_point,
        dkw_band=band,
        model_slack=model_slack,
        passed=sup <= band + model_slack,
    )


def convergence_track(
    laws: list[tuple[int, Pmf]], limit: float, epsilon: float
) -> ConvergenceReport:
    """Exceedance masses P(|X/n - limit| > eps) over an n-grid of laws.

    The trend verdict tolerates 1e-12 of float noise around equality, so a
    sequence that has already converged to exceedance 0 still counts as
    nonincreasing.
    """
    if len(laws) < 3:
        raise ValidationError("laws", "need at least three grid points")
    pts = []
    for n, law in laws:
        exceed = sum(
            mass for value, mass in zip(law.support, law.probs) if abs(value / n - limit) > epsilon
        )
        pts.append((n, float(exceed)))
    noninc = all(b[1] <= a[1] + 1e-12 for a, b in zip(pts, pts[1:]))
    return ConvergenceReport(tuple(pts), noninc, pts[-1][1])
