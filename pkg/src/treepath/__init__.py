"""Open-path percolation and increasing-path accessibility on rooted N-ary trees.

Layers, from trusted to fast: `oracle` brute-forces tiny instances, `dp`
computes exact laws by depth recursion, `exact` evaluates the closed forms and
limit predictions, `montecarlo` samples at scale behind a compiled kernel, and
`stats` compares all of the above.  The `treepath` CLI (see `cli`) surfaces
everything, including the one-shot verification suite.
"""

from . import dp, exact, model, montecarlo, oracle, stats
from .dp import Pmf, longest_open_pmf, theta_pmf
from .exact import (
    CountReport,
    IncreasingPrediction,
    MomentReport,
    SurvivalCurve,
    expected_increasing_count,
    expected_theta,
    extinction_curve,
    increasing_window_prediction,
    lln_limit,
    overlap_counts,
    survival_limit,
)
from .kernels import BACKEND
from .model import (
    ModelParams,
    PathQuery,
    ReplicateAborted,
    RngSpec,
    ScaleGuardError,
    ValidationError,
    VertexAddr,
    enumerate_paths,
    rng_stream,
    validate,
)
from .montecarlo import SampleBatch, run_batch
from .stats import EmpiricalLaw, compare_laws, empirical_law, wilson_interval

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "CountReport",
    "EmpiricalLaw",
    "IncreasingPrediction",
    "ModelParams",
    "MomentReport",
    "PathQuery",
    "Pmf",
    "ReplicateAborted",
    "RngSpec",
    "SampleBatch",
    "ScaleGuardError",
    "SurvivalCurve",
    "ValidationError",
    "VertexAddr",
    "compare_laws",
    "dp",
    "empirical_law",
    "enumerate_paths",
    "exact",
    "expected_increasing_count",
    "expected_theta",
    "extinction_curve",
    "increasing_window_prediction",
    "lln_limit",
    "longest_open_pmf",
    "model",
    "montecarlo",
    "oracle",
    "overlap_counts",
    "rng_stream",
    "run_batch",
    "stats",
    "survival_limit",
    "theta_pmf",
    "validate",
]
