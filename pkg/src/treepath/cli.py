"""Command-line surface: closed forms, simulation, parameter sweeps, verification.

Every run produces a RunRecord {command, params, results, meta} serialized as
JSON (default) or CSV.  The results payload is a pure function of the resolved
parameters: reruns and different worker counts reproduce it byte for byte
(meta carries the wall time and is excluded from that contract).  Exit codes:
0 success, 1 invalid arguments, 2 numerical failure / scale guard / aborted
replicates, 3 verification failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, is_dataclass
from fractions import Fraction

from . import __version__, dp, exact, stats, verify
from .kernels import BACKEND
from .model import (
    ModelParams,
    NumericalError,
    ReplicateAborted,
    ScaleGuardError,
    ValidationError,
)
from .montecarlo import run_batch

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2
EXIT_VERIFY = 3

_STAT_FLAGS = {
    "theta": "theta",
    "longest-open": "longest_open",
    "longest-increasing": "longest_increasing",
    "increasing-count": "increasing_count",
}


def _render(value):
    """JSON-ready rendering; floats keep their shortest round-trip form."""
    if is_dataclass(value) and not isinstance(value, type):
        value = asdict(value)
    if isinstance(value, dict):
        return {str(k): _render(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_render(v) for v in value]
    if isinstance(value, Fraction):
        return str(value)
    if hasattr(value, "item") and not isinstance(value, (str, bytes)):  # numpy scalars
        value = value.item()
    return value


def _flatten(tree, prefix=""):
    if isinstance(tree, dict):
        for key, sub in tree.items():
            yield from _flatten(sub, f"{prefix}{key}.")
    elif isinstance(tree, list):
        for i, sub in enumerate(tree):
            yield from _flatten(sub, f"{prefix}{i}.")
    else:
        yield prefix[:-1], tree


@dataclass
class RunRecord:
    command: str
    params: dict
    results: dict
    meta: dict

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "params": _render(self.params),
            "results": _render(self.results),
            "meta": _render(self.meta),
        }

    def results_json(self) -> bytes:
        """Canonical bytes of the results payload (the determinism contract)."""
        return json.dumps(_render(self.results), sort_keys=True, separators=(",", ":")).encode()

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self) -> str:
        lines = ["key,value"]
        for key, value in _flatten(_render(self.results)):
            lines.append(f"{key},{'' if value is None else repr(value) if isinstance(value, float) else value}")
        return "\n".join(lines) + "\n"


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits 2; the contract wants 1
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _default_seed() -> int:
    return int(os.environ.get("TREEPATH_SEED", "0"))


def _add_common(parser):
    parser.add_argument("-N", "--branching", type=int, help="children per vertex")
    parser.add_argument("-n", "--depth", type=int, help="tree depth")
    parser.add_argument("-p", "--prob", type=float, help="open probability")
    parser.add_argument("-k", "--length", type=int, help="path length in edges")
    parser.add_argument("--format", choices=("json", "csv"), default="json")
    parser.add_argument("--out", metavar="FILE", help="write the record here instead of stdout")


def build_parser() -> _Parser:
    parser = _Parser(prog="treepath", description=__doc__)
    parser.add_argument("--version", action="version", version=f"treepath {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_exact = sub.add_parser("exact", help="evaluate closed forms and predictions")
    _add_common(p_exact)
    p_exact.add_argument("--what", required=True, choices=_EXACT_SELECTORS)
    p_exact.add_argument("--upto", type=int, help="recursion steps for qcurve")
    p_exact.add_argument("-x", type=float, help="offset for gamma-ratio")
    p_exact.add_argument("-a", type=float, help="two-point-mass parameter (inf allowed)")
    p_exact.add_argument("--side", choices=("low", "high"), default="low")
    p_exact.add_argument("-s", type=int, help="pair-formula s")
    p_exact.add_argument("-t", type=int, help="pair-formula t")

    p_sim = sub.add_parser("simulate", help="run a seeded Monte Carlo batch")
    _add_common(p_sim)
    p_sim.add_argument("--stat", required=True, choices=tuple(_STAT_FLAGS))
    p_sim.add_argument("-K", "--samples", type=int, required=True, help="replicates")
    p_sim.add_argument("--seed", type=int, default=None, help="base seed (default: TREEPATH_SEED or 0)")
    p_sim.add_argument("--workers", type=int, default=0, help="0 = auto; never affects results")
    p_sim.add_argument("--work-cap", type=int, default=None, help="visit budget per theta replicate")
    p_sim.add_argument("--ref", choices=("none", "dp", "poisson-window"), default="none")

    p_verify = sub.add_parser("verify", help="run the acceptance criteria")
    _add_common(p_verify)
    p_verify.add_argument("--only", help="run only criteria whose id contains this substring")
    p_verify.add_argument("--workers", type=int, default=0)

    p_sweep = sub.add_parser("sweep", help="iterate one flag over a range, long-format output")
    _add_common(p_sweep)
    p_sweep.add_argument("--what", help="exact-mode selector (as in `exact`)")
    p_sweep.add_argument("--stat", choices=tuple(_STAT_FLAGS), help="simulate-mode selector")
    p_sweep.add_argument("--upto", type=int)
    p_sweep.add_argument("-x", type=float)
    p_sweep.add_argument("-a", type=float)
    p_sweep.add_argument("--side", choices=("low", "high"), default="low")
    p_sweep.add_argument("-s", type=int)
    p_sweep.add_argument("-t", type=int)
    p_sweep.add_argument("-K", "--samples", type=int)
    p_sweep.add_argument("--seed", type=int, default=None)
    p_sweep.add_argument("--workers", type=int, default=0)
    p_sweep.add_argument("--work-cap", type=int, default=None)
    p_sweep.add_argument("--ref", choices=("none", "dp", "poisson-window"), default="none")
    p_sweep.add_argument("--sweep", required=True, choices=("N", "n", "p", "k", "K", "seed"))
    p_sweep.add_argument("--values", required=True, help="comma list or lo:hi:count")
    return parser


def _need(args, *names):
    missing = [n for n in names if getattr(args, n, None) is None]
    if missing:
        raise ValidationError(missing[0], f"flag required for this selector: {missing}")


def _params(args, need_p: bool) -> ModelParams:
    _need(args, "branching", "depth")
    if need_p:
        _need(args, "prob")
    return ModelParams(args.branching, args.depth, args.prob)


_EXACT_SELECTORS = (
    "expected-theta", "moments", "qcurve", "survival", "lln", "path-count",
    "overlaps", "variance-bound", "increasing-mean", "window-center",
    "gamma-ratio", "tv-bound", "window", "envelope", "two-point-mass",
    "pair-formula",
)


def run_record_for_exact(args) -> RunRecord:
    what = args.what
    if what not in _EXACT_SELECTORS:
        raise ValidationError("what", f"unknown selector {what!r}")
    start = time.perf_counter()
    if what == "expected-theta":
        results = {"expected_theta": exact.expected_theta(_params(args, True))}
    elif what == "moments":
        results = asdict(exact.theta_moments(_params(args, True)))
    elif what == "qcurve":
        _need(args, "upto")
        results = asdict(exact.extinction_curve(_params(args, True), args.upto))
    elif what == "survival":
        _need(args, "branching", "prob")
        results = {"survival": exact.survival_limit(args.branching, args.prob)}
    elif what == "lln":
        _need(args, "branching", "prob")
        results = {"limit": exact.lln_limit(args.branching, args.prob)}
    elif what == "path-count":
        _need(args, "branching", "depth", "length")
        results = {"path_count": exact.path_count(args.branching, args.depth, args.length)}
    elif what == "overlaps":
        _need(args, "length")
        results = asdict(exact.overlap_counts(_params(args, True), args.length))
    elif what == "variance-bound":
        _need(args, "length")
        results = {"bound": exact.open_count_variance_bound(_params(args, True), args.length)}
    elif what == "increasing-mean":
        _need(args, "length")
        results = {"expected_count": exact.expected_increasing_count(_params(args, False), args.length)}
    elif what == "window-center":
        _need(args, "branching", "depth")
        b, f, frac = exact.solve_window_center(args.branching, args.depth)
        results = {"b": b, "f": f, "frac": frac}
    elif what == "gamma-ratio":
        _need(args, "branching", "depth", "x")
        exact_ratio, stirling = exact.gamma_ratio(args.branching, args.depth, args.x)
        results = {"exact_ratio": exact_ratio, "stirling_equivalent": stirling}
    elif what == "tv-bound":
        _need(args, "branching", "length")
        q, bound = exact.poisson_tv_bound(args.branching, args.length)
        results = {"q": q, "D": bound}
    elif what == "window":
        _need(args, "branching", "depth")
        results = asdict(exact.increasing_window_prediction(args.branching, args.depth))
    elif what == "envelope":
        _need(args, "branching", "depth")
        law = exact.increasing_envelope_pmf(args.branching, args.depth)
        results = {"support": list(law.support), "probs": list(law.probs)}
    elif what == "two-point-mass":
        _need(args, "branching", "a")
        results = {"mass": exact.two_point_mass(args.branching, args.a, args.side)}
    else:  # pair-formula
        _need(args, "length", "s", "t")
        results = {
            "value": exact.pair_increasing_formula(args.length, args.s, args.t),
            "note": exact.PAIR_FORMULA_NOTE,
        }
    meta = _meta(seed=None, workers=None, wall=time.perf_counter() - start)
    return RunRecord("exact", _echo_args(args), results, meta)


def run_record_for_simulate(
    statistic: str,
    branching: int,
    depth: int,
    n_replicates: int,
    seed: int,
    open_prob: float | None = None,
    length: int | None = None,
    work_cap: int | None = None,
    workers: int = 0,
    ref: str = "none",
) -> RunRecord:
    start = time.perf_counter()
    params = ModelParams(branching, depth, open_prob)
    batch = run_batch(
        params, statistic, n_replicates, seed, workers=workers, length=length, work_cap=work_cap
    )
    results: dict = {
        "statistic": statistic,
        "n_replicates": batch.n_replicates,
        "aborted": list(batch.aborted),
        "samples_sha256": hashlib.sha256(
            b",".join(str(s).encode() for s in batch.samples)
        ).hexdigest(),
    }
    if batch.n_replicates and not batch.aborted:
        law = stats.empirical_law(batch)
        clean = batch.samples
        mean = sum(clean) / len(clean)
        results.update(
            mean=mean,
            variance=sum((s - mean) ** 2 for s in clean) / len(clean),
            min=min(clean),
            max=max(clean),
            counts={str(v): c for v, c in law.counts.items()},
        )
        reference = None
        slack = 0.0
        if ref == "dp":
            if statistic == "theta":
                reference = dp.theta_pmf(params)
            elif statistic == "longest_open":
                reference = dp.longest_open_pmf(params)
            else:
                raise ValidationError("ref", f"no exact DP law for {statistic}")
        elif ref == "poisson-window":
            if statistic != "longest_increasing":
                raise ValidationError("ref", "poisson-window applies to longest-increasing only")
            reference = exact.increasing_envelope_pmf(branching, depth)
            slack = 0.03  # documented model-error budget for the envelope
        if reference is not None:
            report = stats.compare_laws(law, reference, 0.01, model_slack=slack)
            results["comparison"] = {
                "reference": ref,
                "sup_distance": report.sup_distance,
                "tv_distance": report.tv_distance,
                "dkw_band": report.dkw_band,
                "model_slack": report.model_slack,
                "passed": report.passed,
            }
    meta = _meta(seed=seed, workers=workers, wall=time.perf_counter() - start)
    params_echo = {
        "statistic": statistic,
        "branching": branching,
        "depth": depth,
        "open_prob": open_prob,
        "length": length,
        "n_replicates": n_replicates,
        "seed": seed,
        "work_cap": work_cap,
        "ref": ref,
    }
    return RunRecord("simulate", params_echo, results, meta)


def run_record_for_verify(only: str | None, workers: int) -> tuple[RunRecord, int]:
    start = time.perf_counter()
    outcomes = verify.run_criteria(only=only, workers=workers)
    if not outcomes:
        raise ValidationError("only", f"no criterion id contains {only!r}")
    results = {
        "criteria": [o.as_dict() for o in outcomes],
        "passed": all(o.passed for o in outcomes),
        "n_passed": sum(o.passed for o in outcomes),
        "n_failed": sum(not o.passed for o in outcomes),
    }
    meta = _meta(seed=None, workers=workers, wall=time.perf_counter() - start)
    record = RunRecord("verify", {"only": only}, results, meta)
    return record, EXIT_OK if results["passed"] else EXIT_VERIFY


def _sweep_values(spec: str, flag: str):
    int_flags = {"N", "n", "k", "K", "seed"}
    if ":" in spec:
        lo, hi, count = spec.split(":")
        lo, hi, count = float(lo), float(hi), int(count)
        if count < 1:
            raise ValidationError("values", "count must be >= 1")
        step = (hi - lo) / (count - 1) if count > 1 else 0.0
        raw = [lo + i * step for i in range(count)]
    else:
        raw = [float(tok) for tok in spec.split(",") if tok]
    if flag in int_flags:
        return [int(round(v)) for v in raw]
    return raw


_SWEEP_TARGETS = {"N": "branching", "n": "depth", "p": "prob", "k": "length", "K": "samples", "seed": "seed"}


def cmd_sweep(args) -> RunRecord:
    if (args.what is None) == (args.stat is None):
        raise ValidationError("what", "sweep needs exactly one of --what or --stat")
    echo = _echo_args(args)
    start = time.perf_counter()
    rows = []
    for value in _sweep_values(args.values, args.sweep):
        setattr(args, _SWEEP_TARGETS[args.sweep], value)
        if args.what:
            record = run_record_for_exact(args)
        else:
            record = _simulate_from_args(args)
        for key, rendered in _flatten(_render(record.results)):
            rows.append({"flag": args.sweep, "flag_value": value, "key": key, "value": rendered})
    meta = _meta(
        seed=getattr(args, "seed", None),
        workers=getattr(args, "workers", None),
        wall=time.perf_counter() - start,
    )
    return RunRecord("sweep", echo, {"rows": rows}, meta)


def _simulate_from_args(args) -> RunRecord:
    _need(args, "branching", "depth", "samples")
    statistic = _STAT_FLAGS[args.stat]
    if statistic in ("theta", "longest_open"):
        _need(args, "prob")
    if statistic == "increasing_count":
        _need(args, "length")
    seed = args.seed if args.seed is not None else _default_seed()
    return run_record_for_simulate(
        statistic=statistic,
        branching=args.branching,
        depth=args.depth,
        open_prob=args.prob,
        length=args.length,
        n_replicates=args.samples,
        seed=seed,
        work_cap=args.work_cap,
        workers=args.workers,
        ref=args.ref,
    )


def _echo_args(args) -> dict:
    skip = {"command", "format", "out"}
    return {k: v for k, v in vars(args).items() if k not in skip and v is not None}


def _meta(seed, workers, wall) -> dict:
    return {
        "version": __version__,
        "backend": BACKEND,
        "base_seed": seed,
        "workers": workers,
        "wall_time_s": None if wall is None else round(wall, 4),
    }


def _emit(record: RunRecord, args) -> None:
    if args.command == "sweep" and args.format == "csv":
        lines = ["flag,flag_value,key,value"]
        for row in record.results["rows"]:
            value = row["value"]
            rendered = repr(value) if isinstance(value, float) else value
            lines.append(f"{row['flag']},{row['flag_value']},{row['key']},{rendered}")
        text = "\n".join(lines) + "\n"
    elif args.format == "csv":
        text = record.to_csv()
    else:
        text = record.to_json() + "\n"
    if args.out:
        with open(args.out, "w") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "exact":
            record, code = run_record_for_exact(args), EXIT_OK
        elif args.command == "simulate":
            record, code = _simulate_from_args(args), EXIT_OK
            if record.results["aborted"]:
                code = EXIT_NUMERIC
        elif args.command == "verify":
            record, code = run_record_for_verify(args.only, args.workers)
            for outcome in record.results["criteria"]:
                tag = "PASS" if outcome["passed"] else "FAIL"
                print(f"[{tag}] {outcome['cid']} ({outcome['seconds']}s) {outcome['description']}", file=sys.stderr)
        else:
            record, code = cmd_sweep(args), EXIT_OK
    except ValidationError as err:
        print(f"treepath: invalid arguments: {err}", file=sys.stderr)
        return EXIT_USAGE
    except (ScaleGuardError, NumericalError, ReplicateAborted) as err:
        print(f"treepath: {type(err).__name__}: {err}", file=sys.stderr)
        return EXIT_NUMERIC
    _emit(record, args)
    return code


if __name__ == "__main__":
    sys.exit(main())
