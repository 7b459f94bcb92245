"""Scenario execution: validate, evolve, verify, serialize.

Each enabled check compares the recorded trajectory against one
qualitative claim about the flow; the report carries the claim text so
a failing run points straight at the violated statement.
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import analysis
from .config import CHECK_NAMES, ScenarioConfig
from .errors import NoHypothesis, NonlocalFlowError, NoSettlingTime
from .integrator import TrajectoryRecord, evolve, solve_characteristic
from .state import HypothesisClass, build_ensemble, mass, validate_hypothesis

THREADS_ENV_VAR = "NONLOCAL_FLOW_THREADS"

MASS_DRIFT_TOL = 1e-8
INTERVAL_INFLATE = 1e-9
LYAPUNOV_SLACK_SCALE = 1e-7
OMEGA_LEVEL_TOL = 1e-5
OMEGA_LAMBDA_TOL = 1e-6
LAMBDA_SIGN_MARGIN = 1e-6
CHARACTERISTIC_TOL = 1e-5
BUCKET_TOL = 1e-4

CLAIMS = {
    "mass": "the integral of u over the domain is constant in time",
    "interval": ("u(x,t) and the nonlocal coefficient stay in the "
                 "invariant interval of the hypothesis class"),
    "lyapunov": ("every admissible functional with the class sign is "
                 "non-increasing along the trajectory"),
    "omega_limit": ("the long-time state is the step function determined "
                    "by the initial level sets and mass conservation"),
    "characteristic": ("the coupled solution coincides with the scalar "
                       "characteristic driven by the recorded coefficient"),
    "sandwich": ("once the coefficient settles, each characteristic is "
                 "bracketed by the frozen-coefficient sub/supersolutions"),
    "h2_uniqueness": ("at most one initial value may converge to an "
                      "interior coefficient limit"),
}


@dataclass
class CheckOutcome:
    name: str
    ok: bool
    claim: str
    details: dict


@dataclass
class ScenarioResult:
    name: str
    ok: bool
    hypothesis: HypothesisClass | None
    termination: str | None
    error: str | None
    checks: list[CheckOutcome]
    record: TrajectoryRecord | None
    prediction: analysis.OmegaPrediction | None
    lyapunov_names: tuple[str, ...]


def _predicted_levels(e0, hyp, lam_inf) -> np.ndarray:
    if hyp.tag == "H1":
        return np.where(e0.values == 1.0, 1.0, lam_inf)
    return np.where(e0.values == 0.0, 0.0, lam_inf)


def _check_mass(record, m0):
    drift = float(np.max(np.abs(record.mass_series - m0)))
    tol = MASS_DRIFT_TOL * (1.0 + abs(m0))
    return drift <= tol, {"max_drift": drift, "tolerance": tol}


def _check_interval(record, hyp):
    lo, hi = hyp.interval
    lam_lo = float(np.min(record.lambda_series))
    lam_hi = float(np.max(record.lambda_series))
    ok = (record.value_min >= lo - INTERVAL_INFLATE
          and record.value_max <= hi + INTERVAL_INFLATE
          and lam_lo >= lo - INTERVAL_INFLATE
          and lam_hi <= hi + INTERVAL_INFLATE)
    return ok, {
        "interval": [lo, hi],
        "value_min": record.value_min, "value_max": record.value_max,
        "lambda_min": lam_lo, "lambda_max": lam_hi,
    }


def _check_lyapunov(record):
    ok = True
    details = {}
    for name, series in record.lyapunov_series.items():
        slack = LYAPUNOV_SLACK_SCALE * (1.0 + abs(float(series[0])))
        rep = analysis.check_monotone(list(zip(record.times, series)), slack)
        ok = ok and rep.ok
        details[name] = {"ok": rep.ok, "worst_violation": rep.worst_violation,
                         "slack": slack}
    return ok, details


def _check_omega_limit(record, e0, hyp, prediction):
    final = record.final_ensemble
    if hyp.tag == "H2":
        buckets = analysis.classify_terminal(final, record.final_lambda,
                                             BUCKET_TOL)
        counts = {b.value: 0 for b in analysis.Bucket}
        for b in buckets:
            counts[b.value] += 1
        ok = counts[analysis.Bucket.AMBIGUOUS.value] == 0
        return ok, {
            "buckets": counts,
            "lambda_trace_value": record.final_lambda,
            "note": "interior coefficient limit is a trace value; "
                    "no convergence claim",
        }
    lam_inf = prediction.lambda_infinity
    levels = _predicted_levels(e0, hyp, lam_inf)
    level_dev = float(np.max(np.abs(final.values - levels)))
    lam_dev = abs(record.final_lambda - lam_inf)
    if hyp.tag == "H1":
        sign_ok = record.final_lambda > 1.0 + LAMBDA_SIGN_MARGIN
    else:
        sign_ok = record.final_lambda < -LAMBDA_SIGN_MARGIN
    ok = (level_dev <= OMEGA_LEVEL_TOL and lam_dev <= OMEGA_LAMBDA_TOL
          and sign_ok and record.termination.value == "SteadyState")
    return ok, {
        "lambda_predicted": lam_inf,
        "lambda_final": record.final_lambda,
        "max_level_deviation": level_dev,
        "lambda_deviation": lam_dev,
        "sign_ok": sign_ok,
        "termination": record.termination.value,
    }


def _check_characteristic(record, e0, ctrl):
    if record.times.size < 2:
        return True, {"note": "single-sample record; nothing to re-solve"}
    path = record.lambda_path()
    worst = 0.0
    for i in range(len(e0)):
        resolved = solve_characteristic(float(e0.values[i]), path, ctrl)
        coupled = record.atom_trajectory(i)
        gap = float(np.max(np.abs(resolved.values - coupled.values)))
        worst = max(worst, gap)
    return worst <= CHARACTERISTIC_TOL, {
        "max_gap": worst, "tolerance": CHARACTERISTIC_TOL,
    }


def _check_sandwich(record, e0, hyp, eps, ctrl):
    if hyp.tag == "H2":
        return True, {"note": "not applicable under H2 (interior values "
                              "flip the bracketing signs)"}
    if record.times.size < 2:
        return True, {"note": "single-sample record; bracket is vacuous"}
    if hyp.tag == "H1":
        idx = np.nonzero(e0.values > 1.0)[0]
    else:
        idx = np.nonzero(e0.values < 0.0)[0]
    ok = True
    per_atom = {}
    for i in idx:
        traj = record.atom_trajectory(int(i))
        try:
            rep = analysis.sandwich_check(traj, record.lambda_series, eps, ctrl)
        except NoSettlingTime as exc:
            ok = False
            per_atom[str(i)] = {"ok": False, "error": str(exc)}
            continue
        ok = ok and rep.ok
        per_atom[str(i)] = {"ok": rep.ok, "settle_time": rep.settle_time,
                            "lower_margin": rep.lower_margin,
                            "upper_margin": rep.upper_margin}
    return ok, {"eps": eps, "atoms": per_atom}


def _check_h2_uniqueness(record, e0, hyp):
    if hyp.tag != "H2":
        return True, {"note": "not applicable outside H2"}
    lam = record.final_lambda
    if not (0.0 < lam < 1.0):
        return True, {"note": f"trace coefficient {lam!r} not inside (0, 1)"}
    buckets = analysis.classify_terminal(record.final_ensemble, lam, BUCKET_TOL)
    rep = analysis.check_h2_uniqueness(e0, buckets, lam)
    return rep.ok, {"offending_values": list(rep.offending_values)}


def run_scenario(cfg: ScenarioConfig,
                 force_all_checks: bool = False) -> ScenarioResult:
    """Validate, integrate, and run the enabled checks for one scenario."""

    def enabled(name: str) -> bool:
        if force_all_checks and name not in cfg.checks_explicit:
            return True
        return cfg.checks[name]

    checks: list[CheckOutcome] = []
    try:
        e0 = build_ensemble(cfg.initial_datum)
        hyp = validate_hypothesis(e0)
        if cfg.lyapunov is None:
            specs = analysis.default_catalog(hyp)
        else:
            specs = tuple(analysis.lyapunov_spec(n, hyp) for n in cfg.lyapunov)
        prediction = analysis.predict_omega_limit(e0, hyp)
        record = evolve(e0, cfg.control, lyapunov_specs=specs, hypothesis=hyp)
    except NoHypothesis as exc:
        return ScenarioResult(cfg.name, False, None, None,
                              f"NoHypothesis: {exc}", [], None, None, ())
    except NonlocalFlowError as exc:
        return ScenarioResult(cfg.name, False, None, None,
                              f"{type(exc).__name__}: {exc}", [], None, None, ())

    m0 = mass(e0)
    runners = {
        "mass": lambda: _check_mass(record, m0),
        "interval": lambda: _check_interval(record, hyp),
        "lyapunov": lambda: _check_lyapunov(record),
        "omega_limit": lambda: _check_omega_limit(record, e0, hyp, prediction),
        "characteristic": lambda: _check_characteristic(record, e0, cfg.control),
        "sandwich": lambda: _check_sandwich(record, e0, hyp,
                                            cfg.sandwich_eps, cfg.control),
        "h2_uniqueness": lambda: _check_h2_uniqueness(record, e0, hyp),
    }
    all_ok = True
    for name in CHECK_NAMES:
        if not enabled(name):
            continue
        ok, details = runners[name]()
        all_ok = all_ok and ok
        checks.append(CheckOutcome(name=name, ok=ok, claim=CLAIMS[name],
                                   details=details))
    return ScenarioResult(cfg.name, all_ok, hyp, record.termination.value,
                          None, checks, record, prediction,
                          tuple(s.name for s in specs))


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def emit_csv(record: TrajectoryRecord, path: Path | str):
    """Write the series (17 significant digits, LF endings) plus the
    final-snapshot sidecar <path>.final.csv."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(record.lyapunov_series)
    header = "t,lambda,mass" + "".join(f",E_{n}" for n in names)
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for i in range(record.times.size):
            row = [_fmt(record.times[i]), _fmt(record.lambda_series[i]),
                   _fmt(record.mass_series[i])]
            row += [_fmt(record.lyapunov_series[n][i]) for n in names]
            fh.write(",".join(row) + "\n")
    final = record.final_ensemble
    with open(f"{path}.final.csv", "w", newline="\n") as fh:
        fh.write("atom_index,value,weight\n")
        for i in range(len(final)):
            fh.write(f"{i},{_fmt(final.values[i])},{_fmt(final.weights[i])}\n")


def prediction_dict(prediction: analysis.OmegaPrediction | None) -> dict | None:
    if prediction is None:
        return None
    return {
        "kind": prediction.kind.value,
        "lambda_infinity": prediction.lambda_infinity,
        "pieces": [{"level": lv, "measure": ms} for lv, ms in prediction.pieces],
    }


def result_dict(res: ScenarioResult) -> dict:
    out = {
        "name": res.name,
        "ok": res.ok,
        "hypothesis": None,
        "termination": res.termination,
        "error": res.error,
        "prediction": prediction_dict(res.prediction),
        "final": None,
        "limits": None,
        "checks": [{"name": c.name, "ok": c.ok, "claim": c.claim,
                    "details": c.details} for c in res.checks],
    }
    if res.hypothesis is not None:
        out["hypothesis"] = {"tag": res.hypothesis.tag,
                             "interval": list(res.hypothesis.interval)}
    record = res.record
    if record is not None:
        out["final"] = {
            "time": float(record.times[-1]),
            "lambda": record.final_lambda,
            "mass": float(record.mass_series[-1]),
            "termination": record.termination.value,
        }
        if record.times.size >= 10:
            limits = analysis.estimate_limits(record)
            out["limits"] = {"l_g": limits.l_g, "l_f": limits.l_f,
                             "converged": limits.converged}
    return out


def _resolve_threads(n_scenarios: int, threads: int | None) -> int:
    if threads is None:
        env = os.environ.get(THREADS_ENV_VAR, "").strip()
        try:
            threads = int(env) if env else (os.cpu_count() or 1)
        except ValueError:
            threads = os.cpu_count() or 1
    return max(1, min(threads, n_scenarios))


def run_config(cfgs: list[ScenarioConfig], out_dir: Path | str | None = None,
               force_all_checks: bool = False,
               threads: int | None = None) -> list[ScenarioResult]:
    """Run scenarios (possibly concurrently) and write per-scenario
    outputs plus one report.json. Results keep config order."""
    n = _resolve_threads(len(cfgs), threads)
    if n > 1:
        with ThreadPoolExecutor(max_workers=n) as pool:
            results = list(pool.map(
                lambda c: run_scenario(c, force_all_checks), cfgs))
    else:
        results = [run_scenario(c, force_all_checks) for c in cfgs]
    if out_dir is not None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        for res in results:
            if res.record is not None:
                emit_csv(res.record, out_dir / f"{res.name}.csv")
        report = {"scenarios": [result_dict(r) for r in results]}
        with open(out_dir / "report.json", "w", newline="\n") as fh:
            json.dump(report, fh, indent=2)
            fh.write("\n")
    return results
