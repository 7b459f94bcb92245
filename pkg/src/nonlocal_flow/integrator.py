"""Adaptive time stepping for the coupled atom system.

The coupled system is autonomous in the atom values: the nonlocal
coefficient is re-evaluated from the stage state at every stage, which
keeps the weighted sum of derivatives exactly zero (up to compensated
rounding) and hence mass drift at integrator-error level.

Steps never pass the next recording time, so the recorded series live
on the uniform grid t0 + k * record_every plus the termination time.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .backend import kernels
from .errors import DenominatorVanishes, StepSizeUnderflow
from .state import Ensemble, HypothesisClass, validate_hypothesis

SAFETY = 0.9
FAC_MIN = 0.2
FAC_MAX = 5.0
ERR_EXPONENT = 0.2  # embedded pair of orders 5(4)


@dataclass(frozen=True)
class StepControl:
    """Tolerances and limits for the adaptive integrator."""

    abs_tol: float = 1e-10
    rel_tol: float = 1e-8
    h_init: float = 1e-3
    h_min: float = 1e-12
    h_max: float = 1.0
    t_max: float = 200.0
    steady_tol: float = 1e-10
    denom_guard: float = 1e-12
    record_every: float = 0.1

    def __post_init__(self):
        for name in ("abs_tol", "rel_tol", "h_init", "h_min", "h_max",
                     "t_max", "steady_tol", "denom_guard", "record_every"):
            if not (getattr(self, name) > 0.0):
                raise ValueError(f"{name} must be > 0")
        if not (self.h_min <= self.h_init <= self.h_max):
            raise ValueError("need h_min <= h_init <= h_max")


class Termination(str, enum.Enum):
    STEADY_STATE = "SteadyState"
    T_MAX_REACHED = "TMaxReached"
    DENOMINATOR_VANISHED = "DenominatorVanished"


@dataclass(frozen=True)
class ScalarTrajectory:
    """One characteristic sampled on a time grid."""

    times: np.ndarray
    values: np.ndarray


@dataclass(frozen=True)
class LambdaPath:
    """Piecewise-linear interpolant of the recorded nonlocal coefficient."""

    times: np.ndarray
    values: np.ndarray

    def __call__(self, t):
        return np.interp(t, self.times, self.values)


@dataclass
class TrajectoryRecord:
    """Observable series of one run; all series share the times axis."""

    times: np.ndarray
    lambda_series: np.ndarray
    mass_series: np.ndarray
    int_f_series: np.ndarray
    int_g_series: np.ndarray
    rhs_norm_series: np.ndarray
    lyapunov_series: dict[str, np.ndarray]
    snapshots: list[tuple[float, Ensemble]]
    termination: Termination
    value_min: float
    value_max: float

    @property
    def final_ensemble(self) -> Ensemble:
        return self.snapshots[-1][1]

    @property
    def final_lambda(self) -> float:
        return float(self.lambda_series[-1])

    def lambda_path(self) -> LambdaPath:
        return LambdaPath(self.times, self.lambda_series)

    def atom_trajectory(self, i: int) -> ScalarTrajectory:
        vals = np.array([snap.values[i] for _, snap in self.snapshots])
        return ScalarTrajectory(self.times, vals)


class _Recorder:
    def __init__(self, base: Ensemble, lyapunov_specs: Sequence):
        self.base = base
        self.specs = tuple(lyapunov_specs)
        self.kern = kernels()
        self.times: list[float] = []
        self.lams: list[float] = []
        self.masses: list[float] = []
        self.int_f: list[float] = []
        self.int_g: list[float] = []
        self.rhs_norms: list[float] = []
        self.lyap: dict[str, list[float]] = {s.name: [] for s in self.specs}
        self.snapshots: list[tuple[float, Ensemble]] = []

    def sample(self, t, y, lam, num, den, rnorm):
        if self.times and self.times[-1] == t:
            return
        self.times.append(t)
        self.lams.append(lam)
        self.masses.append(self.kern.kahan_dot(self.base.weights, y))
        self.int_f.append(num)
        self.int_g.append(den)
        self.rhs_norms.append(rnorm)
        for s in self.specs:
            phi_vals = np.asarray(s.phi(y), dtype=np.float64)
            self.lyap[s.name].append(
                s.sign * self.kern.kahan_dot(self.base.weights, phi_vals))
        self.snapshots.append((t, self.base.with_state(y, t)))

    def build(self, termination, vmin, vmax) -> TrajectoryRecord:
        return TrajectoryRecord(
            times=np.array(self.times),
            lambda_series=np.array(self.lams),
            mass_series=np.array(self.masses),
            int_f_series=np.array(self.int_f),
            int_g_series=np.array(self.int_g),
            rhs_norm_series=np.array(self.rhs_norms),
            lyapunov_series={k: np.array(v) for k, v in self.lyap.items()},
            snapshots=self.snapshots,
            termination=termination,
            value_min=vmin,
            value_max=vmax,
        )


def _attempt(kern, y, w, h, ctrl, guard_abs, t):
    """Trial steps from state y until one is accepted.

    Returns (y_new, h_used, h_suggest, err). Only error-driven
    reductions can underflow; an externally capped h below h_min is
    legal.
    """
    tol = ctrl.abs_tol + ctrl.rel_tol * float(np.max(np.abs(y)))
    while True:
        y_new, err, status = kern.ck_attempt(y, w, h, guard_abs)
        if status != kern.STATUS_OK:
            raise DenominatorVanishes(
                "stage denominator fell below the guard", time=t)
        if err <= tol:
            if err == 0.0:
                fac = FAC_MAX
            else:
                fac = min(FAC_MAX, max(FAC_MIN, SAFETY * (tol / err) ** ERR_EXPONENT))
            h_suggest = min(ctrl.h_max, max(ctrl.h_min, h * fac))
            return y_new, h, h_suggest, err
        h = h * max(FAC_MIN, SAFETY * (tol / err) ** ERR_EXPONENT)
        if h < ctrl.h_min:
            raise StepSizeUnderflow(
                f"step size {h:.3e} fell below h_min {ctrl.h_min:.3e} at t={t}")


def step(e: Ensemble, h: float, ctrl: StepControl) -> tuple[Ensemble, float, float]:
    """One accepted embedded 5(4) step starting with trial size h.

    Returns (new ensemble, suggested next step size, error estimate of
    the accepted trial). The actual advance may be smaller than h if
    trials were rejected.
    """
    if not (ctrl.h_min <= h <= ctrl.h_max):
        raise ValueError(f"h={h} outside [h_min, h_max]")
    guard_abs = ctrl.denom_guard * e.domain_measure
    y_new, h_used, h_suggest, err = _attempt(
        kernels(), e.values, e.weights, h, ctrl, guard_abs, e.time)
    return e.with_state(y_new, e.time + h_used), h_suggest, err


def evolve(e: Ensemble, ctrl: StepControl,
           lyapunov_specs: Sequence = (),
           hypothesis: HypothesisClass | None = None,
           require_hypothesis: bool = True) -> TrajectoryRecord:
    """Integrate until steady state, t_max, or a vanished denominator.

    Observables are recorded on the uniform record_every grid and at
    termination. A state whose own denominator is below the guard is
    never entered: the run ends at the last state with a well-defined
    coefficient, so every recorded sample carries a finite lambda.
    """
    if hypothesis is None and require_hypothesis:
        hypothesis = validate_hypothesis(e)
    kern = kernels()
    w = e.weights
    guard_abs = ctrl.denom_guard * e.domain_measure
    y = e.values.copy()
    t = float(e.time)
    t0 = t
    rec = _Recorder(e, lyapunov_specs)
    vmin = float(np.min(y))
    vmax = float(np.max(y))

    num, den = kern.reductions(y, w)
    if abs(den) < guard_abs:
        raise DenominatorVanishes(
            "initial state has |int g(u)| below the guard", time=t)
    lam = num / den
    r = kern.rhs_from_lambda(y, lam)
    rnorm = float(np.max(np.abs(r)))

    k_grid = 0
    h_suggest = ctrl.h_init
    termination = None

    rec.sample(t, y, lam, num, den, rnorm)
    while True:
        if rnorm < ctrl.steady_tol:
            termination = Termination.STEADY_STATE
            break
        if t >= ctrl.t_max:
            termination = Termination.T_MAX_REACHED
            break

        next_grid = t0 + (k_grid + 1) * ctrl.record_every
        upper = min(next_grid, ctrl.t_max)
        h_cap = min(h_suggest, upper - t)
        try:
            y_new, h_used, h_suggest, _ = _attempt(
                kern, y, w, h_cap, ctrl, guard_abs, t)
        except DenominatorVanishes:
            termination = Termination.DENOMINATOR_VANISHED
            break

        num2, den2 = kern.reductions(y_new, w)
        if abs(den2) < guard_abs:
            # Entering y_new would leave the equation undefined; stop at
            # the current state instead.
            termination = Termination.DENOMINATOR_VANISHED
            break

        landed = (h_used == h_cap) and (h_cap == upper - t)
        t = upper if landed else t + h_used
        y = y_new
        num, den = num2, den2
        lam = num / den
        r = kern.rhs_from_lambda(y, lam)
        rnorm = float(np.max(np.abs(r)))
        vmin = min(vmin, float(np.min(y)))
        vmax = max(vmax, float(np.max(y)))

        if landed and upper == next_grid:
            k_grid += 1
            rec.sample(t, y, lam, num, den, rnorm)

    rec.sample(t, y, lam, num, den, rnorm)
    return rec.build(termination, vmin, vmax)


def solve_characteristic(s: float, path: LambdaPath,
                         ctrl: StepControl) -> ScalarTrajectory:
    """Re-solve one characteristic against a recorded coefficient path.

    Integrates segment by segment so no step straddles a breakpoint of
    the piecewise-linear interpolant; within a segment the coefficient
    is exactly affine in time. Output is sampled at the path nodes.
    """
    kern = kernels()
    ts = np.asarray(path.times, dtype=float)
    lams = np.asarray(path.values, dtype=float)
    if ts.ndim != 1 or ts.shape != lams.shape or ts.size < 1:
        raise ValueError("path needs matching 1-d times/values")
    y = float(s)
    out = np.empty(ts.size)
    out[0] = y
    h_suggest = ctrl.h_init
    for k in range(ts.size - 1):
        t0 = float(ts[k])
        t1 = float(ts[k + 1])
        lam0 = float(lams[k])
        slope = (float(lams[k + 1]) - lam0) / (t1 - t0)
        t = t0
        while t < t1:
            remaining = t1 - t
            h = min(h_suggest, remaining)
            tol = ctrl.abs_tol + ctrl.rel_tol * abs(y)
            while True:
                y_new, err = kern.scalar_ck_attempt(y, t, h, t0, lam0, slope)
                if err <= tol:
                    break
                h = h * max(FAC_MIN, SAFETY * (tol / err) ** ERR_EXPONENT)
                if h < ctrl.h_min:
                    raise StepSizeUnderflow(
                        f"characteristic step underflow at t={t}")
            if err == 0.0:
                fac = FAC_MAX
            else:
                fac = min(FAC_MAX, max(FAC_MIN, SAFETY * (tol / err) ** ERR_EXPONENT))
            h_suggest = min(ctrl.h_max, max(ctrl.h_min, h * fac))
            t = t1 if h == remaining else t + h
            y = y_new
        out[k + 1] = y
    return ScalarTrajectory(ts, out)


def reference_evolve(e: Ensemble, h_fixed: float, t_end: float,
                     record_every: float = 0.1,
                     guard: float = 1e-12) -> TrajectoryRecord:
    """Brute-force oracle: classic fixed-step RK4 with the coefficient
    re-evaluated at every stage.

    Takes round(t_end / h_fixed) steps of exactly h_fixed. Raises
    DenominatorVanishes if any stage (or recorded state) trips the
    guard. Value bounds are tracked at record points only.
    """
    if not (h_fixed > 0.0):
        raise ValueError("h_fixed must be > 0")
    if not (t_end > 0.0):
        raise ValueError("t_end must be > 0")
    n_total = int(round(t_end / h_fixed))
    if n_total < 1:
        raise ValueError("t_end shorter than one step")
    stride = max(1, int(round(record_every / h_fixed)))
    kern = kernels()
    w = e.weights
    guard_abs = guard * e.domain_measure
    rec = _Recorder(e, ())
    y = e.values.copy()

    def observe(t, y):
        num, den = kern.reductions(y, w)
        if abs(den) < guard_abs:
            raise DenominatorVanishes(
                "denominator fell below the guard", time=t)
        lam = num / den
        r = kern.rhs_from_lambda(y, lam)
        rec.sample(t, y, lam, num, den, float(np.max(np.abs(r))))

    t0 = float(e.time)
    observe(t0, y)
    vmin = float(np.min(y))
    vmax = float(np.max(y))
    done = 0
    while done < n_total:
        chunk = min(stride, n_total - done)
        y, status, steps = kern.rk4_run(y, w, h_fixed, chunk, guard_abs)
        done += steps
        if status != kern.STATUS_OK:
            raise DenominatorVanishes(
                "stage denominator fell below the guard",
                time=t0 + done * h_fixed)
        t = t0 + done * h_fixed
        observe(t, y)
        vmin = min(vmin, float(np.min(y)))
        vmax = max(vmax, float(np.max(y)))
    return rec.build(Termination.T_MAX_REACHED, vmin, vmax)
