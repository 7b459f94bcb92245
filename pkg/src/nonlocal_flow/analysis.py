"""Executable forms of the qualitative theory.

Monotone functionals along trajectories, long-time limits of the
coefficient's numerator and denominator, closed-form limit prediction
from the initial datum alone, terminal-state classification, and the
sub/supersolution sandwich.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .backend import kernels
from .errors import DegenerateSupport, NoSettlingTime
from .integrator import (LambdaPath, ScalarTrajectory, StepControl,
                         TrajectoryRecord, solve_characteristic)
from .state import Ensemble, HypothesisClass, mass

PHI_PRIME_SAMPLES = 1000
PHI_PRIME_SLACK = 1e-12


@dataclass(frozen=True)
class LyapunovSpec:
    """A C^1 integrand with non-decreasing derivative on the invariant
    interval, plus the sign making the functional non-increasing."""

    name: str
    phi: Callable
    phi_prime: Callable
    sign: int


def _phi_identity(z):
    return np.asarray(z, dtype=np.float64)


def _one(z):
    return np.ones_like(np.asarray(z, dtype=np.float64))


def _square(z):
    return z * z


def _two_z(z):
    return 2.0 * z


def _cube(z):
    return z * z * z


def _three_z2(z):
    return 3.0 * (z * z)


def _quartic(z):
    return (z * z) * (z * z)


def _four_z3(z):
    return 4.0 * (z * z * z)


CATALOG: dict[str, tuple[Callable, Callable]] = {
    "mass": (_phi_identity, _one),
    "square": (_square, _two_z),
    "cube": (_cube, _three_z2),
    "quartic": (_quartic, _four_z3),
    "exp": (np.exp, np.exp),
}

# The four entries valid under every hypothesis class; "cube" joins
# under H2 (its derivative decreases on negative values, so it is
# rejected under H3).
DEFAULT_CATALOG_NAMES = ("mass", "square", "quartic", "exp")


def lyapunov_spec(name: str, hyp: HypothesisClass) -> LyapunovSpec:
    """Build a catalog entry for a hypothesis class.

    Verifies by dense sampling that the derivative is non-decreasing on
    the class's invariant interval; raises ValueError otherwise.
    """
    if name not in CATALOG:
        raise ValueError(f"unknown catalog entry {name!r}")
    phi, phi_prime = CATALOG[name]
    xs = np.linspace(hyp.interval_lo, hyp.interval_hi, PHI_PRIME_SAMPLES)
    pp = np.asarray(phi_prime(xs), dtype=np.float64)
    if np.any(np.diff(pp) < -PHI_PRIME_SLACK):
        raise ValueError(
            f"{name!r}: derivative is not non-decreasing on "
            f"[{hyp.interval_lo}, {hyp.interval_hi}]")
    return LyapunovSpec(name=name, phi=phi, phi_prime=phi_prime, sign=hyp.sign)


def default_catalog(hyp: HypothesisClass) -> tuple[LyapunovSpec, ...]:
    names = DEFAULT_CATALOG_NAMES + (("cube",) if hyp.tag == "H2" else ())
    return tuple(lyapunov_spec(n, hyp) for n in names)


def lyapunov_value(e: Ensemble, spec: LyapunovSpec) -> float:
    """sign * compensated sum of weight * phi(value), in atom order."""
    phi_vals = np.asarray(spec.phi(e.values), dtype=np.float64)
    return spec.sign * kernels().kahan_dot(e.weights, phi_vals)


@dataclass(frozen=True)
class MonotoneReport:
    ok: bool
    worst_violation: float


def check_monotone(series: Sequence[tuple[float, float]],
                   slack: float) -> MonotoneReport:
    """Non-increasing check: E(t_{k+1}) <= E(t_k) + slack for all k."""
    values = [float(e) for _, e in series]
    if len(values) < 2:
        return MonotoneReport(ok=True, worst_violation=0.0)
    diffs = np.diff(np.array(values))
    worst = float(np.max(diffs))
    return MonotoneReport(ok=worst <= slack, worst_violation=worst)


@dataclass(frozen=True)
class LimitsEstimate:
    l_g: float
    l_f: float
    converged: bool


def estimate_limits(record: TrajectoryRecord,
                    window_fraction: float = 0.1,
                    flat_tol: float = 1e-8) -> LimitsEstimate:
    """Terminal values of int g(u) and int f(u) with a convergence flag.

    converged means both series vary by less than flat_tol over the
    last window_fraction of recorded time.
    """
    times = record.times
    if times.size < 10:
        raise ValueError("need at least 10 recorded samples")
    cutoff = times[-1] - window_fraction * (times[-1] - times[0])
    idx = times >= cutoff
    g_win = record.int_g_series[idx]
    f_win = record.int_f_series[idx]
    converged = (float(np.max(g_win) - np.min(g_win)) < flat_tol
                 and float(np.max(f_win) - np.min(f_win)) < flat_tol)
    return LimitsEstimate(l_g=float(record.int_g_series[-1]),
                          l_f=float(record.int_f_series[-1]),
                          converged=converged)


class PredictionKind(str, enum.Enum):
    H1_STEP = "H1Step"
    H3_STEP = "H3Step"
    H2_PARTIAL = "H2Partial"


@dataclass(frozen=True)
class OmegaPrediction:
    """Closed-form limit derived from the initial datum alone.

    For H2 the theory pins only the structural form (levels 0, 1, and
    possibly one interior level), so kind is H2Partial with no
    coefficient-limit claim and no pieces.
    """

    kind: PredictionKind
    lambda_infinity: float | None
    pieces: tuple[tuple[float, float], ...]


def _measure_of(e: Ensemble, mask: np.ndarray) -> float:
    w = e.weights[mask]
    if w.size == 0:
        return 0.0
    return float(kernels().kahan_dot(w, np.ones_like(w)))


def predict_omega_limit(e0: Ensemble, hyp: HypothesisClass) -> OmegaPrediction:
    """Predict the limit step function and the coefficient limit.

    H1: atoms at exactly 1 stay there; the rest share a common level
    fixed by mass conservation. H3: atoms at 0 stay, negative atoms
    share mass / |{u0 < 0}|. H2: structural form only.
    """
    m0 = mass(e0)
    if hyp.tag == "H1":
        at_one = e0.values == 1.0
        above = e0.values > 1.0
        w1 = _measure_of(e0, at_one)
        wp = _measure_of(e0, above)
        if wp == 0.0:
            raise DegenerateSupport("no atoms above 1 under H1")
        lam_inf = (m0 - w1) / wp
        pieces = ([(1.0, w1)] if w1 > 0.0 else []) + [(lam_inf, wp)]
        return OmegaPrediction(PredictionKind.H1_STEP, lam_inf, tuple(pieces))
    if hyp.tag == "H3":
        below = e0.values < 0.0
        at_zero = e0.values == 0.0
        wm = _measure_of(e0, below)
        w0 = _measure_of(e0, at_zero)
        if wm == 0.0:
            raise DegenerateSupport("no atoms below 0 under H3")
        lam_inf = m0 / wm
        pieces = [(lam_inf, wm)] + ([(0.0, w0)] if w0 > 0.0 else [])
        return OmegaPrediction(PredictionKind.H3_STEP, lam_inf, tuple(pieces))
    if hyp.tag == "H2":
        return OmegaPrediction(PredictionKind.H2_PARTIAL, None, ())
    raise ValueError(f"unknown hypothesis tag {hyp.tag!r}")


class Bucket(str, enum.Enum):
    ZERO = "Zero"
    ONE = "One"
    LAMBDA_INF = "LambdaInf"
    AMBIGUOUS = "Ambiguous"


def classify_terminal(e_final: Ensemble, lambda_inf: float | None,
                      tol: float = 1e-4) -> list[Bucket]:
    """Bucket each atom by the nearest candidate limit within tol.

    A value near no candidate, or near two at once, is Ambiguous; with
    an unknown coefficient limit only 0 and 1 are candidates.
    """
    candidates = [(0.0, Bucket.ZERO), (1.0, Bucket.ONE)]
    if lambda_inf is not None:
        candidates.append((float(lambda_inf), Bucket.LAMBDA_INF))
    out = []
    for v in e_final.values:
        hits = [b for level, b in candidates if abs(float(v) - level) <= tol]
        out.append(hits[0] if len(hits) == 1 else Bucket.AMBIGUOUS)
    return out


@dataclass(frozen=True)
class UniquenessReport:
    ok: bool
    offending_values: tuple[float, ...]


def check_h2_uniqueness(e0: Ensemble, buckets: Sequence[Bucket],
                        lambda_inf: float) -> UniquenessReport:
    """At most one distinct initial value may land on the interior limit."""
    if not (0.0 < lambda_inf < 1.0):
        raise ValueError("uniqueness applies only for a limit inside (0, 1)")
    if len(buckets) != len(e0):
        raise ValueError("buckets must align with the ensemble's atoms")
    landed = sorted({float(e0.values[i]) for i, b in enumerate(buckets)
                     if b is Bucket.LAMBDA_INF})
    if len(landed) <= 1:
        return UniquenessReport(ok=True, offending_values=())
    return UniquenessReport(ok=False, offending_values=tuple(landed))


@dataclass(frozen=True)
class SandwichReport:
    ok: bool
    settle_time: float
    lower_margin: float
    upper_margin: float


def sandwich_check(traj: ScalarTrajectory, lambda_series: np.ndarray,
                   eps: float, ctrl: StepControl | None = None,
                   inflate: float = 1e-9) -> SandwichReport:
    """Bracket one characteristic between two constant-coefficient flows.

    From the first time the recorded coefficient stays within eps of its
    final value, integrate the two autonomous bounding equations (the
    same reaction with the coefficient frozen at final -/+ eps) from the
    characteristic's value there, and require

        alpha(t) - inflate <= Y(t) <= beta(t) + inflate

    at every later sample. Margins are the worst observed slack on each
    side.
    """
    if ctrl is None:
        ctrl = StepControl()
    lam = np.asarray(lambda_series, dtype=float)
    times = np.asarray(traj.times, dtype=float)
    if lam.shape != times.shape:
        raise ValueError("lambda_series must align with the trajectory grid")
    lam_end = float(lam[-1])
    dev = np.abs(lam - lam_end)
    suffix_max = np.maximum.accumulate(dev[::-1])[::-1]
    settled = np.nonzero(suffix_max <= eps)[0]
    if settled.size == 0 or settled[0] >= times.size - 1:
        raise NoSettlingTime(
            f"coefficient never stays within {eps} of its final value "
            f"with at least one later sample")
    k = int(settled[0])
    sub_times = times[k:]
    y_start = float(traj.values[k])

    def bound(const_lam: float) -> np.ndarray:
        path = LambdaPath(sub_times, np.full(sub_times.size, const_lam))
        return solve_characteristic(y_start, path, ctrl).values

    alpha = bound(lam_end - eps)
    beta = bound(lam_end + eps)
    y = traj.values[k:]
    lower = float(np.min(y - alpha))
    upper = float(np.min(beta - y))
    ok = lower >= -inflate and upper >= -inflate
    return SandwichReport(ok=ok, settle_time=float(times[k]),
                          lower_margin=lower, upper_margin=upper)
