"""Measure-valued state: finite weighted-atom ensembles.

The dynamics act pointwise in x and couple only through integrals over
the domain, so only the pushforward measure of the initial datum
matters. A state is therefore a finite list of atoms: one value of u
together with the Lebesgue measure of its level set.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .backend import kernels
from .errors import EmptySpec, NoHypothesis, NonpositiveWeight

_SUM_RTOL = 1e-12


@dataclass(frozen=True)
class Atom:
    """One value of u carried with the measure of its level set."""

    value: float
    weight: float

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"atom value must be finite, got {self.value}")
        if not (self.weight > 0.0):
            raise NonpositiveWeight(f"atom weight must be > 0, got {self.weight}")


@dataclass(frozen=True)
class Ensemble:
    """Immutable full state: atom values/weights, current time, |Omega|.

    Atom order is fixed at construction and never reordered, so every
    compensated reduction over the ensemble is deterministic.
    """

    values: np.ndarray
    weights: np.ndarray
    time: float = 0.0
    domain_measure: float | None = None  # None: derived from the weights

    def __post_init__(self):
        values = np.ascontiguousarray(self.values, dtype=np.float64)
        weights = np.ascontiguousarray(self.weights, dtype=np.float64)
        # Never flip writeability on a caller's array; share already-frozen ones.
        if values.flags.writeable:
            values = values.copy()
        if weights.flags.writeable:
            weights = weights.copy()
        if values.ndim != 1 or weights.shape != values.shape:
            raise ValueError("values and weights must be 1-d arrays of equal length")
        if values.shape[0] == 0:
            raise EmptySpec("ensemble needs at least one atom")
        if not np.all(np.isfinite(values)):
            raise ValueError("atom values must be finite")
        if not np.all(weights > 0.0):
            raise NonpositiveWeight("all atom weights must be > 0")
        if self.time < 0.0:
            raise ValueError("time must be >= 0")
        values.flags.writeable = False
        weights.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)

        total = kernels().kahan_dot(weights, np.ones_like(weights))
        if self.domain_measure is None:
            object.__setattr__(self, "domain_measure", total)
        else:
            if not (self.domain_measure > 0.0):
                raise ValueError("domain_measure must be > 0")
            if abs(total - self.domain_measure) > _SUM_RTOL * abs(self.domain_measure):
                raise ValueError(
                    f"atom weights sum to {total!r}, expected "
                    f"{self.domain_measure!r} within relative {_SUM_RTOL}")

    @property
    def atoms(self) -> tuple[Atom, ...]:
        return tuple(Atom(float(v), float(w))
                     for v, w in zip(self.values, self.weights))

    def __len__(self) -> int:
        return int(self.values.shape[0])

    def with_state(self, values: np.ndarray, time: float) -> "Ensemble":
        """Same weights and domain, new atom values and time."""
        return Ensemble(values=values, weights=self.weights, time=time,
                        domain_measure=self.domain_measure)


@dataclass(frozen=True)
class HypothesisClass:
    """Which admissible class the initial datum falls in, with its
    invariant interval."""

    tag: str  # "H1" | "H2" | "H3"
    interval_lo: float
    interval_hi: float

    @property
    def index(self) -> int:
        return {"H1": 1, "H2": 2, "H3": 3}[self.tag]

    @property
    def sign(self) -> int:
        """(-1)^(i+1): the sign making the monotone functionals decrease."""
        return 1 if self.index % 2 == 1 else -1

    @property
    def interval(self) -> tuple[float, float]:
        return (self.interval_lo, self.interval_hi)


@dataclass(frozen=True)
class AtomListSpec:
    """Explicit atoms (value, weight); equal values are merged."""

    atoms: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class PiecewiseSpec:
    """Piecewise-constant initial datum given as (value, measure) pieces."""

    pieces: tuple[tuple[float, float], ...]


@dataclass(frozen=True)
class SamplerSpec:
    """Closed-form u0 over a 1-d reference interval, midpoint-sampled.

    n atoms of equal weight domain_measure / n; never merged, so each
    sample keeps its identification with a point of the domain.
    """

    fn: Callable
    n: int
    domain_measure: float = 1.0


InitialDatumSpec = Union[AtomListSpec, PiecewiseSpec, SamplerSpec]


def _merged(pairs: Sequence[tuple[float, float]]) -> Ensemble:
    if len(pairs) == 0:
        raise EmptySpec("no atoms given")
    order: list[float] = []
    accum: dict[float, float] = {}
    for value, weight in pairs:
        value = float(value)
        weight = float(weight)
        if not (weight > 0.0):
            raise NonpositiveWeight(f"weight must be > 0, got {weight}")
        if value in accum:
            accum[value] += weight
        else:
            order.append(value)
            accum[value] = weight
    values = np.array(order, dtype=np.float64)
    weights = np.array([accum[v] for v in order], dtype=np.float64)
    return Ensemble(values=values, weights=weights, time=0.0)


def build_ensemble(spec: InitialDatumSpec) -> Ensemble:
    """Construct the time-0 ensemble from an initial datum spec.

    Explicit lists merge atoms with exactly equal values (weights
    summed, first-occurrence order kept). Sampler output is never
    merged.
    """
    if isinstance(spec, AtomListSpec):
        return _merged(spec.atoms)
    if isinstance(spec, PiecewiseSpec):
        return _merged(spec.pieces)
    if isinstance(spec, SamplerSpec):
        if spec.n < 1:
            raise EmptySpec(f"sampler needs n >= 1, got {spec.n}")
        if not (spec.domain_measure > 0.0):
            raise NonpositiveWeight(
                f"domain_measure must be > 0, got {spec.domain_measure}")
        xs = (np.arange(spec.n, dtype=np.float64) + 0.5) / spec.n
        try:
            values = np.asarray(spec.fn(xs), dtype=np.float64)
            if values.shape != xs.shape:
                raise TypeError
        except Exception:
            values = np.array([float(spec.fn(float(x))) for x in xs])
        if not np.all(np.isfinite(values)):
            raise ValueError("sampler produced non-finite values")
        weights = np.full(spec.n, spec.domain_measure / spec.n)
        return Ensemble(values=values, weights=weights, time=0.0,
                        domain_measure=spec.domain_measure)
    raise TypeError(f"unsupported initial datum spec: {type(spec).__name__}")


def validate_hypothesis(e: Ensemble) -> HypothesisClass:
    """Classify the initial datum, or raise NoHypothesis.

    H1: all values >= 1, some value > 1 (u0 not identically 1).
    H2: all values in [0, 1], some value strictly inside (so that
        u0(1-u0) is not identically 0).
    H3: all values <= 0, some value < 0.
    """
    v = e.values
    if np.all(v >= 1.0):
        if np.any(v > 1.0):
            return HypothesisClass("H1", 1.0, float(np.max(v)))
        raise NoHypothesis("u0 is identically 1")
    if np.all((v >= 0.0) & (v <= 1.0)):
        if np.any((v > 0.0) & (v < 1.0)):
            return HypothesisClass("H2", 0.0, 1.0)
        raise NoHypothesis("u0 takes only the values 0 and 1")
    if np.all(v <= 0.0):
        if np.any(v < 0.0):
            return HypothesisClass("H3", float(np.min(v)), 0.0)
        raise NoHypothesis("u0 is identically 0")
    raise NoHypothesis("u0 straddles the admissible intervals")


def mass(e: Ensemble) -> float:
    """Integral of u over the domain: compensated sum of weight*value."""
    return kernels().kahan_dot(e.weights, e.values)
