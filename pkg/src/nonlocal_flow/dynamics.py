"""Reaction terms, the nonlocal coefficient, and the full right-hand side.

The equation is u_t = f(u) - lambda(t) g(u) with the cubic/quadratic pair
f(z) = z^2 (1-z), g(z) = z (1-z) and

    lambda(t) = integral of f(u) dx / integral of g(u) dx.

Since f(z) = z g(z), the right-hand side factors as g(u) (u - lambda),
which is the form all kernels evaluate: it is exactly zero at u in
{0, 1} instead of cancelling two rounded terms.
"""

from __future__ import annotations

import numpy as np

from .backend import kernels
from .errors import DenominatorVanishes
from .state import Ensemble

DEFAULT_DENOM_GUARD = 1e-12


def reaction_f(z: float) -> float:
    """Cubic reaction z^2 (1 - z)."""
    return z * z * (1.0 - z)


def reaction_g(z: float) -> float:
    """Quadratic reaction z (1 - z)."""
    return z * (1.0 - z)


def lambda_reductions(e: Ensemble) -> tuple[float, float]:
    """Compensated (numerator, denominator) = (int f(u), int g(u))."""
    num, den = kernels().reductions(e.values, e.weights)
    return float(num), float(den)


def lambda_of(e: Ensemble, guard: float = DEFAULT_DENOM_GUARD) -> float:
    """The nonlocal coefficient of the current state.

    Raises DenominatorVanishes when |int g(u)| < guard * |Omega|, i.e.
    the state left the regime where the equation is defined.
    """
    if not (guard > 0.0):
        raise ValueError("guard must be > 0")
    num, den = lambda_reductions(e)
    if abs(den) < guard * e.domain_measure:
        raise DenominatorVanishes(
            f"|int g(u) dx| = {abs(den):.3e} below guard "
            f"{guard * e.domain_measure:.3e}", time=e.time)
    return num / den


def rhs(e: Ensemble, guard: float = DEFAULT_DENOM_GUARD) -> np.ndarray:
    """Per-atom time derivative g(y_i) (y_i - lambda), in atom order."""
    lam = lambda_of(e, guard)
    return kernels().rhs_from_lambda(e.values, lam)


def characteristic_residual(z: float, zdot: float, lam: float) -> float:
    """Residual of the scalar characteristic equation.

    Zero exactly when (z, zdot) satisfies dY/dt = f(Y) - lam g(Y); the
    comparison principle orders trajectories by the sign of this
    residual.
    """
    return zdot - reaction_f(z) + lam * reaction_g(z)
