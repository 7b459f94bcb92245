"""Pure-numpy kernel backend.

Vectorized elementwise math plus Python-level compensated reduction loops.
Every expression here must stay term-for-term identical to the loop form
in _kernels_numba so the two backends produce bitwise-equal results; any
edit to one file must be mirrored in the other.
"""

import numpy as np

from ._scalar import scalar_ck_attempt  # noqa: F401  (same source both backends)
from ._tableau import (
    A21, A31, A32, A41, A42, A43, A51, A52, A53, A54,
    A61, A62, A63, A64, A65,
    B1, B3, B4, B6, E1, E3, E4, E5, E6,
)

BACKEND_NAME = "numpy"

STATUS_OK = 0
STATUS_DENOM_VANISHED = 1


def kahan_dot(a, b):
    """Compensated (Neumaier) dot product in fixed index order."""
    p = a * b
    s = 0.0
    c = 0.0
    for i in range(p.shape[0]):
        x = float(p[i])
        t = s + x
        if abs(s) >= abs(x):
            c += (s - t) + x
        else:
            c += (x - t) + s
        s = t
    return s + c


def reductions(values, weights):
    """Compensated sums of w*f(y) and w*g(y), f(z)=z^2(1-z), g(z)=z(1-z)."""
    g = values * (1.0 - values)
    f = values * g
    num = kahan_dot(weights, f)
    den = kahan_dot(weights, g)
    return num, den


def rhs_from_lambda(values, lam):
    """Per-atom derivative g(y)*(y - lam); exactly zero at y in {0, 1}."""
    g = values * (1.0 - values)
    return g * (values - lam)


def ck_attempt(values, weights, h, guard_abs):
    """One Cash-Karp 5(4) trial step with the coefficient re-evaluated per stage.

    Returns (y_new, err_inf, status). The propagated solution is 5th order;
    err_inf is the inf-norm of the embedded 4th-order defect. Zero total
    increments leave the entry bitwise untouched.
    """
    num, den = reductions(values, weights)
    if abs(den) < guard_abs:
        return values, 0.0, STATUS_DENOM_VANISHED
    k1 = rhs_from_lambda(values, num / den)

    y = values + h * (A21 * k1)
    num, den = reductions(y, weights)
    if abs(den) < guard_abs:
        return values, 0.0, STATUS_DENOM_VANISHED
    k2 = rhs_from_lambda(y, num / den)

    y = values + h * (A31 * k1 + A32 * k2)
    num, den = reductions(y, weights)
    if abs(den) < guard_abs:
        return values, 0.0, STATUS_DENOM_VANISHED
    k3 = rhs_from_lambda(y, num / den)

    y = values + h * (A41 * k1 + A42 * k2 + A43 * k3)
    num, den = reductions(y, weights)
    if abs(den) < guard_abs:
        return values, 0.0, STATUS_DENOM_VANISHED
    k4 = rhs_from_lambda(y, num / den)

    y = values + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4)
    num, den = reductions(y, weights)
    if abs(den) < guard_abs:
        return values, 0.0, STATUS_DENOM_VANISHED
    k5 = rhs_from_lambda(y, num / den)

    y = values + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5)
    num, den = reductions(y, weights)
    if abs(den) < guard_abs:
        return values, 0.0, STATUS_DENOM_VANISHED
    k6 = rhs_from_lambda(y, num / den)

    incr = h * (B1 * k1 + B3 * k3 + B4 * k4 + B6 * k6)
    y_new = np.where(incr == 0.0, values, values + incr)

    errv = h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6)
    err = float(np.max(np.abs(errv))) if errv.shape[0] else 0.0
    return y_new, err, STATUS_OK


def rk4_step(values, weights, h, guard_abs):
    """One classic fixed-step RK4 step with the coefficient per stage."""
    num, den = reductions(values, weights)
    if abs(den) < guard_abs:
        return values, STATUS_DENOM_VANISHED
    k1 = rhs_from_lambda(values, num / den)

    half = 0.5 * h
    y = values + half * k1
    num, den = reductions(y, weights)
    if abs(den) < guard_abs:
        return values, STATUS_DENOM_VANISHED
    k2 = rhs_from_lambda(y, num / den)

    y = values + half * k2
    num, den = reductions(y, weights)
    if abs(den) < guard_abs:
        return values, STATUS_DENOM_VANISHED
    k3 = rhs_from_lambda(y, num / den)

    y = values + h * k3
    num, den = reductions(y, weights)
    if abs(den) < guard_abs:
        return values, STATUS_DENOM_VANISHED
    k4 = rhs_from_lambda(y, num / den)

    incr = (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    y_new = np.where(incr == 0.0, values, values + incr)
    return y_new, STATUS_OK


def rk4_run(values, weights, h, n_steps, guard_abs):
    """n_steps fixed RK4 steps; stops early if the denominator vanishes.

    Returns (y_final, status, steps_done).
    """
    y = values.copy()
    for i in range(n_steps):
        y_new, status = rk4_step(y, weights, h, guard_abs)
        if status != STATUS_OK:
            return y, status, i
        y = y_new
    return y, STATUS_OK, n_steps
