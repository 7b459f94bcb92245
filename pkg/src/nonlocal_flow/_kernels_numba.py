"""Numba kernel backend.

Loop implementations of the hot inner kernels, compiled with @njit.
Expressions mirror _kernels_numpy term for term (same products, same
association, same compensated-summation order), which keeps the two
backends bitwise-identical; any edit to one file must be mirrored in
the other.
"""

import numpy as np
from numba import njit

from . import _scalar
from ._tableau import (
    A21, A31, A32, A41, A42, A43, A51, A52, A53, A54,
    A61, A62, A63, A64, A65,
    B1, B3, B4, B6, E1, E3, E4, E5, E6,
)

BACKEND_NAME = "numba"

STATUS_OK = 0
STATUS_DENOM_VANISHED = 1


@njit(cache=True)
def kahan_dot(a, b):
    s = 0.0
    c = 0.0
    for i in range(a.shape[0]):
        x = a[i] * b[i]
        t = s + x
        if abs(s) >= abs(x):
            c += (s - t) + x
        else:
            c += (x - t) + s
        s = t
    return s + c


@njit(cache=True)
def reductions(values, weights):
    # Two Neumaier accumulators walked in one pass, same element order as
    # the fallback's separate kahan_dot calls.
    sn = 0.0
    cn = 0.0
    sd = 0.0
    cd = 0.0
    for i in range(values.shape[0]):
        yi = values[i]
        gi = yi * (1.0 - yi)
        fi = yi * gi
        wf = weights[i] * fi
        wg = weights[i] * gi
        t = sn + wf
        if abs(sn) >= abs(wf):
            cn += (sn - t) + wf
        else:
            cn += (wf - t) + sn
        sn = t
        t = sd + wg
        if abs(sd) >= abs(wg):
            cd += (sd - t) + wg
        else:
            cd += (wg - t) + sd
        sd = t
    return sn + cn, sd + cd


@njit(cache=True)
def rhs_from_lambda(values, lam):
    out = np.empty_like(values)
    for i in range(values.shape[0]):
        yi = values[i]
        gi = yi * (1.0 - yi)
        out[i] = gi * (yi - lam)
    return out


@njit(cache=True)
def ck_attempt(values, weights, h, guard_abs):
    n = values.shape[0]

    num, den = reductions(values, weights)
    if abs(den) < guard_abs:
        return values.copy(), 0.0, STATUS_DENOM_VANISHED
    k1 = rhs_from_lambda(values, num / den)

    y = np.empty(n)
    for i in range(n):
        y[i] = values[i] + h * (A21 * k1[i])
    num, den = reductions(y, weights)
    if abs(den) < guard_abs:
        return values.copy(), 0.0, STATUS_DENOM_VANISHED
    k2 = rhs_from_lambda(y, num / den)

    for i in range(n):
        y[i] = values[i] + h * (A31 * k1[i] + A32 * k2[i])
    num, den = reductions(y, weights)
    if abs(den) < guard_abs:
        return values.copy(), 0.0, STATUS_DENOM_VANISHED
    k3 = rhs_from_lambda(y, num / den)

    for i in range(n):
        y[i] = values[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i])
    num, den = reductions(y, weights)
    if abs(den) < guard_abs:
        return values.copy(), 0.0, STATUS_DENOM_VANISHED
    k4 = rhs_from_lambda(y, num / den)

    for i in range(n):
        y[i] = values[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i]
                                + A54 * k4[i])
    num, den = reductions(y, weights)
    if abs(den) < guard_abs:
        return values.copy(), 0.0, STATUS_DENOM_VANISHED
    k5 = rhs_from_lambda(y, num / den)

    for i in range(n):
        y[i] = values[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i]
                                + A64 * k4[i] + A65 * k5[i])
    num, den = reductions(y, weights)
    if abs(den) < guard_abs:
        return values.copy(), 0.0, STATUS_DENOM_VANISHED
    k6 = rhs_from_lambda(y, num / den)

    y_new = np.empty(n)
    err = 0.0
    for i in range(n):
        incr = h * (B1 * k1[i] + B3 * k3[i] + B4 * k4[i] + B6 * k6[i])
        if incr == 0.0:
            y_new[i] = values[i]
        else:
            y_new[i] = values[i] + incr
        e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i]
                 + E6 * k6[i])
        if abs(e) > err:
            err = abs(e)
    return y_new, err, STATUS_OK


@njit(cache=True)
def rk4_step(values, weights, h, guard_abs):
    n = values.shape[0]

    num, den = reductions(values, weights)
    if abs(den) < guard_abs:
        return values.copy(), STATUS_DENOM_VANISHED
    k1 = rhs_from_lambda(values, num / den)

    half = 0.5 * h
    y = np.empty(n)
    for i in range(n):
        y[i] = values[i] + half * k1[i]
    num, den = reductions(y, weights)
    if abs(den) < guard_abs:
        return values.copy(), STATUS_DENOM_VANISHED
    k2 = rhs_from_lambda(y, num / den)

    for i in range(n):
        y[i] = values[i] + half * k2[i]
    num, den = reductions(y, weights)
    if abs(den) < guard_abs:
        return values.copy(), STATUS_DENOM_VANISHED
    k3 = rhs_from_lambda(y, num / den)

    for i in range(n):
        y[i] = values[i] + h * k3[i]
    num, den = reductions(y, weights)
    if abs(den) < guard_abs:
        return values.copy(), STATUS_DENOM_VANISHED
    k4 = rhs_from_lambda(y, num / den)

    y_new = np.empty(n)
    for i in range(n):
        incr = (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        if incr == 0.0:
            y_new[i] = values[i]
        else:
            y_new[i] = values[i] + incr
    return y_new, STATUS_OK


@njit(cache=True)
def rk4_run(values, weights, h, n_steps, guard_abs):
    y = values.copy()
    for i in range(n_steps):
        y_new, status = rk4_step(y, weights, h, guard_abs)
        if status != STATUS_OK:
            return y, status, i
        y = y_new
    return y, STATUS_OK, n_steps


scalar_ck_attempt = njit(cache=True)(_scalar.scalar_ck_attempt)
