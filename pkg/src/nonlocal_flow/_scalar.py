"""Scalar Cash-Karp trial step for one characteristic.

The driving coefficient is affine in time over the step,
lam(t) = lam0 + slope * (t - t_ref), which is exact when steps never
straddle a breakpoint of the piecewise-linear recorded coefficient.

Plain float arithmetic with no array temporaries; the numba backend
compiles this function object directly, so both backends execute the
same source.
"""

from ._tableau import (
    C2, C3, C4, C6,
    A21, A31, A32, A41, A42, A43, A51, A52, A53, A54,
    A61, A62, A63, A64, A65,
    B1, B3, B4, B6, E1, E3, E4, E5, E6,
)


def scalar_ck_attempt(y, t, h, t_ref, lam0, slope):
    """One trial step from (t, y). Returns (y_new, err_abs)."""
    lam = lam0 + slope * (t - t_ref)
    g = y * (1.0 - y)
    k1 = g * (y - lam)

    z = y + h * (A21 * k1)
    lam = lam0 + slope * ((t + C2 * h) - t_ref)
    g = z * (1.0 - z)
    k2 = g * (z - lam)

    z = y + h * (A31 * k1 + A32 * k2)
    lam = lam0 + slope * ((t + C3 * h) - t_ref)
    g = z * (1.0 - z)
    k3 = g * (z - lam)

    z = y + h * (A41 * k1 + A42 * k2 + A43 * k3)
    lam = lam0 + slope * ((t + C4 * h) - t_ref)
    g = z * (1.0 - z)
    k4 = g * (z - lam)

    z = y + h * (A51 * k1 + A52 * k2 + A53 * k3 + A54 * k4)
    lam = lam0 + slope * ((t + h) - t_ref)
    g = z * (1.0 - z)
    k5 = g * (z - lam)

    z = y + h * (A61 * k1 + A62 * k2 + A63 * k3 + A64 * k4 + A65 * k5)
    lam = lam0 + slope * ((t + C6 * h) - t_ref)
    g = z * (1.0 - z)
    k6 = g * (z - lam)

    incr = h * (B1 * k1 + B3 * k3 + B4 * k4 + B6 * k6)
    if incr == 0.0:
        y_new = y
    else:
        y_new = y + incr
    err = abs(h * (E1 * k1 + E3 * k3 + E4 * k4 + E5 * k5 + E6 * k6))
    return y_new, err
