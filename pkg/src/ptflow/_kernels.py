"""Jitted inner loop of the flow integrator.

One fused Dormand-Prince 5(4) trial step per call, with the scheme RHS
inlined (central stencils on the interior, rates extrapolated onto the two
edge rows per side, origin-node rate subtracted from dV/dtau).  The numpy
implementations in flow_rhs/flow_integrator are the reference; the test
suite checks the two paths agree.

Scheme ids: 0 Wegner-Houghton, 1 PT leading order, 2 PT next-to-leading
order, 3 PT finite-m.
"""

import math

import numba as nb
import numpy as np

WH, PT_LO, PT_NLO, PT_M = 0, 1, 2, 3

_EXP_MAX = 700.0  # beyond this the trial step is garbage; reject instead of inf

# Work-array layout for dp45_step: rows 0..6 the stage slopes, 7 the stage
# state scratch, 8 the proposed solution.
N_WORK = 9


@nb.njit(cache=True)
def rhs_tau(scheme_id, y, k, hx, d, c, m, alpha_m, out):
    """tau-derivative of the packed state; False when a guard trips."""
    kk = k * k
    ih1 = 1.0 / hx
    ih2 = ih1 * ih1
    ih3 = ih2 * ih1

    if scheme_id == WH:
        n = y.shape[0]
        coef = -k / (2.0 * math.pi)
        for i in range(2, n - 2):
            v2 = (-y[i - 2] + 16.0 * y[i - 1] - 30.0 * y[i] + 16.0 * y[i + 1] - y[i + 2]) * (
                ih2 / 12.0
            )
            arg = 1.0 + v2 / kk
            if arg <= 0.0:
                return False
            out[i] = coef * math.log(arg)
        out[0] = out[1] = out[2]
        out[n - 1] = out[n - 2] = out[n - 3]
        dvc = out[c]
        for i in range(n):
            out[i] = dvc - out[i]
        return True

    if scheme_id == PT_LO:
        n = y.shape[0]
        pref_c = (kk / (4.0 * math.pi)) ** (d / 2.0)
        for i in range(2, n - 2):
            v2 = (-y[i - 2] + 16.0 * y[i - 1] - 30.0 * y[i] + 16.0 * y[i + 1] - y[i + 2]) * (
                ih2 / 12.0
            )
            e = -v2 / kk
            if e > _EXP_MAX:
                return False
            out[i] = pref_c * math.exp(e)
        out[0] = out[1] = out[2]
        out[n - 1] = out[n - 2] = out[n - 3]
        dvc = out[c]
        for i in range(n):
            out[i] = dvc - out[i]
        return True

    n = y.shape[0] // 2
    c2c = 4.0 + 18.0 * d - d * d
    if scheme_id == PT_NLO:
        pref_c = (kk / (4.0 * math.pi)) ** (d / 2.0)
        for i in range(2, n - 2):
            zi = y[n + i]
            if zi <= 0.0:
                return False
            v2 = (-y[i - 2] + 16.0 * y[i - 1] - 30.0 * y[i] + 16.0 * y[i + 1] - y[i + 2]) * (
                ih2 / 12.0
            )
            v3 = (-y[i - 2] + 2.0 * y[i - 1] - 2.0 * y[i + 1] + y[i + 2]) * (0.5 * ih3)
            z1 = (y[n + i - 2] - 8.0 * y[n + i - 1] + 8.0 * y[n + i + 1] - y[n + i + 2]) * (
                ih1 / 12.0
            )
            z2 = (
                -y[n + i - 2]
                + 16.0 * y[n + i - 1]
                - 30.0 * y[n + i]
                + 16.0 * y[n + i + 1]
                - y[n + i + 2]
            ) * (ih2 / 12.0)
            zk2 = zi * kk
            e = -v2 / zk2
            if e > _EXP_MAX:
                return False
            pref = pref_c * math.exp(e)
            bracket = (
                -z2 / zk2
                + c2c * z1 * z1 / (24.0 * zi * zi * kk)
                + (10.0 - d) * z1 * v3 / (6.0 * zk2 * zk2)
                - zi * v3 * v3 / (6.0 * zk2 * zk2 * zk2)
            )
            out[i] = pref
            out[n + i] = -pref * bracket
    else:  # PT_M
        p = m + 1.0 - d / 2.0
        q2 = m + 2.0 - d / 2.0
        q3 = m + 3.0 - d / 2.0
        pref_c = alpha_m * (kk * m) ** (d / 2.0)
        for i in range(2, n - 2):
            zi = y[n + i]
            if zi <= 0.0:
                return False
            v2 = (-y[i - 2] + 16.0 * y[i - 1] - 30.0 * y[i] + 16.0 * y[i + 1] - y[i + 2]) * (
                ih2 / 12.0
            )
            v3 = (-y[i - 2] + 2.0 * y[i - 1] - 2.0 * y[i + 1] + y[i + 2]) * (0.5 * ih3)
            z1 = (y[n + i - 2] - 8.0 * y[n + i - 1] + 8.0 * y[n + i + 1] - y[n + i + 2]) * (
                ih1 / 12.0
            )
            z2 = (
                -y[n + i - 2]
                + 16.0 * y[n + i - 1]
                - 30.0 * y[n + i]
                + 16.0 * y[n + i + 1]
                - y[n + i + 2]
            ) * (ih2 / 12.0)
            zk2 = zi * kk
            base = zk2 + v2 / m
            if base <= 0.0:
                return False
            ex = -p * math.log1p(v2 / (m * zk2))
            if ex > _EXP_MAX:
                return False
            pref = pref_c * math.exp(ex)
            t1 = (p / (m * base)) * (-z2 + c2c * z1 * z1 / (24.0 * zi))
            t2 = ((10.0 - d) * p * q2 / (6.0 * m * m * base * base)) * z1 * v3
            t3 = -(p * q2 * q3 / (6.0 * m ** 3 * base ** 3)) * zi * v3 * v3
            out[i] = pref
            out[n + i] = -pref * (t1 + t2 + t3)

    out[0] = out[1] = out[2]
    out[n - 1] = out[n - 2] = out[n - 3]
    out[n] = out[n + 1] = out[n + 2]
    out[2 * n - 1] = out[2 * n - 2] = out[2 * n - 3]
    dvc = out[c]
    for i in range(n):
        out[i] = dvc - out[i]
    return True


@nb.njit(cache=True)
def dp45_step(
    scheme_id, y, tau, h, cutoff, hx, d, c, m, alpha_m, abs_tol, rel_tol, evolve_z, work
):
    """One embedded trial step.  work[0] must hold the slope at (tau, y).

    Returns (status, err_norm): status 0 with the proposal in work[8] and the
    first-same-as-last slope in work[6]; status 1 when any guard tripped.
    """
    ny = y.shape[0]
    ys = work[7]
    y5 = work[8]

    # stage 2
    for j in range(ny):
        ys[j] = y[j] + h * (0.2 * work[0, j])
    k = cutoff * math.exp(-(tau + 0.2 * h))
    if not rhs_tau(scheme_id, ys, k, hx, d, c, m, alpha_m, work[1]):
        return 1, 0.0
    # stage 3
    for j in range(ny):
        ys[j] = y[j] + h * (3.0 / 40.0 * work[0, j] + 9.0 / 40.0 * work[1, j])
    k = cutoff * math.exp(-(tau + 0.3 * h))
    if not rhs_tau(scheme_id, ys, k, hx, d, c, m, alpha_m, work[2]):
        return 1, 0.0
    # stage 4
    for j in range(ny):
        ys[j] = y[j] + h * (
            44.0 / 45.0 * work[0, j] - 56.0 / 15.0 * work[1, j] + 32.0 / 9.0 * work[2, j]
        )
    k = cutoff * math.exp(-(tau + 0.8 * h))
    if not rhs_tau(scheme_id, ys, k, hx, d, c, m, alpha_m, work[3]):
        return 1, 0.0
    # stage 5
    for j in range(ny):
        ys[j] = y[j] + h * (
            19372.0 / 6561.0 * work[0, j]
            - 25360.0 / 2187.0 * work[1, j]
            + 64448.0 / 6561.0 * work[2, j]
            - 212.0 / 729.0 * work[3, j]
        )
    k = cutoff * math.exp(-(tau + 8.0 / 9.0 * h))
    if not rhs_tau(scheme_id, ys, k, hx, d, c, m, alpha_m, work[4]):
        return 1, 0.0
    # stage 6
    for j in range(ny):
        ys[j] = y[j] + h * (
            9017.0 / 3168.0 * work[0, j]
            - 355.0 / 33.0 * work[1, j]
            + 46732.0 / 5247.0 * work[2, j]
            + 49.0 / 176.0 * work[3, j]
            - 5103.0 / 18656.0 * work[4, j]
        )
    k = cutoff * math.exp(-(tau + h))
    if not rhs_tau(scheme_id, ys, k, hx, d, c, m, alpha_m, work[5]):
        return 1, 0.0
    # 5th-order proposal and its first-same-as-last slope
    for j in range(ny):
        y5[j] = y[j] + h * (
            35.0 / 384.0 * work[0, j]
            + 500.0 / 1113.0 * work[2, j]
            + 125.0 / 192.0 * work[3, j]
            - 2187.0 / 6784.0 * work[4, j]
            + 11.0 / 84.0 * work[5, j]
        )
    if not rhs_tau(scheme_id, y5, k, hx, d, c, m, alpha_m, work[6]):
        return 1, 0.0

    if evolve_z:
        n = ny // 2
        for j in range(n, ny):
            if y5[j] <= 0.0:
                return 1, 0.0

    acc = 0.0
    for j in range(ny):
        e = h * (
            71.0 / 57600.0 * work[0, j]
            - 71.0 / 16695.0 * work[2, j]
            + 71.0 / 1920.0 * work[3, j]
            - 17253.0 / 339200.0 * work[4, j]
            + 22.0 / 525.0 * work[5, j]
            - 1.0 / 40.0 * work[6, j]
        )
        ay = abs(y[j])
        ay5 = abs(y5[j])
        sc = abs_tol + rel_tol * (ay if ay > ay5 else ay5)
        q = e / sc
        acc += q * q
        if not math.isfinite(y5[j]):
            return 1, 0.0
    return 0, math.sqrt(acc / ny)
