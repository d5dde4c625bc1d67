"""Compiled RK4 integration loop used by :func:`trioform.simulate.simulate`.

The state is a flat 6-vector ``(p1x, p1y, p2x, p2y, p3x, p3y)``. Problem
constants, settings and the resumable loop state travel in small float
arrays so the compiled signature stays fixed.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

# Layout of the ``prm`` array.
P_D12, P_D13, P_G12X, P_G12Y, P_G13X, P_G13Y, P_AS, P_KD, P_KB, P_KA, P_EPS = range(11)
N_PRM = 11

# Layout of the ``cfg`` array.
(
    C_DT,
    C_TMAX,
    C_STAB,
    C_EQV,
    C_MOVV,
    C_ERR,
    C_DRIFT,
    C_WIN,
    C_MAXSTEPS,
    C_STRIDE,
) = range(10)
N_CFG = 10

# Layout of the ``state`` array (mutated in place so a run can resume).
S_T, S_N, S_CNT, S_WX0, S_WY0, S_VX, S_VY, S_ENORM, S_LASTREC, S_RETRIES = range(10)
N_STATE = 10

DESIRED = 0
MOVING = 2
COLLISION = 3
UNDECIDED = 4
BUFFER_FULL = 5


@njit(cache=True, nogil=True)
def rhs(p, out, prm):
    """Write the team velocity into ``out`` and return a step-size bound.

    The return value is an upper estimate of the local Jacobian's spectral
    radius, or -1.0 when a link is shorter than the collision threshold.
    """
    z12x = p[2] - p[0]
    z12y = p[3] - p[1]
    z13x = p[4] - p[0]
    z13y = p[5] - p[1]
    d12 = math.sqrt(z12x * z12x + z12y * z12y)
    d13 = math.sqrt(z13x * z13x + z13y * z13y)
    eps = prm[P_EPS]
    if d12 < eps or d13 < eps or math.hypot(z13x - z12x, z13y - z12y) < eps:
        return -1.0
    Kd = prm[P_KD]
    Kb = prm[P_KB]
    KA = prm[P_KA]
    e12 = d12 * d12 - prm[P_D12] * prm[P_D12]
    e13 = d13 * d13 - prm[P_D13] * prm[P_D13]
    eA = 0.5 * (z12x * z13y - z12y * z13x) - prm[P_AS]
    # J (z13 - z12)
    jx = z13y - z12y
    jy = -(z13x - z12x)
    out[0] = Kd * (e12 * z12x + e13 * z13x) + KA * eA * jx
    out[1] = Kd * (e12 * z12y + e13 * z13y) + KA * eA * jy
    out[2] = -Kb * (z12x / d12 - prm[P_G12X])
    out[3] = -Kb * (z12y / d12 - prm[P_G12Y])
    out[4] = -Kb * (z13x / d13 - prm[P_G13X])
    out[5] = -Kb * (z13y / d13 - prm[P_G13Y])
    # Symmetric part of R1's own Jacobian block, plus the bearing blocks.
    s = Kd * (e12 + e13)
    hxx = s + 2.0 * Kd * (z12x * z12x + z13x * z13x) + 0.5 * KA * jx * jx
    hyy = s + 2.0 * Kd * (z12y * z12y + z13y * z13y) + 0.5 * KA * jy * jy
    hxy = 2.0 * Kd * (z12x * z12y + z13x * z13y) + 0.5 * KA * jx * jy
    m = 0.5 * (hxx + hyy)
    r = math.sqrt(0.25 * (hxx - hyy) ** 2 + hxy * hxy)
    rho = max(abs(m + r), abs(m - r))
    return rho + 2.0 * Kb * (1.0 / d12 + 1.0 / d13)


@njit(cache=True, nogil=True)
def error_norm_flat(p, prm):
    """Norm of the dimensionless error vector; assumes nonzero links."""
    z12x = p[2] - p[0]
    z12y = p[3] - p[1]
    z13x = p[4] - p[0]
    z13y = p[5] - p[1]
    d12 = math.sqrt(z12x * z12x + z12y * z12y)
    d13 = math.sqrt(z13x * z13x + z13y * z13y)
    s12 = prm[P_D12] * prm[P_D12]
    s13 = prm[P_D13] * prm[P_D13]
    a = 0.5 * (z12x * z13y - z12y * z13x)
    tot = ((d12 * d12 - s12) / s12) ** 2 + ((d13 * d13 - s13) / s13) ** 2
    tot += ((a - prm[P_AS]) / prm[P_AS]) ** 2
    tot += (z12x / d12 - prm[P_G12X]) ** 2 + (z12y / d12 - prm[P_G12Y]) ** 2
    tot += (z13x / d13 - prm[P_G13X]) ** 2 + (z13y / d13 - prm[P_G13Y]) ** 2
    return math.sqrt(tot)


@njit(cache=True, nogil=True)
def rk4_step(p, h, prm, k1, k2, k3, k4, tmp, out):
    """One RK4 step from ``p`` with precomputed ``k1``; result in ``out``.

    Returns False if an intermediate stage hits a collision.
    """
    for i in range(6):
        tmp[i] = p[i] + 0.5 * h * k1[i]
    if rhs(tmp, k2, prm) < 0.0:
        return False
    for i in range(6):
        tmp[i] = p[i] + 0.5 * h * k2[i]
    if rhs(tmp, k3, prm) < 0.0:
        return False
    for i in range(6):
        tmp[i] = p[i] + h * k3[i]
    if rhs(tmp, k4, prm) < 0.0:
        return False
    for i in range(6):
        out[i] = p[i] + h * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]) / 6.0
    return True


@njit(cache=True, nogil=True)
def _record(rec, nrec, t, p, en):
    rec[nrec, 0] = t
    for i in range(6):
        rec[nrec, 1 + i] = p[i]
    rec[nrec, 7] = en
    return nrec + 1


@njit(cache=True, nogil=True)
def integrate(p, prm, cfg, state, rec, nrec):
    """Advance ``p`` in place until a verdict, the time limit or a full buffer.

    Returns ``(status, nrec)``. On ``BUFFER_FULL`` the caller grows ``rec``
    and calls again with the same ``p`` and ``state``.
    """
    k1 = np.empty(6)
    k2 = np.empty(6)
    k3 = np.empty(6)
    k4 = np.empty(6)
    tmp = np.empty(6)
    nxt = np.empty(6)
    dt = cfg[C_DT]
    t_max = cfg[C_TMAX]
    stab = cfg[C_STAB]
    eqv = cfg[C_EQV]
    movv = cfg[C_MOVV]
    err_tol = cfg[C_ERR]
    drift = cfg[C_DRIFT]
    win = int(cfg[C_WIN])
    max_steps = int(cfg[C_MAXSTEPS])
    stride = int(cfg[C_STRIDE])
    cap = rec.shape[0]

    while True:
        if nrec + 2 > cap:
            return BUFFER_FULL, nrec
        t = state[S_T]
        n = int(state[S_N])
        L = rhs(p, k1, prm)
        if L < 0.0:
            if state[S_LASTREC] != n:
                nrec = _record(rec, nrec, t, p, np.nan)
                state[S_LASTREC] = n
            return COLLISION, nrec
        en = error_norm_flat(p, prm)
        state[S_ENORM] = en
        vx = (k1[0] + k1[2] + k1[4]) / 3.0
        vy = (k1[1] + k1[3] + k1[5]) / 3.0
        state[S_VX] = vx
        state[S_VY] = vy
        if n % stride == 0 and state[S_LASTREC] != n:
            nrec = _record(rec, nrec, t, p, en)
            state[S_LASTREC] = n

        status = -1
        vmax = 0.0
        for i in range(3):
            vmax = max(vmax, math.hypot(k1[2 * i], k1[2 * i + 1]))
        if vmax < eqv and en < err_tol:
            status = DESIRED
        else:
            dv = max(
                math.hypot(k1[0] - k1[2], k1[1] - k1[3]),
                math.hypot(k1[0] - k1[4], k1[1] - k1[5]),
                math.hypot(k1[2] - k1[4], k1[3] - k1[5]),
            )
            speed = math.hypot(vx, vy)
            if dv < movv and speed > eqv and en >= err_tol:
                if state[S_CNT] == 0:
                    state[S_WX0] = vx
                    state[S_WY0] = vy
                state[S_CNT] += 1
                if state[S_CNT] >= win:
                    if math.hypot(vx - state[S_WX0], vy - state[S_WY0]) <= drift * speed:
                        status = MOVING
                    else:
                        state[S_CNT] = 0
            else:
                state[S_CNT] = 0
        if status < 0 and (t >= t_max or n >= max_steps):
            status = UNDECIDED
        if status >= 0:
            if state[S_LASTREC] != n:
                nrec = _record(rec, nrec, t, p, en)
                state[S_LASTREC] = n
            return status, nrec

        h = min(dt, stab / L, t_max - t)
        if not rk4_step(p, h, prm, k1, k2, k3, k4, tmp, nxt):
            for i in range(6):
                p[i] = tmp[i]
            state[S_T] = t + h
            state[S_N] = n + 1
            nrec = _record(rec, nrec, t + h, p, np.nan)
            state[S_LASTREC] = n + 1
            return COLLISION, nrec
        if en > 0.0 and rhs(nxt, k2, prm) >= 0.0 and error_norm_flat(nxt, prm) > 10.0 * en:
            # Sudden error growth: retry this step once at half the size.
            h = 0.5 * h
            state[S_RETRIES] += 1
            if not rk4_step(p, h, prm, k1, k2, k3, k4, tmp, nxt):
                for i in range(6):
                    p[i] = tmp[i]
                state[S_T] = t + h
                state[S_N] = n + 1
                nrec = _record(rec, nrec, t + h, p, np.nan)
                state[S_LASTREC] = n + 1
                return COLLISION, nrec
        for i in range(6):
            p[i] = nxt[i]
        state[S_T] = t + h
        state[S_N] = n + 1


def pack_problem(spec, gains, eps: float) -> np.ndarray:
    prm = np.empty(N_PRM)
    prm[P_D12] = spec.d12_star
    prm[P_D13] = spec.d13_star
    prm[P_G12X], prm[P_G12Y] = spec.g12_star
    prm[P_G13X], prm[P_G13Y] = spec.g13_star
    prm[P_AS] = spec.A_star
    prm[P_KD] = gains.K_d
    prm[P_KB] = gains.K_b
    prm[P_KA] = gains.K_A
    prm[P_EPS] = eps
    return prm
