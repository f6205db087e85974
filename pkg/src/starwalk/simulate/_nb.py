"""numba kernels for the Walsh-family path constructions.

One path is advanced at a time; ``run_batch`` loops over a contiguous range
of global path ids and releases the GIL so shards can run on threads.
Float parameters travel in ``fp`` and integer ones in ``ip`` (see
:mod:`starwalk.simulate.layout`).
"""

import math

import numpy as np
from numba import njit

from . import layout as L_
from .rng import GOLDEN, INV53, M1, M2, S11, S27, S30, S31


@njit(inline="always")
def _mix(z):
    z = (z ^ (z >> S30)) * M1
    z = (z ^ (z >> S27)) * M2
    return z ^ (z >> S31)


@njit(inline="always")
def _uniform(st, j):
    st[2 + j] += np.uint64(1)
    return float(_mix(st[j] + st[2 + j] * GOLDEN) >> S11) * INV53


@njit(inline="always")
def _normal(st, fs):
    if fs[0] != 0.0:
        fs[0] = 0.0
        return fs[1]
    while True:
        u = 2.0 * _uniform(st, 0) - 1.0
        v = 2.0 * _uniform(st, 0) - 1.0
        s = u * u + v * v
        if s < 1.0 and s > 0.0:
            f = math.sqrt(-2.0 * math.log(s) / s)
            fs[0] = 1.0
            fs[1] = v * f
            return u * f


@njit(inline="always")
def _categorical(cdf, u):
    n = cdf.shape[0]
    for k in range(n - 1):
        if u < cdf[k]:
            return k + 1
    return n


@njit(inline="always")
def _init_streams(base, p, st, fs):
    pp = np.uint64(p)
    st[0] = _mix(base + _mix(np.uint64(2) * pp))
    st[1] = _mix(base + _mix(np.uint64(2) * pp + np.uint64(1)))
    st[2] = np.uint64(0)
    st[3] = np.uint64(0)
    fs[0] = 0.0
    fs[1] = 0.0


@njit(inline="always")
def _advance(y, edge, armed, st, fs, cdf, h, n_sub, sq, occ, lt_method, eps, relabel_bridge):
    """One step of length ``h`` (``n_sub`` driver normals scaled by
    ``sq = sqrt(h / n_sub)``).  ``occ = h / (4 eps)`` is the weight of each
    trapezoid endpoint for the occupation estimator.

    Returns ``(y1, dL, edge, armed)``.
    """
    if n_sub == 1:
        z = _normal(st, fs)
    else:
        z = 0.0
        for _ in range(n_sub):
            z += _normal(st, fs)
    y1 = y + sq * z
    a = abs(y)
    b = abs(y1)
    if lt_method == L_.LT_OCCUPATION:
        dL = 0.0
        if a <= eps:
            dL += occ
        if b <= eps:
            dL += occ
    elif lt_method == L_.LT_DOWNCROSSING:
        dL = 0.0
        if armed and b <= eps:
            dL = eps
            armed = False
        elif b >= 2.0 * eps:
            armed = True
    else:
        u = 1.0 - _uniform(st, 1)
        d = y1 - y
        r = math.sqrt(d * d - 2.0 * h * math.log(u))
        dL = r - (a + b)
        if dL < 0.0:
            dL = 0.0
    touched = y == 0.0 or y * y1 < 0.0
    if relabel_bridge and dL > 0.0:
        touched = True
    if touched:
        edge = _categorical(cdf, _uniform(st, 1))
    return y1, dL, edge, armed


def _make_run_batch(LT):
    """Batch kernel specialized to one local-time estimator.

    The step is written out in the loop body rather than calling
    :func:`_advance`: with the tuple-returning helper numba left the hot
    loop about three times slower.
    """

    @njit(nogil=True)
    def run(base, p0, n, fp, ip, cdf, out_f, out_i):
        beta = fp[L_.F_BETA]
        gamma = fp[L_.F_GAMMA]
        n_sub = ip[L_.I_NSUB]
        h = fp[L_.F_DT] * n_sub
        T = fp[L_.F_T]
        ball = fp[L_.F_BALL]
        alpha = fp[L_.F_ALPHA]
        eps = fp[L_.F_EPS]
        x0 = fp[L_.F_X0]
        smax = fp[L_.F_SMAX]
        mode = ip[L_.I_MODE]
        relabel_bridge = ip[L_.I_RELABEL] != 0
        e0 = ip[L_.I_EDGE0]
        max_steps = ip[L_.I_MAXSTEPS]
        t_tol = 1e-9 * h
        sq = math.sqrt(h / n_sub)
        occ = h / (4.0 * eps)
        two_eps = 2.0 * eps

        st = np.zeros(4, dtype=np.uint64)
        fs = np.zeros(2)
        for q in range(n):
            _init_streams(base, p0 + q, st, fs)
            S = math.inf
            if beta > 0.0:
                S = -math.log(1.0 - _uniform(st, 1)) / beta
            y = x0
            edge = e0
            armed = x0 >= two_eps
            Lt = 0.0
            s = 0.0
            t = 0.0
            pot = 0.0
            killed = 0
            trunc = 0.0
            t_out = math.inf
            i = 0
            while True:
                if mode == L_.MODE_LIFETIME and s >= smax - t_tol:
                    trunc = 1.0
                    break
                if i >= max_steps:
                    trunc = 1.0
                    break
                # -- step (same as _advance) --
                if n_sub == 1:
                    z = _normal(st, fs)
                else:
                    z = 0.0
                    for _ in range(n_sub):
                        z += _normal(st, fs)
                y1 = y + sq * z
                a = abs(y)
                b = abs(y1)
                if LT == L_.LT_OCCUPATION:
                    dL = 0.0
                    if a <= eps:
                        dL += occ
                    if b <= eps:
                        dL += occ
                elif LT == L_.LT_DOWNCROSSING:
                    dL = 0.0
                    if armed and b <= eps:
                        dL = eps
                        armed = False
                    elif b >= two_eps:
                        armed = True
                else:
                    u = 1.0 - _uniform(st, 1)
                    d = y1 - y
                    dL = math.sqrt(d * d - 2.0 * h * math.log(u)) - (a + b)
                    if dL < 0.0:
                        dL = 0.0
                if y == 0.0 or y * y1 < 0.0 or (relabel_bridge and dL > 0.0):
                    edge = _categorical(cdf, _uniform(st, 1))
                # -- bookkeeping --
                s1 = (i + 1) * h
                L1 = Lt + dL
                if L1 > S:
                    # linear interpolation of the kill inside the step
                    s_kill = s + h * (S - Lt) / dL
                    zeta = s_kill + gamma * S
                    if mode == L_.MODE_POTENTIAL:
                        t_mid = t + 0.5 * (h + gamma * dL)
                        if t_mid < T:
                            pot += math.exp(-alpha * t_mid) * (S - Lt)
                    y = 0.0
                    edge = 0
                    if mode == L_.MODE_TERMINAL and zeta > T + t_tol:
                        # horizon reached inside the killing step: cut linearly
                        frac = (T - t) / (zeta - t)
                        Lt = Lt + frac * (S - Lt)
                        s = s + frac * (s_kill - s)
                        t_out = T
                    else:
                        killed = 1
                        t_out = zeta
                        Lt = S
                        s = s_kill
                    break
                t1 = s1 + gamma * L1
                if mode == L_.MODE_TERMINAL:
                    if t1 >= T - t_tol:
                        # the step is a vertex dwell (gamma dL) followed by the motion
                        if T - t < gamma * dL:
                            y = 0.0
                            edge = 0
                            Lt = Lt + (T - t) / gamma
                        else:
                            y = y1
                            s = s + min(h, T - t - gamma * dL)
                            Lt = L1
                        t_out = T
                        break
                elif mode == L_.MODE_POTENTIAL:
                    if dL > 0.0:
                        t_mid = t + 0.5 * (h + gamma * dL)
                        if t_mid < T:
                            pot += math.exp(-alpha * t_mid) * dL
                    if t1 >= T - t_tol:
                        y = y1
                        Lt = L1
                        s = s1
                        t_out = T
                        break
                elif mode == L_.MODE_EXIT:
                    if b >= ball:
                        y = y1
                        Lt = L1
                        s = s1
                        t_out = t1
                        break
                y = y1
                Lt = L1
                s = s1
                t = t1
                i += 1
            out_f[q, L_.O_T] = t_out
            out_f[q, L_.O_X] = abs(y)
            out_f[q, L_.O_L] = Lt
            out_f[q, L_.O_S] = s
            out_f[q, L_.O_POT] = pot
            out_f[q, L_.O_KILL_LEVEL] = S
            out_f[q, L_.O_TRUNC] = trunc
            out_i[q, 0] = edge if abs(y) > 0.0 else 0
            out_i[q, 1] = killed

    return run


_RUN_BATCH = {}


def run_batch(base, p0, n, fp, ip, cdf, out_f, out_i):
    lt = int(ip[L_.I_LT])
    if lt not in _RUN_BATCH:
        _RUN_BATCH[lt] = _make_run_batch(lt)
    _RUN_BATCH[lt](base, p0, n, fp, ip, cdf, out_f, out_i)


@njit(nogil=True, cache=True)
def record_path(base, p, fp, ip, cdf, rec_f, rec_i):
    """Record one path on the sticky clock until the horizon or the kill.

    ``rec_f`` columns: time, intrinsic time, x, local time; ``rec_i``:
    edge, alive.  Sticky dwells add a vertex record at the end of the dwell.
    Returns the number of rows written (-1 if the buffers overflowed).
    """
    beta = fp[L_.F_BETA]
    gamma = fp[L_.F_GAMMA]
    h = fp[L_.F_DT] * ip[L_.I_NSUB]
    T = fp[L_.F_T]
    eps = fp[L_.F_EPS]
    x0 = fp[L_.F_X0]
    n_sub = ip[L_.I_NSUB]
    lt_method = ip[L_.I_LT]
    relabel_bridge = ip[L_.I_RELABEL] != 0
    cap = rec_f.shape[0]
    t_tol = 1e-9 * h
    sq = math.sqrt(h / n_sub)
    occ = h / (4.0 * eps)

    st = np.zeros(4, dtype=np.uint64)
    fs = np.zeros(2)
    _init_streams(base, p, st, fs)
    S = math.inf
    if beta > 0.0:
        S = -math.log(1.0 - _uniform(st, 1)) / beta
    y = x0
    edge = ip[L_.I_EDGE0]
    armed = x0 >= 2.0 * eps
    Lt = 0.0
    s = 0.0
    t = 0.0
    rec_f[0, 0] = 0.0
    rec_f[0, 1] = 0.0
    rec_f[0, 2] = x0
    rec_f[0, 3] = 0.0
    rec_i[0, 0] = edge
    rec_i[0, 1] = 1
    r = 1
    i = 0
    while t < T - t_tol:
        if r + 2 > cap:
            return -1
        y1, dL, edge, armed = _advance(y, edge, armed, st, fs, cdf, h, n_sub, sq, occ,
                                       lt_method, eps, relabel_bridge)
        L1 = Lt + dL
        if L1 > S:
            s_kill = s + h * (S - Lt) / dL
            zeta = s_kill + gamma * S
            if zeta <= T + t_tol:
                rec_f[r, 0] = zeta
                rec_f[r, 1] = s_kill
                rec_f[r, 2] = 0.0
                rec_f[r, 3] = S
                rec_i[r, 0] = 0
                rec_i[r, 1] = 0
                return r + 1
            frac = (T - t) / (zeta - t)
            rec_f[r, 0] = T
            rec_f[r, 1] = s + frac * (s_kill - s)
            rec_f[r, 2] = 0.0
            rec_f[r, 3] = Lt + frac * (S - Lt)
            rec_i[r, 0] = 0
            rec_i[r, 1] = 1
            return r + 1
        if gamma > 0.0 and dL > 0.0:
            # end of the vertex dwell that precedes the motion of this step
            td = t + gamma * dL
            if td >= T - t_tol:
                rec_f[r, 0] = T
                rec_f[r, 1] = s
                rec_f[r, 2] = 0.0
                rec_f[r, 3] = Lt + (T - t) / gamma
                rec_i[r, 0] = 0
                rec_i[r, 1] = 1
                return r + 1
            rec_f[r, 0] = td
            rec_f[r, 1] = s
            rec_f[r, 2] = 0.0
            rec_f[r, 3] = L1
            rec_i[r, 0] = 0
            rec_i[r, 1] = 1
            r += 1
        s = (i + 1) * h
        t = s + gamma * L1
        y = y1
        Lt = L1
        rec_f[r, 0] = t
        rec_f[r, 1] = s
        rec_f[r, 2] = abs(y)
        rec_f[r, 3] = Lt
        rec_i[r, 0] = edge if abs(y) > 0.0 else 0
        rec_i[r, 1] = 1
        r += 1
        i += 1
    return r
