"""Pure-numpy fallback for the path kernels, vectorized over paths.

Mirrors :mod:`starwalk.simulate._nb` step for step and draws from the same
counter-based streams, so both backends agree path by path up to
floating-point rounding in ``log``/``sqrt``.
"""

from __future__ import annotations

import numpy as np

from . import layout as L_
from .rng import AUX, DRIVER, VecStreams, path_keys_np


class _State:
    def __init__(self, base, paths, fp, ip):
        self.drv = VecStreams(path_keys_np(base, paths, DRIVER))
        self.aux = VecStreams(path_keys_np(base, paths, AUX))
        n = len(paths)
        beta = fp[L_.F_BETA]
        self.S = np.full(n, np.inf)
        if beta > 0.0:
            self.S = -np.log(1.0 - self.aux.uniform(np.arange(n))) / beta
        x0 = fp[L_.F_X0]
        self.y = np.full(n, x0)
        self.edge = np.full(n, int(ip[L_.I_EDGE0]), dtype=np.int64)
        self.armed = np.full(n, x0 >= 2.0 * fp[L_.F_EPS])
        self.L = np.zeros(n)
        self.s = np.zeros(n)
        self.t = np.zeros(n)
        self.step = np.zeros(n, dtype=np.int64)


def _advance(st: _State, idx, cdf, h, n_sub, lt_method, eps, relabel_bridge):
    z = np.zeros(idx.shape[0])
    for _ in range(n_sub):
        z += st.drv.normal(idx)
    y = st.y[idx]
    y1 = y + np.sqrt(h / n_sub) * z
    a = np.abs(y)
    b = np.abs(y1)
    armed = st.armed[idx]
    if lt_method == L_.LT_OCCUPATION:
        dL = (0.5 * (a <= eps) + 0.5 * (b <= eps)) * (h / (2.0 * eps))
    elif lt_method == L_.LT_DOWNCROSSING:
        hit = armed & (b <= eps)
        dL = np.where(hit, eps, 0.0)
        armed = np.where(hit, False, armed | (b >= 2.0 * eps))
    else:
        u = 1.0 - st.aux.uniform(idx)
        d = y1 - y
        dL = np.maximum(np.sqrt(d * d - 2.0 * h * np.log(u)) - (a + b), 0.0)
    touched = (y == 0.0) | (y * y1 < 0.0)
    if relabel_bridge:
        touched |= dL > 0.0
    edge = st.edge[idx].copy()
    if touched.any():
        u = st.aux.uniform(idx[touched])
        edge[touched] = np.minimum(np.searchsorted(cdf[:-1], u, side="right") + 1, len(cdf))
    st.armed[idx] = armed
    return y1, dL, edge


def run_batch(base, p0, n, fp, ip, cdf, out_f, out_i):
    beta, gamma = fp[L_.F_BETA], fp[L_.F_GAMMA]
    n_sub = int(ip[L_.I_NSUB])
    h = fp[L_.F_DT] * n_sub
    T, ball, alpha = fp[L_.F_T], fp[L_.F_BALL], fp[L_.F_ALPHA]
    eps, smax = fp[L_.F_EPS], fp[L_.F_SMAX]
    mode, lt_method = int(ip[L_.I_MODE]), int(ip[L_.I_LT])
    relabel_bridge = ip[L_.I_RELABEL] != 0
    max_steps = int(ip[L_.I_MAXSTEPS])
    t_tol = 1e-9 * h
    del beta

    st = _State(base, np.arange(p0, p0 + n), fp, ip)
    pot = np.zeros(n)
    killed = np.zeros(n, dtype=np.int64)
    trunc = np.zeros(n)
    t_out = np.full(n, np.inf)
    active = np.arange(n)

    while active.size:
        stop = np.zeros(active.size, dtype=bool)
        if mode == L_.MODE_LIFETIME:
            stop |= st.s[active] >= smax - t_tol
        stop |= st.step[active] >= max_steps
        trunc[active[stop]] = 1.0
        active = active[~stop]
        if not active.size:
            break
        idx = active
        y1, dL, edge = _advance(st, idx, cdf, h, n_sub, lt_method, eps, relabel_bridge)
        st.edge[idx] = edge
        Lt, s, t = st.L[idx], st.s[idx], st.t[idx]
        s1 = (st.step[idx] + 1) * h
        L1 = Lt + dL
        t_mid = t + 0.5 * (h + gamma * dL)
        done = np.zeros(idx.size, dtype=bool)

        # killing
        kill = L1 > st.S[idx]
        if kill.any():
            k = np.flatnonzero(kill)
            Sk = st.S[idx[k]]
            s_kill = s[k] + h * (Sk - Lt[k]) / dL[k]
            zeta = s_kill + gamma * Sk
            gk = idx[k]
            Lk, sk = Sk, s_kill
            if mode == L_.MODE_TERMINAL:
                within = zeta <= T + t_tol
                killed[gk[within]] = 1
                t_out[gk] = np.where(within, zeta, T)
                # horizon inside the killing step: cut linearly
                frac = np.where(within, 1.0, (T - t[k]) / (zeta - t[k]))
                Lk = Lt[k] + frac * (Sk - Lt[k])
                sk = s[k] + frac * (s_kill - s[k])
            else:
                if mode == L_.MODE_POTENTIAL:
                    m = t_mid[k] < T
                    pot[gk[m]] += np.exp(-alpha * t_mid[k][m]) * (Sk[m] - Lt[k][m])
                killed[gk] = 1
                t_out[gk] = zeta
            st.y[gk] = 0.0
            st.edge[gk] = 0
            st.L[gk] = Lk
            st.s[gk] = sk
            done[k] = True

        t1 = s1 + gamma * L1
        live = ~done
        if mode == L_.MODE_TERMINAL:
            fin = live & (t1 >= T - t_tol)
            if fin.any():
                f = np.flatnonzero(fin)
                dwell = (T - t[f]) < gamma * dL[f]
                gf = idx[f]
                st.y[gf] = np.where(dwell, 0.0, y1[f])
                st.edge[gf] = np.where(dwell, 0, st.edge[gf])
                with np.errstate(divide="ignore", invalid="ignore"):
                    L_dwell = Lt[f] + (T - t[f]) / gamma
                st.L[gf] = np.where(dwell, L_dwell, L1[f])
                st.s[gf] = np.where(dwell, s[f],
                                    s[f] + np.minimum(h, T - t[f] - gamma * dL[f]))
                t_out[gf] = T
                done |= fin
        elif mode == L_.MODE_POTENTIAL:
            m = live & (t_mid < T)
            pot[idx[m]] += np.exp(-alpha * t_mid[m]) * dL[m]
            fin = live & (t1 >= T - t_tol)
            gf = idx[fin]
            st.y[gf], st.L[gf], st.s[gf] = y1[fin], L1[fin], s1[fin]
            t_out[gf] = T
            done |= fin
        elif mode == L_.MODE_EXIT:
            fin = live & (np.abs(y1) >= ball)
            gf = idx[fin]
            st.y[gf], st.L[gf], st.s[gf] = y1[fin], L1[fin], s1[fin]
            t_out[gf] = t1[fin]
            done |= fin

        cont = ~done
        gc = idx[cont]
        st.y[gc], st.L[gc], st.s[gc], st.t[gc] = y1[cont], L1[cont], s1[cont], t1[cont]
        st.step[gc] += 1
        active = idx[cont]

    out_f[:, L_.O_T] = t_out
    out_f[:, L_.O_X] = np.abs(st.y)
    out_f[:, L_.O_L] = st.L
    out_f[:, L_.O_S] = st.s
    out_f[:, L_.O_POT] = pot
    out_f[:, L_.O_KILL_LEVEL] = st.S
    out_f[:, L_.O_TRUNC] = trunc
    out_i[:, 0] = np.where(np.abs(st.y) > 0.0, st.edge, 0)
    out_i[:, 1] = killed


def record_path(base, p, fp, ip, cdf, rec_f, rec_i):
    gamma = fp[L_.F_GAMMA]
    n_sub = int(ip[L_.I_NSUB])
    h = fp[L_.F_DT] * n_sub
    T, eps, x0 = fp[L_.F_T], fp[L_.F_EPS], fp[L_.F_X0]
    lt_method = int(ip[L_.I_LT])
    relabel_bridge = ip[L_.I_RELABEL] != 0
    cap = rec_f.shape[0]
    t_tol = 1e-9 * h

    st = _State(base, np.array([p]), fp, ip)
    S = st.S[0]
    idx = np.array([0])
    rec_f[0] = (0.0, 0.0, x0, 0.0)
    rec_i[0] = (ip[L_.I_EDGE0], 1)
    r, i, t, s, Lt = 1, 0, 0.0, 0.0, 0.0
    while t < T - t_tol:
        if r + 2 > cap:
            return -1
        y1, dL, edge = _advance(st, idx, cdf, h, n_sub, lt_method, eps, relabel_bridge)
        y1, dL, edge = float(y1[0]), float(dL[0]), int(edge[0])
        st.edge[0] = edge
        L1 = Lt + dL
        if L1 > S:
            s_kill = s + h * (S - Lt) / dL
            zeta = s_kill + gamma * S
            if zeta <= T + t_tol:
                rec_f[r] = (zeta, s_kill, 0.0, S)
                rec_i[r] = (0, 0)
                return r + 1
            frac = (T - t) / (zeta - t)
            rec_f[r] = (T, s + frac * (s_kill - s), 0.0, Lt + frac * (S - Lt))
            rec_i[r] = (0, 1)
            return r + 1
        if gamma > 0.0 and dL > 0.0:
            td = t + gamma * dL
            if td >= T - t_tol:
                rec_f[r] = (T, s, 0.0, Lt + (T - t) / gamma)
                rec_i[r] = (0, 1)
                return r + 1
            rec_f[r] = (td, s, 0.0, L1)
            rec_i[r] = (0, 1)
            r += 1
        s = (i + 1) * h
        t = s + gamma * L1
        Lt = L1
        st.y[0] = y1
        rec_f[r] = (t, s, abs(y1), Lt)
        rec_i[r] = (edge if abs(y1) > 0.0 else 0, 1)
        r += 1
        i += 1
    return r
