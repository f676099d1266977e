"""Fixed-step RK4 loops with cubic Hermite dense output.

The loops are plain Python written in the numba subset. Expression systems
get them compiled (once, with the field passed as a first-class function);
callable systems run the very same functions uncompiled.

Timeline layout shared by the delayed loops: node ``j`` sits at
``t0 + (j - K) h``. Nodes ``0..K`` hold the resampled history, nodes
``K..K+N`` the solution. Segment ``j`` joins nodes ``j`` and ``j+1`` and has
its own end slopes ``M0[j]``, ``M1[j]``.
"""
from __future__ import annotations

import functools
import math

import numpy as np
from numba import njit, types

OK, DIVERGED, BAD_LOOKUP = 0, 1, 2

FIELD_SIG = types.void(types.float64, types.float64[::1], types.float64[:, ::1], types.float64[::1])


def compile_field(source: str):
    ns = {}
    exec(source, ns)
    return njit(FIELD_SIG, error_model="numpy")(ns["field"])


@njit(cache=True)
def _herm(y0, y1, m0, m1, h, s):
    s2 = s * s
    s3 = s2 * s
    return ((2 * s3 - 3 * s2 + 1) * y0 + (s3 - 2 * s2 + s) * h * m0
            + (-2 * s3 + 3 * s2) * y1 + (s3 - s2) * h * m1)


@njit(cache=True)
def _cubic_max(y0, y1, m0, m1, h, s_lo, s_hi):
    """Max of a Hermite segment over normalised ``[s_lo, s_hi]``."""
    b = h * m0
    e = h * m1
    c = 3.0 * (y1 - y0) - 2.0 * b - e
    d = 2.0 * (y0 - y1) + b + e
    best = max(_herm(y0, y1, m0, m1, h, s_lo), _herm(y0, y1, m0, m1, h, s_hi))
    A = 3.0 * d
    B = 2.0 * c
    C = b
    if abs(A) > 1e-14 * (abs(A) + abs(B) + abs(C)):
        disc = B * B - 4.0 * A * C
        if disc >= 0.0:
            sq = math.sqrt(disc)
            q = -0.5 * (B + sq) if B >= 0 else -0.5 * (B - sq)
            if q != 0.0:
                for r in (q / A, C / q):
                    if s_lo < r < s_hi:
                        best = max(best, y0 + r * (b + r * (c + r * d)))
    elif B != 0.0:
        r = -C / B
        if s_lo < r < s_hi:
            best = max(best, y0 + r * (b + r * (c + r * d)))
    return best


@njit(cache=True)
def _delay(code, par, tab, r, t):
    if code == 0:
        d = par[0]
    elif code == 1:
        d = par[0] + par[1] * math.sin(par[2] * t + par[3])
    else:
        k = int(math.floor(t / par[0]))
        if k < 0:
            k = 0
        if k >= tab.shape[0]:
            k = tab.shape[0] - 1
        d = tab[k]
    if d < 0.0:
        d = 0.0
    if d > r:
        d = r
    return d


def ode_loop(field, t0, h, N, direction, y0, m, guard, Y, DY):
    """RK4 for ``x' = F(x)`` with ``F(x) = field(t, x, [x, ..., x])``.

    ``direction = -1`` integrates backward in time; DY always holds the
    forward-time derivative. Returns (status, last valid node).
    """
    n = y0.shape[0]
    z = np.empty((m, n))
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    tmp = np.empty(n)
    for i in range(n):
        Y[0, i] = y0[i]
    for k in range(N + 1):
        t = t0 + direction * k * h
        for j in range(m):
            for i in range(n):
                z[j, i] = Y[k, i]
        field(t, Y[k], z, k1)
        for i in range(n):
            DY[k, i] = k1[i]
        if k == N:
            break
        sh = direction * h
        for i in range(n):
            tmp[i] = Y[k, i] + 0.5 * sh * k1[i]
        for j in range(m):
            for i in range(n):
                z[j, i] = tmp[i]
        field(t + 0.5 * sh, tmp, z, k2)
        for i in range(n):
            tmp[i] = Y[k, i] + 0.5 * sh * k2[i]
        for j in range(m):
            for i in range(n):
                z[j, i] = tmp[i]
        field(t + 0.5 * sh, tmp, z, k3)
        for i in range(n):
            tmp[i] = Y[k, i] + sh * k3[i]
        for j in range(m):
            for i in range(n):
                z[j, i] = tmp[i]
        field(t + sh, tmp, z, k4)
        bad = False
        for i in range(n):
            v = Y[k, i] + sh / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            Y[k + 1, i] = v
            if not (abs(v) <= guard):
                bad = True
        if bad:
            return DIVERGED, k
    return OK, N


def dde_loop(field, t0, h, K, N, Y, M0, M1, dcode, dpar, dtab, r, guard):
    """RK4 with delayed lookups served by the Hermite timeline.

    Lookups that fall beyond the last completed node extrapolate the last
    completed segment.
    """
    n = Y.shape[1]
    m = dcode.shape[0]
    base = t0 - K * h
    z = np.empty((m, n))
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    tmp = np.empty(n)
    for step in range(N + 1):
        k = K + step
        t = t0 + step * h
        for stage in range(4):
            if stage == 0:
                ts = t
            elif stage < 3:
                ts = t + 0.5 * h
            else:
                ts = t + h
            for j in range(m):
                s = ts - _delay(dcode[j], dpar[j], dtab[j], r, ts)
                u = (s - base) / h
                idx = int(math.floor(u))
                if idx > k - 1:
                    idx = k - 1
                if idx < 0:
                    return BAD_LOOKUP, k
                fr = u - idx
                for i in range(n):
                    z[j, i] = _herm(Y[idx, i], Y[idx + 1, i], M0[idx, i], M1[idx, i], h, fr)
            if stage == 0:
                field(ts, Y[k], z, k1)
                for i in range(n):
                    if step < N:
                        M0[k, i] = k1[i]
                    if k - 1 >= K:
                        M1[k - 1, i] = k1[i]
                if step == N:
                    break
                for i in range(n):
                    tmp[i] = Y[k, i] + 0.5 * h * k1[i]
            elif stage == 1:
                field(ts, tmp, z, k2)
                for i in range(n):
                    tmp[i] = Y[k, i] + 0.5 * h * k2[i]
            elif stage == 2:
                field(ts, tmp, z, k3)
                for i in range(n):
                    tmp[i] = Y[k, i] + h * k3[i]
            else:
                field(ts, tmp, z, k4)
        if step == N:
            break
        bad = False
        for i in range(n):
            v = Y[k, i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            Y[k + 1, i] = v
            # provisional right slope until the next step evaluates the field there
            M1[k, i] = k4[i]
            if not (abs(v) <= guard):
                bad = True
        if bad:
            return DIVERGED, k
    return OK, K + N


def bounding_loop(field, t0, h, K, N, m, Y, M0, M1, r, guard, dq, head, tail, segmax):
    """RK4 for ``x' = f(x) + G(x, S, ..., S)`` with S the sup of x over ``[t - r, t]``.

    Window maxima come from a monotone wedge (per component deque of
    segment indices with decreasing segment maxima) plus the partial
    segment at the left edge and the in-progress step.
    """
    n = Y.shape[1]
    base = t0 - K * h
    zz = np.empty((m, n))
    sup = np.empty(n)
    k1 = np.empty(n)
    k2 = np.empty(n)
    k3 = np.empty(n)
    k4 = np.empty(n)
    tmp = np.empty(n)

    for j in range(K - 1):
        for i in range(n):
            segmax[j, i] = _cubic_max(Y[j, i], Y[j + 1, i], M0[j, i], M1[j, i], h, 0.0, 1.0)
            while tail[i] > head[i] and segmax[dq[i, tail[i] - 1], i] <= segmax[j, i]:
                tail[i] -= 1
            dq[i, tail[i]] = j
            tail[i] += 1

    for step in range(N + 1):
        k = K + step
        t = t0 + step * h
        for stage in range(4):
            if stage == 0:
                ts = t
                cur = Y[k]
            elif stage < 3:
                ts = t + 0.5 * h
                cur = tmp
            else:
                ts = t + h
                cur = tmp
            left = ts - r
            u = (left - base) / h
            lj = int(math.floor(u))
            if lj < 0:
                return BAD_LOOKUP, k
            fr = u - lj
            # whole segments inside the window come from the wedge; at stage 0
            # the newest segment still has a provisional slope and is handled here
            for i in range(n):
                while tail[i] > head[i] and dq[i, head[i]] <= lj:
                    head[i] += 1
                best = max(Y[k, i], cur[i])
                if tail[i] > head[i]:
                    best = max(best, segmax[dq[i, head[i]], i])
                if lj <= k - 1:
                    best = max(best, _cubic_max(Y[lj, i], Y[lj + 1, i], M0[lj, i], M1[lj, i], h, fr, 1.0))
                if stage == 0 and k - 1 > lj:
                    best = max(best, _cubic_max(Y[k - 1, i], Y[k, i], M0[k - 1, i], M1[k - 1, i], h, 0.0, 1.0))
                sup[i] = best
            for j in range(m):
                for i in range(n):
                    zz[j, i] = sup[i]
            if stage == 0:
                field(ts, Y[k], zz, k1)
                for i in range(n):
                    if step < N:
                        M0[k, i] = k1[i]
                    if k - 1 >= K:
                        M1[k - 1, i] = k1[i]
                # segment k-1 is final now
                j = k - 1
                if j > lj:
                    for i in range(n):
                        segmax[j, i] = _cubic_max(Y[j, i], Y[j + 1, i], M0[j, i], M1[j, i], h, 0.0, 1.0)
                        while tail[i] > head[i] and segmax[dq[i, tail[i] - 1], i] <= segmax[j, i]:
                            tail[i] -= 1
                        dq[i, tail[i]] = j
                        tail[i] += 1
                if step == N:
                    break
                for i in range(n):
                    tmp[i] = Y[k, i] + 0.5 * h * k1[i]
            elif stage == 1:
                field(ts, tmp, zz, k2)
                for i in range(n):
                    tmp[i] = Y[k, i] + 0.5 * h * k2[i]
            elif stage == 2:
                field(ts, tmp, zz, k3)
                for i in range(n):
                    tmp[i] = Y[k, i] + h * k3[i]
            else:
                field(ts, tmp, zz, k4)
        if step == N:
            break
        bad = False
        for i in range(n):
            v = Y[k, i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            Y[k + 1, i] = v
            M1[k, i] = k4[i]
            if not (abs(v) <= guard):
                bad = True
        if bad:
            return DIVERGED, k
    return OK, K + N


_F = types.FunctionType(FIELD_SIG)
_A1 = types.float64[::1]
_A2 = types.float64[:, ::1]
_STATUS = types.UniTuple(types.int64, 2)


@functools.lru_cache(maxsize=None)
def compiled():
    """Compile the loops once; field functions are passed as first-class values."""
    ode = njit(_STATUS(_F, types.float64, types.float64, types.int64, types.float64, _A1,
                       types.int64, types.float64, _A2, _A2), error_model="numpy", cache=True)(ode_loop)
    dde = njit(_STATUS(_F, types.float64, types.float64, types.int64, types.int64, _A2, _A2, _A2,
                       types.int64[::1], _A2, _A2, types.float64, types.float64),
               error_model="numpy", cache=True)(dde_loop)
    bnd = njit(_STATUS(_F, types.float64, types.float64, types.int64, types.int64, types.int64,
                       _A2, _A2, _A2,
                       types.float64, types.float64, types.int64[:, ::1], types.int64[::1],
                       types.int64[::1], _A2), error_model="numpy", cache=True)(bounding_loop)
    return {"ode": ode, "dde": dde, "bounding": bnd}
