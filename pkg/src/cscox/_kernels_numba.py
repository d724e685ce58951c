"""Numba-compiled twins of the likelihood/score kernels.

Same contracts as ``_kernels_numpy``; the loop bodies follow the same
group-subtotal-then-scan summation order, so the two backends agree to
floating-point noise.
"""

import numpy as np
from numba import njit

EXP_CLIP = 690.0
V_BIG = 700.0
_LN2 = 0.6931471805599453


@njit(cache=True)
def _log1mexp_scalar(v):
    if v < _LN2:
        return np.log(-np.expm1(-v))
    return np.log1p(-np.exp(-v))


@njit(cache=True)
def right_loglik_score(x, a, z, grp_idx, grp_start, w, p, beta, tau):
    n, q = z.shape
    ngrp = grp_start.shape[0]

    eta = np.empty(n)
    u = np.empty(n)
    for i in range(n):
        s = 0.0
        for j in range(q):
            s += z[i, j] * beta[j]
        eta[i] = s
        e = s
        if e > EXP_CLIP:
            e = EXP_CLIP
        elif e < -EXP_CLIP:
            e = -EXP_CLIP
        u[i] = w[i] * np.exp(e)

    # per-group subtotals
    g0 = np.zeros(ngrp)
    g1 = np.zeros(ngrp)
    gz0 = np.zeros((ngrp, q))
    gz1 = np.zeros((ngrp, q))
    m = np.zeros(ngrp)
    for i in range(n):
        g = grp_idx[i]
        if a[i] == 0:
            g0[g] += u[i]
            m[g] += w[i]
            for j in range(q):
                gz0[g, j] += u[i] * z[i, j]
        elif a[i] == 1:
            g1[g] += u[i]
            for j in range(q):
                gz1[g, j] += u[i] * z[i, j]

    # reversed scans: risk sums at each distinct time
    s0 = np.empty(ngrp)
    s1 = np.empty(ngrp)
    sz0 = np.empty((ngrp, q))
    sz1 = np.empty((ngrp, q))
    acc0 = 0.0
    acc1 = 0.0
    accz0 = np.zeros(q)
    accz1 = np.zeros(q)
    for g in range(ngrp - 1, -1, -1):
        acc0 += g0[g]
        acc1 += g1[g]
        s0[g] = acc0
        s1[g] = acc1
        for j in range(q):
            accz0[j] += gz0[g, j]
            accz1[j] += gz1[g, j]
            sz0[g, j] = accz0[j]
            sz1[g, j] = accz1[j]

    grad = np.zeros(q)
    e0p = np.empty(ngrp)
    e0one = np.empty(ngrp)
    for g in range(ngrp):
        e0p[g] = (s0[g] + p * s1[g]) / n
        e0one[g] = (s0[g] + s1[g]) / n
        if m[g] > 0.0 and x[grp_start[g]] <= tau and not (e0p[g] > 0.0):
            return 0.0, 0.0, 0.0, grad, 0, 0, 0, g

    r2 = np.empty((ngrp, q))
    r1 = np.empty((ngrp, q))
    r0 = np.empty(ngrp)
    cumlam = np.empty(ngrp)
    cumb = np.empty((ngrp, q))
    acc = 0.0
    accb = np.zeros(q)
    for g in range(ngrp):
        safe = e0p[g] if e0p[g] > 0.0 else 1.0
        r0[g] = e0one[g] / safe
        for j in range(q):
            r2[g, j] = (sz0[g, j] + p * sz1[g, j]) / (n * safe)
            r1[g, j] = (sz0[g, j] + sz1[g, j]) / (n * safe)
        dlam = (m[g] / n) / safe if m[g] > 0.0 else 0.0
        acc += dlam
        cumlam[g] = acc
        for j in range(q):
            accb[j] += dlam * r2[g, j]
            cumb[g, j] = accb[j]

    t1 = 0.0
    t2 = 0.0
    t3 = 0.0
    n_event = 0
    n_cs = 0
    n_dropped = 0
    for i in range(n):
        g = grp_idx[i]
        if a[i] == 0 and x[i] <= tau:
            n_event += 1
            t1 += w[i] * (eta[i] - np.log(e0p[g]))
            t3 += w[i] * r0[g]
            for j in range(q):
                grad[j] += w[i] * (z[i, j] - r2[g, j])
                grad[j] -= w[i] * (r1[g, j] - r0[g] * r2[g, j])
        elif a[i] == 2 and x[i] <= tau:
            e = eta[i]
            if e > EXP_CLIP:
                e = EXP_CLIP
            elif e < -EXP_CLIP:
                e = -EXP_CLIP
            ee = np.exp(e)
            v = ee * cumlam[g]
            if v <= 0.0:
                n_dropped += 1
                continue
            n_cs += 1
            t2 += w[i] * _log1mexp_scalar(v)
            if v <= V_BIG:
                ratio = 1.0 / np.expm1(v)
                for j in range(q):
                    grad[j] += w[i] * ratio * ee * (z[i, j] * cumlam[g] - cumb[g, j])

    return t1 / n, t2 / n, t3 / n, grad / n, n_event, n_cs, n_dropped, -1


@njit(cache=True)
def left_loglik_score(x, a, z, grp_idx, grp_start, w, p, beta, rho):
    n, q = z.shape
    ngrp = grp_start.shape[0]

    eta = np.empty(n)
    u = np.empty(n)
    for i in range(n):
        s = 0.0
        for j in range(q):
            s += z[i, j] * beta[j]
        eta[i] = s
        e = s
        if e > EXP_CLIP:
            e = EXP_CLIP
        elif e < -EXP_CLIP:
            e = -EXP_CLIP
        u[i] = w[i] * np.exp(e)

    g0 = np.zeros(ngrp)
    g2 = np.zeros(ngrp)
    gz0 = np.zeros((ngrp, q))
    gz2 = np.zeros((ngrp, q))
    m = np.zeros(ngrp)
    for i in range(n):
        g = grp_idx[i]
        if a[i] == 0:
            g0[g] += u[i]
            m[g] += w[i]
            for j in range(q):
                gz0[g, j] += u[i] * z[i, j]
        elif a[i] == 2:
            g2[g] += u[i]
            for j in range(q):
                gz2[g, j] += u[i] * z[i, j]

    # forward scans: sums over records with x <= t
    f0 = np.empty(ngrp)
    f2 = np.empty(ngrp)
    fz0 = np.empty((ngrp, q))
    fz2 = np.empty((ngrp, q))
    acc0 = 0.0
    acc2 = 0.0
    accz0 = np.zeros(q)
    accz2 = np.zeros(q)
    for g in range(ngrp):
        acc0 += g0[g]
        acc2 += g2[g]
        f0[g] = acc0
        f2[g] = acc2
        for j in range(q):
            accz0[j] += gz0[g, j]
            accz2[j] += gz2[g, j]
            fz0[g, j] = accz0[j]
            fz2[g, j] = accz2[j]

    grad = np.zeros(q)
    l0p = np.empty(ngrp)
    l0one = np.empty(ngrp)
    for g in range(ngrp):
        l0p[g] = (f0[g] + p * f2[g]) / n
        l0one[g] = (f0[g] + f2[g]) / n
        if m[g] > 0.0 and x[grp_start[g]] >= rho and not (l0p[g] > 0.0):
            return 0.0, 0.0, 0.0, grad, 0, 0, 0, g

    r2 = np.empty((ngrp, q))
    r1 = np.empty((ngrp, q))
    r0 = np.empty(ngrp)
    for g in range(ngrp):
        safe = l0p[g] if l0p[g] > 0.0 else 1.0
        r0[g] = l0one[g] / safe
        for j in range(q):
            r2[g, j] = (fz0[g, j] + p * fz2[g, j]) / (n * safe)
            r1[g, j] = (fz0[g, j] + fz2[g, j]) / (n * safe)

    # reverse-time accumulation: inner integrals run over [x_i, inf)
    tail = np.empty(ngrp)
    tailb = np.empty((ngrp, q))
    acc = 0.0
    accb = np.zeros(q)
    for g in range(ngrp - 1, -1, -1):
        safe = l0p[g] if l0p[g] > 0.0 else 1.0
        drev = (m[g] / n) / safe if m[g] > 0.0 else 0.0
        acc += drev
        tail[g] = acc
        for j in range(q):
            accb[j] += drev * r2[g, j]
            tailb[g, j] = accb[j]

    t1 = 0.0
    t2 = 0.0
    t3 = 0.0
    n_event = 0
    n_cs = 0
    n_dropped = 0
    for i in range(n):
        g = grp_idx[i]
        if a[i] == 0 and x[i] >= rho:
            n_event += 1
            t1 += w[i] * (eta[i] - np.log(l0p[g]))
            t3 += w[i] * r0[g]
            for j in range(q):
                grad[j] += w[i] * (z[i, j] - r2[g, j])
                grad[j] -= w[i] * (r1[g, j] - r0[g] * r2[g, j])
        elif a[i] == 1 and x[i] >= rho:
            e = eta[i]
            if e > EXP_CLIP:
                e = EXP_CLIP
            elif e < -EXP_CLIP:
                e = -EXP_CLIP
            ee = np.exp(e)
            v = ee * tail[g]
            if v <= 0.0:
                n_dropped += 1
                continue
            n_cs += 1
            t2 += w[i] * _log1mexp_scalar(v)
            if v <= V_BIG:
                ratio = 1.0 / np.expm1(v)
                for j in range(q):
                    grad[j] += w[i] * ratio * ee * (z[i, j] * tail[g] - tailb[g, j])

    return t1 / n, t2 / n, t3 / n, grad / n, n_event, n_cs, n_dropped, -1
