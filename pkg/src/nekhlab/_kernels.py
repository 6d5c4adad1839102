"""Compiled inner loops for the integrators (numba).

State layout: q, p are float64 arrays of length n.  The Hamiltonian is
H(q, p) = Hc(I) with I_i = (q_i^2 + p_i^2)/2; the action frequencies
w_i(I) are polynomials given by an exponent table and coefficient rows.
"""
import numpy as np
from numba import njit

SE, SV, Y4, EXACT = 0, 1, 2, 3

_W1 = 1.0 / (2.0 - 2.0 ** (1.0 / 3.0))
_W0 = -(2.0 ** (1.0 / 3.0)) * _W1

TOL = 1e-15
MAXIT = 200


@njit(cache=True)
def omega(q, p, center, exps, gcoef):
    n = q.shape[0]
    m = exps.shape[0]
    out = np.zeros(n)
    for j in range(m):
        mono = 1.0
        for l in range(n):
            e = exps[j, l]
            if e:
                mono *= (0.5 * (q[l] * q[l] + p[l] * p[l]) - center[l]) ** e
        for i in range(n):
            out[i] += gcoef[i, j] * mono
    return out


@njit(cache=True)
def _close(a, b):
    d = 0.0
    for i in range(a.shape[0]):
        t = abs(a[i] - b[i]) / max(1.0, abs(b[i]))
        if t > d:
            d = t
    return d <= TOL


@njit(cache=True)
def sympl_euler(q, p, h, center, exps, gcoef):
    """p' = p - h dH/dq(q, p'),  q' = q + h dH/dp(q, p')."""
    pn = p.copy()
    ok = False
    for _ in range(MAXIT):
        w = omega(q, pn, center, exps, gcoef)
        new = p - h * w * q
        if _close(new, pn):
            pn = new
            ok = True
            break
        pn = new
    w = omega(q, pn, center, exps, gcoef)
    return q + h * w * pn, pn, ok


@njit(cache=True)
def verlet(q, p, h, center, exps, gcoef):
    """Generalised Stormer-Verlet for non-separable H (symmetric, order 2)."""
    hh = 0.5 * h
    ph = p.copy()
    ok1 = False
    for _ in range(MAXIT):
        w = omega(q, ph, center, exps, gcoef)
        new = p - hh * w * q
        if _close(new, ph):
            ph = new
            ok1 = True
            break
        ph = new
    w0 = omega(q, ph, center, exps, gcoef)
    qn = q + h * w0 * ph
    ok2 = False
    for _ in range(MAXIT):
        w1 = omega(qn, ph, center, exps, gcoef)
        new = q + hh * (w0 + w1) * ph
        if _close(new, qn):
            qn = new
            ok2 = True
            break
        qn = new
    w1 = omega(qn, ph, center, exps, gcoef)
    pn = ph - hh * w1 * qn
    return qn, pn, ok1 and ok2


@njit(cache=True)
def exact(q, p, h, center, exps, gcoef):
    w = omega(q, p, center, exps, gcoef)
    c = np.cos(h * w)
    s = np.sin(h * w)
    return c * q + s * p, c * p - s * q, True


@njit(cache=True)
def step(method, q, p, h, center, exps, gcoef):
    if method == SE:
        return sympl_euler(q, p, h, center, exps, gcoef)
    if method == SV:
        return verlet(q, p, h, center, exps, gcoef)
    if method == Y4:
        q1, p1, a = verlet(q, p, _W1 * h, center, exps, gcoef)
        q2, p2, b = verlet(q1, p1, _W0 * h, center, exps, gcoef)
        q3, p3, c = verlet(q2, p2, _W1 * h, center, exps, gcoef)
        return q3, p3, a and b and c
    return exact(q, p, h, center, exps, gcoef)


@njit(cache=True)
def run(method, q, p, h, nsteps, I0, lo, hi, maxdev, center, exps, gcoef):
    """Advance ``nsteps`` steps tracking max |I - I0|_2.

    Returns (q, p, maxdev, done, status) with status 0 ok, 1 solver failure,
    2 action left [lo, hi].
    """
    n = q.shape[0]
    for k in range(nsteps):
        q, p, ok = step(method, q, p, h, center, exps, gcoef)
        if not ok:
            return q, p, maxdev, k + 1, 1
        d = 0.0
        out = False
        for i in range(n):
            I = 0.5 * (q[i] * q[i] + p[i] * p[i])
            d += (I - I0[i]) ** 2
            if I < lo[i] or I > hi[i]:
                out = True
        d = np.sqrt(d)
        if d > maxdev:
            maxdev = d
        if out:
            return q, p, maxdev, k + 1, 2
    return q, p, maxdev, nsteps, 0
