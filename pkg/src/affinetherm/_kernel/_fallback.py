"""Pure-Python RK4 core for the canonical relaxation families.

Mirrors the compiled core step for step: same stage order, same operand
grouping, same convergence and recording rules.  Any change here must be
made in _core.pyx as well.
"""

import math

import numpy as np

BACKEND = "python"

KIND_SINGLE = 0
KIND_TWO = 1


def _rhs(kind, c1, c2, g1, g2, y, z, ky):
    """Fill ky with dy/dt, return dz/dt.  kind 0: w = c1 - z; kind 1: double-well pair."""
    n = len(y)
    if kind == KIND_SINGLE:
        for a in range(n):
            ky[a] = g1[a] - y[a]
        return c1 - z
    s = z - c1
    r = z - c2
    rr = r * r
    sr2 = 2.0 * (s * r)
    wz = -rr - sr2
    for a in range(n):
        ky[a] = y[a] * wz + (rr * g1[a] + sr2 * g2[a])
    return -(s * rr)


def integrate_canonical(kind, c1, c2, g1, g2, y0, z0, dt, n_steps, record_every, conv_tol):
    """Fixed-step RK4 for the lifted field of a canonical generator.

    dt is signed; negative dt integrates the negated field, which is the
    backward-time run.  Returns (ts, ys, zs, steps_done, converged,
    residual, ok); ok is False when the state went non-finite, in which
    case the arrays hold the samples recorded before the failure.
    """
    n = len(y0)
    y = [float(v) for v in y0]
    z = float(z0)
    g1 = [float(v) for v in g1]
    g2 = [float(v) for v in g2]
    c1 = float(c1)
    c2 = float(c2)
    dt = float(dt)
    half = 0.5 * dt
    sixth = dt / 6.0

    cap = n_steps // record_every + 2
    ts = np.empty(cap)
    ys = np.empty((cap, n))
    zs = np.empty(cap)

    ky1 = [0.0] * n
    ky2 = [0.0] * n
    ky3 = [0.0] * n
    ky4 = [0.0] * n
    y2 = [0.0] * n
    y3 = [0.0] * n
    y4 = [0.0] * n

    m = 0
    ts[m] = 0.0
    for a in range(n):
        ys[m, a] = y[a]
    zs[m] = z
    m += 1
    last_rec = 0

    steps = 0
    converged = False
    ok = True
    resid = 0.0
    while True:
        kz1 = _rhs(kind, c1, c2, g1, g2, y, z, ky1)
        acc = 0.0
        for a in range(n):
            acc += ky1[a] * ky1[a]
        acc += kz1 * kz1
        resid = math.sqrt(acc)
        snorm = 0.0
        for a in range(n):
            snorm += y[a] * y[a]
        snorm += z * z
        snorm = math.sqrt(snorm)
        if conv_tol > 0.0 and resid <= conv_tol * (1.0 + snorm):
            converged = True
            break
        if steps == n_steps:
            break

        for a in range(n):
            y2[a] = y[a] + half * ky1[a]
        z2 = z + half * kz1
        kz2 = _rhs(kind, c1, c2, g1, g2, y2, z2, ky2)
        for a in range(n):
            y3[a] = y[a] + half * ky2[a]
        z3 = z + half * kz2
        kz3 = _rhs(kind, c1, c2, g1, g2, y3, z3, ky3)
        for a in range(n):
            y4[a] = y[a] + dt * ky3[a]
        z4 = z + dt * kz3
        kz4 = _rhs(kind, c1, c2, g1, g2, y4, z4, ky4)
        for a in range(n):
            y[a] = y[a] + sixth * (ky1[a] + 2.0 * ky2[a] + 2.0 * ky3[a] + ky4[a])
        z = z + sixth * (kz1 + 2.0 * kz2 + 2.0 * kz3 + kz4)
        steps += 1

        fin = math.isfinite(z)
        if fin:
            for a in range(n):
                if not math.isfinite(y[a]):
                    fin = False
                    break
        if not fin:
            ok = False
            break

        if steps % record_every == 0 or steps == n_steps:
            ts[m] = steps * dt
            for a in range(n):
                ys[m, a] = y[a]
            zs[m] = z
            m += 1
            last_rec = steps

    if ok and last_rec != steps:
        ts[m] = steps * dt
        for a in range(n):
            ys[m, a] = y[a]
        zs[m] = z
        m += 1

    return ts[:m].copy(), ys[:m].copy(), zs[:m].copy(), steps, converged, resid, ok
