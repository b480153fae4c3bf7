# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled RK4 core for the canonical relaxation families.

Mirrors _fallback.py step for step: same stage order, same operand
grouping, same convergence and recording rules.  Any change here must be
made in the fallback as well.
"""

from libc.math cimport sqrt, isfinite

import numpy as np

BACKEND = "compiled"

KIND_SINGLE = 0
KIND_TWO = 1


cdef inline double _rhs(int kind, double c1, double c2,
                        double[::1] g1, double[::1] g2,
                        double[::1] y, double z, double[::1] ky,
                        Py_ssize_t n) noexcept nogil:
    cdef Py_ssize_t a
    cdef double s, r, rr, sr2, wz
    if kind == 0:
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


def integrate_canonical(int kind, double c1, double c2, g1_in, g2_in, y0_in,
                        double z0, double dt, long n_steps, long record_every,
                        double conv_tol):
    """Fixed-step RK4 for the lifted field of a canonical generator.

    Same contract as the fallback: returns (ts, ys, zs, steps_done,
    converged, residual, ok).
    """
    cdef double[::1] g1 = np.ascontiguousarray(g1_in, dtype=np.float64)
    cdef double[::1] g2 = np.ascontiguousarray(g2_in, dtype=np.float64)
    y0_arr = np.ascontiguousarray(y0_in, dtype=np.float64)
    cdef Py_ssize_t n = y0_arr.shape[0]

    cdef double[::1] y = y0_arr.copy()
    cdef double z = z0
    cdef double half = 0.5 * dt
    cdef double sixth = dt / 6.0

    cdef long cap = n_steps // record_every + 2
    ts_arr = np.empty(cap, dtype=np.float64)
    ys_arr = np.empty((cap, n), dtype=np.float64)
    zs_arr = np.empty(cap, dtype=np.float64)
    cdef double[::1] ts = ts_arr
    cdef double[:, ::1] ys = ys_arr
    cdef double[::1] zs = zs_arr

    cdef double[::1] ky1 = np.zeros(max(n, 1), dtype=np.float64)
    cdef double[::1] ky2 = np.zeros(max(n, 1), dtype=np.float64)
    cdef double[::1] ky3 = np.zeros(max(n, 1), dtype=np.float64)
    cdef double[::1] ky4 = np.zeros(max(n, 1), dtype=np.float64)
    cdef double[::1] y2 = np.zeros(max(n, 1), dtype=np.float64)
    cdef double[::1] y3 = np.zeros(max(n, 1), dtype=np.float64)
    cdef double[::1] y4 = np.zeros(max(n, 1), dtype=np.float64)

    cdef Py_ssize_t m = 0, a
    cdef long steps = 0, last_rec = 0
    cdef bint converged = False, ok = True, fin
    cdef double resid = 0.0
    cdef double kz1, kz2, kz3, kz4, z2, z3, z4, acc, snorm

    with nogil:
        ts[m] = 0.0
        for a in range(n):
            ys[m, a] = y[a]
        zs[m] = z
        m += 1

        while True:
            kz1 = _rhs(kind, c1, c2, g1, g2, y, z, ky1, n)
            acc = 0.0
            for a in range(n):
                acc += ky1[a] * ky1[a]
            acc += kz1 * kz1
            resid = sqrt(acc)
            snorm = 0.0
            for a in range(n):
                snorm += y[a] * y[a]
            snorm += z * z
            snorm = sqrt(snorm)
            if conv_tol > 0.0 and resid <= conv_tol * (1.0 + snorm):
                converged = True
                break
            if steps == n_steps:
                break

            for a in range(n):
                y2[a] = y[a] + half * ky1[a]
            z2 = z + half * kz1
            kz2 = _rhs(kind, c1, c2, g1, g2, y2, z2, ky2, n)
            for a in range(n):
                y3[a] = y[a] + half * ky2[a]
            z3 = z + half * kz2
            kz3 = _rhs(kind, c1, c2, g1, g2, y3, z3, ky3, n)
            for a in range(n):
                y4[a] = y[a] + dt * ky3[a]
            z4 = z + dt * kz3
            kz4 = _rhs(kind, c1, c2, g1, g2, y4, z4, ky4, n)
            for a in range(n):
                y[a] = y[a] + sixth * (ky1[a] + 2.0 * ky2[a] + 2.0 * ky3[a] + ky4[a])
            z = z + sixth * (kz1 + 2.0 * kz2 + 2.0 * kz3 + kz4)
            steps += 1

            fin = isfinite(z)
            if fin:
                for a in range(n):
                    if not isfinite(y[a]):
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

    return (
        ts_arr[:m].copy(),
        ys_arr[:m].copy(),
        zs_arr[:m].copy(),
        int(steps),
        bool(converged),
        float(resid),
        bool(ok),
    )
