# cython: language_level=3
"""Compiled simulation kernels.

Mirror of the pure lane (``_ref``): same per-path Philox streams, same draw
order, and the same floating-point expression shapes (the extension is built
with FP contraction off), so both lanes produce bit-identical paths on one
platform.  See ``_ref`` for the scheme documentation.
"""

from libc.math cimport sqrt

from cpython.pycapsule cimport PyCapsule_GetPointer
from numpy.random cimport bitgen_t
from numpy.random.c_distributions cimport (
    random_noncentral_chisquare,
    random_standard_normal,
)

import numpy as np

from ._common import cir_step_constants


def euler_paths(double a, double b, object m_in, object kappa_in, object theta_in,
                object rho_in, double y0, object x0_in, object dts_in, object seed,
                Py_ssize_t path_offset, Py_ssize_t n_paths):
    """Full-truncation Euler paths; bit-compatible with the pure lane."""
    cdef double[::1] m = np.ascontiguousarray(m_in, dtype=np.float64)
    cdef double[::1] kappa = np.ascontiguousarray(kappa_in, dtype=np.float64)
    cdef double[:, ::1] theta = np.ascontiguousarray(theta_in, dtype=np.float64)
    rho = np.ascontiguousarray(rho_in, dtype=np.float64)
    cdef double[::1] x0 = np.ascontiguousarray(x0_in, dtype=np.float64)
    cdef double[::1] dts = np.ascontiguousarray(dts_in, dtype=np.float64)
    cdef Py_ssize_t n = m.shape[0]
    cdef Py_ssize_t L = dts.shape[0]
    cdef double rho11 = rho[0, 0]
    cdef double[::1] rj1 = np.ascontiguousarray(rho[1:, 0])
    cdef double[:, ::1] rjj = np.ascontiguousarray(rho[1:, 1:])
    cdef double[::1] sqdt = np.sqrt(np.asarray(dts_in, dtype=np.float64))

    y_arr = np.empty((n_paths, L + 1))
    x_arr = np.empty((n_paths, L + 1, n))
    cdef double[:, ::1] y_out = y_arr
    cdef double[:, :, ::1] x_out = x_arr
    cdef double[::1] x = np.empty(n)
    cdef double[::1] xn = np.empty(n)
    cdef double[::1] dbj = np.empty(n)

    cdef bitgen_t *rng
    cdef Py_ssize_t j, l, i, k
    cdef double v, vp, sqv, dt, s, db1, acc, nz
    for j in range(n_paths):
        bg = np.random.Philox(key=[seed, path_offset + j])
        rng = <bitgen_t *> PyCapsule_GetPointer(bg.capsule, "BitGenerator")
        v = y0
        for i in range(n):
            x[i] = x0[i]
        y_out[j, 0] = y0 if y0 > 0.0 else 0.0
        for i in range(n):
            x_out[j, 0, i] = x[i]
        for l in range(L):
            dt = dts[l]
            s = sqdt[l]
            vp = v if v > 0.0 else 0.0
            sqv = sqrt(vp)
            db1 = s * random_standard_normal(rng)
            for i in range(n):
                dbj[i] = s * random_standard_normal(rng)
            for i in range(n):
                acc = 0.0
                for k in range(n):
                    acc += theta[i, k] * x[k]
                nz = db1 * rj1[i]
                for k in range(n):
                    nz += rjj[i, k] * dbj[k]
                xn[i] = x[i] + (m[i] - vp * kappa[i] - acc) * dt + sqv * nz
            v = v + (a - b * vp) * dt + rho11 * sqv * db1
            for i in range(n):
                x[i] = xn[i]
                x_out[j, l + 1, i] = x[i]
            y_out[j, l + 1] = v if v > 0.0 else 0.0
    return y_arr, x_arr


def exact_cir_paths(double a, double b, object m_in, object kappa_in, object theta_in,
                    object rho_in, double y0, object x0_in, object dts_in, object seed,
                    Py_ssize_t path_offset, Py_ssize_t n_paths):
    """Exact-transition CIR for Y with a conditional-Euler X block (hybrid)."""
    cdef double[::1] m = np.ascontiguousarray(m_in, dtype=np.float64)
    cdef double[::1] kappa = np.ascontiguousarray(kappa_in, dtype=np.float64)
    cdef double[:, ::1] theta = np.ascontiguousarray(theta_in, dtype=np.float64)
    rho = np.ascontiguousarray(rho_in, dtype=np.float64)
    cdef double[::1] x0 = np.ascontiguousarray(x0_in, dtype=np.float64)
    cdef double[::1] dts = np.ascontiguousarray(dts_in, dtype=np.float64)
    cdef Py_ssize_t n = m.shape[0]
    cdef Py_ssize_t L = dts.shape[0]
    cdef double rho11 = rho[0, 0]
    cdef double[::1] rj1 = np.ascontiguousarray(rho[1:, 0])
    cdef double[:, ::1] rjj = np.ascontiguousarray(rho[1:, 1:])
    cdef double[::1] sqdt = np.sqrt(np.asarray(dts_in, dtype=np.float64))
    cdef double df = 4.0 * a / (rho11 * rho11)
    decay_arr, scale_arr = cir_step_constants(b, rho11, np.asarray(dts_in, dtype=np.float64))
    cdef double[::1] decay = decay_arr
    cdef double[::1] scale = scale_arr

    y_arr = np.empty((n_paths, L + 1))
    x_arr = np.empty((n_paths, L + 1, n))
    cdef double[:, ::1] y_out = y_arr
    cdef double[:, :, ::1] x_out = x_arr
    cdef double[::1] x = np.empty(n)
    cdef double[::1] xn = np.empty(n)
    cdef double[::1] dbj = np.empty(n)

    cdef bitgen_t *rng
    cdef Py_ssize_t j, l, i, k
    cdef double y, y_next, nc, dt, db1, sqy, acc, nz
    for j in range(n_paths):
        bg = np.random.Philox(key=[seed, path_offset + j])
        rng = <bitgen_t *> PyCapsule_GetPointer(bg.capsule, "BitGenerator")
        y = y0
        for i in range(n):
            x[i] = x0[i]
        y_out[j, 0] = y
        for i in range(n):
            x_out[j, 0, i] = x[i]
        for l in range(L):
            dt = dts[l]
            nc = y * decay[l] / scale[l]
            y_next = scale[l] * random_noncentral_chisquare(rng, df, nc)
            for i in range(n):
                dbj[i] = sqdt[l] * random_standard_normal(rng)
            if y > 0.0:
                db1 = (y_next - y - (a - b * y) * dt) / (rho11 * sqrt(y))
            else:
                db1 = 0.0
            sqy = sqrt(y)
            for i in range(n):
                acc = 0.0
                for k in range(n):
                    acc += theta[i, k] * x[k]
                nz = rj1[i] * db1
                for k in range(n):
                    nz += rjj[i, k] * dbj[k]
                xn[i] = x[i] + (m[i] - kappa[i] * y - acc) * dt + sqy * nz
            for i in range(n):
                x[i] = xn[i]
                x_out[j, l + 1, i] = x[i]
            y = y_next
            y_out[j, l + 1] = y
    return y_arr, x_arr
