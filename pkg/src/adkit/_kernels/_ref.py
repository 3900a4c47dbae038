"""Pure-NumPy simulation kernels.

This is the fallback lane used when the compiled extension is unavailable.
Both lanes keep the contract: path k draws from Philox(key=(seed, offset+k)),
consuming values in the same order, and every arithmetic expression has the
same shape (association and accumulation order), so outputs are bit-identical
across lanes on one platform.

Per step, EulerFullTruncation consumes d = n+1 standard normals (the Y shock
first); ExactCIR consumes one noncentral chi-square draw, then n normals.
"""

from __future__ import annotations

import math

import numpy as np

from ._common import cir_step_constants

# cap on the per-chunk Gaussian buffer (bytes) for the vectorized Euler lane
_CHUNK_BYTES = 100_000_000


def _stream(seed, k):
    return np.random.Generator(np.random.Philox(key=[seed, k]))


def euler_paths(a, b, m, kappa, theta, rho, y0, x0, dts, seed, path_offset, n_paths):
    """Full-truncation Euler paths; returns (y, x) of shapes (N, L+1), (N, L+1, n).

    The raw iterate v may go negative; drift and diffusion use v+ = max(v, 0)
    and the stored Y is v+.  The X block uses the same sqrt(v+) factor.
    """
    m = np.asarray(m, dtype=np.float64)
    kappa = np.asarray(kappa, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    rho = np.asarray(rho, dtype=np.float64)
    x0 = np.asarray(x0, dtype=np.float64)
    dts = np.asarray(dts, dtype=np.float64)
    n = m.shape[0]
    d = n + 1
    L = dts.shape[0]
    rho11 = float(rho[0, 0])
    rho_j1 = rho[1:, 0]
    rho_jj = rho[1:, 1:]
    sqdt = np.sqrt(dts)

    y_out = np.empty((n_paths, L + 1))
    x_out = np.empty((n_paths, L + 1, n))
    chunk = max(1, int(_CHUNK_BYTES / (L * d * 8)))
    for start in range(0, n_paths, chunk):
        stop = min(start + chunk, n_paths)
        c = stop - start
        xi = np.empty((c, L, d))
        for j in range(c):
            xi[j] = _stream(seed, path_offset + start + j).standard_normal((L, d))
        v = np.full(c, float(y0))
        x = np.tile(x0, (c, 1))
        y_out[start:stop, 0] = max(float(y0), 0.0)
        x_out[start:stop, 0] = x
        for l in range(L):
            dt = dts[l]
            s = sqdt[l]
            vp = np.maximum(v, 0.0)
            sqv = np.sqrt(vp)
            db1 = s * xi[:, l, 0]
            dbj = s * xi[:, l, 1:]
            # theta @ x and the noise mix are accumulated in ascending-k order
            # to match the compiled lane's scalar loops bit for bit
            tx = np.zeros((c, n))
            for k in range(n):
                tx += theta[None, :, k] * x[:, k, None]
            nz = db1[:, None] * rho_j1[None, :]
            for k in range(n):
                nz += rho_jj[None, :, k] * dbj[:, k, None]
            x = x + (m[None, :] - vp[:, None] * kappa[None, :] - tx) * dt + sqv[:, None] * nz
            v = v + (a - b * vp) * dt + rho11 * sqv * db1
            y_out[start:stop, l + 1] = np.maximum(v, 0.0)
            x_out[start:stop, l + 1] = x
    return y_out, x_out


def exact_cir_paths(a, b, m, kappa, theta, rho, y0, x0, dts, seed, path_offset, n_paths):
    """Exact-transition CIR for Y; X block is Euler conditional on Y (hybrid).

    Y_{l+1} = scale * ncx2(df, Y_l * decay / scale) with df = 4a/rho11^2.
    When rho_J1 is nonzero the X block needs the Y-shock increment; it is
    recovered as the Brownian increment implied by the Y update (zero at
    Y_l = 0).
    """
    m = np.asarray(m, dtype=np.float64)
    kappa = np.asarray(kappa, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    rho = np.asarray(rho, dtype=np.float64)
    x0 = np.asarray(x0, dtype=np.float64)
    dts = np.asarray(dts, dtype=np.float64)
    n = m.shape[0]
    L = dts.shape[0]
    rho11 = float(rho[0, 0])
    rho_j1 = rho[1:, 0]
    rho_jj = rho[1:, 1:]
    sqdt = np.sqrt(dts)
    df = 4.0 * a / (rho11 * rho11)
    decay, scale = cir_step_constants(b, rho11, dts)

    y_out = np.empty((n_paths, L + 1))
    x_out = np.empty((n_paths, L + 1, n))
    for j in range(n_paths):
        gen = _stream(seed, path_offset + j)
        y = float(y0)
        x = x0.copy()
        y_out[j, 0] = y
        x_out[j, 0] = x
        for l in range(L):
            dt = dts[l]
            nc = y * decay[l] / scale[l]
            y_next = scale[l] * gen.noncentral_chisquare(df, nc)
            dbj = sqdt[l] * gen.standard_normal(n)
            if y > 0.0:
                db1 = (y_next - y - (a - b * y) * dt) / (rho11 * math.sqrt(y))
            else:
                db1 = 0.0
            sqy = math.sqrt(y)
            tx = np.zeros(n)
            for k in range(n):
                tx += theta[:, k] * x[k]
            nz = rho_j1 * db1
            for k in range(n):
                nz += rho_jj[:, k] * dbj[k]
            x = x + (m - kappa * y - tx) * dt + sqy * nz
            y = float(y_next)
            y_out[j, l + 1] = y
            x_out[j, l + 1] = x
    return y_out, x_out
