"""Drift estimation from a discretely observed path: design matrices, the
quadratic-variation diffusion estimate, full and restricted closed-form
maximum-likelihood estimators, the empirical information matrix, and the
regime-appropriate error normalization.

Parameter ordering (fixed project-wide, serialization tag
"duffie-ad1n-v1"):

    tau       = (a, b, m_1, kappa_1, theta_11..theta_1n, ...,
                       m_n, kappa_n, theta_n1..theta_nn)        (d^2+1,)
    tau_tilde = (b, kappa_1, theta_11..theta_1n, ...,
                    kappa_n, theta_n1..theta_nn)                (d^2-n,)

with d = n + 1.  All time integrals are discretized with left-endpoint
sums: Riemann for ds terms and Ito-consistent for dZ terms, on the same
grid.  Steps whose left endpoint Y is below 1e-10 are skipped in any
S(Z)^{-1}-weighted sum (S(z) = y * rho rho^T); more than 0.1% skipped
steps aborts the estimation, since in a healthy sampling regime the floor
is essentially never hit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .errors import NumericalError, ValidationError
from .linalg import cholesky, spectrum
from .model import ModelSpec, RegimeClass
from .simulate import PathGrid

__all__ = [
    "ORDERING_TAG",
    "MleResult",
    "RestrictedMleResult",
    "lambda_matrix",
    "lambda_tilde",
    "tau_vector",
    "tau_tilde_vector",
    "estimate_diffusion",
    "mle_full",
    "mle_restricted",
    "info_rate",
    "normalizer",
]

ORDERING_TAG = "duffie-ad1n-v1"

_Y_FLOOR = 1e-10
_MAX_SKIP_FRACTION = 1e-3
_MAX_CONDITION = 1e12


def lambda_matrix(z, n: int) -> np.ndarray:
    """Design matrix with drift(z) = Lambda(z) @ tau.

    Block diagonal: first row (1, -y) against (a, b); then I_n tensor
    K(z) with K(z) = (1, -y, -x_1, ..., -x_n) against each (m_i, kappa_i,
    theta_i1..theta_in)."""
    z = np.asarray(z, dtype=float)
    n = int(n)
    if z.shape != (n + 1,):
        raise ValidationError("lambda_matrix: z must have length n + 1")
    y, x = z[0], z[1:]
    d = n + 1
    out = np.zeros((d, d * d + 1))
    out[0, 0] = 1.0
    out[0, 1] = -y
    k_row = np.concatenate(([1.0, -y], -x))
    width = n + 2
    for i in range(n):
        out[1 + i, 2 + i * width : 2 + (i + 1) * width] = k_row
    return out


def lambda_tilde(z, n: int) -> np.ndarray:
    """Design matrix with drift(z) = c - LambdaTilde(z) @ tau_tilde, where
    c = (a, m) holds the known constant terms."""
    z = np.asarray(z, dtype=float)
    n = int(n)
    if z.shape != (n + 1,):
        raise ValidationError("lambda_tilde: z must have length n + 1")
    y = z[0]
    d = n + 1
    out = np.zeros((d, d * d - n))
    out[0, 0] = y
    width = n + 1
    for i in range(n):
        out[1 + i, 1 + i * width : 1 + (i + 1) * width] = z
    return out


def tau_vector(spec: ModelSpec) -> np.ndarray:
    """Stack the drift parameters of a spec in the documented order."""
    parts = [np.array([spec.a, spec.b])]
    for i in range(spec.n):
        parts.append(np.concatenate(([spec.m[i], spec.kappa[i]], spec.theta[i])))
    return np.concatenate(parts)


def tau_tilde_vector(spec: ModelSpec) -> np.ndarray:
    """Stack the restricted drift parameters (a and m excluded)."""
    parts = [np.array([spec.b])]
    for i in range(spec.n):
        parts.append(np.concatenate(([spec.kappa[i]], spec.theta[i])))
    return np.concatenate(parts)


@dataclass(frozen=True)
class MleResult:
    tau_hat: np.ndarray
    info_matrix: np.ndarray
    T: float
    condition_number: float
    rho_used: np.ndarray

    def to_json(self) -> dict:
        return {
            "ordering": ORDERING_TAG,
            "tau_hat": [float(v) for v in self.tau_hat],
            "info_matrix": [[float(v) for v in row] for row in self.info_matrix],
            "T": float(self.T),
            "condition_number": float(self.condition_number),
            "rho_used": [[float(v) for v in row] for row in self.rho_used],
        }


@dataclass(frozen=True)
class RestrictedMleResult:
    tau_tilde_hat: np.ndarray
    info_matrix: np.ndarray
    known_c: tuple
    T: float
    condition_number: float
    rho_used: np.ndarray

    def to_json(self) -> dict:
        a, m = self.known_c
        return {
            "ordering": ORDERING_TAG,
            "tau_hat": [float(v) for v in self.tau_tilde_hat],
            "info_matrix": [[float(v) for v in row] for row in self.info_matrix],
            "known_c": {"a": float(a), "m": [float(v) for v in m]},
            "T": float(self.T),
            "condition_number": float(self.condition_number),
            "rho_used": [[float(v) for v in row] for row in self.rho_used],
        }


def _weight_matrix(rho, n: int) -> tuple[np.ndarray, np.ndarray]:
    """(rho as array, W = (rho rho^T)^{-1}); errors if rho rho^T is not SPD."""
    rho = np.asarray(rho, dtype=float)
    d = n + 1
    if rho.shape != (d, d) or not np.all(np.isfinite(rho)):
        raise ValidationError("rho must be a finite (n+1) x (n+1) matrix")
    s = rho @ rho.T
    ell = cholesky(s)
    eye = np.eye(d)
    w = solve_triangular(ell.T, solve_triangular(ell, eye, lower=True), lower=False)
    w = 0.5 * (w + w.T)
    return rho, w


def _floored(path: PathGrid):
    """Left endpoints, increments, and the Y-floor mask (with skip guard)."""
    y = path.y
    x = path.x
    z = np.column_stack([y, x])
    dz = np.diff(z, axis=0)
    dts = np.diff(path.times)
    y_left = y[:-1]
    mask = y_left >= _Y_FLOOR
    n_steps = len(dts)
    skipped = int(n_steps - np.count_nonzero(mask))
    if skipped > _MAX_SKIP_FRACTION * n_steps:
        raise NumericalError(
            f"Y-floor: {skipped}/{n_steps} steps below {_Y_FLOOR:g}; "
            "the path spends too much time near zero for stable weighting"
        )
    return z[:-1][mask], dz[mask], dts[mask], y_left[mask]


def _equilibrated_solve(info: np.ndarray, rhs: np.ndarray) -> tuple[np.ndarray, float]:
    """Solve info @ x = rhs by Cholesky after Jacobi equilibration.

    Returns (x, condition number of the equilibrated matrix).  The raw
    info matrix mixes wildly different parameter scales, so conditioning
    is monitored on D info D with D = diag(info)^{-1/2}."""
    diag = np.diag(info)
    if np.any(diag <= 0) or not np.all(np.isfinite(info)):
        raise NumericalError("information matrix is not positive definite")
    d_scale = 1.0 / np.sqrt(diag)
    eq = info * d_scale[:, None] * d_scale[None, :]
    eq = 0.5 * (eq + eq.T)
    cond = float(np.linalg.cond(eq))
    if not math.isfinite(cond) or cond > _MAX_CONDITION:
        raise NumericalError(
            f"information matrix condition number {cond:.3e} exceeds {_MAX_CONDITION:.0e}"
        )
    ell = cholesky(eq)
    half = solve_triangular(ell, d_scale * rhs, lower=True)
    x = d_scale * solve_triangular(ell.T, half, lower=False)
    return x, cond


def estimate_diffusion(path: PathGrid) -> tuple[np.ndarray, np.ndarray]:
    """(S_hat, rho_hat): realized covariation over the left-endpoint
    Riemann sum of Y estimates rho rho^T; rho_hat is its Cholesky factor."""
    z = np.column_stack([path.y, path.x])
    dz = np.diff(z, axis=0)
    dts = np.diff(path.times)
    denom = float(path.y[:-1] @ dts)
    if denom <= 0:
        raise ValidationError("estimate_diffusion: integral of Y along the path is not positive")
    s_hat = (dz.T @ dz) / denom
    rho_hat = cholesky(0.5 * (s_hat + s_hat.T))
    return 0.5 * (s_hat + s_hat.T), rho_hat


def _info_and_cross(path: PathGrid, rho):
    """Shared accumulation: information matrix plus the building blocks of
    both estimators' right-hand sides."""
    n = path.n
    d = n + 1
    rho, w = _weight_matrix(rho, n)
    z_left, dz, dts, y_left = _floored(path)
    wts = dts / y_left

    # K(z) rows (1, -y, -x) and the weighted Gram matrix A = sum (dt/y) K K^T.
    khat = np.column_stack([np.ones(len(y_left)), -z_left])
    a_gram = (khat * wts[:, None]).T @ khat

    dim = d * d + 1
    info = np.zeros((dim, dim))
    info[0:2, 0:2] = w[0, 0] * a_gram[0:2, 0:2]
    width = n + 2
    for j in range(n):
        cols = slice(2 + j * width, 2 + (j + 1) * width)
        info[0:2, cols] = w[0, 1 + j] * a_gram[0:2, :]
        info[cols, 0:2] = w[1 + j, 0] * a_gram[:, 0:2]
        for i in range(n):
            rows = slice(2 + i * width, 2 + (i + 1) * width)
            info[rows, cols] = w[1 + i, 1 + j] * a_gram
    return rho, w, z_left, dz, dts, y_left, khat, info


def mle_full(path: PathGrid, rho) -> MleResult:
    """Closed-form MLE of tau from one path, diffusion matrix given.

    tau_hat solves (sum dt/y Lam^T W Lam) tau = sum Lam^T W dZ / y with
    W = (rho rho^T)^{-1}, both sums over left endpoints."""
    rho, w, z_left, dz, dts, y_left, khat, info = _info_and_cross(path, rho)
    n = path.n
    h = (dz @ w.T) / y_left[:, None]
    cross = khat.T @ h
    dim = info.shape[0]
    rhs = np.zeros(dim)
    rhs[0:2] = cross[0:2, 0]
    width = n + 2
    for j in range(n):
        rhs[2 + j * width : 2 + (j + 1) * width] = cross[:, 1 + j]
    tau_hat, cond = _equilibrated_solve(info, rhs)
    if not np.all(np.isfinite(tau_hat)):
        raise NumericalError("mle_full: estimate is not finite")
    return MleResult(
        tau_hat=tau_hat,
        info_matrix=info,
        T=path.horizon,
        condition_number=cond,
        rho_used=rho.copy(),
    )


def mle_restricted(path: PathGrid, rho, known_c) -> RestrictedMleResult:
    """MLE of tau_tilde with (a, m) known: solves
    (sum dt/y LamT^T W LamT) tau_tilde = sum LamT^T W (c dt - dZ) / y."""
    a_known, m_known = known_c
    a_known = float(a_known)
    m_known = np.atleast_1d(np.asarray(m_known, dtype=float))
    n = path.n
    if m_known.shape != (n,) or not (math.isfinite(a_known) and np.all(np.isfinite(m_known))):
        raise ValidationError("mle_restricted: known_c must be a finite (a, m) pair")
    rho, w = _weight_matrix(rho, n)
    z_left, dz, dts, y_left = _floored(path)
    wts = dts / y_left

    # zhat rows (y, y, x): index 0 feeds the b-column, 1: feed each block.
    zhat = np.column_stack([y_left, z_left])
    a_gram = (zhat * wts[:, None]).T @ zhat

    dim = (n + 1) ** 2 - n
    info = np.zeros((dim, dim))
    info[0, 0] = w[0, 0] * a_gram[0, 0]
    width = n + 1
    for j in range(n):
        cols = slice(1 + j * width, 1 + (j + 1) * width)
        info[0, cols] = w[0, 1 + j] * a_gram[0, 1:]
        info[cols, 0] = w[1 + j, 0] * a_gram[1:, 0]
        for i in range(n):
            rows = slice(1 + i * width, 1 + (i + 1) * width)
            info[rows, cols] = w[1 + i, 1 + j] * a_gram[1:, 1:]

    c_vec = np.concatenate(([a_known], m_known))
    resid = c_vec[None, :] * dts[:, None] - dz
    g = (resid @ w.T) / y_left[:, None]
    cross = zhat.T @ g
    rhs = np.zeros(dim)
    rhs[0] = cross[0, 0]
    for j in range(n):
        rhs[1 + j * width : 1 + (j + 1) * width] = cross[1:, 1 + j]
    tau_tilde, cond = _equilibrated_solve(info, rhs)
    if not np.all(np.isfinite(tau_tilde)):
        raise NumericalError("mle_restricted: estimate is not finite")
    return RestrictedMleResult(
        tau_tilde_hat=tau_tilde,
        info_matrix=info,
        known_c=(a_known, m_known.copy()),
        T=path.horizon,
        condition_number=cond,
        rho_used=rho.copy(),
    )


def info_rate(path: PathGrid, rho) -> np.ndarray:
    """Time-normalized information matrix (1/T) sum dt/y Lam^T W Lam.

    Converges to the stationary expectation E[(1/Y) Lam(Z)^T W Lam(Z)] in
    the subcritical ergodic regime; checked SPD before returning."""
    *_, info = _info_and_cross(path, rho)
    rate = info / path.horizon
    _equilibrated_solve(rate, np.zeros(rate.shape[0]))
    return rate


def normalizer(regime: RegimeClass, spec: ModelSpec, T: float) -> np.ndarray:
    """Diagonal scaling under which estimator errors stay O(1).

    Subcritical: sqrt(T) I on the full parameter vector.  Supercritical:
    Q_T = diag(e^{-bT/2}; then per block (e^{-bT/2},
    e^{(b-2 lambda_min(theta)) T/2} x n)) on the restricted vector.  The
    critical regime has no supported normalization."""
    T = float(T)
    if not (math.isfinite(T) and T > 0):
        raise ValidationError("normalizer: T must be positive and finite")
    label = regime.label
    n = spec.n
    if label == "Subcritical":
        dim = (n + 1) ** 2 + 1
        return math.sqrt(T) * np.eye(dim)
    if label == "Supercritical":
        b = spec.b
        lam_min = float(spectrum(spec.theta).eigenvalues[0])
        e_b = math.exp(-b * T / 2.0)
        e_th = math.exp((b - 2.0 * lam_min) * T / 2.0)
        entries = [e_b]
        for _ in range(n):
            entries.append(e_b)
            entries.extend([e_th] * n)
        return np.diag(entries)
    raise ValidationError("normalizer: no normalization is available in the critical regime")
