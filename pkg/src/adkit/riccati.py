"""Riccati flow of the Fourier-Laplace exponent, stationary transform,
exponential tail constants, and the auxiliary psi-system.

For argument (lambda, mu) with lambda >= 0, the conditional transform of
(Y_t, X_t) has exponent K_t solving the scalar complex Riccati equation

    K' = (rho11^2/2) K^2 - (b - i rho11 rj1.g_t) K
         - i kappa.g_t - (1/2) g_t.(rjj rjj^T) g_t - (1/2) (rj1.g_t)^2,
    K_0 = -lambda,      g_t = exp(-t theta^T) mu,

where rj1/rjj are the sub-blocks of rho.  When rj1 = 0 the two g-coupling
terms drop and the equation reduces to its decoupled form; a model with
general rho maps onto that form by `model.decouple` together with the
argument shift u1 -> u1 + i (mu . rj1) / rho11 and a purely imaginary,
exponentially vanishing offset.  The stationary transform (subcritical
models only) is exp(a * int_0^inf K_s ds + i mu . theta^{-1} m), with the
infinite integral truncated at a horizon certified by `tail_bound`.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import NumericalError, ValidationError
from .linalg import expm, kron, spectrum, vec
from .model import ModelSpec, decouple, _require_valid

__all__ = [
    "FLArgument",
    "RiccatiSolution",
    "PsiFlow",
    "riccati_rhs",
    "solve_riccati",
    "tail_bound",
    "stationary_cf",
    "psi_system",
]

_RE_TOL = 1e-12
_GRID_POINTS = 201


@dataclass(frozen=True)
class FLArgument:
    """Transform argument: Laplace variable lam >= 0 (so u1 = -lam) and the
    Fourier vector mu.  `lam` stands in for the reserved word `lambda`."""

    lam: float
    mu: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lam", float(self.lam))
        mu = np.atleast_1d(np.asarray(self.mu, dtype=float))
        object.__setattr__(self, "mu", mu)
        if not math.isfinite(self.lam) or self.lam < 0:
            raise ValidationError("FLArgument: lambda must be finite and nonnegative")
        if mu.ndim != 1 or not np.all(np.isfinite(mu)):
            raise ValidationError("FLArgument: mu must be a finite vector")


@dataclass(frozen=True)
class RiccatiSolution:
    """Flow values on a uniform grid plus the running integral at the
    final time and the (C1, C2) tail certificate (None when the model is
    not subcritical, where no such certificate exists)."""

    times: np.ndarray
    values: np.ndarray
    integral: complex
    tail_bound: tuple | None

    def __post_init__(self):
        object.__setattr__(self, "times", np.asarray(self.times, dtype=float))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=complex))
        if len(self.times) != len(self.values):
            raise ValidationError("RiccatiSolution: times and values must align")
        if np.max(self.values.real) > _RE_TOL:
            raise ValidationError("RiccatiSolution: Re(K) must stay nonpositive")

    @property
    def final(self) -> complex:
        return complex(self.values[-1])


def riccati_rhs(spec: ModelSpec, t: float, k: complex, arg: FLArgument) -> complex:
    """Right-hand side F(t, K) of the exponent ODE, written exactly as the
    defining expression (matrix exponentials formed explicitly)."""
    _require_valid(spec)
    mu = arg.mu
    if len(mu) != spec.n:
        raise ValidationError("riccati_rhs: mu must have length n")
    g = expm(-t * spec.theta.T) @ mu
    rj1 = spec.rho_j1
    s_jj = spec.rho_jj @ spec.rho_jj.T
    rg = float(rj1 @ g)
    out = (
        0.5 * spec.rho11**2 * k * k
        - (spec.b - 1j * spec.rho11 * rg) * k
        - 1j * float(spec.kappa @ g)
        - 0.5 * float(vec(s_jj) @ kron(g, g))
        - 0.5 * rg * rg
    )
    return complex(out)


def _theta_propagator(spec: ModelSpec):
    """Spectral data for cheap evaluation of g_t = exp(-t theta^T) mu."""
    sp = spectrum(spec.theta)
    return sp.eigenvalues, sp.modal_matrix, sp.inverse_modal


def solve_riccati(
    spec: ModelSpec,
    arg: FLArgument,
    horizon: float,
    tol: float = 1e-10,
    u1: complex | None = None,
) -> RiccatiSolution:
    """Integrate the exponent ODE on [0, horizon] from K_0 = -lam.

    `u1` overrides the initial value (used for flow composition, where the
    restart value is a previous complex K); its real part must be <= 0.
    The running integral int_0^t K ds is carried as extra state so that it
    is controlled by the same local error tolerance.
    """
    _require_valid(spec)
    horizon = float(horizon)
    if not (math.isfinite(horizon) and horizon > 0):
        raise ValidationError("solve_riccati: horizon must be positive and finite")
    if len(arg.mu) != spec.n:
        raise ValidationError("solve_riccati: mu must have length n")
    k0 = complex(-arg.lam) if u1 is None else complex(u1)
    if k0.real > _RE_TOL:
        raise ValidationError("solve_riccati: initial value must have Re(u1) <= 0")

    w, p, p_inv = _theta_propagator(spec)
    pt_mu = p.T @ arg.mu
    pinv_t = np.ascontiguousarray(p_inv.T)
    b = spec.b
    alpha = 0.5 * spec.rho11**2
    rho11 = spec.rho11
    rj1 = spec.rho_j1
    kap = spec.kappa
    s_jj = spec.rho_jj @ spec.rho_jj.T

    def rhs(t, state):
        g = pinv_t @ (np.exp(-t * w) * pt_mu)
        rg = float(rj1 @ g)
        k = complex(state[0], state[1])
        dk = (
            alpha * k * k
            - (b - 1j * rho11 * rg) * k
            - 1j * float(kap @ g)
            - 0.5 * float(g @ s_jj @ g)
            - 0.5 * rg * rg
        )
        return (dk.real, dk.imag, state[0], state[1])

    rtol = max(float(tol), 1e-13)
    times = np.linspace(0.0, horizon, _GRID_POINTS)
    sol = solve_ivp(
        rhs,
        (0.0, horizon),
        [k0.real, k0.imag, 0.0, 0.0],
        method="RK45",
        t_eval=times,
        rtol=rtol,
        atol=1e-14,
    )
    if not sol.success:
        raise NumericalError(f"solve_riccati: integrator failed ({sol.message})")
    re, im = sol.y[0], sol.y[1]
    if np.max(re) > _RE_TOL:
        raise NumericalError(
            "solve_riccati: Re(K) crossed the nonpositivity monitor; integration is unreliable"
        )
    values = re + 1j * im
    integral = complex(sol.y[2, -1], sol.y[3, -1])
    cert = None
    if spec.b > 0:
        lam_min = float(spectrum(spec.theta).eigenvalues[0])
        if lam_min > 0:
            cert = tail_bound(spec, arg)
    return RiccatiSolution(times=times, values=values, integral=integral, tail_bound=cert)


def tail_bound(spec: ModelSpec, arg: FLArgument) -> tuple:
    """(C1, C2) with |K_t| <= C1 * exp(-C2 t) for subcritical models.

    C2 = min(lambda_min(theta), b/2).  The remaining constants follow the
    decoupled-form estimates evaluated at the shifted initial value
    u1' = -lam + i (mu . rj1)/rho11, plus the modulus of the imaginary
    offset that maps the decoupled flow back, which is itself bounded by
    (sum_k |(P^T mu)_k (P^{-1} rj1)_k|) / rho11 * exp(-lambda_min t).
    """
    _require_valid(spec)
    if len(arg.mu) != spec.n:
        raise ValidationError("tail_bound: mu must have length n")
    sp = spectrum(spec.theta)
    lam_min = float(sp.eigenvalues[0])
    if spec.b <= 0 or lam_min <= 0:
        raise ValidationError("tail_bound: requires b > 0 and theta positive definite")
    b = spec.b
    c2 = min(lam_min, b / 2.0)

    dec = decouple(spec)
    mu = arg.mu
    rho11 = spec.rho11
    u1p = complex(-arg.lam, float(mu @ spec.rho_j1) / rho11)
    if math.isclose(b, lam_min, rel_tol=1e-9, abs_tol=1e-12):
        h = 2.0 / (math.e * b)
    else:
        h = 1.0 / abs(b - lam_min)
    u3 = -0.5 * kron(mu, mu)
    c3 = abs(u1p) + float(np.sum(np.abs(dec.kappa))) * float(np.sum(np.abs(mu))) * h
    s_jj = spec.rho_jj @ spec.rho_jj.T
    c4 = 0.5 * rho11**2 * c3**2 + float(np.sum(np.abs(vec(s_jj)))) * float(np.sum(np.abs(u3)))
    c5 = arg.lam + (2.0 / b) * c4
    c1 = math.hypot(c5, c3)
    offset = float(np.sum(np.abs((sp.modal_matrix.T @ mu) * (sp.inverse_modal @ spec.rho_j1))))
    return (c1 + offset / rho11, c2)


def stationary_cf(spec: ModelSpec, arg: FLArgument, tol: float = 1e-8) -> complex:
    """E exp(-lam Y_inf + i mu . X_inf) for a subcritical model.

    The truncation horizon T* is chosen from the tail certificate so that
    the neglected tail of a * int K contributes less than tol to the
    exponent: a C1 exp(-C2 T*) / C2 < tol.
    """
    c1, c2 = tail_bound(spec, arg)
    if c1 <= 0.0:
        return 1.0 + 0.0j
    t_star = max(1.0, math.log(spec.a * c1 / (c2 * tol)) / c2)
    ode_tol = max(min(tol * 1e-3, 1e-9), 1e-13)
    sol = solve_riccati(spec, arg, t_star, tol=ode_tol)
    lin = float(arg.mu @ np.linalg.solve(spec.theta, spec.m))
    out = cmath.exp(spec.a * sol.integral + 1j * lin)
    if abs(out) > 1.0 + 1e-9:
        raise NumericalError("stationary_cf: transform modulus exceeded 1")
    return out


@dataclass(frozen=True)
class PsiFlow:
    """Joint flow (psi1, psi2, psi3) on a shared time grid: psi2 and psi3
    evolve by closed-form matrix exponentials, psi1 by the Riccati ODE."""

    times: np.ndarray
    psi1: np.ndarray
    psi2: np.ndarray
    psi3: np.ndarray


def psi_system(
    spec: ModelSpec,
    u1: complex,
    u2: np.ndarray,
    u3: np.ndarray,
    horizon: float,
    tol: float = 1e-10,
) -> PsiFlow:
    """Solve psi2' = -theta^T psi2, psi3' = -(theta^T (+) theta^T) psi3 in
    closed form and psi1' = (rho11^2/2) psi1^2 - b psi1 + kappa . psi2
    + vec(rjj rjj^T) . psi3 from psi1(0) = u1.

    With u2 = -i mu and u3 = -(1/2) mu (x) mu this reproduces the exponent
    flow K_t(u1, mu) of a model whose X-block noise is independent of the
    Y-noise (rj1 = 0); a general model reaches this form via decouple()
    and the documented argument shift.  unvec(u3) must be symmetric.
    """
    _require_valid(spec)
    horizon = float(horizon)
    if not (math.isfinite(horizon) and horizon > 0):
        raise ValidationError("psi_system: horizon must be positive and finite")
    n = spec.n
    u1 = complex(u1)
    u2 = np.atleast_1d(np.asarray(u2, dtype=complex))
    u3 = np.atleast_1d(np.asarray(u3, dtype=complex))
    if u2.shape != (n,):
        raise ValidationError("psi_system: u2 must have length n")
    if u3.shape != (n * n,):
        raise ValidationError("psi_system: u3 must have length n^2")
    m3 = u3.reshape(n, n, order="F")
    if np.max(np.abs(m3 - m3.T)) > 1e-9 * max(1.0, float(np.max(np.abs(m3)))):
        raise ValidationError("psi_system: unvec(u3) must be symmetric")

    sp = spectrum(spec.theta)
    w, p, p_inv = sp.eigenvalues, sp.modal_matrix, sp.inverse_modal
    pinv_t = np.ascontiguousarray(p_inv.T)
    pt = np.ascontiguousarray(p.T)

    def propagator(t):
        return pinv_t @ (np.exp(-t * w)[:, None] * pt)

    b = spec.b
    alpha = 0.5 * spec.rho11**2
    kap = spec.kappa
    vec_s = vec(spec.rho_jj @ spec.rho_jj.T)

    def rhs(t, state):
        et = propagator(t)
        psi2 = et @ u2
        psi3 = kron(et, et) @ u3
        k = complex(state[0], state[1])
        dk = alpha * k * k - b * k + complex(kap @ psi2) + complex(vec_s @ psi3)
        return (dk.real, dk.imag)

    times = np.linspace(0.0, horizon, _GRID_POINTS)
    sol = solve_ivp(
        rhs,
        (0.0, horizon),
        [u1.real, u1.imag],
        method="RK45",
        t_eval=times,
        rtol=max(float(tol), 1e-13),
        atol=1e-14,
    )
    if not sol.success:
        raise NumericalError(f"psi_system: integrator failed ({sol.message})")
    psi1 = sol.y[0] + 1j * sol.y[1]
    psi2 = np.empty((len(times), n), dtype=complex)
    psi3 = np.empty((len(times), n * n), dtype=complex)
    for i, t in enumerate(times):
        et = propagator(t)
        psi2[i] = et @ u2
        psi3[i] = kron(et, et) @ u3
    return PsiFlow(times=times, psi1=psi1, psi2=psi2, psi3=psi3)
