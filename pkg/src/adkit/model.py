"""Model parameters, admissibility checks, regime classification, closed-form
first moments, stationary moments, the noise-decoupling transform, and the
Foster-Lyapunov drift certificate.

The process lives on R_+ x R^n:

    dY_t = (a - b Y_t) dt + rho_11 sqrt(Y_t) dB^1_t
    dX_t = (m - kappa Y_t - theta X_t) dt + sqrt(Y_t) [rho_J1 rho_JJ] dB_t

with B a (n+1)-dimensional Brownian motion and rho the lower-triangular
(n+1)x(n+1) diffusion factor with positive diagonal: rho_11 its top-left
entry, rho_J1 the first column below the diagonal, rho_JJ the lower-right
n x n block.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import linalg
from .errors import NumericalError, ValidationError

__all__ = [
    "ModelSpec",
    "Violation",
    "RegimeClass",
    "LyapunovCertificate",
    "validate",
    "classify",
    "mean_y",
    "mean_x",
    "stationary_moments",
    "decouple",
    "lyapunov_certificate",
    "generator_apply",
    "spec_to_json",
    "spec_from_json",
    "spec_hash",
]

# floating-point spectra are never exactly equal; this tolerance decides the
# "eigenvalue is zero" / "eigenvalue equals b" case dispatch
_EIG_TOL = 1e-9


@dataclass(frozen=True)
class ModelSpec:
    """Full parameter set of the model plus the initial point.

    Fields
    ------
    n : dimension of the X block (d = n + 1 is the full state dimension)
    a : immigration rate of Y (must be positive)
    b : mean-reversion rate of Y (any sign)
    m, kappa : length-n drift vectors of X
    theta : n x n drift matrix of X (real diagonalizable, uniform-sign spectrum)
    rho : (n+1) x (n+1) lower-triangular diffusion factor, positive diagonal
    y0 : initial Y (positive), x0 : initial X (length n)
    """

    n: int
    a: float
    b: float
    m: np.ndarray
    kappa: np.ndarray
    theta: np.ndarray
    rho: np.ndarray
    y0: float
    x0: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "y0", float(self.y0))
        object.__setattr__(self, "m", np.atleast_1d(np.asarray(self.m, dtype=float)).copy())
        object.__setattr__(self, "kappa", np.atleast_1d(np.asarray(self.kappa, dtype=float)).copy())
        object.__setattr__(self, "x0", np.atleast_1d(np.asarray(self.x0, dtype=float)).copy())
        object.__setattr__(self, "theta", np.atleast_2d(np.asarray(self.theta, dtype=float)).copy())
        object.__setattr__(self, "rho", np.atleast_2d(np.asarray(self.rho, dtype=float)).copy())

    @property
    def d(self) -> int:
        return self.n + 1

    @property
    def rho11(self) -> float:
        return float(self.rho[0, 0])

    @property
    def rho_j1(self) -> np.ndarray:
        """First column of rho below the diagonal (length n)."""
        return self.rho[1:, 0].copy()

    @property
    def rho_jj(self) -> np.ndarray:
        """Lower-right n x n block of rho."""
        return self.rho[1:, 1:].copy()

    @property
    def sigma_sq(self) -> np.ndarray:
        """Row-wise squared norms sigma_i^2 = sum_j rho_ij^2 (length d)."""
        return np.sum(self.rho**2, axis=1)


@dataclass(frozen=True)
class Violation:
    """One admissibility failure: a machine-readable code plus a message."""

    code: str
    message: str


@dataclass(frozen=True)
class RegimeClass:
    """Classification verdict with the eigenvalue evidence it rests on."""

    label: str  # "Subcritical" | "Critical" | "Supercritical"
    b: float
    lambda_min_theta: float
    lambda_max_theta: float


@dataclass(frozen=True)
class LyapunovCertificate:
    """Drift-inequality certificate for V(y, x) = y^2 + r ||x||_2^2.

    Guarantees (generator V)(z) <= -c V(z) + d on the admissible choices of
    (c, r); ``r_bound`` is ``math.inf`` when kappa = 0.
    """

    c: float
    r: float
    d: float
    c1: float
    c2: float
    c3: np.ndarray
    c4: np.ndarray
    r_bound: float = field(default=math.inf)


def validate(spec: ModelSpec) -> list[Violation]:
    """Check every ModelSpec invariant; returns an empty list when admissible."""
    v: list[Violation] = []
    n = spec.n
    if n < 1:
        v.append(Violation("n_not_positive", "n must be at least 1"))
        return v
    shapes = {
        "m": (spec.m, (n,)),
        "kappa": (spec.kappa, (n,)),
        "x0": (spec.x0, (n,)),
        "theta": (spec.theta, (n, n)),
        "rho": (spec.rho, (n + 1, n + 1)),
    }
    for name, (arr, want) in shapes.items():
        if arr.shape != want:
            v.append(Violation(f"{name}_shape", f"{name} must have shape {want}, got {arr.shape}"))
    if v:
        return v
    for name in ("a", "b", "y0"):
        if not math.isfinite(getattr(spec, name)):
            v.append(Violation(f"{name}_not_finite", f"{name} must be finite"))
    for name in ("m", "kappa", "theta", "rho", "x0"):
        if not np.all(np.isfinite(getattr(spec, name))):
            v.append(Violation(f"{name}_not_finite", f"{name} must be finite"))
    if v:
        return v

    if spec.a <= 0:
        v.append(Violation("a_not_positive", "a must be positive"))
    if spec.y0 <= 0:
        v.append(Violation("y0_not_positive", "y0 must be positive"))

    # rho: lower triangular with strictly positive diagonal and rho rho^T > 0
    if np.abs(np.triu(spec.rho, 1)).max() > 0:
        v.append(Violation("rho_not_lower_triangular", "rho must be lower-triangular"))
    if np.any(np.diag(spec.rho) <= 0):
        v.append(Violation("rho_diagonal_not_positive", "rho must have strictly positive diagonal"))
    else:
        s = spec.rho @ spec.rho.T
        try:
            linalg.cholesky(s)
        except (ValidationError, NumericalError):
            v.append(Violation("rho_gram_not_pd", "rho.rho^T must be positive definite"))
        sig2 = spec.sigma_sq
        if np.any(~np.isfinite(sig2)) or np.any(sig2 <= 0):
            v.append(Violation("sigma_not_positive", "each row of rho must have positive norm"))

    # theta: real diagonalizable with a uniform-sign spectrum, eigenvalues
    # either all equal to b or all different from b
    try:
        spect = linalg.spectrum(spec.theta)
    except ValidationError as exc:
        v.append(Violation("theta_spectrum", f"theta spectrum unusable: {exc}"))
        return v
    w = spect.eigenvalues
    scale = max(np.abs(w).max(), abs(spec.b), 1.0)
    pos = w > _EIG_TOL * scale
    neg = w < -_EIG_TOL * scale
    zer = ~(pos | neg)
    if not (pos.all() or neg.all() or zer.all()):
        v.append(Violation("theta_mixed_sign", "theta spectrum must have uniform sign"))
    eq_b = np.abs(w - spec.b) <= _EIG_TOL * scale
    if not (eq_b.all() or (~eq_b).all()):
        v.append(Violation(
            "theta_eigenvalues_vs_b",
            "theta eigenvalues must be all equal to b or all different from b",
        ))
    return v


def _require_valid(spec: ModelSpec) -> None:
    violations = validate(spec)
    if violations:
        detail = "; ".join(f"{x.code}: {x.message}" for x in violations)
        raise ValidationError(f"invalid model spec ({detail})")


def classify(spec: ModelSpec) -> RegimeClass:
    """Regime of the process from the signs of b and theta's spectrum.

    Subcritical: min(b, lambda_min(theta)) > 0 (the mean converges).
    Critical: b >= 0 with a zero theta spectrum, or b = 0 with a positive
    definite theta (polynomial mean growth).
    Supercritical: min(b, lambda_max(theta)) < 0 (exponential mean growth).
    """
    _require_valid(spec)
    w = linalg.spectrum(spec.theta).eigenvalues
    lam_min, lam_max = float(w[0]), float(w[-1])
    b = spec.b
    scale = max(abs(lam_min), abs(lam_max), abs(b), 1.0)
    tol = _EIG_TOL * scale

    def _sign(x: float) -> int:
        return 0 if abs(x) <= tol else (1 if x > 0 else -1)

    sb, smin, smax = _sign(b), _sign(lam_min), _sign(lam_max)
    if sb > 0 and smin > 0:
        label = "Subcritical"
    elif sb < 0 or smax < 0:
        label = "Supercritical"
    elif (sb >= 0 and smin == 0 and smax == 0) or (sb == 0 and smin > 0):
        label = "Critical"
    else:  # pragma: no cover - unreachable under the uniform-sign invariant
        raise ValidationError(
            f"regime not covered: b={b}, spectrum(theta) in [{lam_min}, {lam_max}]"
        )
    return RegimeClass(label, b, lam_min, lam_max)


def mean_y(spec: ModelSpec, t: float, ey0: float) -> float:
    """Exact E(Y_t) started from E(Y_0) = ey0."""
    if t < 0:
        raise ValidationError("mean_y: t must be nonnegative")
    a, b = spec.a, spec.b
    if b == 0.0:
        return ey0 + a * t
    return a / b + (ey0 - a / b) * math.exp(-b * t)


def mean_x(spec: ModelSpec, t: float, ey0: float, ex0: np.ndarray) -> np.ndarray:
    """Exact E(X_t) started from (E(Y_0), E(X_0)) = (ey0, ex0).

    Dispatches on (b vs 0, spectrum(theta) vs 0, spectrum(theta) vs b) with
    tolerance 1e-9; each branch is the corresponding closed form, with matrix
    functions evaluated through the matrix exponential.
    """
    if t < 0:
        raise ValidationError("mean_x: t must be nonnegative")
    _require_valid(spec)
    a, b = spec.a, spec.b
    m, kappa, theta = spec.m, spec.kappa, spec.theta
    ex0 = np.asarray(ex0, dtype=float).reshape(spec.n)
    n = spec.n
    eye = np.eye(n)

    w = linalg.spectrum(theta).eigenvalues
    scale = max(np.abs(w).max(), abs(b), 1.0)
    theta_zero = np.abs(w).max() <= _EIG_TOL * scale
    theta_eq_b = np.abs(w - b).max() <= _EIG_TOL * scale

    if theta_zero:
        if abs(b) <= _EIG_TOL * scale:
            # b = 0, theta = 0
            return ex0 + t * (m - ey0 * kappa) - 0.5 * t * t * a * kappa
        # b != 0, theta = 0
        return (
            ex0
            + t * (m - (a / b) * kappa)
            + (ey0 / b - a / b**2) * (math.exp(-b * t) - 1.0) * kappa
        )

    e_mt = linalg.expm(-t * theta)
    theta_inv = np.linalg.inv(theta)
    if abs(b) <= _EIG_TOL * scale:
        # b = 0, theta invertible
        return (
            e_mt @ ex0
            + theta_inv @ (eye - e_mt) @ m
            - (ey0 * (eye - e_mt) + a * t * eye) @ theta_inv @ kappa
            + a * theta_inv @ theta_inv @ (eye - e_mt) @ kappa
        )
    if theta_eq_b:
        # all eigenvalues of theta equal b (nonzero)
        ebt = math.exp(-b * t)
        return (
            ebt * ex0
            + (1.0 - ebt) / b * m
            - a / b**2 * (1.0 - ebt) * kappa
            + (a / b - ey0) * t * ebt * kappa
        )
    # general case: b != 0 and spectrum(theta) avoiding {0, b}
    shifted_inv = np.linalg.inv(theta - b * eye)
    return (
        e_mt @ ex0
        + (a / b - ey0) * shifted_inv @ (math.exp(-b * t) * eye - e_mt) @ kappa
        + theta_inv @ (eye - e_mt) @ (m - (a / b) * kappa)
    )


def stationary_moments(spec: ModelSpec) -> dict:
    """Stationary mean of Y and of 1/Y (requires b > 0 and a > sigma_1^2/2)."""
    _require_valid(spec)
    sigma1_sq = spec.rho11**2
    if spec.b <= 0:
        raise ValidationError("stationary_moments: requires b > 0")
    if spec.a <= sigma1_sq / 2:
        raise ValidationError("stationary_moments: requires a > sigma_1^2 / 2")
    return {
        "mean_y_inf": spec.a / spec.b,
        "inv_mean_y_inf": 2.0 * spec.b / (2.0 * spec.a - sigma1_sq),
    }


def decouple(spec: ModelSpec) -> ModelSpec:
    """Linear change of coordinates that zeroes the rho_J1 column.

    Applies x -> x - (y / rho_11) rho_J1, giving an equivalent model with
      m~ = m - (a / rho_11) rho_J1,
      kappa~ = kappa - (1 / rho_11) (b I - theta) rho_J1,
    rho_J1 = 0, everything else unchanged.  Idempotent.
    """
    _require_valid(spec)
    r1 = spec.rho_j1
    if not np.any(r1):
        return spec
    rho11 = spec.rho11
    m_t = spec.m - (spec.a / rho11) * r1
    kappa_t = spec.kappa - (spec.b * np.eye(spec.n) - spec.theta) @ r1 / rho11
    x0_t = spec.x0 - (spec.y0 / rho11) * r1
    rho_t = spec.rho.copy()
    rho_t[1:, 0] = 0.0
    return replace(spec, m=m_t, kappa=kappa_t, rho=rho_t, x0=x0_t)


def generator_apply(spec: ModelSpec, r: float, point: tuple) -> float:
    """Ito generator applied to V(y, x) = y^2 + r ||x||_2^2 at ``point``.

    V has a diagonal Hessian diag(2, 2r I), so the second-order term is
    (1/2) y tr(rho rho^T Hess V) = y (sigma_1^2 + r sum_{i>=2} sigma_i^2);
    the drift contributes 2 y (a - b y) + 2 r x^T (m - kappa y - theta x).
    """
    _require_valid(spec)
    if r <= 0:
        raise ValidationError("generator_apply: r must be positive")
    y = float(point[0])
    x = np.asarray(point[1], dtype=float).reshape(spec.n)
    if y < 0:
        raise ValidationError("generator_apply: y must be nonnegative")
    sig2 = spec.sigma_sq
    drift = 2.0 * y * (spec.a - spec.b * y) + 2.0 * r * float(
        x @ (spec.m - spec.kappa * y - spec.theta @ x)
    )
    second_order = y * (sig2[0] + r * float(np.sum(sig2[1:])))
    return drift + second_order


def lyapunov_certificate(
    spec: ModelSpec, c: float | None = None, r: float | None = None
) -> LyapunovCertificate:
    """Drift certificate constants for V(y,x) = y^2 + r ||x||_2^2.

    Requires a subcritical spec.  Admissible choices are
    0 < c < 2 (lambda_min(theta) ^ b) and
    0 < r < (2 lambda_min - c)(2b - c) / lambda_max(kappa kappa^T)
    (the r-interval is unbounded when kappa = 0).  Defaults pick
    c = lambda_min ^ b (the midpoint) and r = half its upper bound.
    """
    _require_valid(spec)
    w = linalg.spectrum(spec.theta).eigenvalues
    lam_min = float(w[0])
    b = spec.b
    if b <= 0 or lam_min <= 0:
        raise ValidationError("lyapunov_certificate: requires b > 0 and theta positive definite")

    floor = lam_min if lam_min < b else b
    if c is None:
        c = floor
    c = float(c)
    if not (0.0 < c < 2.0 * floor):
        raise ValidationError(
            f"lyapunov_certificate: c must lie in (0, {2.0 * floor}), got {c}"
        )

    kk_max = float(spec.kappa @ spec.kappa)  # lambda_max of the rank-1 kappa kappa^T
    if kk_max > 0:
        r_bound = (2.0 * lam_min - c) * (2.0 * b - c) / kk_max
    else:
        r_bound = math.inf
    if r is None:
        r = 1.0 if math.isinf(r_bound) else r_bound / 2.0
    r = float(r)
    if not (0.0 < r < r_bound):
        raise ValidationError(
            f"lyapunov_certificate: r must lie in (0, {r_bound}), got {r}"
        )

    sig2 = spec.sigma_sq
    c1 = sig2[0] + r * float(np.sum(sig2[1:])) + 2.0 * spec.a
    c2 = 2.0 * b - c
    c3 = r * (2.0 * lam_min - c) * np.eye(spec.n) - (r * r / c2) * np.outer(
        spec.kappa, spec.kappa
    )
    c4 = 2.0 * r * spec.m - r * (c1 / c2) * spec.kappa
    try:
        c3_inv_c4 = np.linalg.solve(c3, c4)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"lyapunov_certificate: c3 is singular ({exc})") from None
    d = c1 * c1 / (4.0 * c2) + 0.25 * float(c4 @ c3_inv_c4)
    return LyapunovCertificate(c=c, r=r, d=d, c1=float(c1), c2=c2, c3=c3, c4=c4, r_bound=r_bound)


# ---------------------------------------------------------------------------
# serialization

def spec_to_json(spec: ModelSpec) -> str:
    """Canonical JSON text for a ModelSpec (sorted keys, round-trip floats)."""
    payload = {
        "n": spec.n,
        "a": spec.a,
        "b": spec.b,
        "m": spec.m.tolist(),
        "kappa": spec.kappa.tolist(),
        "theta": spec.theta.tolist(),
        "rho": spec.rho.tolist(),
        "y0": spec.y0,
        "x0": spec.x0.tolist(),
    }
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def spec_from_json(text: str) -> ModelSpec:
    """Parse a ModelSpec from its JSON object form."""
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"model spec JSON is malformed: {exc}") from None
    required = {"n", "a", "b", "m", "kappa", "theta", "rho", "y0", "x0"}
    missing = required - set(payload)
    if missing:
        raise ValidationError(f"model spec JSON missing keys: {sorted(missing)}")
    return ModelSpec(
        n=payload["n"],
        a=payload["a"],
        b=payload["b"],
        m=payload["m"],
        kappa=payload["kappa"],
        theta=payload["theta"],
        rho=payload["rho"],
        y0=payload["y0"],
        x0=payload["x0"],
    )


def spec_hash(spec: ModelSpec) -> str:
    """Stable short digest of the canonical JSON form."""
    return hashlib.sha256(spec_to_json(spec).encode()).hexdigest()[:16]
