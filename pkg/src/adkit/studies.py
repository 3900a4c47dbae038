"""Monte Carlo study harness: ergodic averages, empirical transforms, and
the consistency / normality / supercritical scaling studies behind the
`mc-study` CLI command.

Replayability: a study is a pure function of (StudyConfig, seed).  Path k
examined at horizon-grid index j always draws from the simulator stream
j * n_paths + k (replicate-major within each horizon), so reports are
identical across runs and under any internal batching.  Tolerance bands
are frozen constants, recorded in the report as data next to the measured
values — a failed band shows up as `passed: false` in the report rather
than as a hidden assertion.

Scheme policy: ergodic-regime studies (Consistency, Normality, Ergodic,
CfCompare) integrate with the full-truncation Euler scheme; the
Supercritical study uses the exact CIR transition for Y, since at
exponentially growing states the Euler Y-step bias compounds.  All
studies simulate paths in memory-bounded batches; by the stream contract
above, batching cannot affect results.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

import numpy as np

from ._version import __version__
from .errors import ValidationError
from .estimate import (
    mle_full,
    mle_restricted,
    normalizer,
    tau_tilde_vector,
    tau_vector,
)
from .linalg import cholesky, spectrum
from .model import ModelSpec, classify, spec_hash, _require_valid
from .riccati import FLArgument, stationary_cf
from .simulate import PathGrid, SimConfig, simulate_arrays

__all__ = [
    "MODES",
    "REPORT_SCHEMA",
    "StudyConfig",
    "StudyReport",
    "ergodic_average",
    "empirical_cf",
    "run_consistency_study",
    "run_normality_study",
    "run_supercritical_study",
    "run_ergodic_study",
    "run_cf_compare_study",
    "run_study",
]

MODES = ("Consistency", "Normality", "Supercritical", "Ergodic", "CfCompare")
REPORT_SCHEMA = "adkit-report-v1"

_Y_FLOOR = 1e-10
_MAX_SKIP_FRACTION = 1e-3
_CHUNK_BUDGET_BYTES = 1.2e8
_SUPER_T_CAP = 25.0

# Frozen tolerance bands (sized from pilot runs at the documented study
# scales; reports carry them as data).
_CONSISTENCY_RATIO_WINDOW = (0.75, 1.35)  # multiplies sqrt(T_next / T_prev)
_NORMALITY_MEAN_BAND = (-0.15, 0.15)
_NORMALITY_VAR_BAND = (0.7, 1.3)
_NORMALITY_COV_TOL = 0.25
_SUPER_STABILIZATION_TOL = 0.05
_SUPER_IQR_BAND = (0.01, 100.0)
_ERGODIC_Y_TOL = 0.05
_ERGODIC_INV_Y_TOL = 0.03
_CF_TOL = 0.02
_CF_POINTS = ((1.0, 0.5), (1.0, 0.0), (0.5, 0.5), (2.0, 1.0), (1.0, -0.5))


@dataclass(frozen=True)
class StudyConfig:
    """One study request; `T_grid` is the ascending tuple of horizons."""

    spec: ModelSpec
    T_grid: tuple
    dt: float
    n_paths: int
    seed: int
    mode: str

    def __post_init__(self):
        _require_valid(self.spec)
        grid = tuple(float(t) for t in np.atleast_1d(np.asarray(self.T_grid, dtype=float)))
        object.__setattr__(self, "T_grid", grid)
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "n_paths", int(self.n_paths))
        object.__setattr__(self, "seed", int(self.seed))
        if len(grid) == 0 or any(not math.isfinite(t) or t <= 0 for t in grid):
            raise ValidationError("StudyConfig: T_grid must hold positive finite horizons")
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValidationError("StudyConfig: T_grid must be strictly ascending")
        if not (math.isfinite(self.dt) and 0 < self.dt <= grid[0]):
            raise ValidationError(
                "StudyConfig: dt must be positive and at most the smallest horizon"
            )
        if self.n_paths < 1:
            raise ValidationError("StudyConfig: n_paths must be at least 1")
        if not (0 <= self.seed < 2**64):
            raise ValidationError("StudyConfig: seed must be a 64-bit unsigned integer")
        if self.mode not in MODES:
            raise ValidationError(f"StudyConfig: mode must be one of {MODES}")


@dataclass(frozen=True)
class StudyReport:
    """Per-(horizon, replicate) records plus summary statistics and the
    band checks, all JSON-ready (native Python scalars/lists only)."""

    mode: str
    spec_hash: str
    seed: int
    dt: float
    T_grid: tuple
    n_paths: int
    records: list
    summary: dict
    checks: list

    def __post_init__(self):
        expected = len(self.T_grid) * self.n_paths
        if len(self.records) != expected:
            raise ValidationError(
                f"StudyReport: expected {expected} records, got {len(self.records)}"
            )

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def to_json(self) -> dict:
        return {
            "schema": REPORT_SCHEMA,
            "version": __version__,
            "mode": self.mode,
            "spec_hash": self.spec_hash,
            "seed": int(self.seed),
            "dt": float(self.dt),
            "T_grid": [float(t) for t in self.T_grid],
            "n_paths": int(self.n_paths),
            "records": self.records,
            "summary": self.summary,
            "checks": self.checks,
            "passed": self.passed,
        }


def _check(name: str, value, band, passed: bool) -> dict:
    return {"name": name, "value": value, "band": band, "passed": bool(passed)}


# ---------------------------------------------------------------------------
# pointwise functionals


def ergodic_average(path: PathGrid, f: str) -> float:
    """Left-endpoint time average (1/T) sum f(Z_l) dt_l of a named
    functional: "y", "inv_y", "y2", "x<i>", or "x<i>x<j>/y" (1-based).

    Functionals dividing by Y skip steps below the 1e-10 floor and average
    over the time actually kept (same skip budget as the estimators)."""
    y = path.y[:-1]
    x = path.x[:-1]
    dts = np.diff(path.times)
    n = path.n
    quad = re.fullmatch(r"x(\d+)x(\d+)/y", f)
    lin = re.fullmatch(r"x(\d+)", f)
    if f in ("y", "y2"):
        vals = y if f == "y" else y * y
        return float(vals @ dts / float(dts.sum()))
    if lin:
        i = int(lin.group(1))
        if not 1 <= i <= n:
            raise ValidationError(f"ergodic_average: index out of range in {f!r}")
        return float(x[:, i - 1] @ dts / float(dts.sum()))
    if f != "inv_y" and not quad:
        raise ValidationError(f"ergodic_average: unknown functional {f!r}")
    mask = y >= _Y_FLOOR
    skipped = len(y) - int(np.count_nonzero(mask))
    if skipped > _MAX_SKIP_FRACTION * len(y):
        raise ValidationError(f"ergodic_average: {skipped}/{len(y)} steps below the Y floor")
    if f == "inv_y":
        vals = 1.0 / y[mask]
    else:
        i, j = int(quad.group(1)), int(quad.group(2))
        if not (1 <= i <= n and 1 <= j <= n):
            raise ValidationError(f"ergodic_average: index out of range in {f!r}")
        vals = x[mask, i - 1] * x[mask, j - 1] / y[mask]
    return float(vals @ dts[mask] / float(dts[mask].sum()))


def empirical_cf(ensemble: list, arg: FLArgument, at: float) -> complex:
    """(1/N) sum_k exp(-lam Y_at + i mu . X_at) over an ensemble, with
    `at` required to lie on every path's grid (within 1e-9 relative)."""
    if len(ensemble) == 0:
        raise ValidationError("empirical_cf: ensemble is empty")
    at = float(at)
    tol = 1e-9 * max(1.0, abs(at))
    vals = np.empty(len(ensemble), dtype=complex)
    for k, grid in enumerate(ensemble):
        if len(arg.mu) != grid.n:
            raise ValidationError("empirical_cf: mu must have length n")
        idx = int(np.argmin(np.abs(grid.times - at)))
        if abs(float(grid.times[idx]) - at) > tol:
            raise ValidationError("empirical_cf: requested time is not on the path grid")
        vals[k] = np.exp(-arg.lam * grid.y[idx] + 1j * float(grid.x[idx] @ arg.mu))
    return complex(np.mean(vals))


# ---------------------------------------------------------------------------
# shared plumbing


def _batch_size(n_steps: int, n: int) -> int:
    return max(1, int(_CHUNK_BUDGET_BYTES // (8 * (n_steps + 1) * (n + 2))))


def _grid_index(times: np.ndarray, t: float) -> int:
    idx = int(np.argmin(np.abs(times - t)))
    if abs(float(times[idx]) - t) > 1e-9 * max(1.0, abs(t)):
        raise ValidationError(f"horizon {t} does not lie on the dt step grid")
    return idx


def _iter_paths(cfg: StudyConfig, T: float, offset0: int, scheme: str):
    """Yield (stream, PathGrid) for replicates 0..n_paths-1 at horizon T,
    simulated in memory-bounded batches."""
    spec = cfg.spec
    sim = SimConfig(T=T, dt=cfg.dt, scheme=scheme, seed=cfg.seed)
    h = spec_hash(spec)
    n_steps = int(round(T / cfg.dt))
    batch = _batch_size(n_steps, spec.n)
    for start in range(0, cfg.n_paths, batch):
        count = min(batch, cfg.n_paths - start)
        times, y, x = simulate_arrays(spec, sim, count, path_offset=offset0 + start)
        for k in range(count):
            yield offset0 + start + k, PathGrid(times, y[k], x[k], h, cfg.seed)


def _require_mode(cfg: StudyConfig, mode: str):
    if cfg.mode != mode:
        raise ValidationError(f"study: config mode is {cfg.mode!r}, expected {mode!r}")


def _require_ergodic(cfg: StudyConfig, mode: str):
    _require_mode(cfg, mode)
    regime = classify(cfg.spec)
    if regime.label != "Subcritical":
        raise ValidationError(f"study mode {mode}: requires a subcritical model")
    if cfg.spec.a <= cfg.spec.sigma_sq[0] / 2.0:
        raise ValidationError(f"study mode {mode}: requires a > sigma_1^2 / 2")
    return regime


# ---------------------------------------------------------------------------
# studies


def run_consistency_study(cfg: StudyConfig) -> StudyReport:
    """Median sup-norm MLE error per horizon.

    Checks: medians strictly decreasing along T_grid, and each
    consecutive-horizon decay ratio within [0.75, 1.35] times the
    square-root-rate prediction sqrt(T_next / T_prev)."""
    _require_ergodic(cfg, "Consistency")
    spec = cfg.spec
    tau = tau_vector(spec)
    records = []
    medians = []
    for j, T in enumerate(cfg.T_grid):
        errs = []
        for stream, grid in _iter_paths(cfg, T, j * cfg.n_paths, "EulerFullTruncation"):
            res = mle_full(grid, spec.rho)
            err = float(np.max(np.abs(res.tau_hat - tau)))
            errs.append(err)
            records.append(
                {
                    "T": float(T),
                    "replicate": int(stream - j * cfg.n_paths),
                    "stream": int(stream),
                    "tau_hat": [float(v) for v in res.tau_hat],
                    "err_sup": err,
                }
            )
        medians.append(float(np.median(errs)))
    checks = []
    ratios = []
    for j in range(len(cfg.T_grid) - 1):
        expected = math.sqrt(cfg.T_grid[j + 1] / cfg.T_grid[j])
        band = [_CONSISTENCY_RATIO_WINDOW[0] * expected, _CONSISTENCY_RATIO_WINDOW[1] * expected]
        ratio = medians[j] / medians[j + 1] if medians[j + 1] > 0 else math.inf
        ratios.append(ratio)
        checks.append(
            _check(
                f"median_error_ratio_T{cfg.T_grid[j]:g}_to_T{cfg.T_grid[j + 1]:g}",
                float(ratio),
                band,
                band[0] <= ratio <= band[1],
            )
        )
    if len(cfg.T_grid) > 1:
        decreasing = all(a > b for a, b in zip(medians, medians[1:]))
        checks.append(_check("median_errors_strictly_decreasing", medians, None, decreasing))
    summary = {"median_err_sup": medians, "ratios": ratios, "true_tau": [float(v) for v in tau]}
    return StudyReport(
        mode=cfg.mode,
        spec_hash=spec_hash(spec),
        seed=cfg.seed,
        dt=cfg.dt,
        T_grid=cfg.T_grid,
        n_paths=cfg.n_paths,
        records=records,
        summary=summary,
        checks=checks,
    )


def run_normality_study(cfg: StudyConfig) -> StudyReport:
    """Distribution of sqrt(T)(tau_hat - tau), standardized per replicate.

    With rate = info_matrix / T and its Cholesky factor L (rate = L L^T),
    the standardized error is L^T sqrt(T) (tau_hat - tau), which under the
    asymptotic regime is approximately standard normal.  Checks: component
    means in [-0.15, 0.15], variances in [0.7, 1.3], and the empirical
    covariance of the raw scaled errors within 25% (Frobenius, relative)
    of the average per-replicate sandwich V_hat = (info_matrix / T)^{-1}."""
    _require_ergodic(cfg, "Normality")
    spec = cfg.spec
    tau = tau_vector(spec)
    dim = len(tau)
    records = []
    checks = []
    summary = {}
    for j, T in enumerate(cfg.T_grid):
        raw = np.empty((cfg.n_paths, dim))
        std = np.empty((cfg.n_paths, dim))
        v_sum = np.zeros((dim, dim))
        for stream, grid in _iter_paths(cfg, T, j * cfg.n_paths, "EulerFullTruncation"):
            k = stream - j * cfg.n_paths
            res = mle_full(grid, spec.rho)
            rate = res.info_matrix / res.T
            scaled = math.sqrt(res.T) * (res.tau_hat - tau)
            ell = cholesky(0.5 * (rate + rate.T))
            raw[k] = scaled
            std[k] = ell.T @ scaled
            v_hat = np.linalg.inv(rate)
            v_sum += 0.5 * (v_hat + v_hat.T)
            records.append(
                {
                    "T": float(T),
                    "replicate": int(k),
                    "stream": int(stream),
                    "scaled_error": [float(v) for v in scaled],
                    "standardized_error": [float(v) for v in std[k]],
                }
            )
        means = std.mean(axis=0)
        variances = std.var(axis=0, ddof=1)
        v_bar = v_sum / cfg.n_paths
        cov_emp = np.cov(raw.T, ddof=1)
        discrepancy = float(
            np.linalg.norm(cov_emp - v_bar) / np.linalg.norm(v_bar)
        )
        tag = f"T{T:g}"
        checks.append(
            _check(
                f"standardized_means_in_band_{tag}",
                [float(v) for v in means],
                list(_NORMALITY_MEAN_BAND),
                bool(
                    np.all(means >= _NORMALITY_MEAN_BAND[0])
                    and np.all(means <= _NORMALITY_MEAN_BAND[1])
                ),
            )
        )
        checks.append(
            _check(
                f"standardized_variances_in_band_{tag}",
                [float(v) for v in variances],
                list(_NORMALITY_VAR_BAND),
                bool(
                    np.all(variances >= _NORMALITY_VAR_BAND[0])
                    and np.all(variances <= _NORMALITY_VAR_BAND[1])
                ),
            )
        )
        checks.append(
            _check(
                f"covariance_discrepancy_{tag}",
                discrepancy,
                [0.0, _NORMALITY_COV_TOL],
                discrepancy <= _NORMALITY_COV_TOL,
            )
        )
        summary[tag] = {
            "standardized_means": [float(v) for v in means],
            "standardized_variances": [float(v) for v in variances],
            "covariance_discrepancy": discrepancy,
            "v_bar": [[float(v) for v in row] for row in v_bar],
        }
    return StudyReport(
        mode=cfg.mode,
        spec_hash=spec_hash(spec),
        seed=cfg.seed,
        dt=cfg.dt,
        T_grid=cfg.T_grid,
        n_paths=cfg.n_paths,
        records=records,
        summary=summary,
        checks=checks,
    )


def run_supercritical_study(cfg: StudyConfig) -> StudyReport:
    """Exponential-regime scaling diagnostics.

    Hypotheses validated up front: lambda_max(theta) < b < 0 and
    diag(P^{-1} m) P^{-1} kappa componentwise nonpositive.  Horizons are
    capped at 25 so every Q_T entry and scaled accumulator stays inside
    double range.  Each replicate simulates one exact-CIR path to
    max(T_grid) and slices it at each horizon (all horizons must lie on
    the step grid), so per-record streams coincide with the replicate
    index.  Records hold e^{bT} Y_T, e^{bT} int_0^T Y ds,
    e^{lambda_min T} X_T, and the Q_T-scaled restricted-MLE error with
    (a, m) known.  Checks: the median over replicates of the relative
    change of e^{bT} int Y ds across the last two horizons is below 5%,
    and the interquartile range of the sup-norm scaled error at the final
    horizon lies in [0.01, 100]."""
    _require_mode(cfg, "Supercritical")
    spec = cfg.spec
    regime = classify(spec)
    if regime.label != "Supercritical":
        raise ValidationError("Supercritical study: model is not supercritical")
    sp = spectrum(spec.theta)
    lam_min = float(sp.eigenvalues[0])
    lam_max = float(sp.eigenvalues[-1])
    if not lam_max < spec.b < 0:
        raise ValidationError("Supercritical study: requires lambda_max(theta) < b < 0")
    p_inv = sp.inverse_modal
    hypo = (p_inv @ spec.m) * (p_inv @ spec.kappa)
    if np.any(hypo > 0):
        raise ValidationError(
            "Supercritical study: requires diag(P^-1 m) P^-1 kappa componentwise <= 0"
        )
    if len(cfg.T_grid) < 2:
        raise ValidationError("Supercritical study: needs at least two horizons")
    if cfg.T_grid[-1] > _SUPER_T_CAP:
        raise ValidationError(f"Supercritical study: horizons are capped at T = {_SUPER_T_CAP:g}")

    t_max = cfg.T_grid[-1]
    tau_t = tau_tilde_vector(spec)
    q_diags = [np.diag(normalizer(regime, spec, T)) for T in cfg.T_grid]
    h = spec_hash(spec)
    sim = SimConfig(T=t_max, dt=cfg.dt, scheme="ExactCIR", seed=cfg.seed)
    n_steps = int(round(t_max / cfg.dt))
    batch = _batch_size(n_steps, spec.n)

    per_t_records = [[] for _ in cfg.T_grid]
    int_change = []
    sup_errors_final = []
    for start in range(0, cfg.n_paths, batch):
        count = min(batch, cfg.n_paths - start)
        times, ys, xs = simulate_arrays(spec, sim, count, path_offset=start)
        dts = np.diff(times)
        idxs = [_grid_index(times, T) for T in cfg.T_grid]
        for k in range(count):
            rep = start + k
            y = ys[k]
            x = xs[k]
            cum_int = np.concatenate(([0.0], np.cumsum(y[:-1] * dts)))
            scaled_ints = []
            for j, T in enumerate(cfg.T_grid):
                idx = idxs[j]
                grid = PathGrid(times[: idx + 1], y[: idx + 1], x[: idx + 1], h, cfg.seed)
                res = mle_restricted(grid, spec.rho, (spec.a, spec.m))
                scale = math.exp(spec.b * T)
                scaled_int = scale * float(cum_int[idx])
                scaled_ints.append(scaled_int)
                scaled_err = q_diags[j] * (res.tau_tilde_hat - tau_t)
                record = {
                    "T": float(T),
                    "replicate": int(rep),
                    "stream": int(rep),
                    "scaled_y": scale * float(y[idx]),
                    "scaled_int_y": scaled_int,
                    "scaled_x": [
                        float(v) for v in math.exp(lam_min * T) * x[idx]
                    ],
                    "scaled_error": [float(v) for v in scaled_err],
                }
                per_t_records[j].append(record)
                if j == len(cfg.T_grid) - 1:
                    sup_errors_final.append(float(np.max(np.abs(scaled_err))))
            prev, last = scaled_ints[-2], scaled_ints[-1]
            int_change.append(abs(last - prev) / abs(prev) if prev != 0 else math.inf)

    records = [rec for group in per_t_records for rec in group]
    median_change = float(np.median(int_change))
    q1, q3 = np.percentile(sup_errors_final, [25.0, 75.0])
    iqr = float(q3 - q1)
    checks = [
        _check(
            f"median_rel_change_scaled_int_y_T{cfg.T_grid[-2]:g}_to_T{cfg.T_grid[-1]:g}",
            median_change,
            [0.0, _SUPER_STABILIZATION_TOL],
            median_change <= _SUPER_STABILIZATION_TOL,
        ),
        _check(
            f"scaled_error_sup_iqr_T{cfg.T_grid[-1]:g}",
            iqr,
            list(_SUPER_IQR_BAND),
            _SUPER_IQR_BAND[0] <= iqr <= _SUPER_IQR_BAND[1],
        ),
    ]
    summary = {
        "median_rel_change_scaled_int_y": median_change,
        "scaled_error_sup_iqr_final": iqr,
        "scaled_error_component_iqr_final": [
            float(v)
            for v in (
                np.percentile([r["scaled_error"] for r in per_t_records[-1]], 75.0, axis=0)
                - np.percentile([r["scaled_error"] for r in per_t_records[-1]], 25.0, axis=0)
            )
        ],
        "q_diagonals": [[float(v) for v in q] for q in q_diags],
        "true_tau_tilde": [float(v) for v in tau_t],
    }
    return StudyReport(
        mode=cfg.mode,
        spec_hash=h,
        seed=cfg.seed,
        dt=cfg.dt,
        T_grid=cfg.T_grid,
        n_paths=cfg.n_paths,
        records=records,
        summary=summary,
        checks=checks,
    )


def run_ergodic_study(cfg: StudyConfig) -> StudyReport:
    """Time averages of y and inv_y per path against the stationary limits
    a/b and 2b/(2a - sigma_1^2); the mean average over replicates must
    land within 0.05 and 0.03 respectively (bands sized for a single
    T = 2000, dt = 1e-2 path)."""
    _require_ergodic(cfg, "Ergodic")
    spec = cfg.spec
    limit_y = spec.a / spec.b
    limit_inv = 2.0 * spec.b / (2.0 * spec.a - spec.sigma_sq[0])
    records = []
    checks = []
    summary = {"limit_y": float(limit_y), "limit_inv_y": float(limit_inv)}
    for j, T in enumerate(cfg.T_grid):
        avg_y = []
        avg_inv = []
        for stream, grid in _iter_paths(cfg, T, j * cfg.n_paths, "EulerFullTruncation"):
            ay = ergodic_average(grid, "y")
            ai = ergodic_average(grid, "inv_y")
            avg_y.append(ay)
            avg_inv.append(ai)
            records.append(
                {
                    "T": float(T),
                    "replicate": int(stream - j * cfg.n_paths),
                    "stream": int(stream),
                    "avg_y": float(ay),
                    "avg_inv_y": float(ai),
                }
            )
        mean_y = float(np.mean(avg_y))
        mean_inv = float(np.mean(avg_inv))
        tag = f"T{T:g}"
        checks.append(
            _check(
                f"avg_y_near_limit_{tag}",
                mean_y,
                [float(limit_y - _ERGODIC_Y_TOL), float(limit_y + _ERGODIC_Y_TOL)],
                abs(mean_y - limit_y) <= _ERGODIC_Y_TOL,
            )
        )
        checks.append(
            _check(
                f"avg_inv_y_near_limit_{tag}",
                mean_inv,
                [float(limit_inv - _ERGODIC_INV_Y_TOL), float(limit_inv + _ERGODIC_INV_Y_TOL)],
                abs(mean_inv - limit_inv) <= _ERGODIC_INV_Y_TOL,
            )
        )
        summary[tag] = {"mean_avg_y": mean_y, "mean_avg_inv_y": mean_inv}
    return StudyReport(
        mode=cfg.mode,
        spec_hash=spec_hash(spec),
        seed=cfg.seed,
        dt=cfg.dt,
        T_grid=cfg.T_grid,
        n_paths=cfg.n_paths,
        records=records,
        summary=summary,
        checks=checks,
    )


def run_cf_compare_study(cfg: StudyConfig) -> StudyReport:
    """Terminal-state empirical transform against the stationary transform
    at five fixed (lambda, mu) points, |difference| <= 0.02 each (band
    sized as 3x the worst-case MC standard error at 10^4 paths).

    Each replicate simulates one path to max(T_grid); every horizon in
    T_grid must lie on the step grid and contributes its own comparison.
    For n > 1 the scalar mu of each fixed point is broadcast to all
    coordinates."""
    _require_ergodic(cfg, "CfCompare")
    spec = cfg.spec
    n = spec.n
    t_max = cfg.T_grid[-1]
    sim = SimConfig(T=t_max, dt=cfg.dt, scheme="EulerFullTruncation", seed=cfg.seed)
    n_steps = int(round(t_max / cfg.dt))
    batch = _batch_size(n_steps, spec.n)
    records = []
    terminal_y = [[] for _ in cfg.T_grid]
    terminal_x = [[] for _ in cfg.T_grid]
    idxs = None
    for start in range(0, cfg.n_paths, batch):
        count = min(batch, cfg.n_paths - start)
        times, ys, xs = simulate_arrays(spec, sim, count, path_offset=start)
        if idxs is None:
            idxs = [_grid_index(times, T) for T in cfg.T_grid]
        for j in range(len(cfg.T_grid)):
            terminal_y[j].append(ys[:, idxs[j]])
            terminal_x[j].append(xs[:, idxs[j], :])
    args = [FLArgument(lam, np.full(n, mu_s)) for lam, mu_s in _CF_POINTS]
    analytic = [stationary_cf(spec, arg) for arg in args]
    checks = []
    summary = {"points": [list(p) for p in _CF_POINTS]}
    for j, T in enumerate(cfg.T_grid):
        y_t = np.concatenate(terminal_y[j])
        x_t = np.concatenate(terminal_x[j], axis=0)
        for rep in range(cfg.n_paths):
            records.append(
                {
                    "T": float(T),
                    "replicate": int(rep),
                    "stream": int(rep),
                    "y_T": float(y_t[rep]),
                    "x_T": [float(v) for v in x_t[rep]],
                }
            )
        tag = f"T{T:g}"
        point_rows = []
        for arg, ana in zip(args, analytic):
            emp = complex(np.mean(np.exp(-arg.lam * y_t + 1j * (x_t @ arg.mu))))
            diff = abs(emp - ana)
            point_rows.append(
                {
                    "lambda": float(arg.lam),
                    "mu": [float(v) for v in arg.mu],
                    "empirical": [emp.real, emp.imag],
                    "stationary": [ana.real, ana.imag],
                    "abs_diff": float(diff),
                }
            )
            checks.append(
                _check(
                    f"cf_match_{tag}_lam{arg.lam:g}_mu{arg.mu[0]:g}",
                    float(diff),
                    [0.0, _CF_TOL],
                    diff <= _CF_TOL,
                )
            )
        summary[tag] = point_rows
    return StudyReport(
        mode=cfg.mode,
        spec_hash=spec_hash(spec),
        seed=cfg.seed,
        dt=cfg.dt,
        T_grid=cfg.T_grid,
        n_paths=cfg.n_paths,
        records=records,
        summary=summary,
        checks=checks,
    )


_RUNNERS = {
    "Consistency": run_consistency_study,
    "Normality": run_normality_study,
    "Supercritical": run_supercritical_study,
    "Ergodic": run_ergodic_study,
    "CfCompare": run_cf_compare_study,
}


def run_study(cfg: StudyConfig) -> StudyReport:
    """Dispatch a StudyConfig to the runner matching its mode."""
    return _RUNNERS[cfg.mode](cfg)
