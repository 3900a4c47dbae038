"""Path simulation: time grids, the PathGrid container, single-path and
ensemble drivers over the kernel lanes, the exact CIR transition density,
and CSV (+ JSON sidecar) persistence.

Schemes
-------
EulerFullTruncation
    Y_{l+1} = Y_l + (a - b Y_l+) dt + rho11 sqrt(Y_l+) dB1, with x+ = max(x, 0)
    applied only inside drift/diffusion evaluation; the stored Y is the
    truncated iterate, the carried one is raw.  The X block uses the same
    sqrt(Y_l+) factor and drift m - kappa Y_l+ - theta X_l.
ExactCIR
    Y sampled from the exact noncentral-chi-square transition; the X block
    remains Euler conditional on Y (hybrid — there is no exact joint scheme).

Reproducibility: path k of an ensemble draws from a Philox stream keyed by
(seed, k), so results are independent of execution order and identical
between runs; bit-equality across platforms is not promised, only within
one build on one platform.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.stats import ncx2

from . import _kernels
from .errors import ValidationError
from .model import ModelSpec, spec_hash
from .model import _require_valid

__all__ = [
    "SCHEMES",
    "SimConfig",
    "PathGrid",
    "simulate_path",
    "simulate_ensemble",
    "simulate_arrays",
    "cir_transition_density",
    "save_path_csv",
    "load_path_csv",
]

SCHEMES = ("EulerFullTruncation", "ExactCIR")

_MAX_STEPS = 10**9
_MAX_TOTAL = 10**10


@dataclass(frozen=True)
class SimConfig:
    """Simulation request: horizon, step, scheme, and the ensemble seed."""

    T: float
    dt: float
    scheme: str = "EulerFullTruncation"
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "T", float(self.T))
        object.__setattr__(self, "dt", float(self.dt))
        object.__setattr__(self, "seed", int(self.seed))
        if not (math.isfinite(self.T) and self.T > 0):
            raise ValidationError("SimConfig: T must be positive and finite")
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValidationError("SimConfig: dt must be positive and finite")
        if self.dt > self.T:
            raise ValidationError("SimConfig: dt must not exceed T")
        if self.T / self.dt > _MAX_STEPS:
            raise ValidationError(f"SimConfig: step count T/dt exceeds {_MAX_STEPS:.0e}")
        if self.scheme not in SCHEMES:
            raise ValidationError(f"SimConfig: scheme must be one of {SCHEMES}")
        if not (0 <= self.seed < 2**64):
            raise ValidationError("SimConfig: seed must be a 64-bit unsigned integer")


def _build_grid(T: float, dt: float):
    """Times 0 = t_0 < ... < t_L = T and per-step widths.

    Steps are uniform of width dt; when dt does not divide T the final step
    is shortened so the grid ends exactly at T.
    """
    n_full = int(math.floor(T / dt + 1e-9))
    rem = T - n_full * dt
    if rem > dt * 1e-9:
        dts = np.full(n_full + 1, dt)
        dts[-1] = rem
        times = np.empty(n_full + 2)
        times[: n_full + 1] = dt * np.arange(n_full + 1)
    else:
        dts = np.full(n_full, dt)
        times = dt * np.arange(n_full + 1)
    times[-1] = T
    return times, dts


@dataclass(frozen=True)
class PathGrid:
    """One sampled trajectory (t_l, Y_l, X_l), l = 0..L.

    Invariants (checked on construction): equal lengths; Y nonnegative;
    times strictly increasing and uniformly spaced within 1e-12 relative to
    the horizon, except that the final step may be shorter.
    """

    times: np.ndarray
    y: np.ndarray
    x: np.ndarray
    spec_hash: str
    seed: int

    def __post_init__(self):
        object.__setattr__(self, "times", np.asarray(self.times, dtype=float))
        object.__setattr__(self, "y", np.asarray(self.y, dtype=float))
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 1:
            x = x[:, None]
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "seed", int(self.seed))
        t, y = self.times, self.y
        if t.ndim != 1 or len(t) < 2:
            raise ValidationError("PathGrid: need at least two grid points")
        if not (len(t) == len(y) == len(x)):
            raise ValidationError("PathGrid: times, y, x must have equal lengths")
        if not np.all(np.isfinite(t)) or not np.all(np.isfinite(y)) or not np.all(np.isfinite(x)):
            raise ValidationError("PathGrid: entries must be finite")
        if np.any(y < 0):
            raise ValidationError("PathGrid: y must be nonnegative")
        diffs = np.diff(t)
        if np.any(diffs <= 0):
            raise ValidationError("PathGrid: times must be strictly increasing")
        tol = 1e-12 * max(1.0, abs(float(t[-1])))
        if len(diffs) > 1:
            if np.abs(diffs[:-1] - diffs[0]).max() > tol:
                raise ValidationError("PathGrid: interior spacing must be uniform")
            if diffs[-1] > diffs[0] + tol:
                raise ValidationError("PathGrid: final step may not exceed the uniform step")

    @property
    def n(self) -> int:
        return self.x.shape[1]

    @property
    def horizon(self) -> float:
        return float(self.times[-1])

    @property
    def dt(self) -> float:
        return float(self.times[1] - self.times[0])


def simulate_arrays(spec: ModelSpec, config: SimConfig, n_paths: int, path_offset: int = 0):
    """Raw ensemble arrays (times, y, x) for paths [offset, offset + n_paths).

    Path k (global index) always consumes the Philox stream keyed (seed, k),
    so slicing an ensemble into offset batches reproduces the unbatched run.
    """
    _require_valid(spec)
    n_paths = int(n_paths)
    path_offset = int(path_offset)
    if n_paths < 1:
        raise ValidationError("simulate_arrays: n_paths must be at least 1")
    if path_offset < 0:
        raise ValidationError("simulate_arrays: path_offset must be nonnegative")
    times, dts = _build_grid(config.T, config.dt)
    if n_paths * len(dts) > _MAX_TOTAL:
        raise ValidationError(
            f"simulate_arrays: n_paths * steps exceeds the resource guard {_MAX_TOTAL:.0e}"
        )
    kernel = (
        _kernels.euler_paths
        if config.scheme == "EulerFullTruncation"
        else _kernels.exact_cir_paths
    )
    y, x = kernel(
        spec.a, spec.b, spec.m, spec.kappa, spec.theta, spec.rho,
        spec.y0, spec.x0, dts, config.seed, path_offset, n_paths,
    )
    return times, y, x


def simulate_path(spec: ModelSpec, config: SimConfig) -> PathGrid:
    """One trajectory on stream 0 (deterministic in (spec, config))."""
    times, y, x = simulate_arrays(spec, config, 1)
    return PathGrid(times, y[0], x[0], spec_hash(spec), config.seed)


def simulate_ensemble(spec: ModelSpec, config: SimConfig, n_paths: int) -> list[PathGrid]:
    """n_paths trajectories on streams 0..n_paths-1, in stream order."""
    times, y, x = simulate_arrays(spec, config, n_paths)
    h = spec_hash(spec)
    return [PathGrid(times, y[k], x[k], h, config.seed) for k in range(int(n_paths))]


def cir_transition_density(a, b, rho11, t, y_from, y_to) -> float:
    """Exact CIR transition density f(y_to | y_from) over elapsed time t.

    Scaled noncentral chi-square representation: Y_t / k ~ ncx2(df, nc) with
    k = rho11^2 (1 - e^{-bt}) / (4b)  (continuously  rho11^2 t / 4 at b = 0),
    df = 4a / rho11^2, nc = y_from e^{-bt} / k.
    """
    vals = [a, b, rho11, t, y_from, y_to]
    if not all(math.isfinite(float(v)) for v in vals):
        raise ValidationError("cir_transition_density: parameters must be finite")
    a, b, rho11, t, y_from, y_to = map(float, vals)
    if a <= 0 or t <= 0 or y_from <= 0 or rho11 <= 0:
        raise ValidationError("cir_transition_density: requires a > 0, t > 0, y_from > 0, rho11 > 0")
    if y_to < 0:
        return 0.0
    if b == 0.0:
        k = rho11 * rho11 * t / 4.0
    else:
        k = -(rho11 * rho11) / (4.0 * b) * math.expm1(-b * t)
    df = 4.0 * a / (rho11 * rho11)
    nc = y_from * math.exp(-b * t) / k
    return float(ncx2.pdf(y_to / k, df, nc) / k)


# ---------------------------------------------------------------------------
# persistence

def save_path_csv(grid: PathGrid, csv_path, scheme: str, sidecar: bool = True) -> None:
    """Write `t,Y,X1,...,Xn` CSV (round-trip decimal floats) plus a metadata
    sidecar `<csv_path>.meta.json` recording spec hash, seed, scheme, dt."""
    if scheme not in SCHEMES:
        raise ValidationError(f"save_path_csv: scheme must be one of {SCHEMES}")
    n = grid.n
    header = "t,Y," + ",".join(f"X{i}" for i in range(1, n + 1))
    lines = [header]
    for row in range(len(grid.times)):
        vals = [grid.times[row], grid.y[row], *grid.x[row]]
        lines.append(",".join(repr(float(v)) for v in vals))
    Path(csv_path).write_text("\n".join(lines) + "\n", encoding="utf-8")
    if sidecar:
        meta = {
            "dt": grid.dt,
            "scheme": scheme,
            "seed": grid.seed,
            "spec_hash": grid.spec_hash,
        }
        Path(f"{csv_path}.meta.json").write_text(
            json.dumps(meta, sort_keys=True, separators=(",", ":")) + "\n", encoding="utf-8"
        )


def load_path_csv(csv_path) -> tuple[PathGrid, dict]:
    """Read a path CSV back; metadata comes from the sidecar when present."""
    csv_path = Path(csv_path)
    if not csv_path.exists():
        raise ValidationError(f"load_path_csv: no such file {csv_path}")
    with csv_path.open(encoding="utf-8") as fh:
        header = fh.readline().strip()
        cols = header.split(",")
        if len(cols) < 3 or cols[0] != "t" or cols[1] != "Y":
            raise ValidationError(f"load_path_csv: unexpected header {header!r}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.shape[1] != len(cols):
        raise ValidationError("load_path_csv: row width does not match header")
    meta = {}
    sidecar = Path(f"{csv_path}.meta.json")
    if sidecar.exists():
        meta = json.loads(sidecar.read_text(encoding="utf-8"))
    grid = PathGrid(
        times=data[:, 0],
        y=data[:, 1],
        x=data[:, 2:],
        spec_hash=str(meta.get("spec_hash", "unknown")),
        seed=int(meta.get("seed", 0)),
    )
    return grid, meta
