"""Command-line interface.

Subcommands: classify, simulate, estimate, stationary-cf, ergodic-check,
lyapunov, mc-study.  Model specs are JSON files; paths are CSV files with
a JSON metadata sidecar; studies and estimates emit JSON.

Exit codes: 0 success, 1 validation error (bad inputs or model), 2
numerical failure (integrator/conditioning), 64 usage error.

Every command is deterministic: identical inputs produce byte-identical
outputs (files and stdout).  All JSON is emitted with sorted keys and
shortest round-trip floats; no timestamps or environment state leak into
any output.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from ._version import __version__
from .errors import NumericalError, ValidationError
from .model import classify, lyapunov_certificate, spec_from_json
from .riccati import FLArgument, stationary_cf
from .simulate import SCHEMES, SimConfig, load_path_csv, save_path_csv, simulate_path
from .estimate import estimate_diffusion, mle_full
from .studies import MODES, StudyConfig, ergodic_average, run_study

__all__ = ["main"]


class _UsageError(Exception):
    def __init__(self, usage: str, message: str):
        super().__init__(message)
        self.usage = usage
        self.message = message


class _Parser(argparse.ArgumentParser):
    """argparse exits with status 2 on bad flags; the contract reserves 2
    for numerical failures and 64 for usage errors, so error() raises."""

    def error(self, message):
        raise _UsageError(self.format_usage(), message)


def _load_spec(path: str):
    p = Path(path)
    if not p.exists():
        raise ValidationError(f"no such config file: {path}")
    return spec_from_json(p.read_text(encoding="utf-8"))


def _parse_floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError:
        raise ValidationError(f"expected a comma-separated list of numbers, got {text!r}")


def _dump_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")) + "\n"


def _emit(payload: str, out: str | None) -> None:
    if out:
        Path(out).write_text(payload, encoding="utf-8")
        print(f"wrote {out}")
    else:
        sys.stdout.write(payload)


def _cmd_classify(ns) -> int:
    spec = _load_spec(ns.config)
    rc = classify(spec)
    print(rc.label.lower())
    print(f"b = {float(rc.b)!r}")
    print(f"lambda_min(theta) = {float(rc.lambda_min_theta)!r}")
    print(f"lambda_max(theta) = {float(rc.lambda_max_theta)!r}")
    return 0


def _cmd_simulate(ns) -> int:
    spec = _load_spec(ns.config)
    cfg = SimConfig(T=ns.T, dt=ns.dt, scheme=ns.scheme, seed=ns.seed)
    grid = simulate_path(spec, cfg)
    save_path_csv(grid, ns.out, scheme=ns.scheme)
    print(f"wrote {ns.out}")
    return 0


def _cmd_estimate(ns) -> int:
    grid, _meta = load_path_csv(ns.path)
    if ns.rho_known:
        p = Path(ns.rho_known)
        if not p.exists():
            raise ValidationError(f"no such rho file: {ns.rho_known}")
        try:
            parsed = json.loads(p.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValidationError(f"rho file is not valid JSON: {exc}") from None
        rho = np.asarray(parsed["rho"] if isinstance(parsed, dict) else parsed, dtype=float)
    else:
        _s_hat, rho = estimate_diffusion(grid)
    res = mle_full(grid, rho)
    _emit(_dump_json(res.to_json()), ns.out)
    return 0


def _cmd_stationary_cf(ns) -> int:
    spec = _load_spec(ns.config)
    mu = np.zeros(spec.n) if ns.mu is None else np.asarray(_parse_floats(ns.mu))
    arg = FLArgument(ns.lam, mu)
    val = stationary_cf(spec, arg, tol=ns.tol)
    out = {
        "lambda": float(ns.lam),
        "mu": [float(v) for v in arg.mu],
        "re": float(val.real),
        "im": float(val.imag),
        "modulus": float(abs(val)),
        "tol": float(ns.tol),
    }
    sys.stdout.write(_dump_json(out))
    return 0


def _cmd_ergodic_check(ns) -> int:
    spec = _load_spec(ns.config)
    cfg = SimConfig(T=ns.T, dt=ns.dt, scheme="EulerFullTruncation", seed=ns.seed)
    grid = simulate_path(spec, cfg)
    names = [v.strip() for v in ns.functionals.split(",") if v.strip() != ""]
    if not names:
        raise ValidationError("ergodic-check: no functionals requested")
    limits = {}
    if spec.b > 0:
        limits["y"] = spec.a / spec.b
        if 2.0 * spec.a > spec.sigma_sq[0]:
            limits["inv_y"] = 2.0 * spec.b / (2.0 * spec.a - spec.sigma_sq[0])
    rows = []
    for name in names:
        avg = ergodic_average(grid, name)
        limit = limits.get(name)
        rows.append(
            {
                "functional": name,
                "average": float(avg),
                "stationary_limit": None if limit is None else float(limit),
            }
        )
    out = {
        "T": float(ns.T),
        "dt": float(ns.dt),
        "seed": int(ns.seed),
        "spec_hash": grid.spec_hash,
        "averages": rows,
    }
    sys.stdout.write(_dump_json(out))
    return 0


def _cmd_lyapunov(ns) -> int:
    spec = _load_spec(ns.config)
    cert = lyapunov_certificate(spec, c=ns.c, r=ns.r)
    out = {
        "c": float(cert.c),
        "r": float(cert.r),
        "d": float(cert.d),
        "c1": float(cert.c1),
        "c2": float(cert.c2),
        "c3": [[float(v) for v in row] for row in cert.c3],
        "c4": [float(v) for v in cert.c4],
        "r_bound": None if cert.r_bound == float("inf") else float(cert.r_bound),
    }
    sys.stdout.write(_dump_json(out))
    return 0


def _cmd_mc_study(ns) -> int:
    spec = _load_spec(ns.config)
    cfg = StudyConfig(
        spec=spec,
        T_grid=tuple(_parse_floats(ns.T_grid)),
        dt=ns.dt,
        n_paths=ns.n_paths,
        seed=ns.seed,
        mode=ns.mode,
    )
    report = run_study(cfg)
    _emit(_dump_json(report.to_json()), ns.out)
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="adkit", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"adkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("classify", help="print the regime of a model spec")
    p.add_argument("--config", required=True, help="model spec JSON file")
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("simulate", help="simulate one path to CSV (+ JSON sidecar)")
    p.add_argument("--config", required=True)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--scheme", choices=list(SCHEMES), default="EulerFullTruncation")
    p.add_argument("--out", required=True, help="output CSV path")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("estimate", help="drift MLE from a path CSV")
    p.add_argument("--path", required=True, help="path CSV produced by simulate")
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--rho-known", metavar="FILE", help="JSON file holding rho")
    grp.add_argument(
        "--estimate-diffusion",
        action="store_true",
        help="identify rho from the path's quadratic variation",
    )
    p.add_argument("--out", help="write the JSON result here instead of stdout")
    p.set_defaults(func=_cmd_estimate)

    p = sub.add_parser("stationary-cf", help="stationary Fourier-Laplace transform")
    p.add_argument("--config", required=True)
    p.add_argument("--lambda", dest="lam", type=float, required=True)
    p.add_argument("--mu", help="comma-separated n-vector (default: zeros)")
    p.add_argument("--tol", type=float, default=1e-8)
    p.set_defaults(func=_cmd_stationary_cf)

    p = sub.add_parser("ergodic-check", help="time averages along one simulated path")
    p.add_argument("--config", required=True)
    p.add_argument("--T", type=float, required=True)
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--functionals", default="y,inv_y", help="comma-separated names")
    p.set_defaults(func=_cmd_ergodic_check)

    p = sub.add_parser("lyapunov", help="drift-condition certificate constants")
    p.add_argument("--config", required=True)
    p.add_argument("--c", type=float, default=None)
    p.add_argument("--r", type=float, default=None)
    p.set_defaults(func=_cmd_lyapunov)

    p = sub.add_parser("mc-study", help="Monte Carlo study; JSON report")
    p.add_argument("--config", required=True)
    p.add_argument("--mode", choices=list(MODES), required=True)
    p.add_argument("--T-grid", dest="T_grid", required=True, help="comma-separated horizons")
    p.add_argument("--dt", type=float, required=True)
    p.add_argument("--n-paths", dest="n_paths", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="write the JSON report here instead of stdout")
    p.set_defaults(func=_cmd_mc_study)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        ns = parser.parse_args(argv)
    except _UsageError as exc:
        sys.stderr.write(exc.usage)
        print(f"error: {exc.message}", file=sys.stderr)
        return 64
    except SystemExit as exc:  # --help / --version print and exit 0
        return int(exc.code or 0)
    try:
        return ns.func(ns)
    except ValidationError as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    raise SystemExit(main())
