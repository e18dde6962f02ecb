"""Command-line front end: spectrum sweeps, invariant checks, angular tables.

Exit codes: 0 success, 1 invariant failure, 2 usage/config error,
3 numerical failure in a sweep (partial output retained, failing rows
marked in the status column).
"""

import argparse
import json

import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .geometry import Background
from .radial import ModeParams
from .angular import angular_eigenvalues, eigenvalue_for_index, _check_half_integer
from .asymptotics import ExtrapolationError
from .operators import spectrum_point
from . import suite as suite_mod


class ConfigError(ValueError):
    pass


@dataclass
class SweepConfig:
    M: float = 1.0
    m: float = 0.5
    ks: tuple = (0.5,)
    ns: tuple = (1,)
    omega_min: float = 0.1
    omega_max: float = 2.0
    omega_count: int = 16
    spacing: str = "linear"
    exclusion_delta: float | None = None
    ode_tol: float = 1e-10
    extract_tol: float = 1e-6
    out_path: str = "sweep.csv"
    out_format: str = "csv"

    @classmethod
    def from_dict(cls, raw):
        try:
            cfg = cls()
            bgd = raw.get("background", {})
            cfg.M = float(bgd.get("M", cfg.M))
            mode = raw.get("mode", {})
            cfg.m = float(mode.get("m", cfg.m))
            cfg.ks = tuple(float(k) for k in mode.get("k", cfg.ks))
            cfg.ns = tuple(int(n) for n in mode.get("n", cfg.ns))
            grid = raw.get("omega_grid", {})
            cfg.omega_min = float(grid.get("min", cfg.omega_min))
            cfg.omega_max = float(grid.get("max", cfg.omega_max))
            cfg.omega_count = int(grid.get("count", cfg.omega_count))
            cfg.spacing = str(grid.get("spacing", cfg.spacing))
            if "exclusion_delta" in grid:
                cfg.exclusion_delta = float(grid["exclusion_delta"])
            tols = raw.get("tolerances", {})
            cfg.ode_tol = float(tols.get("ode", cfg.ode_tol))
            cfg.extract_tol = float(tols.get("extract", cfg.extract_tol))
            out = raw.get("output", {})
            cfg.out_path = str(out.get("path", cfg.out_path))
            cfg.out_format = str(out.get("format", cfg.out_format))
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed config value: {exc}") from exc
        cfg.validate()
        return cfg

    def validate(self):
        if self.M <= 0:
            raise ConfigError(f"background mass must be positive, got {self.M}")
        if self.m < 0:
            raise ConfigError(f"fermion mass must be >= 0, got {self.m}")
        for k in self.ks:
            try:
                _check_half_integer(k)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc
        for n in self.ns:
            if n == 0:
                raise ConfigError("mode index n = 0 is not defined")
        if self.omega_count < 1:
            raise ConfigError("omega grid needs at least one point")
        if self.spacing not in ("linear", "log-sym"):
            raise ConfigError(f"unknown spacing {self.spacing!r}")
        if self.spacing == "log-sym" and self.omega_min <= 0:
            raise ConfigError("log-sym spacing needs 0 < min < max (absolute values)")
        if self.out_format not in ("csv", "json"):
            raise ConfigError(f"unknown output format {self.out_format!r}")

    def omega_grid(self):
        if self.spacing == "linear":
            grid = np.linspace(self.omega_min, self.omega_max, self.omega_count)
        else:
            half = max(self.omega_count // 2, 1)
            pos = np.geomspace(self.omega_min, self.omega_max, half)
            grid = np.concatenate([-pos[::-1], pos])
        delta = self.exclusion_delta
        if delta is None:
            delta = 1e-3 * self.m
        keep = np.abs(np.abs(grid) - self.m) > delta
        return grid[keep]


_COLUMNS = (
    "k",
    "n",
    "omega",
    "lambda",
    "fnorm",
    "mu_plus",
    "mu_minus",
    "nu_plus",
    "nu_minus",
    "err_estimate",
    "status",
)


def _fmt(x):
    return "" if x is None else f"{x:.16e}"


def _sweep_cell(cfg, bg, k, n, lam, omega):
    p = ModeParams(bg=bg, m=cfg.m, omega=float(omega), lam=float(lam), k=k)
    try:
        sp = spectrum_point(p, cfg.extract_tol, cfg.ode_tol)
        return {
            "k": k,
            "n": n,
            "omega": float(omega),
            "lambda": float(lam),
            "fnorm": sp.fnorm,
            "mu_plus": sp.mu_plus,
            "mu_minus": sp.mu_minus,
            "nu_plus": sp.nu_plus,
            "nu_minus": sp.nu_minus,
            "err_estimate": sp.err_estimate,
            "status": "ok",
        }
    except (ExtrapolationError, RuntimeError, ValueError) as exc:
        return {
            "k": k,
            "n": n,
            "omega": float(omega),
            "lambda": float(lam),
            "fnorm": None,
            "mu_plus": None,
            "mu_minus": None,
            "nu_plus": None,
            "nu_minus": None,
            "err_estimate": None,
            "status": f"failed: {exc.__class__.__name__}",
        }


def run_sweep(cfg, threads=1):
    """All sweep rows in deterministic (k, n, omega) order."""
    bg = Background(M=cfg.M)
    grid = cfg.omega_grid()
    cells = []
    for k in cfg.ks:
        for n in cfg.ns:
            lam = eigenvalue_for_index(k, n)
            for omega in grid:
                cells.append((k, n, lam, omega))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(
                pool.map(lambda c: _sweep_cell(cfg, bg, *c), cells)
            )
    else:
        rows = [_sweep_cell(cfg, bg, *c) for c in cells]
    rows.sort(key=lambda r: (2 * r["k"], r["n"], r["omega"]))
    return rows


def write_rows(rows, path, fmt):
    if fmt == "csv":
        lines = [",".join(_COLUMNS)]
        for r in rows:
            lines.append(
                ",".join(
                    r["status"] if c == "status" else _fmt(r[c]) for c in _COLUMNS
                )
            )
        data = "\n".join(lines) + "\n"
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(data)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            json.dump({"rows": rows}, fh, indent=1, sort_keys=True)
            fh.write("\n")


def cmd_sweep(args):
    cfg = _load_config(args)
    rows = run_sweep(cfg, threads=args.threads)
    out = args.out or cfg.out_path
    fmt = args.format or cfg.out_format
    write_rows(rows, out, fmt)
    failed = [r for r in rows if r["status"] != "ok"]
    if failed:
        print(
            f"{len(failed)} of {len(rows)} cells failed extraction", file=sys.stderr
        )
        return 3
    print(f"wrote {len(rows)} rows to {out}")
    return 0


def cmd_invariants(args):
    cfg = _load_config(args)
    bg = Background(M=cfg.M)
    results = suite_mod.run_invariants(
        bg=bg,
        extract_tol=cfg.extract_tol,
        ode_tol=cfg.ode_tol,
        seed=args.seed,
    )
    for res in results:
        print(res.line())
    return 0 if all(r.passed for r in results) else 1


def _parse_half_integer(text):
    if "/" in text:
        num, den = text.split("/", 1)
        value = float(num) / float(den)
    else:
        value = float(text)
    _check_half_integer(value)
    return value


def cmd_angular(args):
    try:
        k = _parse_half_integer(args.k)
    except (ValueError, ZeroDivisionError) as exc:
        print(f"invalid azimuthal number {args.k!r}: {exc}", file=sys.stderr)
        return 2
    if args.count < 1:
        print("count must be >= 1", file=sys.stderr)
        return 2
    vals = angular_eigenvalues(k, args.count)
    refined = angular_eigenvalues(k, args.count, n_start=256)
    print(f"angular eigenvalues for k = {k} (smallest |lambda| first)")
    print("lambda                     refinement-drift")
    for v, w in zip(vals, refined):
        print(f"{v:+.12f}        {abs(v - w):.3e}")
    return 0


def _load_config(args):
    raw = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                raw = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
    return SweepConfig.from_dict(raw)


def build_parser():
    ap = argparse.ArgumentParser(
        prog="bhdirac",
        description="Schwarzschild Dirac mode spectra: sweeps and invariants",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="tabulate operator spectra over a frequency grid")
    sweep.add_argument("--config", help="JSON config path")
    sweep.add_argument("--out", help="output file (overrides config)")
    sweep.add_argument("--format", choices=("csv", "json"), help="output format")
    sweep.add_argument("--threads", type=int, default=1)
    sweep.set_defaults(func=cmd_sweep)

    inv = sub.add_parser("invariants", help="run the named invariant checks")
    inv.add_argument("--config", help="JSON config path")
    inv.add_argument("--seed", type=int, default=0, help="seed for random profiles")
    inv.set_defaults(func=cmd_invariants)

    ang = sub.add_parser("angular", help="tabulate angular eigenvalues")
    ang.add_argument("--k", required=True, help="half-integer azimuthal number, e.g. 1/2")
    ang.add_argument("--count", type=int, default=6)
    ang.set_defaults(func=cmd_angular)

    return ap


def main(argv=None):
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
