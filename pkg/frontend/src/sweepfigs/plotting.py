"""Render bhdirac sweep CSVs into figures.

Two kinds: `spectrum` draws the four operator eigenvalue curves per mode
against frequency with the mass gap shaded, `fnorm-vs-lambda` draws the
transmission norm against the angular eigenvalue, one line per frequency.
Input files are never modified.
"""

import argparse
import csv
import sys

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

REQUIRED_COLUMNS = (
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

NUMERIC_COLUMNS = (
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
)


class SchemaError(ValueError):
    """Input CSV does not carry the sweep schema."""


def read_sweep(path):
    """Sweep rows as a dict of numpy arrays; empty cells become NaN."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [c for c in REQUIRED_COLUMNS if c not in header]
        if missing:
            raise SchemaError(f"missing column: {missing[0]}")
        rows = list(reader)
    data = {}
    for col in NUMERIC_COLUMNS:
        data[col] = np.array(
            [float(r[col]) if r[col] not in ("", None) else np.nan for r in rows]
        )
    data["status"] = np.array([r["status"] for r in rows])
    return data


def infer_gap(data, mass=None):
    """Half-width of the frequency band with identically zero spectra."""
    if mass is not None:
        return mass
    zero = (
        (data["mu_plus"] == 0.0)
        & (data["mu_minus"] == 0.0)
        & (data["nu_plus"] == 0.0)
        & (data["nu_minus"] == 0.0)
        & (data["status"] == "ok")
    )
    if not np.any(zero):
        return None
    return float(np.max(np.abs(data["omega"][zero])))


def render_spectrum(data, out_path, mass=None):
    fig, ax = plt.subplots(figsize=(7.0, 4.5))
    gap = infer_gap(data, mass)
    if gap is not None and gap > 0:
        ax.axvspan(-gap, gap, color="0.88", zorder=0, label="mass gap")
    ok = data["status"] == "ok"
    modes = sorted(set(zip(data["k"][ok], data["n"][ok].astype(int))))
    multi = len(modes) > 1
    for k, n in modes:
        sel = ok & (data["k"] == k) & (data["n"] == n)
        order = np.argsort(data["omega"][sel])
        om = data["omega"][sel][order]
        suffix = f" (k={k:g}, n={n})" if multi else ""
        for col, style in (
            ("mu_plus", "-"),
            ("mu_minus", "--"),
            ("nu_plus", "-."),
            ("nu_minus", ":"),
        ):
            ax.plot(om, data[col][sel][order], style, label=col.replace("_", " ") + suffix)
    ax.set_xlabel("frequency")
    ax.set_ylabel("eigenvalue")
    ax.legend(fontsize=8, ncol=2)
    ax.set_title("signature and flux spectra")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render_fnorm_vs_lambda(data, out_path):
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ok = (data["status"] == "ok") & np.isfinite(data["fnorm"])
    if not np.any(ok):
        raise SchemaError("no propagating rows with a transmission norm")
    for omega in sorted(set(data["omega"][ok])):
        sel = ok & (data["omega"] == omega)
        lam = data["lambda"][sel]
        order = np.argsort(lam)
        ax.plot(lam[order], data["fnorm"][sel][order], "o-",
                label=f"omega = {omega:g}")
    ax.set_xlabel("angular eigenvalue")
    ax.set_ylabel("transmission norm")
    ax.set_yscale("log")
    ax.legend(fontsize=8)
    ax.set_title("transmission norm growth")
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def render(in_path, kind, out_path, mass=None):
    data = read_sweep(in_path)
    if kind == "spectrum":
        render_spectrum(data, out_path, mass)
    elif kind == "fnorm-vs-lambda":
        render_fnorm_vs_lambda(data, out_path)
    else:
        raise ValueError(f"unknown plot kind {kind!r}")


def main(argv=None):
    ap = argparse.ArgumentParser(
        prog="sweepfig", description="figures from bhdirac sweep CSVs"
    )
    ap.add_argument("--in", dest="in_path", required=True, help="sweep CSV")
    ap.add_argument(
        "--kind", required=True, choices=("spectrum", "fnorm-vs-lambda")
    )
    ap.add_argument("--out", required=True, help="output image path")
    ap.add_argument(
        "--mass", type=float, default=None,
        help="mass gap half-width (inferred from zero-spectrum rows if omitted)",
    )
    args = ap.parse_args(argv)
    try:
        render(args.in_path, args.kind, args.out, args.mass)
    except (SchemaError, OSError, ValueError) as exc:
        print(f"sweepfig: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
