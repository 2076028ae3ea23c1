"""Command line front end: deterministic CSV/JSONL/SVG emission plus manifests.

Every output-producing subcommand writes its artifact atomically and drops a
run manifest (``<out>.manifest.json``) holding the fully resolved
configuration, so re-running from the same manifest reproduces the artifact
byte for byte.

Exit codes: 0 success, 1 domain or I/O error (JSON diagnostics on stderr),
2 usage error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import time

from . import __version__
from ._util import atomic_write_text, format_float
from .dynamics import (
    BlowupError,
    ModelSpec,
    integrate_reference,
    trajectory_to_jsonl,
)
from .modes import ModeVector
from .normal_form import ModulationConfig, operator_bound_ratio
from .solver import SolverConfig, SolverError, solve_normal_form
from .trees import enumerate_trees
from .verify import approximation_stability, compare_solutions, remainder_decay_study

__all__ = ["dispatch", "main", "emit_plot", "load_config_file", "build_solver_config"]

CONFIG_KEYS = {
    "renormalization": "renormalized",
    "nonlinearity_sign": 1,
    "p": 2.0,
    "K": 1.0,
    "eps": None,
    "theta": None,
    "cutoff_override": None,
    "J_max": 1,
    "n_max": 8,
    "T": 0.1,
    "time_grid_size": 33,
    "picard_tol": 1e-10,
    "picard_max_iter": 30,
    "quadrature": "trapezoid",
}


def load_config_file(path: str) -> dict:
    """Parse a flat ``key = value`` configuration file.

    Values are JSON fragments where possible (numbers, objects, null) and raw
    strings otherwise; ``#`` starts a comment; unknown keys are rejected.
    """
    out: dict = {}
    with open(path, "r") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (part.strip() for part in line.split("=", 1))
            if key not in CONFIG_KEYS:
                raise ValueError(f"{path}:{lineno}: unknown configuration key {key!r}")
            try:
                out[key] = json.loads(value)
            except json.JSONDecodeError:
                out[key] = value
    return out


def build_solver_config(settings: dict) -> SolverConfig:
    override = settings.get("cutoff_override")
    if isinstance(override, dict):
        override = {int(k): float(v) for k, v in override.items()}
    model = ModelSpec(
        renormalization=settings["renormalization"],
        nonlinearity_sign=int(settings["nonlinearity_sign"]),
    )
    mod_cfg = ModulationConfig(
        p=float(settings["p"]),
        K=float(settings["K"]),
        eps=None if settings["eps"] is None else float(settings["eps"]),
        theta=None if settings["theta"] is None else float(settings["theta"]),
        cutoff_override=override,
    )
    return SolverConfig(
        model=model,
        mod_cfg=mod_cfg,
        J_max=int(settings["J_max"]),
        n_max=int(settings["n_max"]),
        T=float(settings["T"]),
        time_grid_size=int(settings["time_grid_size"]),
        picard_tol=float(settings["picard_tol"]),
        picard_max_iter=int(settings["picard_max_iter"]),
        quadrature=settings["quadrature"],
    )


def _resolve_settings(config_path: str | None) -> dict:
    settings = dict(CONFIG_KEYS)
    if config_path:
        settings.update(load_config_file(config_path))
    override = settings.get("cutoff_override")
    if isinstance(override, dict):
        settings["cutoff_override"] = {str(k): float(v) for k, v in override.items()}
    return settings


def _load_mode_vector(path: str) -> ModeVector:
    with open(path, "r") as fh:
        return ModeVector.from_json_dict(json.load(fh))


def _write_csv(path: str, header: list[str], rows: list[list]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(
            [format_float(v) if isinstance(v, float) else v for v in row]
        )
    atomic_write_text(path, buf.getvalue())


def _write_manifest(
    out_path: str,
    subcommand: str,
    settings: dict,
    args: dict,
    inputs: list[str],
    seed: int | None,
    started: float,
    extra: dict | None = None,
) -> None:
    manifest = {
        "subcommand": subcommand,
        "version": __version__,
        "config": settings,
        "args": args,
        "inputs": inputs,
        "outputs": [out_path],
        "seed": seed,
        "duration_s": round(time.monotonic() - started, 6),
    }
    if extra:
        manifest.update(extra)
    atomic_write_text(
        out_path + ".manifest.json",
        json.dumps(manifest, sort_keys=True, indent=2) + "\n",
    )


# ---------------------------------------------------------------------------
# SVG emission
# ---------------------------------------------------------------------------

_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b")
_WIDTH, _HEIGHT = 800, 600
_MARGIN_L, _MARGIN_R, _MARGIN_T, _MARGIN_B = 80, 30, 40, 60


def _ticks(lo: float, hi: float, count: int = 5) -> list[float]:
    if hi <= lo:
        hi = lo + 1.0
    return [lo + (hi - lo) * i / (count - 1) for i in range(count)]


def emit_plot(
    csv_path: str,
    x_col: str,
    y_cols: list[str],
    out_path: str,
    logy: bool = False,
    title: str = "",
) -> None:
    """Render CSV columns to a deterministic, fixed-size 800x600 SVG."""
    with open(csv_path, "r", newline="") as fh:
        reader = csv.DictReader(fh)
        rows = list(reader)
    if not rows:
        raise ValueError(f"{csv_path}: no data rows")
    for col in [x_col, *y_cols]:
        if col not in rows[0]:
            raise ValueError(f"{csv_path}: column {col!r} not found")
    xs = [float(row[x_col]) for row in rows]
    series = {}
    for col in y_cols:
        vals = [float(row[col]) for row in rows]
        if logy:
            if any(v <= 0 for v in vals):
                raise ValueError(f"column {col!r} has non-positive values; no log scale")
            vals = [math.log10(v) for v in vals]
        series[col] = vals

    x_lo, x_hi = min(xs), max(xs)
    all_y = [v for vals in series.values() for v in vals]
    y_lo, y_hi = min(all_y), max(all_y)
    if x_hi <= x_lo:
        x_hi = x_lo + 1.0
    if y_hi <= y_lo:
        y_hi = y_lo + 1.0

    def sx(x: float) -> float:
        return _MARGIN_L + (x - x_lo) / (x_hi - x_lo) * (_WIDTH - _MARGIN_L - _MARGIN_R)

    def sy(y: float) -> float:
        return _HEIGHT - _MARGIN_B - (y - y_lo) / (y_hi - y_lo) * (
            _HEIGHT - _MARGIN_T - _MARGIN_B
        )

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}"'
        f' viewBox="0 0 {_WIDTH} {_HEIGHT}">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
    ]
    if title:
        parts.append(
            f'<text x="{_WIDTH / 2:.1f}" y="24" text-anchor="middle"'
            f' font-family="monospace" font-size="16">{title}</text>'
        )
    axis_y = _HEIGHT - _MARGIN_B
    parts.append(
        f'<line x1="{_MARGIN_L}" y1="{axis_y}" x2="{_WIDTH - _MARGIN_R}"'
        f' y2="{axis_y}" stroke="black"/>'
    )
    parts.append(
        f'<line x1="{_MARGIN_L}" y1="{_MARGIN_T}" x2="{_MARGIN_L}"'
        f' y2="{axis_y}" stroke="black"/>'
    )
    for tick in _ticks(x_lo, x_hi):
        px = sx(tick)
        parts.append(
            f'<line x1="{px:.2f}" y1="{axis_y}" x2="{px:.2f}" y2="{axis_y + 6}"'
            ' stroke="black"/>'
        )
        parts.append(
            f'<text x="{px:.2f}" y="{axis_y + 22}" text-anchor="middle"'
            f' font-family="monospace" font-size="12">{tick:.4g}</text>'
        )
    for tick in _ticks(y_lo, y_hi):
        py = sy(tick)
        label = f"1e{tick:.3g}" if logy else f"{tick:.4g}"
        parts.append(
            f'<line x1="{_MARGIN_L - 6}" y1="{py:.2f}" x2="{_MARGIN_L}" y2="{py:.2f}"'
            ' stroke="black"/>'
        )
        parts.append(
            f'<text x="{_MARGIN_L - 10}" y="{py + 4:.2f}" text-anchor="end"'
            f' font-family="monospace" font-size="12">{label}</text>'
        )
    parts.append(
        f'<text x="{(_MARGIN_L + _WIDTH - _MARGIN_R) / 2:.1f}" y="{_HEIGHT - 16}"'
        f' text-anchor="middle" font-family="monospace" font-size="13">{x_col}</text>'
    )
    for idx, (col, vals) in enumerate(series.items()):
        color = _PALETTE[idx % len(_PALETTE)]
        points = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in zip(xs, vals))
        parts.append(
            f'<polyline fill="none" stroke="{color}" stroke-width="1.5"'
            f' points="{points}"/>'
        )
        ly = _MARGIN_T + 16 + 18 * idx
        lx = _WIDTH - _MARGIN_R - 160
        parts.append(
            f'<line x1="{lx}" y1="{ly - 4}" x2="{lx + 24}" y2="{ly - 4}"'
            f' stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(
            f'<text x="{lx + 30}" y="{ly}" font-family="monospace"'
            f' font-size="12">{col}</text>'
        )
    parts.append("</svg>")
    atomic_write_text(out_path, "\n".join(parts) + "\n")


# ---------------------------------------------------------------------------
# subcommand handlers
# ---------------------------------------------------------------------------


def _cmd_trees(args: argparse.Namespace) -> None:
    started = time.monotonic()
    rows = [[J, len(enumerate_trees(J))] for J in range(1, args.J + 1)]
    _write_csv(args.out, ["J", "count"], rows)
    _write_manifest(
        args.out, "trees", {}, {"J": args.J}, [], None, started
    )


def _cmd_simulate(args: argparse.Namespace) -> None:
    started = time.monotonic()
    settings = _resolve_settings(args.config)
    cfg = build_solver_config(settings)
    u0 = _load_mode_vector(args.u0)
    traj = integrate_reference(u0, cfg.T, args.dt, cfg.model)
    atomic_write_text(args.out, trajectory_to_jsonl(traj))
    _write_manifest(
        args.out,
        "simulate",
        settings,
        {"u0": args.u0, "dt": args.dt},
        [args.u0] + ([args.config] if args.config else []),
        None,
        started,
    )


def _cmd_solve_nfe(args: argparse.Namespace) -> None:
    started = time.monotonic()
    settings = _resolve_settings(args.config)
    cfg = build_solver_config(settings)
    u0 = _load_mode_vector(args.u0)
    report = solve_normal_form(u0, cfg)
    atomic_write_text(args.out, trajectory_to_jsonl(report.trajectory))
    _write_manifest(
        args.out,
        "solve-nfe",
        settings,
        {"u0": args.u0},
        [args.u0] + ([args.config] if args.config else []),
        None,
        started,
        extra={
            "solve": {
                "iterations": report.iterations,
                "final_update_norm": report.final_update_norm,
                "contraction_estimate": report.contraction_estimate
                if math.isfinite(report.contraction_estimate)
                else None,
                "K_used": report.K_used,
                "converged": report.converged,
            }
        },
    )


def _cmd_compare(args: argparse.Namespace) -> None:
    started = time.monotonic()
    settings = _resolve_settings(args.config)
    cfg = build_solver_config(settings)
    u0 = _load_mode_vector(args.u0)
    result = compare_solutions(u0, cfg, args.dt_ref)
    rows = [
        [float(t), float(d)] for t, d in zip(result.times, result.distances)
    ]
    _write_csv(args.out, ["t", "distance"], rows)
    _write_manifest(
        args.out,
        "compare",
        settings,
        {"u0": args.u0, "dt_ref": args.dt_ref},
        [args.u0] + ([args.config] if args.config else []),
        None,
        started,
        extra={"max_distance": result.max_distance},
    )


def _cmd_bounds(args: argparse.Namespace) -> None:
    started = time.monotonic()
    settings = _resolve_settings(args.config)
    cfg = build_solver_config(settings)
    p_values = [float(x) for x in args.p_list.split(",") if x.strip()]
    if not p_values:
        raise ValueError("empty p list")
    rows = []
    for p in p_values:
        mod = ModulationConfig(
            p=p,
            K=cfg.mod_cfg.K,
            cutoff_override=cfg.mod_cfg.override_map() or None,
        )
        ratio = operator_bound_ratio(
            args.kind, args.j, p, args.trials, args.seed, mod, cfg.n_max
        )
        rows.append([args.kind, args.j, float(p), cfg.n_max, args.trials, args.seed, ratio])
    _write_csv(
        args.out,
        ["kind", "j", "p", "n_max", "trials", "seed", "max_ratio"],
        rows,
    )
    _write_manifest(
        args.out,
        "bounds",
        settings,
        {
            "kind": args.kind,
            "j": args.j,
            "p_list": args.p_list,
            "trials": args.trials,
        },
        [args.config] if args.config else [],
        args.seed,
        started,
    )


def _cmd_error_decay(args: argparse.Namespace) -> None:
    started = time.monotonic()
    settings = _resolve_settings(args.config)
    cfg = build_solver_config(settings)
    u0 = _load_mode_vector(args.u0)
    J_values = [int(x) for x in args.J_list.split(",") if x.strip()]
    table = remainder_decay_study(u0, J_values, cfg.mod_cfg)
    rows = [[row.J, row.sup_norm, row.envelope] for row in table.rows]
    _write_csv(args.out, ["J", "sup_norm", "envelope"], rows)
    _write_manifest(
        args.out,
        "error-decay",
        settings,
        {"u0": args.u0, "J_list": args.J_list},
        [args.u0] + ([args.config] if args.config else []),
        None,
        started,
    )


def _cmd_stability(args: argparse.Namespace) -> None:
    started = time.monotonic()
    settings = _resolve_settings(args.config)
    cfg = build_solver_config(settings)
    u0 = _load_mode_vector(args.u0)
    m_values = [int(x) for x in args.m_list.split(",") if x.strip()]
    rows = [
        [r.m_lo, r.m_hi, r.data_distance, r.solution_distance, r.ratio]
        for r in approximation_stability(u0, m_values, cfg)
    ]
    _write_csv(
        args.out,
        ["m_lo", "m_hi", "data_distance", "solution_distance", "ratio"],
        rows,
    )
    _write_manifest(
        args.out,
        "stability",
        settings,
        {"u0": args.u0, "m_list": args.m_list},
        [args.u0] + ([args.config] if args.config else []),
        None,
        started,
    )


def _cmd_plot(args: argparse.Namespace) -> None:
    started = time.monotonic()
    y_cols = [c for c in args.y.split(",") if c.strip()]
    if not y_cols:
        raise ValueError("empty y column list")
    emit_plot(args.csv, args.x, y_cols, args.out, logy=args.logy, title=args.title)
    _write_manifest(
        args.out,
        "plot",
        {},
        {"csv": args.csv, "x": args.x, "y": args.y, "logy": args.logy},
        [args.csv],
        None,
        started,
    )


# ---------------------------------------------------------------------------
# dispatch
# ---------------------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nfnls",
        description="Normal form reduction toolkit for the periodic cubic NLS",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add(name: str, handler, needs_config=True, needs_u0=False, out=True):
        p = sub.add_parser(name)
        p.set_defaults(handler=handler)
        if needs_config:
            p.add_argument("--config", default=None, help="key = value settings file")
        if needs_u0:
            p.add_argument("--u0", required=True, help="initial data (mode vector JSON)")
        if out:
            p.add_argument("--out", required=True, help="output path")
        return p

    p = add("trees", _cmd_trees, needs_config=False)
    p.add_argument("--J", type=int, required=True, help="largest generation to count")

    p = add("simulate", _cmd_simulate, needs_u0=True)
    p.add_argument("--dt", type=float, default=1e-3, help="reference RK4 step")

    add("solve-nfe", _cmd_solve_nfe, needs_u0=True)

    p = add("compare", _cmd_compare, needs_u0=True)
    p.add_argument("--dt-ref", type=float, default=1e-3, dest="dt_ref")

    p = add("bounds", _cmd_bounds)
    p.add_argument("--kind", default="R", help="operator kind (N0, N1, N2, R, R2)")
    p.add_argument("--j", type=int, default=1)
    p.add_argument("--p-list", default="1,1.5,2", dest="p_list")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--seed", type=int, default=0)

    p = add("error-decay", _cmd_error_decay, needs_u0=True)
    p.add_argument("--J-list", default="1,2,3", dest="J_list")

    p = add("stability", _cmd_stability, needs_u0=True)
    p.add_argument("--m-list", default="2,4,6", dest="m_list")

    p = add("plot", _cmd_plot, needs_config=False)
    p.add_argument("--csv", required=True)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True, help="comma-separated y columns")
    p.add_argument("--logy", action="store_true")
    p.add_argument("--title", default="")

    return parser


def dispatch(argv: list[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        args.handler(args)
    except (
        ValueError,
        KeyError,
        OSError,
        json.JSONDecodeError,
        SolverError,
        BlowupError,
    ) as exc:
        sys.stderr.write(
            json.dumps({"error": f"{type(exc).__name__}: {exc}"}) + "\n"
        )
        return 1
    return 0


def main() -> None:
    sys.exit(dispatch(sys.argv[1:]))
