"""Command-line front end: ``qib rate-curve | classical | verify | channel-info``.

Exit codes: 0 ok, 1 verification failure, 2 usage or invalid input,
3 degenerate instance (no relevant correlation), 4 solver infeasibility.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import hashlib
import json
import logging
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from ._backend import BACKEND
from .classical_ib import classical_rate_curve, joint_distribution, load_joint
from .config import SolverConfig
from .errors import DegenerateInstanceError, InfeasibleError, QIBError
from .presets import PRESETS, preset_state
from .qstate import (
    ChoiMatrix,
    KrausChannel,
    decode_matrix,
    kraus_to_choi,
    load_channel,
    save_channel,
    validate_cptp,
    validate_density,
)
from .tensor_core import SubsystemDims, hermitian_eig, hermitize

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2
EXIT_DEGENERATE = 3
EXIT_INFEASIBLE = 4

CURVE_HEADER = ["J", "rate", "I_xty_nats", "I_xpxt_nats", "feasible", "evals", "channel_file"]
CLASSICAL_HEADER = ["J", "rate", "I_xty_nats", "I_xpxt_nats", "feasible", "evals", "channel"]
LN2 = math.log(2.0)

log = logging.getLogger("qbottleneck")


class UsageError(Exception):
    """Invalid command-line input (exit 2)."""


# ---------------------------------------------------------------- parsing


def parse_floats(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise UsageError(f"not a comma-separated list of numbers: {text!r}") from None


def _split_range(text: str, what: str) -> tuple[float, float, int]:
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"{what} must look like start:stop:count, got {text!r}")
    try:
        a, b, n = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"bad {what} {text!r}") from None
    if n < 1:
        raise UsageError(f"{what} count must be >= 1")
    return a, b, n


def parse_grid(text: str) -> list[float]:
    """``start:stop:count``, endpoints included; strictly increasing inside ``(0, 1]``."""
    a, b, n = _split_range(text, "grid")
    if n == 1 and a != b:
        raise UsageError("a one-point grid needs start == stop")
    grid = [round(float(x), 12) for x in np.linspace(a, b, n)]
    if any(not (0.0 < g <= 1.0) for g in grid):
        raise UsageError("grid values must lie in (0, 1]")
    if any(y <= x for x, y in zip(grid, grid[1:])):
        raise UsageError("grid must be strictly increasing")
    return grid


def parse_beta_grid(text: str) -> list[float]:
    """Either ``start:stop:count`` (geometric, endpoints included) or a comma list."""
    if ":" in text:
        a, b, n = _split_range(text, "beta grid")
        if a <= 0 or b <= 0:
            raise UsageError("geometric beta grid needs positive endpoints")
        betas = [float(x) for x in np.geomspace(a, b, n)]
    else:
        betas = parse_floats(text)
    if not betas or any(not (x >= 0 and math.isfinite(x)) for x in betas):
        raise UsageError("beta values must be finite and non-negative")
    return betas


def resolve_seed(flag: int | None) -> int:
    if flag is not None:
        return flag
    env = os.environ.get("QIB_SEED")
    if env is None or env == "":
        return 0
    try:
        return int(env)
    except ValueError:
        raise UsageError(f"QIB_SEED must be an integer, got {env!r}") from None


def load_state_spec(path) -> tuple[np.ndarray, SubsystemDims, dict]:
    """Read a state spec: ``{"preset": {"name", "params"}}`` or ``{"dims": {"x", "y"}, "matrix": ...}``."""
    try:
        obj = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read state file {path}: {exc}") from None
    if not isinstance(obj, dict):
        raise UsageError("state file must hold a JSON object")
    try:
        if "preset" in obj:
            p = obj["preset"]
            rho = preset_state(p["name"], p.get("params", []))
            return rho, SubsystemDims.of(x=2, y=2), obj
        dims = obj["dims"]
        dx, dy = int(dims["x"]), int(dims["y"])
        rho = validate_density(decode_matrix(obj["matrix"], dx * dy, dx * dy))
        return rho, SubsystemDims.of(x=dx, y=dy), obj
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"invalid state spec: {exc}") from None


def state_from_args(args) -> tuple[np.ndarray, SubsystemDims, dict]:
    if args.state and args.preset:
        raise UsageError("give either --state or --preset, not both")
    if args.state:
        return load_state_spec(args.state)
    if not args.preset:
        raise UsageError("a state is required: --preset NAME [--params ...] or --state FILE")
    params = parse_floats(args.params) if args.params else []
    try:
        rho = preset_state(args.preset, params)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    return rho, SubsystemDims.of(x=2, y=2), {"preset": {"name": args.preset, "params": params}}


# ---------------------------------------------------------------- output helpers


def fmt(x) -> str:
    """Shortest round-trip text for a float, so identical runs give identical bytes."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    return "nan" if math.isnan(x) else repr(x)


def write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) for v in row])


def render_svg(J, R, title: str = "") -> str:
    """Rate curve (red) with the reference lines R = J and R = J/2 (blue) on the unit square."""
    w, h, left, right, top, bottom = 800, 600, 70, 30, 40, 60
    pw, ph = w - left - right, h - top - bottom

    def px(j, r):
        return f"{left + j * pw:.2f},{top + (1.0 - r) * ph:.2f}"

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {w} {h}" width="{w}" height="{h}">',
        f'<rect x="0" y="0" width="{w}" height="{h}" fill="white"/>',
        f'<rect x="{left}" y="{top}" width="{pw}" height="{ph}" fill="none" stroke="black"/>',
    ]
    for k in range(11):
        t = k / 10
        x, y = left + t * pw, top + (1 - t) * ph
        parts.append(f'<line x1="{x:.2f}" y1="{top + ph}" x2="{x:.2f}" y2="{top + ph + 5}" stroke="black"/>')
        parts.append(f'<text x="{x:.2f}" y="{top + ph + 20}" font-size="12" text-anchor="middle">{t:.1f}</text>')
        parts.append(f'<line x1="{left - 5}" y1="{y:.2f}" x2="{left}" y2="{y:.2f}" stroke="black"/>')
        parts.append(f'<text x="{left - 8}" y="{y + 4:.2f}" font-size="12" text-anchor="end">{t:.1f}</text>')
    parts.append(f'<text x="{left + pw / 2}" y="{h - 15}" font-size="14" text-anchor="middle">J</text>')
    parts.append(
        f'<text x="20" y="{top + ph / 2}" font-size="14" text-anchor="middle" '
        f'transform="rotate(-90 20 {top + ph / 2})">R(J)</text>'
    )
    if title:
        parts.append(f'<text x="{left + pw / 2}" y="25" font-size="14" text-anchor="middle">{title}</text>')
    parts.append(f'<polyline class="ref-identity" points="{px(0, 0)} {px(1, 1)}" fill="none" stroke="blue"/>')
    parts.append(f'<polyline class="ref-half" points="{px(0, 0)} {px(1, 0.5)}" fill="none" stroke="blue"/>')
    pts = [(j, r) for j, r in zip(J, R) if math.isfinite(r)]
    if pts:
        coords = " ".join(px(j, r) for j, r in pts)
        parts.append(f'<polyline class="rate" points="{coords}" fill="none" stroke="red" stroke-width="2"/>')
        for j, r in pts:
            x, y = px(j, r).split(",")
            parts.append(f'<circle cx="{x}" cy="{y}" r="3" fill="red"/>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def _sha256_array(a: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(a, dtype=np.complex128).tobytes()).hexdigest()


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def write_manifest(out: Path, command: str, argv, config: SolverConfig | None, extra: dict, outputs, started) -> Path:
    manifest = {
        "command": command,
        "argv": list(argv),
        "version": __version__,
        "backend": BACKEND,
        "config": config.to_dict() if config is not None else None,
        "seed": config.seed if config is not None else extra.get("seed"),
        "started": started,
        "finished": _now(),
        "outputs": sorted(str(p) for p in outputs),
        **extra,
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return path


def _display(x: float, bits: bool) -> str:
    return f"{x / LN2 if bits else x:.6f}"


# ---------------------------------------------------------------- commands


def _config_from_args(args, seed: int) -> SolverConfig:
    base = SolverConfig()
    changes = {"seed": seed, "threads": args.threads or (os.cpu_count() or 1)}
    for name in ("population", "survivors", "iterations", "restarts", "kraus_rank"):
        v = getattr(args, name, None)
        if v is not None:
            changes[name] = v
    if getattr(args, "constraint_mode", None):
        changes["constraint_mode"] = args.constraint_mode
    if getattr(args, "beta_grid", None):
        changes["beta_grid"] = tuple(parse_beta_grid(args.beta_grid))
    try:
        return base.replace(**changes)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _channel_name(J: float) -> str:
    return f"channel_J{J:.4f}.json"


def cmd_rate_curve(args) -> int:
    from .qib.curve import convexity_check, rate_curve
    from .qib.instance import build_instance

    started = _now()
    seed = resolve_seed(args.seed)
    grid = parse_grid(args.grid)
    rho, dims, spec = state_from_args(args)
    config = _config_from_args(args, seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    inst = build_instance(rho, dims)

    rows, outputs = [], []
    if args.optimizer == "random-search":
        curve = rate_curve(inst, grid, config)
        for p in curve.points:
            if p.feasible:
                name = _channel_name(p.J)
                save_channel(out / name, p.channel)
                outputs.append(out / name)
                ev = p.evaluation
                rows.append([p.J, p.R, ev.I_xt_y, ev.I_xp_xt, True, p.evals, name])
            else:
                rows.append([p.J, math.nan, math.nan, math.nan, False, p.evals, ""])
        J, R = curve.J, curve.R
        notes = {"monotone_repairs": [[i, d, fmt(x)] for i, d, x in curve.repairs]}
    else:
        J, R, notes = _fixed_point_curve(inst, grid, config, out, rows, outputs)

    csv_path = out / "curve.csv"
    write_csv(csv_path, CURVE_HEADER, rows)
    outputs.append(csv_path)
    if args.svg:
        svg_path = out / "curve.svg"
        svg_path.write_text(render_svg(J, R, title=_title(spec)))
        outputs.append(svg_path)
    feasible = [r[4] for r in rows]
    conv = None
    if sum(feasible) >= 3:
        conv = convexity_check((np.asarray(J), np.asarray(R)), slack=0.02)
    write_manifest(
        out,
        "rate-curve",
        sys.argv[1:] if args.argv is None else args.argv,
        config,
        {
            "optimizer": args.optimizer,
            "grid": grid,
            "state": spec,
            "input_sha256": _sha256_array(rho),
            "convexity_slack_0.02": None if conv is None else conv.passed,
            **notes,
        },
        outputs,
        started,
    )
    unit = "bits" if args.bits else "nats"
    print(f"{'J':>8} {'rate':>10} {'I(Xt;Y)':>12} {'I(X;Xt)':>12}  ({unit})")
    for row in rows:
        if row[4]:
            print(f"{row[0]:8.4f} {row[1]:10.6f} {_display(row[2], args.bits):>12} {_display(row[3], args.bits):>12}")
        else:
            print(f"{row[0]:8.4f} {'infeasible':>10}")
    if conv is not None:
        print(str(conv).splitlines()[0])
    print(f"wrote {csv_path}")
    return EXIT_OK if all(feasible) else EXIT_INFEASIBLE


def _title(spec: dict) -> str:
    if "preset" in spec:
        p = spec["preset"]
        params = ",".join(fmt(x) for x in p.get("params", []))
        return f"{p['name']}({params})" if params else p["name"]
    return "explicit state"


def _fixed_point_curve(inst, grid, config, out, rows, outputs):
    """Sweep beta with the fixed-point solver; each target takes the cheapest feasible solution."""
    from .qib.lagrangian import fixed_point_solve

    sols = []
    for beta in config.beta_grid:
        ev, choi, diag = fixed_point_solve(inst, beta, config)
        sols.append((beta, ev, choi, diag))
    J, R = [], []
    unconverged = [fmt(b) for b, _, _, d in sols if not d.converged]
    for target in grid:
        cands = [s for s in sols if s[1].J_norm >= target - 1e-12]
        if not cands:
            rows.append([target, math.nan, math.nan, math.nan, False, 0, ""])
            J.append(target)
            R.append(math.nan)
            continue
        beta, ev, choi, diag = min(cands, key=lambda s: (s[1].R_norm, s[0]))
        name = _channel_name(target)
        save_channel(out / name, choi)
        outputs.append(out / name)
        rows.append([target, ev.R_norm, ev.I_xt_y, ev.I_xp_xt, True, diag.iterations, name])
        J.append(target)
        R.append(ev.R_norm)
    return np.array(J), np.array(R), {"unconverged_betas": unconverged}


def cmd_classical(args) -> int:
    started = _now()
    seed = resolve_seed(args.seed)
    grid = parse_grid(args.grid)
    if args.joint:
        if args.preset or args.state:
            raise UsageError("give either --joint or a diagonal state, not both")
        try:
            pxy = load_joint(args.joint)
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read joint file {args.joint}: {exc}") from None
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        spec = {"joint_file": str(args.joint)}
    else:
        rho, dims, spec = state_from_args(args)
        if np.max(np.abs(rho - np.diag(np.diagonal(rho)))) > 1e-12:
            raise UsageError("the classical solver needs a diagonal state (or a --joint table)")
        pxy = joint_distribution(np.real(np.diagonal(rho)).reshape(dims.sizes))
    config = _config_from_args(args, seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    curve = classical_rate_curve(pxy, grid, config=config, normalization=args.normalization)
    rows = []
    for p in curve.points:
        ch = "" if p.channel is None else json.dumps(np.asarray(p.channel, dtype=float).tolist())
        sol_iters = 0 if not p.feasible else _iterations_of(curve, p)
        rows.append([p.J, p.rate, p.I_xty, p.I_xxt, p.feasible, sol_iters, ch])
    csv_path = out / "curve.csv"
    write_csv(csv_path, CLASSICAL_HEADER, rows)
    outputs = [csv_path]
    if args.trace:
        trace_path = out / "beta_trace.csv"
        write_csv(
            trace_path,
            ["beta", "I_xxt_nats", "I_xty_nats", "iterations", "residual"],
            [[s.beta, s.I_xxt, s.I_xty, s.iterations, s.residual] for s in curve.sweep],
        )
        outputs.append(trace_path)
    if args.svg:
        svg_path = out / "curve.svg"
        svg_path.write_text(render_svg(curve.J, curve.R, title="classical"))
        outputs.append(svg_path)
    write_manifest(
        out,
        "classical",
        sys.argv[1:] if args.argv is None else args.argv,
        config,
        {"grid": grid, "input": spec, "normalization": args.normalization, "input_sha256": _sha256_array(pxy)},
        outputs,
        started,
    )
    unit = "bits" if args.bits else "nats"
    print(f"{'J':>8} {'rate':>10} {'I(Xt;Y)':>12} {'I(X;Xt)':>12}  ({unit})")
    for p in curve.points:
        if p.feasible:
            print(f"{p.J:8.4f} {p.rate:10.6f} {_display(p.I_xty, args.bits):>12} {_display(p.I_xxt, args.bits):>12}")
        else:
            print(f"{p.J:8.4f} {'infeasible':>10}")
    print(f"wrote {csv_path}")
    return EXIT_OK if all(p.feasible for p in curve.points) else EXIT_INFEASIBLE


def _iterations_of(curve, point) -> int:
    for s in curve.sweep:
        if s.channel is point.channel:
            return s.iterations
    return 0


def run_verify(seed: int, grad_tol: float) -> list[tuple[str, bool, str]]:
    """The built-in self-test; returns ``(name, passed, detail)`` rows."""
    from . import checks
    from .qib.benchmark import analytic_dephasing_benchmark

    rows = []
    for p in ((0.1, 0.2, 0.3, 0.4), (0.5, 0.0, 0.0, 0.5)):
        rep = analytic_dephasing_benchmark(p, check=False)
        rows.append(
            (
                f"dephasing benchmark p={','.join(fmt(x) for x in p)}",
                rep.passed,
                f"J_norm-1={rep.J_norm - 1:+.1e} R_norm-0.5={rep.R_norm - 0.5:+.1e}",
            )
        )
    errs = checks.gradient_fd_errors(20, seed)
    rows.append(("gradient vs finite differences (20 points)", bool(errs.max() <= grad_tol), f"max rel err {errs.max():.2e} (tol {grad_tol:.0e})"))
    act, valid = checks.cptp_roundtrip_errors(50, seed)
    rows.append(("CPTP roundtrip kraus<->choi (50 channels)", bool(valid and act.max() <= 1e-9), f"max action err {act.max():.2e}"))
    j = checks.data_processing_sample(200, seed)
    rows.append(("data processing J_norm <= 1 (200 pairs)", bool(j.max() <= 1 + 1e-9), f"max J_norm-1 {j.max() - 1:+.1e}"))
    lhs, rhs = checks.fannes_sample(200, seed)
    rows.append(("Fannes continuity bound (200 pairs)", bool(np.all(lhs <= rhs)), f"min margin {np.min(rhs - lhs):.2e}"))
    marg, pur = checks.purification_errors(50, seed)
    rows.append(("purification marginals (50 states)", bool(marg <= 1e-10 and pur <= 1e-10), f"max marginal err {marg:.1e}"))
    return rows


def cmd_verify(args) -> int:
    seed = resolve_seed(args.seed)
    rows = run_verify(seed, args.grad_tol)
    width = max(len(name) for name, _, _ in rows)
    print(f"self-test (seed {seed}, backend {BACKEND})")
    for name, ok, detail in rows:
        print(f"{'PASS' if ok else 'FAIL'}  {name:<{width}}  {detail}")
    ok = all(r[1] for r in rows)
    print("all checks passed" if ok else "some checks FAILED")
    return EXIT_OK if ok else EXIT_VERIFY


def cmd_channel_info(args) -> int:
    from .qib.instance import build_instance, evaluate_choi

    try:
        ch = load_channel(args.channel)
    except (OSError, json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"cannot load channel {args.channel}: {exc}") from None
    if isinstance(ch, KrausChannel):
        choi = kraus_to_choi(ch)
        print(f"channel: {ch.rank} Kraus operators, {ch.d_in} -> {ch.d_out}")
    else:
        choi = ch
        print(f"channel: Choi matrix, {ch.d_in} -> {ch.d_out}")
    report = validate_cptp(choi)
    print(report)
    w = hermitian_eig(hermitize(choi.matrix), tol=1e-9).values[::-1]
    w = np.where(np.abs(w) < 1e-12, 0.0, w)
    print("Choi eigenvalues: " + ", ".join(f"{x:.6f}" for x in w))
    if args.preset or args.state:
        rho, dims, _ = state_from_args(args)
        inst = build_instance(rho, dims)
        ev = evaluate_choi(inst, ChoiMatrix(choi.matrix, choi.d_in, choi.d_out))
        print(f"J_norm = {ev.J_norm:.6f}, R_norm = {ev.R_norm:.6f}")
        print(f"I(Xt;Y) = {_display(ev.I_xt_y, args.bits)}, I(X';Xt) = {_display(ev.I_xp_xt, args.bits)} ({'bits' if args.bits else 'nats'})")
    return EXIT_OK if report.passed else EXIT_VERIFY


# ---------------------------------------------------------------- argparse


def _add_state_args(p):
    p.add_argument("--preset", choices=sorted(PRESETS), help="built-in two-qubit state")
    p.add_argument("--params", help="comma-separated preset parameters, e.g. 0.1,0.2,0.3,0.4")
    p.add_argument("--state", help="JSON state spec file (preset or explicit dims + matrix)")


def _add_common(p):
    p.add_argument("--seed", type=int, default=None, help="master seed (default: $QIB_SEED, else 0)")
    p.add_argument("--threads", type=int, default=None, help="worker threads (default: all cores)")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--bits", action="store_true", help="show informations in bits (files stay in nats)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qib", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__} ({BACKEND} kernels)")
    parser.add_argument("-v", "--verbose", action="store_true", help="log solver progress")
    sub = parser.add_subparsers(dest="command", required=True)

    grid_help = "relevance targets start:stop:count, endpoints included, strictly increasing in (0, 1]"
    p = sub.add_parser("rate-curve", help="quantum rate curve over a grid of relevance targets")
    _add_state_args(p)
    _add_common(p)
    p.add_argument("--grid", default="0.05:0.95:19", help=grid_help)
    p.add_argument("--optimizer", choices=["random-search", "fixed-point"], default="random-search")
    p.add_argument("--beta-grid", help="fixed-point betas: start:stop:count (geometric) or a comma list")
    p.add_argument("--svg", action="store_true", help="also write curve.svg")
    p.add_argument("--population", type=int)
    p.add_argument("--survivors", type=int)
    p.add_argument("--iterations", type=int, help="generations per restart")
    p.add_argument("--restarts", type=int)
    p.add_argument("--kraus-rank", type=int, dest="kraus_rank")
    p.add_argument("--constraint-mode", choices=["filter", "penalty"], dest="constraint_mode")
    p.set_defaults(func=cmd_rate_curve)

    p = sub.add_parser("classical", help="classical bottleneck curve for a joint table or diagonal state")
    _add_state_args(p)
    _add_common(p)
    p.add_argument("--joint", help='JSON file {"px_y": [[...]]}')
    p.add_argument("--grid", default="0.05:0.95:19", help=grid_help)
    p.add_argument("--beta-grid", help="betas: start:stop:count (geometric) or a comma list")
    p.add_argument("--normalization", choices=["quantum", "nats"], default="quantum",
                   help="divide rates by 2 H(X) (comparable with rate-curve) or report nats")
    p.add_argument("--restarts", type=int)
    p.add_argument("--trace", action="store_true", help="write beta_trace.csv with every sweep solution")
    p.add_argument("--svg", action="store_true", help="also write curve.svg")
    p.set_defaults(func=cmd_classical)

    p = sub.add_parser("verify", help="run the built-in numerical self-test")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--grad-tol", type=float, default=1e-5, help="relative tolerance of the gradient check")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("channel-info", help="validate a channel file and optionally evaluate it")
    p.add_argument("channel", help="channel JSON (Kraus or Choi form)")
    _add_state_args(p)
    p.add_argument("--bits", action="store_true")
    p.set_defaults(func=cmd_channel_info)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    args.argv = None if argv is None else list(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DegenerateInstanceError as exc:
        print(f"degenerate input: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (QIBError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
