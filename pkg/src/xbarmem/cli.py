"""``xbarmem`` command line: channel maps, capacity, thresholds, coding and allocation.

Every artifact carries the SHA-256 of the canonical run description
(subcommand, options, device parameters) and the seed, and is written only
after all target paths are known to be free (or ``--force`` is given).
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .capacity import averaged_capacity, channel_map
from .codesim import DEFAULT_MAX_FRAMES, DEFAULT_MIN_EVENTS, rber_spread, simulate_codes
from .ldca import (
    allocation_csv,
    build_cost_matrix,
    code_family,
    cost_csv,
    ldca_solve_regularized,
    weights_csv,
)
from .montecarlo import heatmap_csv, pgm_bytes
from .params import ArrayGeometry, DeviceParams, load_params_file
from .circuit import accumulated_line_resistance_map, series_resistance
from .threshold import (
    KINDS,
    ThresholdConvergenceError,
    ThresholdDomainError,
    ThresholdPlan,
    avg_read_ber,
    make_plan,
    stmc_approx,
    stmc_root,
)

# large arrays contract slowly toward the exact STMC threshold
SWEEP_MAX_ITER = 500
TABLE2_SHAPES = ((128, 128), (64, 256), (32, 512), (16, 1024), (8, 2048), (4, 4096))


class CliError(Exception):
    pass


# -- helpers ------------------------------------------------------------------------


def _floats(text: str) -> list[float]:
    vals = [float(v) for v in text.split(",") if v.strip()]
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _ints(text: str) -> list[int]:
    vals = [int(v) for v in text.split(",") if v.strip()]
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _fmt(x) -> str:
    return repr(float(x))


class Emitter:
    """Collects artifacts, then writes them in one pass."""

    def __init__(self, out: Path, force: bool, spec_hash: str, seed: int):
        self.out = out
        self.force = force
        self.spec_hash = spec_hash
        self.seed = seed
        self.files: dict[str, bytes] = {}

    @property
    def header(self) -> str:
        return f"# spec_sha256={self.spec_hash} seed={self.seed}\n"

    def csv(self, name: str, header: list[str], rows) -> None:
        lines = [self.header.rstrip("\n"), ",".join(header)]
        for r in rows:
            lines.append(",".join(_fmt(v) if isinstance(v, float) else str(v) for v in r))
        self.files[name] = ("\n".join(lines) + "\n").encode()

    def text(self, name: str, body: str, with_header: bool = True) -> None:
        self.files[name] = ((self.header if with_header else "") + body).encode()

    def heatmap(self, name: str, a, quantity: str) -> None:
        self.files[name + ".csv"] = heatmap_csv(a, quantity, self.seed, self.spec_hash).encode()
        img = pgm_bytes(a)
        magic, rest = img.split(b"\n", 1)
        comment = f"# spec_sha256={self.spec_hash} seed={self.seed}\n".encode()
        self.files[name + ".pgm"] = magic + b"\n" + comment + rest

    def json(self, name: str, payload: dict) -> None:
        doc = {"spec_sha256": self.spec_hash, "seed": self.seed, **payload}
        self.files[name] = (json.dumps(doc, indent=2, sort_keys=True, allow_nan=True) + "\n").encode()

    def flush(self) -> list[str]:
        self.out.mkdir(parents=True, exist_ok=True)
        clash = sorted(n for n in self.files if (self.out / n).exists())
        if clash and not self.force:
            raise CliError(f"refusing to overwrite {', '.join(clash)} in {self.out} (use --force)")
        for name in sorted(self.files):
            (self.out / name).write_bytes(self.files[name])
        return sorted(self.files)


def _params(args, r_line: float | None = None) -> DeviceParams:
    p = load_params_file(args.params) if args.params else DeviceParams.table1()
    if r_line is not None:
        p = p.with_lines(r_line)
    return p


def _spec_hash(args, p: DeviceParams) -> str:
    opts = {k: v for k, v in sorted(vars(args).items())
            if k not in ("func", "out", "force", "params")}
    doc = {"command": args.command, "options": opts, "params": p.to_dict(),
           "version": __version__}
    text = json.dumps(doc, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(text.encode()).hexdigest()


def _plan(kind: str, geom: ArrayGeometry, p: DeviceParams, max_iter: int = SWEEP_MAX_ITER):
    """Threshold plan; exact STMC restarts from the closed-form estimate when the default
    start lies below the largest series resistance."""
    if kind == "raw":
        return make_plan("raw", geom, p), "raw"
    try:
        return make_plan(kind, geom, p, max_iter=max_iter), "r_th0"
    except (ThresholdDomainError, ThresholdConvergenceError):
        if kind != "stmc-exact":
            raise
    r0 = make_plan("naive", geom, p).r_th0
    try:
        start = stmc_approx(geom, r0, p)
        return make_plan(kind, geom, p, r_th0=r0, max_iter=max_iter, r_init=start), "approx"
    except (ThresholdDomainError, ThresholdConvergenceError):
        acc = series_resistance(accumulated_line_resistance_map(geom, p), p)
        return ThresholdPlan(kind, stmc_root(acc, r0), geom, r0), "bracket"


# -- subcommands --------------------------------------------------------------------


def cmd_channel_map(args, em: Emitter) -> dict:
    geom = ArrayGeometry(args.rows, args.cols)
    p = _params(args, args.r_line)
    plan, _ = _plan(args.threshold, geom, p)
    cm = channel_map(geom, p, plan)
    summary = {"rows": geom.m, "cols": geom.n, "r_line": p.r_w, "threshold": args.threshold}
    for name in ("write", "read", "cascaded"):
        a = cm.quantity(name)
        em.heatmap(f"{name}_ber", a, f"{name}_ber")
        lo, hi = float(a.min()), float(a.max())
        summary[name] = {"min": lo, "max": hi, "mean": float(a.mean()),
                         "corner_best": float(a[0, 0]), "corner_worst": float(a[-1, -1]),
                         "ratio": (hi / lo) if lo > 0 else None}
    em.json("summary.json", summary)
    return summary


def cmd_capacity(args, em: Emitter) -> dict:
    if args.preset == "table2":
        rows = []
        p = _params(args, args.r_line[0])
        base = _params(args, 0.0)
        for m, n in TABLE2_SHAPES:
            g = ArrayGeometry(m, n)
            rows.append((m, n, n / m, averaged_capacity(g, p)))
        em.csv("capacity_table2.csv", ["rows", "cols", "aspect", "capacity"], rows)
        caps = [r[3] for r in rows]
        summary = {"preset": "table2", "r_line": p.r_w, "capacities": caps,
                   "monotone": bool(all(a >= b for a, b in zip(caps, caps[1:]))),
                   "line_free": averaged_capacity(ArrayGeometry(1, 1), base)}
    else:
        g = ArrayGeometry(args.rows, args.cols)
        rows = [(r, averaged_capacity(g, _params(args, r))) for r in args.r_line]
        em.csv("capacity_sweep.csv", ["r_line", "capacity"], rows)
        summary = {"rows": g.m, "cols": g.n, "capacities": [c for _, c in rows]}
    em.json("summary.json", summary)
    return summary


def cmd_threshold(args, em: Emitter) -> dict:
    table = []
    for r in args.r_line:
        p = _params(args, r)
        for size in args.sizes:
            g = ArrayGeometry(size, size)
            row = [r, size]
            starts = "r_th0"
            for kind in KINDS:
                plan, start = _plan(kind, g, p)
                if kind == "stmc-exact":
                    starts = f"{start}:{plan.iterations}"
                    last = (g, plan, p)
                row.append(avg_read_ber(g, plan, p))
            row.append(starts)
            table.append(row)
    em.csv("threshold_sweep.csv", ["r_line", "size"] + [k.replace("-", "_") for k in KINDS]
           + ["stmc_exact_start"], table)
    g, plan, p = last
    em.heatmap("read_ber_stmc_exact", channel_map(g, p, plan).read_ber, "read_ber")
    summary = {"rows": len(table),
               "dtec_spread": float(np.ptp([t[3] for t in table])),
               "stmc_exact_le_naive": bool(all(t[5] <= t[2] for t in table))}
    em.json("summary.json", summary)
    return summary


def cmd_code_sim(args, em: Emitter) -> dict:
    rows, best_red = [], -math.inf
    g = ArrayGeometry(args.n if args.rows is None else args.rows, args.n)
    for ri, r in enumerate(args.r_line):
        p = _params(args, r)
        plan, _ = _plan("stmc-exact", g, p)
        cm = channel_map(g, p, plan)
        for ti, t in enumerate(args.ts):
            (code,) = code_family(args.n, [t])
            stream = args.seed * 1_000_003 + ri * 1009 + ti * 31
            res = {}
            for si, scheme in enumerate(("wordline", "diagonal")):
                res[scheme] = simulate_codes(cm, code, scheme=scheme, seed=stream + si,
                                             min_events=args.min_events,
                                             max_frames=args.max_frames, label=scheme)
            for s in res.values():
                rows.append(_sim_row(r, code.label(), s))
            w, d = res["wordline"].uber, res["diagonal"].uber
            if w > 0:
                best_red = max(best_red, 1 - d / w)
        if args.ldca_ts:
            codes = code_family(args.n, args.ldca_ts)
            goal = code_family(args.n, [args.goal_t])[0]
            cost = build_cost_matrix(g, p, codes, goal.rate, plan)
            sol = ldca_solve_regularized(cost)
            s = simulate_codes(cm, codes, choice=sol.choice, seed=args.seed * 1_000_003 + ri * 1009 + 7,
                               min_events=args.min_events, max_frames=args.max_frames, label="ldca")
            rows.append(_sim_row(r, "+".join(c.label() for c in codes), s))
        rows.append((r, "rber_spread", "wordline", 0, 0, 0, rber_spread(cm, "wordline"), 0.0, 0.0, 0.0, 0.0, 0))
        rows.append((r, "rber_spread", "diagonal", 0, 0, 0, rber_spread(cm, "diagonal"), 0.0, 0.0, 0.0, 0.0, 0))
    em.csv("code_sim.csv", ["r_line", "code", "scheme", "frames", "bit_errors", "frame_errors",
                            "uber", "uber_se", "ci_lo", "ci_hi", "fer", "capped"], rows)
    summary = {"max_interleaving_reduction": best_red if best_red > -math.inf else None,
               "points": len(rows)}
    em.json("summary.json", summary)
    return summary


def _sim_row(r, label, s):
    lo, hi = s.ci()
    return (r, label, s.scheme, s.frames, s.bit_errors, s.frame_errors, float(s.uber),
            float(s.uber_se), float(lo), float(hi), float(s.fer), int(s.capped))


def cmd_ldca(args, em: Emitter) -> dict:
    codes = code_family(args.n, args.ts)
    goal = code_family(args.n, [args.goal_t])[0]
    g = ArrayGeometry(args.n if args.rows is None else args.rows, args.n)
    c_dec = np.zeros(len(codes)) if args.c_dec is None else np.asarray(args.c_dec, dtype=float)
    if c_dec.shape != (len(codes),):
        raise CliError(f"--c-dec needs {len(codes)} weights")
    summary = {"codes": [c.label() for c in codes], "goal_rate": goal.rate, "runs": []}
    for r in args.r_line:
        p = _params(args, r)
        plan, _ = _plan("stmc-exact", g, p)
        cost = build_cost_matrix(g, p, codes, goal.rate, plan)
        sol = ldca_solve_regularized(cost, c_dec=c_dec, r_tol=args.r_tol, max_iter=args.max_iter)
        tag = f"r{r:g}"
        em.text(f"allocation_{tag}.csv", allocation_csv(sol.allocation, codes))
        em.text(f"weights_relaxed_{tag}.csv", weights_csv(sol.relaxed, codes))
        em.text(f"weights_rounded_{tag}.csv", weights_csv(sol.allocation, codes))
        em.text(f"cost_{tag}.csv", cost_csv(cost))
        summary["runs"].append({
            "r_line": r, "rate": sol.rate, "iterations": sol.iterations,
            "converged": sol.converged, "objective": sol.objective, "lambda": sol.lam,
            "counts": np.bincount(sol.choice, minlength=len(codes)).tolist()})
    em.json("summary.json", summary)
    return summary


# -- entry point --------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="xbarmem", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--params", help="device parameter YAML (default: built-in table)")
    common.add_argument("--seed", type=int, default=0, help="RNG seed (u64)")
    common.add_argument("--out", default="out", help="output directory")
    common.add_argument("--force", action="store_true", help="overwrite existing artifacts")
    sub = ap.add_subparsers(dest="command", required=True)

    s = sub.add_parser("channel-map", parents=[common], help="per-cell BER heatmaps")
    s.add_argument("--rows", type=int, default=1024)
    s.add_argument("--cols", type=int, default=1024)
    s.add_argument("--r-line", type=float, default=10.0)
    s.add_argument("--threshold", choices=("raw",) + KINDS, default="raw")
    s.set_defaults(func=cmd_channel_map)

    s = sub.add_parser("capacity", parents=[common], help="averaged capacity")
    s.add_argument("--preset", choices=("table2", "sweep"), default="sweep")
    s.add_argument("--rows", type=int, default=256)
    s.add_argument("--cols", type=int, default=256)
    s.add_argument("--r-line", type=_floats, default=[10.0, 20.0, 30.0, 40.0, 50.0, 60.0, 70.0,
                                                     80.0, 90.0, 100.0])
    s.set_defaults(func=cmd_capacity)

    s = sub.add_parser("threshold", parents=[common], help="read-threshold scheme comparison")
    s.add_argument("--r-line", type=_floats, default=[30.0])
    s.add_argument("--sizes", type=_ints, default=[128, 256, 512, 1024, 2048])
    s.set_defaults(func=cmd_threshold)

    s = sub.add_parser("code-sim", parents=[common], help="Monte Carlo UBER of coding schemes")
    s.add_argument("--n", type=int, default=128)
    s.add_argument("--rows", type=int, default=None, help="wordlines (default n)")
    s.add_argument("--ts", type=_ints, default=[2, 3, 4])
    s.add_argument("--r-line", type=_floats, default=[30.0, 50.0, 70.0])
    s.add_argument("--ldca-ts", type=_ints, default=[3, 4, 5])
    s.add_argument("--goal-t", type=int, default=4)
    s.add_argument("--min-events", type=int, default=DEFAULT_MIN_EVENTS)
    s.add_argument("--max-frames", type=int, default=DEFAULT_MAX_FRAMES)
    s.set_defaults(func=cmd_code_sim)

    s = sub.add_parser("ldca", parents=[common], help="location-dependent code allocation")
    s.add_argument("--n", type=int, default=128)
    s.add_argument("--rows", type=int, default=None, help="wordlines (default n)")
    s.add_argument("--ts", type=_ints, default=[3, 4, 5])
    s.add_argument("--goal-t", type=int, default=4)
    s.add_argument("--r-line", type=_floats, default=[10.0, 50.0, 100.0])
    s.add_argument("--c-dec", type=_floats, default=None, help="per-code regularizer weights")
    s.add_argument("--r-tol", type=float, default=1e-3)
    s.add_argument("--max-iter", type=int, default=20)
    s.set_defaults(func=cmd_ldca)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.seed < 0 or args.seed >= 1 << 64:
            raise CliError("--seed must be an unsigned 64-bit integer")
        p = _params(args)
        em = Emitter(Path(args.out), args.force, _spec_hash(args, p), args.seed)
        summary = args.func(args, em)
        written = em.flush()
    except Exception as exc:  # reported as JSON for callers
        err = {"error": type(exc).__name__, "message": str(exc), "command": args.command}
        print(json.dumps(err, sort_keys=True), file=sys.stderr)
        return 1
    print(json.dumps({"command": args.command, "out": str(args.out), "files": written,
                      "summary": summary}, sort_keys=True, default=str))
    return 0


if __name__ == "__main__":
    sys.exit(main())
