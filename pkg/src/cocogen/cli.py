"""Command-line entry point: fit, solve, sweep, and compare.

Exit codes: 0 success, 2 unusable input, 3 degenerate or infeasible curve
fit, 4 solver non-convergence (suppressed by ``--allow-nonconverged``).
All numeric CSV fields carry 17 significant digits; result CSVs are plain
RFC 4180 bodies with the run manifest in a JSON sidecar next to them.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import math
import os
import statistics
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from datetime import datetime, timezone

import numpy as np

from . import __version__, baselines, economics, scaling, solver
from .errors import (
    CocogenError,
    DegenerateFit,
    InsufficientPoints,
    NonPositiveShifted,
)
from .model import PayoffMode, load_scenario, with_payoff_mode
from .scenario import (
    PRNG_ID,
    SweepGrid,
    SweepJob,
    expand_sweep,
    load_sweep,
    sample_scenario,
)

__all__ = ["main"]

logger = logging.getLogger("cocogen")

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_FIT = 3
EXIT_NONCONVERGED = 4

SCHEMES = ("CoCoGen", "VCFL", "WCO", "RaDG")

SWEEP_COLUMNS = (
    "gamma_level",
    "alpha_d",
    "repetition",
    "scheme",
    "welfare",
    "mean_d_gen",
    "ir_all",
    "bb_sum",
    "converged",
    "realized_gamma_bar",
    "status",
)


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


@dataclass(frozen=True)
class RunManifest:
    command: str
    config_paths: tuple[str, ...]
    seed: int | None
    tool_version: str
    prng_id: str
    started: str
    finished: str

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "config_paths": list(self.config_paths),
            "seed": self.seed,
            "tool_version": self.tool_version,
            "prng_id": self.prng_id,
            "started": self.started,
            "finished": self.finished,
        }


class _ManifestClock:
    def __init__(self, command: str, config_paths, seed=None):
        self.command = command
        self.config_paths = tuple(str(p) for p in config_paths)
        self.seed = seed
        self.started = datetime.now(timezone.utc).isoformat()

    def finish(self) -> RunManifest:
        return RunManifest(
            command=self.command,
            config_paths=self.config_paths,
            seed=self.seed,
            tool_version=__version__,
            prng_id=PRNG_ID,
            started=self.started,
            finished=datetime.now(timezone.utc).isoformat(),
        )


def _write_json(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def _solver_config_from_args(args) -> solver.SolverConfig:
    return solver.SolverConfig(
        tol=args.tol,
        max_iters=args.max_iters,
        damping=args.damping,
        init={"min": "all_min", "max": "all_max", "midpoint": "midpoint"}[args.init],
        case_mode=args.case_mode,
    )


def _load_scenario_for_args(args):
    s = load_scenario(args.scenario)
    if args.payoff_mode is not None:
        s = with_payoff_mode(s, PayoffMode(args.payoff_mode))
    if args.seed is not None:
        s = type(s)(
            orgs=s.orgs, market=s.market, economy=s.economy, bounds=s.bounds, seed=args.seed
        )
    return s


# ---------------------------------------------------------------------------
# fit
# ---------------------------------------------------------------------------


def cmd_fit(args) -> int:
    clock = _ManifestClock("fit", [args.curve], seed=None)
    try:
        points = scaling.read_curve_csv(args.curve)
    except (OSError, ValueError, CocogenError) as exc:
        print(f"error: cannot read curve file: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        result = scaling.fit_scaling_law(points)
    except (InsufficientPoints, DegenerateFit, NonPositiveShifted) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FIT
    payload = result.to_dict()
    payload["manifest"] = clock.finish().to_dict()
    _write_json(args.out, payload)
    print(
        f"fitted alpha={result.law.alpha:.6g} beta={result.law.beta:.6g} "
        f"delta={result.law.delta:.6g} rmse={result.rmse:.3e}"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# solve
# ---------------------------------------------------------------------------


def cmd_solve(args) -> int:
    clock = _ManifestClock("solve", [args.scenario], seed=args.seed)
    try:
        s = _load_scenario_for_args(args)
    except (OSError, ValueError, KeyError, CocogenError) as exc:
        print(f"error: invalid scenario: {exc}", file=sys.stderr)
        return EXIT_INPUT
    report = solver.fpi_solve(s, _solver_config_from_args(args))
    if args.verify_ne:
        cert = solver.verify_ne(s, report.profile)
        report = replace(report, ne_certificate=cert)
    payload = {"manifest": clock.finish().to_dict(), **report.to_dict()}
    if args.out:
        _write_json(args.out, payload)
    else:
        json.dump(payload, sys.stdout, indent=2)
        print()
    if args.trace:
        with open(args.trace, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "F"])
            for i, f_val in enumerate(report.potential_trace):
                writer.writerow([i, _fmt(f_val)])
    if not report.converged and not args.allow_nonconverged:
        print(
            f"error: not converged after {report.iterations} iterations",
            file=sys.stderr,
        )
        return EXIT_NONCONVERGED
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


def _realized_gamma_bar(gamma: np.ndarray) -> float:
    n = gamma.shape[0]
    if n < 2:
        return 0.0
    off = np.asarray(gamma).sum() / (n * (n - 1))
    return float(off)


def _radg_rows_stats(s, seed: int, count: int):
    rng_profiles = baselines.radg_profiles(s, seed, count)
    welfares, means, bb_sums = [], [], []
    ir_all = True
    for prof in rng_profiles:
        ev = economics.evaluate_profile(s, prof)
        welfares.append(ev.welfare)
        means.append(float(np.mean(prof.d_gen)))
        bb_sums.append(ev.bb_sum)
        ir_all = ir_all and all(ev.ir)
    return (
        float(np.mean(welfares)),
        float(np.mean(means)),
        ir_all,
        float(np.mean(bb_sums)),
    )


def run_sweep_job(grid: SweepGrid, job: SweepJob, cfg: solver.SolverConfig) -> list[dict]:
    """All four scheme rows for one job; failures land in the status column."""
    base = {
        "gamma_level": job.gamma_index,
        "alpha_d": job.cell.alpha_d,
        "repetition": job.repetition,
    }
    try:
        s = sample_scenario(grid, job.cell, job.seed)
    except CocogenError as exc:
        return [
            {**base, "scheme": scheme, "welfare": math.nan, "mean_d_gen": math.nan,
             "ir_all": False, "bb_sum": math.nan, "converged": False,
             "realized_gamma_bar": math.nan, "status": f"error:{type(exc).__name__}"}
            for scheme in SCHEMES
        ]
    gbar = _realized_gamma_bar(s.market.gamma)
    rows = []

    def row(scheme, welfare, mean_d, ir_all, bb_sum, converged, status="ok"):
        rows.append(
            {**base, "scheme": scheme, "welfare": welfare, "mean_d_gen": mean_d,
             "ir_all": ir_all, "bb_sum": bb_sum, "converged": converged,
             "realized_gamma_bar": gbar, "status": status}
        )

    try:
        rep = solver.fpi_solve(s, cfg)
        row("CoCoGen", rep.welfare, float(np.mean(rep.profile.d_gen)),
            all(rep.ir), rep.bb["sum"], rep.converged)
    except CocogenError as exc:
        row("CoCoGen", math.nan, math.nan, False, math.nan, False,
            f"error:{type(exc).__name__}")

    prof = baselines.vcfl_profile(s)
    ev = economics.evaluate_profile(s, prof)
    row("VCFL", ev.welfare, float(np.mean(prof.d_gen)), all(ev.ir), ev.bb_sum, True)

    try:
        wco = baselines.wco_solve(s, cfg)
        row("WCO", wco.welfare_original, float(np.mean(wco.profile.d_gen)),
            all(wco.evaluation_original.ir), wco.evaluation_original.bb_sum,
            wco.clone_report.converged)
    except CocogenError as exc:
        row("WCO", math.nan, math.nan, False, math.nan, False,
            f"error:{type(exc).__name__}")

    welfare, mean_d, ir_all, bb_sum = _radg_rows_stats(s, job.seed, grid.radg_repetitions)
    row("RaDG", welfare, mean_d, ir_all, bb_sum, True)
    return rows


def _job_worker(payload):
    grid, job, cfg = payload
    return run_sweep_job(grid, job, cfg)


def _write_rows_csv(path, columns, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for r in rows:
            writer.writerow([_fmt(r[c]) for c in columns])


def _aggregate(rows):
    """Per-cell, per-scheme mean and sample standard deviation."""
    groups: dict[tuple, dict[str, list[float]]] = {}
    for r in rows:
        if r["status"] != "ok":
            continue
        key = (r["gamma_level"], r["alpha_d"], r["scheme"])
        g = groups.setdefault(key, {"welfare": [], "mean_d_gen": []})
        g["welfare"].append(r["welfare"])
        g["mean_d_gen"].append(r["mean_d_gen"])
    out = []
    for (gl, ad, scheme), vals in sorted(groups.items()):
        w = vals["welfare"]
        m = vals["mean_d_gen"]
        out.append(
            {
                "gamma_level": gl,
                "alpha_d": ad,
                "scheme": scheme,
                "n": len(w),
                "welfare_mean": statistics.fmean(w),
                "welfare_std": statistics.stdev(w) if len(w) > 1 else 0.0,
                "mean_d_gen_mean": statistics.fmean(m),
                "mean_d_gen_std": statistics.stdev(m) if len(m) > 1 else 0.0,
            }
        )
    return out


def run_sweep(grid: SweepGrid, cfg: solver.SolverConfig, jobs: int = 1):
    """Execute every sweep job; the row order is independent of scheduling."""
    job_list = expand_sweep(grid)
    payloads = [(grid, job, cfg) for job in job_list]
    all_rows = []
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for i, rows in enumerate(pool.map(_job_worker, payloads, chunksize=4)):
                logger.info("job %d/%d done", i + 1, len(job_list))
                all_rows.extend(rows)
    else:
        for i, payload in enumerate(payloads):
            all_rows.extend(_job_worker(payload))
            logger.info("job %d/%d done", i + 1, len(job_list))
    return all_rows


def cmd_sweep(args) -> int:
    clock = _ManifestClock("sweep", [args.sweep], seed=args.seed)
    try:
        grid = load_sweep(args.sweep)
        if args.seed is not None:
            grid = replace(grid, base_seed=args.seed)
    except (OSError, ValueError, KeyError, CocogenError) as exc:
        print(f"error: invalid sweep file: {exc}", file=sys.stderr)
        return EXIT_INPUT
    cfg = _solver_config_from_args(args)
    os.makedirs(args.out_dir, exist_ok=True)

    rows = run_sweep(grid, cfg, jobs=args.jobs)
    ok = sum(1 for r in rows if r["status"] == "ok")
    if ok == 0:
        print("error: every sweep job failed", file=sys.stderr)
        return 1

    results_path = os.path.join(args.out_dir, "results.csv")
    _write_rows_csv(results_path, SWEEP_COLUMNS, rows)

    agg = _aggregate(rows)
    agg_columns = (
        "gamma_level", "alpha_d", "scheme", "n",
        "welfare_mean", "welfare_std", "mean_d_gen_mean", "mean_d_gen_std",
    )
    _write_rows_csv(os.path.join(args.out_dir, "aggregate.csv"), agg_columns, agg)
    fig3 = [r for r in agg if r["scheme"] == "CoCoGen"]
    _write_rows_csv(os.path.join(args.out_dir, "fig3_cocogen.csv"), agg_columns, fig3)
    fig4_columns = ("gamma_level", "alpha_d", "scheme", "n", "welfare_mean", "welfare_std")
    _write_rows_csv(os.path.join(args.out_dir, "fig4_schemes.csv"), fig4_columns, agg)

    manifest = clock.finish().to_dict()
    for name in ("results.csv", "aggregate.csv", "fig3_cocogen.csv", "fig4_schemes.csv"):
        _write_json(
            os.path.join(args.out_dir, name + ".manifest.json"),
            {"manifest": manifest, "for_file": name},
        )
    print(f"wrote {len(rows)} rows ({ok} ok) to {results_path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# compare
# ---------------------------------------------------------------------------


def cmd_compare(args) -> int:
    clock = _ManifestClock("compare", [args.scenario], seed=args.seed)
    try:
        s = _load_scenario_for_args(args)
    except (OSError, ValueError, KeyError, CocogenError) as exc:
        print(f"error: invalid scenario: {exc}", file=sys.stderr)
        return EXIT_INPUT
    cfg = _solver_config_from_args(args)

    rows = []
    rep = solver.fpi_solve(s, cfg)
    rows.append(
        {"scheme": "CoCoGen", "welfare": rep.welfare,
         "mean_d_gen": float(np.mean(rep.profile.d_gen)), "ir_all": all(rep.ir),
         "bb_sum": rep.bb["sum"], "converged": rep.converged}
    )
    prof = baselines.vcfl_profile(s)
    ev = economics.evaluate_profile(s, prof)
    rows.append(
        {"scheme": "VCFL", "welfare": ev.welfare,
         "mean_d_gen": float(np.mean(prof.d_gen)), "ir_all": all(ev.ir),
         "bb_sum": ev.bb_sum, "converged": True}
    )
    wco = baselines.wco_solve(s, cfg)
    rows.append(
        {"scheme": "WCO", "welfare": wco.welfare_original,
         "mean_d_gen": float(np.mean(wco.profile.d_gen)),
         "ir_all": all(wco.evaluation_original.ir),
         "bb_sum": wco.evaluation_original.bb_sum,
         "converged": wco.clone_report.converged}
    )
    welfare, mean_d, ir_all, bb_sum = _radg_rows_stats(s, s.seed, args.radg_reps)
    rows.append(
        {"scheme": "RaDG", "welfare": welfare, "mean_d_gen": mean_d,
         "ir_all": ir_all, "bb_sum": bb_sum, "converged": True}
    )

    header = f"{'scheme':<8} {'welfare':>16} {'mean_d_gen':>12} {'ir_all':>7} {'bb_sum':>14} {'conv':>5}"
    print(header)
    print("-" * len(header))
    for r in rows:
        print(
            f"{r['scheme']:<8} {r['welfare']:>16.6f} {r['mean_d_gen']:>12.2f} "
            f"{str(r['ir_all']).lower():>7} {r['bb_sum']:>14.6g} "
            f"{str(r['converged']).lower():>5}"
        )
    print(f"(WCO welfare under its zero-competition clone: {wco.clone_report.welfare:.6f})")
    if args.out:
        columns = ("scheme", "welfare", "mean_d_gen", "ir_all", "bb_sum", "converged")
        _write_rows_csv(args.out, columns, rows)
        _write_json(args.out + ".manifest.json", {"manifest": clock.finish().to_dict()})
    if not rep.converged and not args.allow_nonconverged:
        return EXIT_NONCONVERGED
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--tol", type=float, default=1e-9, help="stop when |F_k - F_{k-1}| <= tol")
    p.add_argument("--max-iters", type=int, default=500)
    p.add_argument("--damping", type=float, default=0.5)
    p.add_argument("--init", choices=("min", "max", "midpoint"), default="min")
    p.add_argument("--case-mode", choices=("gradient", "printed"), default="gradient")
    p.add_argument("--payoff-mode", choices=("literal", "antisymmetric"), default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--allow-nonconverged", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cocogen",
        description="Coopetitive data-generation equilibria: fit, solve, sweep, compare.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_fit = sub.add_parser("fit", help="fit an error law to a learning-curve CSV")
    p_fit.add_argument("curve", help="CSV with header d,eps")
    p_fit.add_argument("-o", "--out", default="fit.json")
    p_fit.set_defaults(func=cmd_fit)

    p_solve = sub.add_parser("solve", help="solve one scenario to equilibrium")
    p_solve.add_argument("scenario")
    p_solve.add_argument("-o", "--out", default=None)
    p_solve.add_argument("--trace", default=None, help="write iteration,F CSV here")
    p_solve.add_argument("--verify-ne", action="store_true")
    _add_solver_flags(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_sweep = sub.add_parser("sweep", help="run the full scheme-comparison sweep")
    p_sweep.add_argument("sweep")
    p_sweep.add_argument("-o", "--out-dir", default="sweep-out")
    p_sweep.add_argument("--jobs", type=int, default=os.cpu_count() or 1)
    _add_solver_flags(p_sweep)
    p_sweep.set_defaults(func=cmd_sweep)

    p_cmp = sub.add_parser("compare", help="all four schemes on one scenario")
    p_cmp.add_argument("scenario")
    p_cmp.add_argument("-o", "--out", default=None)
    p_cmp.add_argument("--radg-reps", type=int, default=100)
    _add_solver_flags(p_cmp)
    p_cmp.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
