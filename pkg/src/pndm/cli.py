"""Command-line entry point: ``pndm {sample,converge,probe,stats}``.

Exit codes: 0 success, 2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

from . import __version__
from .analysis import (
    SLOPE_WINDOWS,
    Problem,
    estimate_order,
    normal_data,
    point_data,
    probe,
    probe_grid,
    reference_solution,
    trajectory_stats,
    uniform_data,
)
from .config import RunConfig, load_config
from .errors import ArgumentError, ConfigError, NumericalError
from .io import header_lines, write_csv, write_eps_log, write_trajectory
from .predictor import ExactOracle
from .solvers import sample

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL = 0, 2, 3


def _out_dir(args, cfg: RunConfig) -> Path:
    return Path(args.out) if args.out else Path(cfg["output.dir"])


def _problem(cfg: RunConfig) -> Problem:
    schedule = cfg.schedule()
    predictor = cfg.predictor(schedule)
    t_start = cfg["grid.t_start"]
    return Problem(schedule, predictor, cfg.x_init(schedule, predictor, t_start), t_start, cfg["grid.t_end"])


def _start(cfg: RunConfig, spec):
    return cfg.x_init(spec.schedule, spec.predictor, spec.grid[0])


def cmd_sample(args, cfg: RunConfig) -> int:
    spec = cfg.sampler_spec()
    x_init = _start(cfg, spec)
    tic = time.perf_counter()
    traj = sample(spec, x_init)
    wall = time.perf_counter() - tic
    out = _out_dir(args, cfg)
    header = header_lines("sample", cfg.echo())
    write_trajectory(out / "trajectory.csv", traj, header)
    if args.emit_eps:
        write_eps_log(out / "eps.csv", traj, header)
    manifest = [
        *header,
        f"method={spec.method}",
        f"steps={spec.steps}",
        f"states={len(traj)}",
        f"predictor_eval_count={traj.predictor_eval_count}",
        f"final_t={traj.states[-1][0]!r}",
        f"wall_time_s={wall:.6f}",
    ]
    (out / "manifest.txt").write_text("\n".join(manifest) + "\n")
    print(f"{spec.method}: {spec.steps} steps, {traj.predictor_eval_count} evaluations -> {out / 'trajectory.csv'}")
    return EXIT_OK


def cmd_converge(args, cfg: RunConfig) -> int:
    problem = _problem(cfg)
    steps = cfg["converge.steps"]
    methods = cfg["converge.methods"]
    if len(steps) < 4:
        raise ConfigError("converge.steps needs at least 4 entries")
    unknown = [m for m in methods if m not in SLOPE_WINDOWS]
    if unknown:
        raise ConfigError(f"unknown method(s) in converge.methods: {unknown}")
    ref_steps = cfg["converge.ref_factor"] * max(steps)
    reference = reference_solution(problem, ref_steps, "FON-RK4")
    deltas = [problem.span / s for s in steps]
    rows, lines = [], []
    for method in methods:
        report = estimate_order(method, deltas, problem, reference)
        rows += [[method, d, e, report.slope] for d, e in report.points]
        lo, hi = SLOPE_WINDOWS[method]
        status = "PASS" if report.in_window() else "FAIL"
        lines.append(
            f"{method}: slope={report.slope:.4f} window=[{lo}, {hi}] {status} excluded={report.excluded}"
        )
    out = _out_dir(args, cfg)
    header = header_lines("converge", cfg.echo()) + [f"# reference=FON-RK4 S={ref_steps}"]
    write_csv(out / "order_report.csv", ["method", "delta", "error", "slope"], rows, header)
    print("\n".join(lines))
    return EXIT_OK


def cmd_probe(args, cfg: RunConfig) -> int:
    schedule = cfg.schedule()
    ts = probe_grid(cfg["probe.t_min"], cfg["probe.t_max"], cfg["probe.points"])
    result = probe(schedule, ts)
    out = _out_dir(args, cfg)
    summary = f"slope={result.slope:.4f} bounded={result.bounded}"
    header = header_lines("probe", cfg.echo()) + [f"# {summary}"]
    write_csv(out / "singularity.csv", ["t", "magnitude"], result.points, header)
    print(f"{schedule.kind}: {summary}")
    return EXIT_OK


def cmd_stats(args, cfg: RunConfig) -> int:
    spec = cfg.sampler_spec()
    traj = sample(spec, _start(cfg, spec))
    dim = traj.final.size
    data = cfg["stats.data"]
    if data == "oracle":
        if not isinstance(spec.predictor, ExactOracle):
            raise ConfigError("stats.data=oracle needs predictor.kind=exact-oracle")
        sampler = point_data(spec.predictor.x0)
    else:
        sampler = uniform_data(dim) if data == "uniform" else normal_data(dim)
    stats = trajectory_stats(
        traj, spec.schedule, sampler, cfg["stats.n_samples"], cfg["stats.i"], cfg["stats.j"], spec.seed
    )
    out = _out_dir(args, cfg)
    header = header_lines("stats", cfg.echo())
    b = stats.band
    write_csv(
        out / "norm_band.csv",
        ["t", "q05", "q50", "q95", "sample_norm"],
        zip(b.t, b.q05, b.q50, b.q95, stats.norms),
        header,
    )
    write_csv(
        out / "pixel_pair.csv",
        ["step", "yi", "yj"],
        ([k, yi, yj] for k, (yi, yj) in enumerate(stats.pixels)),
        header,
    )
    print(f"{spec.method}: wrote {len(b.t)} band rows and {len(stats.pixels)} pixel rows to {out}")
    return EXIT_OK


COMMANDS = {"sample": cmd_sample, "converge": cmd_converge, "probe": cmd_probe, "stats": cmd_stats}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pndm", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"pndm {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        p = sub.add_parser(name, help=fn.__name__.replace("cmd_", "run "))
        p.add_argument("--config", help="key=value configuration file")
        p.add_argument("--out", help="output directory (overrides output.dir)")
        p.add_argument("--emit-eps", action="store_true", help="also write every predictor evaluation")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        return COMMANDS[args.command](args, cfg)
    except ArgumentError as exc:
        print(f"pndm: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"pndm: numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
