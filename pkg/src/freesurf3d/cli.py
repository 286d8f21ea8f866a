"""Command-line entry point.

    freesurf3d run <config.ini>
    freesurf3d validate standing-wave [--scale full|half]
    freesurf3d validate wind-driven [--scale full|desk]
    freesurf3d bench scaling --layers 10,20,40,80 --coupling recursive|direct

Exit codes: 0 success, 1 configuration error, 2 numerical failure,
3 validation tolerance not met.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .analytic import StandingWaveParams
from .bench import scaling_benchmark
from .cases import (
    STANDING_WAVE_SCALES,
    WIND_SCALES,
    run_standing_wave,
    run_wind_driven,
    standing_wave_case,
    standing_wave_initial,
    wind_driven_case,
)
from .config import ConfigError, RunConfig, load_config
from .coupling import SingularPivotError
from .grid import DriedLayerError, GridError, State, build_grid
from .output import SeriesWriter, SnapshotError, read_snapshot, write_benchmark_csv, write_snapshot
from .stepper import step
from .surface import ConvergenceError, SurfaceSystemError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_VALIDATION = 0, 1, 2, 3

NUMERICAL_ERRORS = (DriedLayerError, ConvergenceError, SingularPivotError,
                    SurfaceSystemError, FloatingPointError)


def initial_state(rc: RunConfig, grid) -> State:
    nu0 = rc.params.nu_z if rc.params.viscosity == "constant" else rc.params.nu_min
    kind = rc.initial.type
    if kind == "rest":
        return State.rest(grid, nu0)
    if kind == "standing-wave":
        depth = float(grid.h.max())
        wave = StandingWaveParams(A=rc.initial.amplitude, Lx=grid.ni * grid.dx,
                                  Ly=grid.nj * grid.dy, h=depth, g=grid.g)
        state = standing_wave_initial(grid, wave)
        state.nu_z[:] = nu0
        return state
    return read_snapshot(rc.initial.path).to_state(grid)


def execute_run(rc: RunConfig, log=print):
    """Integrate a configured run, writing the time series and snapshots."""
    try:
        grid = build_grid(rc.grid)
    except GridError as exc:
        raise ConfigError(str(exc)) from None
    try:
        state = initial_state(rc, grid)
    except (OSError, SnapshotError) as exc:
        raise ConfigError(f"initial state: {exc}") from None
    out = rc.output
    out.directory.mkdir(parents=True, exist_ok=True)
    nsteps = rc.step.nsteps
    with SeriesWriter(out.directory / out.series, out.probes) as series:
        series.write(state, grid, 0)
        for n in range(1, nsteps + 1):
            state, info = step(state, grid, rc.params, rc.step)
            if n % out.every == 0 or n == nsteps:
                series.write(state, grid, info.cg_iterations)
            if out.snapshot_every and n % out.snapshot_every == 0:
                write_snapshot(out.directory / f"snapshot_{n:07d}.txt", grid, state)
    final = write_snapshot(out.directory / "snapshot_final.txt", grid, state)
    log(f"completed {nsteps} steps to t={state.t:.6g} s; wrote {final}")
    return state


def _cmd_run(args):
    rc = load_config(args.config)
    execute_run(rc)
    return EXIT_OK


def _cmd_validate(args):
    if args.case == "standing-wave":
        case, wave = standing_wave_case(args.scale, periods=args.periods)
        res = run_standing_wave(case, wave)
        print(f"standing wave ({args.scale}): t={res.state.t:.4g} s "
              f"L2_rel={res.l2_rel:.4f} amplitude={res.amplitude_ratio:.4f} "
              f"drift={res.monitor.cumulative_drift:.2e}")
    else:
        case, wind = wind_driven_case(args.scale)
        res = run_wind_driven(case, wind, max_steps=args.max_steps)
        print(f"wind-driven ({args.scale}): steps={res.steps} converged={res.converged} "
              f"profile_L2_rel={res.profile_l2_rel:.4f} slope={res.slope:.4e} "
              f"(analytic {res.analytic_slope:.4e}, rel err {res.slope_rel_error:.4f})")
    print("PASS" if res.passed else "FAIL")
    return EXIT_OK if res.passed else EXIT_VALIDATION


def _cmd_bench(args):
    try:
        layers = [int(s) for s in args.layers.split(",") if s.strip()]
    except ValueError:
        raise ConfigError(f"--layers {args.layers!r} must be comma-separated integers") from None
    if not layers or min(layers) < 1:
        raise ConfigError("--layers needs at least one positive layer count")
    try:
        table = scaling_benchmark(layers, args.coupling, cells=args.cells, steps=args.steps)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    if args.out:
        write_benchmark_csv(args.out, table)
    sys.stdout.write(table.to_csv())
    slope = table.slope
    print("slope: " + ("n/a (single layer count)" if slope is None else f"{slope:.3f}"))
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(prog="freesurf3d",
                                     description="3D hydrostatic semi-implicit free-surface model")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="integrate a configured run")
    run.add_argument("config", type=Path)
    run.set_defaults(func=_cmd_run)

    val = sub.add_parser("validate", help="run an analytic validation case")
    vsub = val.add_subparsers(dest="case", required=True)
    sw = vsub.add_parser("standing-wave")
    sw.add_argument("--scale", choices=sorted(STANDING_WAVE_SCALES), default="full")
    sw.add_argument("--periods", type=float, default=6.0)
    wd = vsub.add_parser("wind-driven")
    wd.add_argument("--scale", choices=sorted(WIND_SCALES), default="desk")
    wd.add_argument("--max-steps", type=int, default=200_000)
    val.set_defaults(func=_cmd_validate)

    bench = sub.add_parser("bench", help="performance benchmarks")
    bsub = bench.add_subparsers(dest="bench", required=True)
    sc = bsub.add_parser("scaling")
    sc.add_argument("--layers", default="10,20,40,80")
    sc.add_argument("--coupling", choices=("recursive", "direct"), default="recursive")
    sc.add_argument("--cells", type=int, default=50)
    sc.add_argument("--steps", type=int, default=10)
    sc.add_argument("--out", type=Path)
    bench.set_defaults(func=_cmd_bench)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NUMERICAL_ERRORS as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
