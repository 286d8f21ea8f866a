"""Acceptance criteria, each run at its stated tolerance.

Every test records one PASS/FAIL line (shown in the terminal summary under
"acceptance criteria").  The expensive model runs are cached per session so the
conservation and structure criteria reuse them instead of integrating again.
"""

import time
from functools import lru_cache

import numpy as np
import pytest

from freesurf3d.bench import fit_ok, scaling_benchmark
from freesurf3d.cases import (
    lake_at_rest_case,
    run_lake_at_rest,
    run_standing_wave,
    run_wind_driven,
    standing_wave_case,
    wind_driven_case,
)
from freesurf3d.coupling import couple_columns, direct_column_solve, recover_velocity
from freesurf3d.surface import cg_solve

from oracles import rel_err, random_column
from test_surface import random_assembled_system


def timed(fn, *args, **kwargs):
    t0 = time.perf_counter()
    out = fn(*args, **kwargs)
    return out, time.perf_counter() - t0


@lru_cache(maxsize=None)
def lake_run():
    return timed(run_lake_at_rest, lake_at_rest_case(check_system=True), nsteps=1000)


@lru_cache(maxsize=None)
def standing_run(scale):
    case, wave = standing_wave_case(scale, check_system=True)
    return timed(run_standing_wave, case, wave)


@lru_cache(maxsize=None)
def wind_run(scale):
    case, params = wind_driven_case(scale, check_system=True)
    return timed(run_wind_driven, case, params)


def closed_basin_runs():
    runs = {"lake at rest": lake_run()[0]}
    for scale in ("full", "half"):
        runs[f"standing wave ({scale})"] = standing_run(scale)[0]
    for scale in ("full", "desk"):
        runs[f"wind-driven ({scale})"] = wind_run(scale)[0]
    return runs


class TestAcceptance:
    def test_1_lemma_equivalence(self, report):
        rng = np.random.default_rng(20240601)
        t0 = time.perf_counter()
        worst, n = 0.0, 1200
        for _ in range(n):
            sys = random_column(rng)
            dzeta = float(rng.normal(0.0, 0.5))
            coef = couple_columns(sys)
            u = recover_velocity(coef.omega1, coef.omega2, dzeta)
            worst = max(worst, rel_err(u, direct_column_solve(sys, dzeta)))
        secs = time.perf_counter() - t0
        ok = worst <= 1e-12 and secs < 10.0
        report(1, ok, f"{n} random columns, max rel err {worst:.2e} (<= 1e-12), {secs:.2f} s (< 10 s)")
        assert ok

    def test_2_lake_at_rest(self, report):
        res, secs = lake_run()
        ok = res.max_zeta <= 1e-13 and res.max_velocity <= 1e-13 and secs < 30.0
        report(2, ok, f"1000 steps, max|zeta| {res.max_zeta:.1e} m, max|u,v,w| "
                      f"{res.max_velocity:.1e} m/s (<= 1e-13), {secs:.1f} s (< 30 s)")
        assert ok

    @pytest.mark.parametrize("scale", ["full", "half"])
    def test_3_standing_wave(self, scale, report):
        res, secs = standing_run(scale)
        ok = res.l2_rel <= 0.10 and res.amplitude_ratio >= 0.90
        report(3, ok, f"standing wave ({scale}) at t={res.state.t:.1f} s: L2_rel {res.l2_rel:.4f} "
                      f"(<= 0.10), amplitude {res.amplitude_ratio:.4f} A (>= 0.90), {secs:.0f} s")
        assert ok

    @pytest.mark.parametrize("scale", ["full", "desk"])
    def test_4_wind_driven(self, scale, report):
        res, secs = wind_run(scale)
        ok = res.converged and res.profile_l2_rel <= 0.05 and res.slope_rel_error <= 0.05
        report(4, ok, f"wind-driven ({scale}) steady after {res.steps} steps: profile L2_rel "
                      f"{res.profile_l2_rel:.4f} (<= 0.05), slope {res.slope:.4e} vs "
                      f"{res.analytic_slope:.4e} rel err {res.slope_rel_error:.4f} (<= 0.05), {secs:.0f} s")
        assert ok

    @pytest.mark.parametrize("coupling,lo,hi", [("recursive", 0.8, 1.2), ("direct", 1.8, None)])
    def test_5_scaling(self, coupling, lo, hi, report):
        table = scaling_benchmark([10, 20, 40, 80, 160], coupling, cells=50, steps=10)
        ok = fit_ok(table.slope, lo, hi)
        bound = f"in [{lo}, {hi}]" if hi is not None else f">= {lo}"
        times = ", ".join(f"{r.nk}:{r.coupling_time_s * 1e3:.1f}ms" for r in table.rows)
        report(5, ok, f"{coupling} coupling log-log slope {table.slope:.3f} ({bound}); {times}")
        assert ok

    def test_6_conservation(self, report):
        runs = closed_basin_runs()
        step_ok = all(r.monitor.step_drift <= 1e-12 for r in runs.values())
        cumulative = runs["standing wave (full)"].monitor.cumulative_drift
        ok = step_ok and cumulative <= 1e-9
        drifts = ", ".join(f"{k} {r.monitor.step_drift:.1e}" for k, r in runs.items())
        report(6, ok, f"max per-step drift: {drifts} (<= 1e-12); full standing-wave "
                      f"cumulative {cumulative:.1e} (<= 1e-9)")
        assert ok

    def test_7_surface_structure(self, report):
        # every step of these runs was assembled with the structure check on,
        # so a violation would have raised before the run completed
        monitors = [r.monitor for r in closed_basin_runs().values()]
        steps = sum(m.steps for m in monitors)
        worst = max(m.cg_residual_max for m in monitors)
        ok = worst <= 1e-10
        report(7, ok, f"{steps} checked systems (symmetry <= 1e-13, off-diagonals <= 0, diagonal "
                      f"dominance); max CG residual {worst:.1e} (<= 1e-10)")
        assert ok

    def test_8_cg_cross_check(self, report):
        rng = np.random.default_rng(77)
        worst, n = 0.0, 120
        for _ in range(n):
            sys = random_assembled_system(rng, max_cells=16)
            x = cg_solve(sys, tol=1e-12).x
            ref = np.linalg.solve(sys.to_dense(), sys.rhs.ravel()).reshape(sys.shape)
            worst = max(worst, float(np.linalg.norm(x - ref) / np.linalg.norm(ref)))
        ok = worst <= 1e-10
        report(8, ok, f"{n} random assembled systems <= 16x16, max rel diff to dense solve "
                      f"{worst:.1e} (<= 1e-10)")
        assert ok
