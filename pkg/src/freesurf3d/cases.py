"""Set-ups and drivers for the validation runs.

Each ``run_*`` function integrates a case, tracks conservation and CG
diagnostics on every step, and returns a result object with the metrics
the validation tolerances are checked against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .analytic import (
    StandingWaveParams,
    WindDrivenParams,
    error_norms,
    standing_wave_analytic,
    wind_driven_analytic,
)
from .explicit import ExplicitParams
from .grid import Grid, GridSpec, State, build_grid
from .stepper import StepConfig, step, total_volume


@dataclass
class Case:
    grid: Grid
    state: State
    params: ExplicitParams
    cfg: StepConfig


@dataclass
class Monitor:
    """Per-step conservation and solver bookkeeping."""

    v0: float
    volumes: list = field(default_factory=list)
    step_drift: float = 0.0
    cg_iterations: list = field(default_factory=list)
    cg_residual_max: float = 0.0
    steps: int = 0

    def record(self, state, grid, info):
        vol = total_volume(state, grid)
        prev = self.volumes[-1] if self.volumes else self.v0
        self.step_drift = max(self.step_drift, abs(vol - prev) / self.v0)
        self.volumes.append(vol)
        self.cg_iterations.append(info.cg_iterations)
        self.cg_residual_max = max(self.cg_residual_max, info.cg_residual)
        self.steps += 1

    @property
    def cumulative_drift(self):
        return abs(self.volumes[-1] - self.v0) / self.v0 if self.volumes else 0.0


def _run(case: Case, nsteps, stop=None, callback=None):
    state, grid = case.state, case.grid
    mon = Monitor(total_volume(state, grid))
    for n in range(1, nsteps + 1):
        prev = state
        state, info = step(state, grid, case.params, case.cfg)
        mon.record(state, grid, info)
        if callback is not None:
            callback(n, state, info)
        if stop is not None and stop(prev, state):
            break
    return state, mon


# -- standing wave -------------------------------------------------------------

STANDING_WAVE_SCALES = {
    # basin length, time step; both keep sigma*dt and dz identical
    "full": (500.0, 0.05),
    "half": (250.0, 0.025),
}

STANDING_WAVE_MAX_L2 = 0.10
STANDING_WAVE_MIN_AMPLITUDE = 0.90
WIND_MAX_PROFILE_L2 = 0.05
WIND_MAX_SLOPE_ERROR = 0.05


def standing_wave_case(scale="full", nk=None, dx=10.0, periods=6.0, amplitude=0.1,
                       depth=10.0, coupling="recursive", check_system=False,
                       advection=True) -> tuple[Case, StandingWaveParams]:
    L, dt = STANDING_WAVE_SCALES[scale]
    nk = int(round(depth / 1.0)) if nk is None else nk
    wave = StandingWaveParams(A=amplitude, Lx=L, Ly=L, h=depth)
    n = int(round(L / dx))
    grid = build_grid(GridSpec.uniform(n, n, nk, dx, dx, depth))
    state = standing_wave_initial(grid, wave)
    cfg = StepConfig(dt=dt, t_end=periods * wave.period, coupling=coupling,
                     check_system=check_system)
    return Case(grid, state, ExplicitParams(advection=advection), cfg), wave


def standing_wave_initial(grid: Grid, wave: StandingWaveParams) -> State:
    """Cosine surface at rest: the analytic solution at t = 0."""
    x, y = grid.cell_centers()
    state = State.rest(grid)
    state.zeta = standing_wave_analytic(wave, x[:, None], y[None, :], 0.0, 0.0)[0]
    return state


@dataclass
class StandingWaveResult:
    state: State
    monitor: Monitor
    l2_rel: float
    amplitude_ratio: float
    zeta_row: np.ndarray
    analytic_row: np.ndarray

    @property
    def passed(self):
        return (self.l2_rel <= STANDING_WAVE_MAX_L2
                and self.amplitude_ratio >= STANDING_WAVE_MIN_AMPLITUDE)


def run_standing_wave(case: Case, wave: StandingWaveParams, nsteps=None) -> StandingWaveResult:
    nsteps = case.cfg.nsteps if nsteps is None else nsteps
    state, mon = _run(case, nsteps)
    x, y = case.grid.cell_centers()
    ana = standing_wave_analytic(wave, x, y[0], 0.0, state.t)[0]
    row = state.zeta[:, 0]
    err = error_norms(row, ana)
    return StandingWaveResult(state, mon, err.l2_rel, float(np.max(np.abs(row)) / wave.A), row, ana)


# -- wind-driven circulation ---------------------------------------------------

WIND_SCALES = {"full": 2500.0, "desk": 500.0}


def wind_driven_case(scale="desk", dx=50.0, nk=20, dt=2.0, wind=None,
                     check_system=False) -> tuple[Case, WindDrivenParams]:
    wind = wind or WindDrivenParams()
    L = WIND_SCALES[scale]
    n = int(round(L / dx))
    grid = build_grid(GridSpec.uniform(n, n, nk, dx, dx, wind.H, g=wind.g))
    params = ExplicitParams(
        tau_wx=wind.tau_w / wind.rho, friction="linear", k_lin=wind.k_lin,
        viscosity="constant", nu_z=wind.nu_z, advection=False, nu_h=0.0,
    )
    cfg = StepConfig(dt=dt, t_end=dt, check_system=check_system)
    return Case(grid, State.rest(grid, wind.nu_z), params, cfg), wind


@dataclass
class WindDrivenResult:
    state: State
    monitor: Monitor
    converged: bool
    steps: int
    profile: np.ndarray
    analytic_profile: np.ndarray
    z: np.ndarray
    profile_l2_rel: float
    slope: float
    analytic_slope: float

    @property
    def slope_rel_error(self):
        return abs(self.slope - self.analytic_slope) / abs(self.analytic_slope)

    @property
    def passed(self):
        return (self.converged and self.profile_l2_rel <= WIND_MAX_PROFILE_L2
                and self.slope_rel_error <= WIND_MAX_SLOPE_ERROR)


def run_wind_driven(case: Case, wind: WindDrivenParams, steady_tol=1e-10,
                    max_steps=200_000) -> WindDrivenResult:
    """Integrate until ``max |dzeta/dt| < steady_tol`` or ``max_steps``."""
    dt = case.cfg.dt
    reached = []

    def steady(prev, new):
        if np.max(np.abs(new.zeta - prev.zeta)) / dt < steady_tol:
            reached.append(True)
        return bool(reached)

    state, mon = _run(case, max_steps, stop=steady)
    grid = case.grid
    converged = bool(reached)
    i = grid.ni // 2                      # x-face at mid-basin
    j0, j1 = (grid.nj - 1) // 2, grid.nj // 2
    profile = 0.5 * (state.u[:, i, j0] + state.u[:, i, j1])
    z = grid.layer_centers()
    ana, ana_slope = wind_driven_analytic(wind, z)
    slope = float(np.mean((state.zeta[i, j0:j1 + 1] - state.zeta[i - 1, j0:j1 + 1]) / grid.dx))
    return WindDrivenResult(
        state, mon, converged, mon.steps, profile, ana, z,
        error_norms(profile, ana).l2_rel, slope, ana_slope,
    )


# -- lake at rest --------------------------------------------------------------

def lake_at_rest_case(ni=12, nj=10, nk=6, dx=100.0, dz=2.0, seed=0,
                      check_system=True) -> Case:
    """Closed basin with a random stair-step bottom, no forcing, at rest."""
    rng = np.random.default_rng(seed)
    h = dz * rng.integers(1, nk + 1, size=(ni, nj)).astype(float)
    spec = GridSpec(ni, nj, nk, dx, dx, np.full(nk, dz), h, f=1e-4)
    grid = build_grid(spec)
    params = ExplicitParams(nu_h=1.0, viscosity="constant", nu_z=0.01,
                            friction="chezy", chezy=50.0)
    cfg = StepConfig(dt=10.0, t_end=10.0, check_system=check_system)
    return Case(grid, State.rest(grid, 0.01), params, cfg)


@dataclass
class LakeAtRestResult:
    state: State
    monitor: Monitor
    max_zeta: float
    max_velocity: float


def run_lake_at_rest(case: Case, nsteps=1000) -> LakeAtRestResult:
    """Maxima are taken over every step of the run, not just the last."""
    peaks = [0.0, 0.0]

    def track(n, state, info):
        peaks[0] = max(peaks[0], np.max(np.abs(state.zeta)))
        peaks[1] = max(peaks[1], np.max(np.abs(state.u)), np.max(np.abs(state.v)),
                       np.max(np.abs(state.w)))

    state, mon = _run(case, nsteps, callback=track)
    return LakeAtRestResult(state, mon, float(peaks[0]), float(peaks[1]))


def standing_wave_surface_w(grid: Grid, state: State, wave: StandingWaveParams):
    """Model and analytic surface vertical velocity at the current time."""
    x, y = grid.cell_centers()
    ana = standing_wave_analytic(wave, x[:, None], y[None, :], 0.0, state.t)[3]
    return state.w[0], ana


def pattern_correlation(a, b):
    a = np.ravel(a) - np.mean(a)
    b = np.ravel(b) - np.mean(b)
    return float(np.dot(a, b) / math.sqrt(np.dot(a, a) * np.dot(b, b)))
