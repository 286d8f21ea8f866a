"""One semi-implicit time step and the time loop around it."""

from __future__ import annotations

import time
import warnings
from collections import defaultdict
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

from .coupling import assemble_column, couple_columns, direct_coupling, recover_velocity
from .explicit import (
    ExplicitParams,
    cfl_number,
    explicit_operator,
    nu_at_faces,
    update_eddy_viscosity,
)
from .grid import DriedLayerError, Grid, State, face_thicknesses
from .surface import SurfaceSystem, assemble_surface, cg_solve

COUPLINGS = ("recursive", "direct")


class CFLWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class StepConfig:
    dt: float
    t_end: float
    cg_tol: float = 1e-10
    cg_max_iter: int | None = None
    diag_every: int = 1
    coupling: str = "recursive"
    check_system: bool = False

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if self.t_end < self.dt:
            raise ValueError("t_end must be at least one time step")
        if self.coupling not in COUPLINGS:
            raise ValueError(f"coupling must be one of {COUPLINGS}")

    @property
    def nsteps(self):
        return int(round(self.t_end / self.dt))


class PhaseTimer:
    """Accumulates wall-clock seconds per named phase."""

    def __init__(self):
        self.seconds = defaultdict(float)
        self.calls = defaultdict(int)

    @contextmanager
    def phase(self, name):
        t0 = time.perf_counter()
        try:
            yield
        finally:
            self.seconds[name] += time.perf_counter() - t0
            self.calls[name] += 1

    def total(self):
        return sum(self.seconds.values())


class _NullTimer:
    @contextmanager
    def phase(self, name):
        yield


@dataclass
class StepInfo:
    cg_iterations: int
    cg_residual: float
    system: SurfaceSystem


def total_volume(state: State, grid: Grid) -> float:
    """Water volume: (h + zeta) dx dy summed over every column."""
    return float(np.sum(grid.h + state.zeta) * grid.dx * grid.dy)


def horizontal_divergence(u, v, grid: Grid):
    div = (u[:, 1:] - u[:, :-1]) / grid.dx + (v[:, :, 1:] - v[:, :, :-1]) / grid.dy
    return np.where(grid.wet, div, 0.0)


def vertical_velocity(state: State, grid: Grid):
    """Diagnose w from continuity, integrating upward from a no-flux bottom.

    ``w[k]`` is the velocity through the top face of layer k, positive in
    the direction of increasing k (downward):
    ``w[k] = w[k + 1] + dz[k] * (du/dx + dv/dy)[k]``.
    """
    dz = grid.cell_thickness(state.zeta)
    flux = dz * horizontal_divergence(state.u, state.v, grid)
    w = np.zeros((grid.nk + 1, grid.ni, grid.nj))
    w[:-1] = np.cumsum(flux[::-1], axis=0)[::-1]
    return w


def continuity_residual(state: State, grid: Grid):
    """Cell-wise residual of the discrete 3D continuity equation."""
    dz = grid.cell_thickness(state.zeta)
    div = horizontal_divergence(state.u, state.v, grid)
    with np.errstate(divide="ignore", invalid="ignore"):
        res = div + np.where(grid.wet, (state.w[1:] - state.w[:-1]) / dz, 0.0)
    return np.where(grid.wet, res, 0.0)


def _check_top_layer(zeta, grid, t):
    if np.any(zeta <= -grid.dz_ref[0]):
        i, j = np.unravel_index(np.argmin(zeta), zeta.shape)
        raise DriedLayerError(f"top layer dried in column ({i}, {j}) at t={t:.6g}")


def step(state: State, grid: Grid, params: ExplicitParams, cfg: StepConfig, timer=None):
    """Advance ``state`` by one time step.

    Returns ``(new_state, StepInfo)``.  Geometry and eddy viscosity are
    taken at time level n, so each step is a single linear solve.
    """
    timer = timer or _NullTimer()
    dt = cfg.dt
    _check_top_layer(state.zeta, grid, state.t)
    if cfl_number(state, grid, params, dt) > 1.0:
        warnings.warn(f"explicit CFL number exceeds 1 at t={state.t:.6g}", CFLWarning)

    with timer.phase("explicit"):
        nu = update_eddy_viscosity(state, grid, params)
        dz_u, dz_v = face_thicknesses(grid, state.zeta)
        d_u, d_v = explicit_operator(state, grid, params, dt, dz_u, dz_v)
        nu_u, nu_v = nu_at_faces(nu, grid)

    with timer.phase("assembly"):
        sys_u = assemble_column(dz_u, nu_u, dt, active=grid.u_mask, dprime=d_u,
                                gx=-grid.g * dt / grid.dx)
        sys_v = assemble_column(dz_v, nu_v, dt, active=grid.v_mask, dprime=d_v,
                                gx=-grid.g * dt / grid.dy)

    with timer.phase("coupling"):
        solve = couple_columns if cfg.coupling == "recursive" else direct_coupling
        coef_u = solve(sys_u)
        coef_v = solve(sys_v)

    with timer.phase("surface"):
        system = assemble_surface(state.zeta, dz_u, coef_u, dz_v, coef_v,
                                  grid.dx, grid.dy, dt, check=cfg.check_system)

    with timer.phase("cg"):
        max_iter = cfg.cg_max_iter or 10 * grid.ni * grid.nj
        result = cg_solve(system, cfg.cg_tol, max_iter, x0=state.zeta)

    with timer.phase("recover"):
        zeta = result.x
        _check_top_layer(zeta, grid, state.t + dt)
        jump_x = np.zeros((grid.ni + 1, grid.nj))
        jump_x[1:-1] = zeta[1:] - zeta[:-1]
        jump_y = np.zeros((grid.ni, grid.nj + 1))
        jump_y[:, 1:-1] = zeta[:, 1:] - zeta[:, :-1]
        u = np.where(grid.u_mask, recover_velocity(coef_u.omega1, coef_u.omega2, jump_x), 0.0)
        v = np.where(grid.v_mask, recover_velocity(coef_v.omega1, coef_v.omega2, jump_y), 0.0)
        new = State(zeta=zeta, u=u, v=v, w=np.zeros_like(state.w), nu_z=nu, t=state.t + dt)
        new.w = vertical_velocity(new, grid)

    return new, StepInfo(result.iterations, result.residual, system)


def integrate(state: State, grid: Grid, params: ExplicitParams, cfg: StepConfig,
              nsteps=None, on_step=None, timer=None):
    """Run ``nsteps`` steps (default: up to ``cfg.t_end``).

    ``on_step(n, state, info)`` is called after every step; returning
    ``True`` stops the loop early.
    """
    nsteps = cfg.nsteps if nsteps is None else nsteps
    for n in range(1, nsteps + 1):
        state, info = step(state, grid, params, cfg, timer)
        if on_step is not None and on_step(n, state, info):
            break
    return state
