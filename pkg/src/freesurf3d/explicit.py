"""Explicit momentum terms, stresses and the vertical eddy-viscosity closure.

Everything here is evaluated at time level n.  Stresses are kinematic
(already divided by the water density).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid, State, face_thicknesses

FRICTION_MODELS = ("none", "linear", "chezy")
VISCOSITY_MODELS = ("constant", "mixing-length")


@dataclass(frozen=True)
class ExplicitParams:
    nu_h: float = 0.0
    tau_wx: float = 0.0
    tau_wy: float = 0.0
    friction: str = "none"
    k_lin: float = 0.0
    chezy: float | None = None
    viscosity: str = "constant"
    nu_z: float = 0.0
    l0: float | None = None
    kappa: float = 0.41
    nu_min: float = 1e-6
    advection: bool = True

    def __post_init__(self):
        if self.nu_h < 0:
            raise ValueError("nu_h must be non-negative")
        if self.friction not in FRICTION_MODELS:
            raise ValueError(f"unknown friction model {self.friction!r}")
        if self.friction == "chezy" and not (self.chezy and self.chezy > 0):
            raise ValueError("chezy friction needs C > 0")
        if self.friction == "linear" and self.k_lin < 0:
            raise ValueError("k_lin must be non-negative")
        if self.viscosity not in VISCOSITY_MODELS:
            raise ValueError(f"unknown viscosity model {self.viscosity!r}")
        if self.viscosity == "constant" and self.nu_z < 0:
            raise ValueError("nu_z must be non-negative")
        if self.viscosity == "mixing-length" and not (self.l0 and self.l0 > 0):
            raise ValueError("mixing-length closure needs l0 > 0")


def _shift(a, offset, axis, fill):
    """``out[i] = a[i - offset]`` along ``axis``, padding with ``fill``."""
    out = np.full_like(a, fill)
    n = a.shape[axis]
    if abs(offset) >= n:
        return out
    src = [slice(None)] * a.ndim
    dst = [slice(None)] * a.ndim
    if offset > 0:
        src[axis], dst[axis] = slice(0, n - offset), slice(offset, n)
    else:
        src[axis], dst[axis] = slice(-offset, n), slice(0, n + offset)
    out[tuple(dst)] = a[tuple(src)]
    return out


def upwind_derivative(q, vel, spacing, axis, valid):
    """Second-order upwind first derivative of ``q`` along ``axis``.

    Uses the two upstream points when both are ``valid``, a one-sided first
    order difference when only the nearest one is, and zero (no-gradient
    boundary) when no upstream point exists.
    """
    qm1, qm2 = _shift(q, 1, axis, 0.0), _shift(q, 2, axis, 0.0)
    qp1, qp2 = _shift(q, -1, axis, 0.0), _shift(q, -2, axis, 0.0)
    vm1, vm2 = _shift(valid, 1, axis, False), _shift(valid, 2, axis, False)
    vp1, vp2 = _shift(valid, -1, axis, False), _shift(valid, -2, axis, False)

    back = np.where(
        vm1 & vm2,
        (3.0 * q - 4.0 * qm1 + qm2) / (2.0 * spacing),
        np.where(vm1, (q - qm1) / spacing, 0.0),
    )
    fwd = np.where(
        vp1 & vp2,
        (-3.0 * q + 4.0 * qp1 - qp2) / (2.0 * spacing),
        np.where(vp1, (qp1 - q) / spacing, 0.0),
    )
    return np.where(vel > 0, back, fwd)


def _laplacian_1d(q, spacing, axis, valid):
    # missing neighbours act as a zero-gradient ghost
    qm = np.where(_shift(valid, 1, axis, False), _shift(q, 1, axis, 0.0), q)
    qp = np.where(_shift(valid, -1, axis, False), _shift(q, -1, axis, 0.0), q)
    return (qp - 2.0 * q + qm) / spacing**2


def _vertical_derivative(q, dzh, mask):
    """d q / d(k-direction) at layer centres, centred where possible."""
    out = np.zeros_like(q)
    nk = q.shape[0]
    if nk < 2:
        return out
    up = np.zeros_like(mask)
    up[1:] = mask[:-1] & mask[1:]
    down = np.zeros_like(mask)
    down[:-1] = up[1:]
    qm = np.zeros_like(q)
    qm[1:] = q[:-1]
    qp = np.zeros_like(q)
    qp[:-1] = q[1:]
    hm = dzh[:-1]      # spacing to the layer above, index k -> half level k
    hp = dzh[1:]       # spacing to the layer below, half level k + 1
    both = up & down
    with np.errstate(divide="ignore", invalid="ignore"):
        centred = (qp - qm) / (hm + hp)
        one_up = (q - qm) / hm
        one_down = (qp - q) / hp
    out = np.where(both, centred, np.where(up, one_up, np.where(down, one_down, 0.0)))
    return np.where(mask, out, 0.0)


def _to_u_faces(c):
    """Average a cell-centred (nk, ni, nj) field onto interior x-faces."""
    out = np.zeros((c.shape[0], c.shape[1] + 1, c.shape[2]))
    out[:, 1:-1] = 0.5 * (c[:, :-1] + c[:, 1:])
    return out


def _to_v_faces(c):
    out = np.zeros((c.shape[0], c.shape[1], c.shape[2] + 1))
    out[:, :, 1:-1] = 0.5 * (c[:, :, :-1] + c[:, :, 1:])
    return out


def cell_velocities(state: State):
    """u, v and w averaged to cell centres (w at layer mid-depth)."""
    uc = 0.5 * (state.u[:, :-1] + state.u[:, 1:])
    vc = 0.5 * (state.v[:, :, :-1] + state.v[:, :, 1:])
    wc = 0.5 * (state.w[:-1] + state.w[1:])
    return uc, vc, wc


def bed_stress(u, v_cross, params: ExplicitParams, g=9.81):
    """Kinematic bed stress along the component ``u``.

    ``v_cross`` is the transverse velocity interpolated to the same face.
    The stress is odd in (u, v_cross) for all friction models.
    """
    u = np.asarray(u, dtype=float)
    if params.friction == "none":
        return np.zeros_like(u)
    if params.friction == "linear":
        return params.k_lin * u
    speed = np.sqrt(u * u + np.asarray(v_cross, dtype=float) ** 2)
    return g * speed * u / params.chezy**2


def _bottom(field, kcount):
    """Values at the deepest active layer of each face (0 where closed)."""
    idx = np.maximum(kcount - 1, 0)[None]
    vals = np.take_along_axis(field, idx, axis=0)[0]
    return np.where(kcount > 0, vals, 0.0)


def _add_at_bottom(field, kcount, values):
    idx = np.maximum(kcount - 1, 0)[None]
    cur = np.take_along_axis(field, idx, axis=0)
    np.put_along_axis(field, idx, cur + np.where(kcount > 0, values, 0.0)[None], axis=0)


def _wall_touching(wet, axis):
    """Faces along ``axis`` (1 or 2) bordering at least one wet cell."""
    pad = [(0, 0)] * 3
    pad[axis] = (1, 1)
    w = np.pad(wet, pad, constant_values=False)
    lo = [slice(None)] * 3
    hi = [slice(None)] * 3
    lo[axis] = slice(0, -1)
    hi[axis] = slice(1, None)
    return w[tuple(lo)] | w[tuple(hi)]


def explicit_operator(state: State, grid: Grid, params: ExplicitParams, dt,
                      dz_u=None, dz_v=None):
    """Right-hand parts ``d' = q^n + dt F(q^n)`` plus surface and bed stresses.

    Returns ``(d_u, d_v)`` shaped like ``state.u`` and ``state.v``; closed
    faces are zero.
    """
    if dz_u is None or dz_v is None:
        dz_u, dz_v = face_thicknesses(grid, state.zeta)
    u, v = state.u, state.v
    uc, vc, wc = cell_velocities(state)
    v_at_u = _to_u_faces(vc)
    u_at_v = _to_v_faces(uc)

    Fu = grid.f * v_at_u
    Fv = -grid.f * u_at_v

    if params.advection:
        valid_ux = _wall_touching(grid.wet, 1)
        valid_vy = _wall_touching(grid.wet, 2)
        w_at_u = _to_u_faces(wc)
        w_at_v = _to_v_faces(wc)
        dzh_u = grid.half_level_spacing(dz_u)
        dzh_v = grid.half_level_spacing(dz_v)
        Fu -= (
            u * upwind_derivative(u, u, grid.dx, 1, valid_ux)
            + v_at_u * upwind_derivative(u, v_at_u, grid.dy, 2, grid.u_mask)
            + w_at_u * _vertical_derivative(u, dzh_u, grid.u_mask)
        )
        Fv -= (
            u_at_v * upwind_derivative(v, u_at_v, grid.dx, 1, grid.v_mask)
            + v * upwind_derivative(v, v, grid.dy, 2, valid_vy)
            + w_at_v * _vertical_derivative(v, dzh_v, grid.v_mask)
        )

    if params.nu_h > 0:
        valid_ux = _wall_touching(grid.wet, 1)
        valid_vy = _wall_touching(grid.wet, 2)
        Fu += params.nu_h * (
            _laplacian_1d(u, grid.dx, 1, valid_ux) + _laplacian_1d(u, grid.dy, 2, grid.u_mask)
        )
        Fv += params.nu_h * (
            _laplacian_1d(v, grid.dx, 1, grid.v_mask) + _laplacian_1d(v, grid.dy, 2, valid_vy)
        )

    d_u = u + dt * Fu
    d_v = v + dt * Fv

    top_u, top_v = grid.u_mask[0], grid.v_mask[0]
    with np.errstate(divide="ignore", invalid="ignore"):
        d_u[0] += np.where(top_u, dt * params.tau_wx / dz_u[0], 0.0)
        d_v[0] += np.where(top_v, dt * params.tau_wy / dz_v[0], 0.0)

        if params.friction != "none":
            ub, vb_cross = _bottom(u, grid.ku), _bottom(v_at_u, grid.ku)
            tbx = bed_stress(ub, vb_cross, params, grid.g)
            _add_at_bottom(d_u, grid.ku, -dt * tbx / np.where(grid.ku > 0, _bottom(dz_u, grid.ku), 1.0))
            vb, ub_cross = _bottom(v, grid.kv), _bottom(u_at_v, grid.kv)
            tby = bed_stress(vb, ub_cross, params, grid.g)
            _add_at_bottom(d_v, grid.kv, -dt * tby / np.where(grid.kv > 0, _bottom(dz_v, grid.kv), 1.0))

    d_u[~grid.u_mask] = 0.0
    d_v[~grid.v_mask] = 0.0
    return d_u, d_v


def update_eddy_viscosity(state: State, grid: Grid, params: ExplicitParams):
    """Vertical eddy viscosity at the half levels of every cell, (nk + 1, ni, nj)."""
    shape = (grid.nk + 1, grid.ni, grid.nj)
    if params.viscosity == "constant":
        return np.full(shape, float(params.nu_z))

    uc, vc, _ = cell_velocities(state)
    dz = grid.cell_thickness(state.zeta)
    dzh = grid.half_level_spacing(dz)
    nu = np.full(shape, params.nu_min)
    if grid.nk < 2:
        return nu
    interior = grid.wet[1:]            # half level m (1..nk-1) has wet cells on both sides
    with np.errstate(divide="ignore", invalid="ignore"):
        shear = np.hypot(uc[:-1] - uc[1:], vc[:-1] - vc[1:]) / dzh[1:-1]
    depth_to = np.cumsum(dz, axis=0)[:-1]          # surface -> half level m
    column = np.sum(dz, axis=0)
    dist = np.minimum(depth_to, column[None] - depth_to)
    mix = np.minimum(params.kappa * dist, params.l0)
    nu_int = np.maximum(mix**2 * shear, params.nu_min)
    nu[1:-1] = np.where(interior, nu_int, params.nu_min)
    return nu


def nu_at_faces(nu, grid: Grid):
    """Interpolate cell half-level viscosity onto x- and y-face columns."""
    nu_u = _to_u_faces(nu)
    nu_v = _to_v_faces(nu)
    return nu_u, nu_v


def cfl_number(state: State, grid: Grid, params: ExplicitParams, dt):
    """Largest explicit stability ratio among advection and horizontal diffusion."""
    cu = np.max(np.abs(state.u)) * dt / grid.dx if state.u.size else 0.0
    cv = np.max(np.abs(state.v)) * dt / grid.dy if state.v.size else 0.0
    cd = 4.0 * params.nu_h * dt / min(grid.dx, grid.dy) ** 2
    return float(max(cu, cv, cd))
