"""Staggered z-level mesh, bathymetry fitting and model state.

Array layout used throughout the package (0-based, ``k = 0`` is the surface
layer and ``k = nk - 1`` the deepest one):

========  =====================  ==========================================
field     shape                  location
========  =====================  ==========================================
zeta      (ni, nj)               cell centres
u         (nk, ni + 1, nj)       x-faces; face ``i`` sits between cells
                                 ``i - 1`` and ``i``, faces 0 and ni are walls
v         (nk, ni, nj + 1)       y-faces, same convention along y
w         (nk + 1, ni, nj)       horizontal faces; ``w[0]`` is the surface,
                                 positive in the direction of increasing k
nu_z      (nk + 1, ni, nj)       half levels above/below each cell centre
========  =====================  ==========================================
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np


class GridError(ValueError):
    """Raised for an invalid mesh description."""


class DriedLayerError(RuntimeError):
    """The free surface dropped through the top layer of a column."""


@dataclass(frozen=True)
class GridSpec:
    ni: int
    nj: int
    nk: int
    dx: float
    dy: float
    dz_ref: np.ndarray
    h: np.ndarray
    g: float = 9.81
    f: float = 0.0

    @classmethod
    def uniform(cls, ni, nj, nk, dx, dy, depth, g=9.81, f=0.0):
        """Flat-bottom basin of ``nk`` equal layers spanning ``depth``."""
        dz = np.full(nk, depth / nk)
        return cls(ni, nj, nk, dx, dy, dz, np.full((ni, nj), float(depth)), g, f)


@dataclass(frozen=True, eq=False)
class Grid:
    spec: GridSpec
    kmax: np.ndarray       # active layers per column, (ni, nj)
    h: np.ndarray          # snapped still-water depth, (ni, nj)
    wet: np.ndarray        # (nk, ni, nj)
    u_mask: np.ndarray     # (nk, ni + 1, nj)
    v_mask: np.ndarray     # (nk, ni, nj + 1)
    ku: np.ndarray         # active layers per x-face, (ni + 1, nj)
    kv: np.ndarray         # active layers per y-face, (ni, nj + 1)

    # convenience pass-throughs
    ni = property(lambda self: self.spec.ni)
    nj = property(lambda self: self.spec.nj)
    nk = property(lambda self: self.spec.nk)
    dx = property(lambda self: self.spec.dx)
    dy = property(lambda self: self.spec.dy)
    dz_ref = property(lambda self: self.spec.dz_ref)
    g = property(lambda self: self.spec.g)
    f = property(lambda self: self.spec.f)

    def cell_centers(self):
        """x and y coordinates of cell centres, origin at the basin corner."""
        x = (np.arange(self.ni) + 0.5) * self.dx
        y = (np.arange(self.nj) + 0.5) * self.dy
        return x, y

    def layer_centers(self):
        """Depth of each reference layer centre, negative downward (z up)."""
        bottoms = np.cumsum(self.dz_ref)
        return -(bottoms - 0.5 * self.dz_ref)

    def cell_thickness(self, zeta):
        """Layer thicknesses per cell, (nk, ni, nj), zero below the bottom."""
        dz = np.where(self.wet, self.dz_ref[:, None, None], 0.0)
        dz[0] = self.dz_ref[0] + zeta
        return dz

    def half_level_spacing(self, dz):
        """Distance between adjacent layer centres: mean of the two thicknesses.

        Returns an array shaped like ``dz`` with one extra leading entry; the
        surface and bottom entries (index 0 and nk) are left at zero.
        """
        out = np.zeros((dz.shape[0] + 1,) + dz.shape[1:])
        out[1:-1] = 0.5 * (dz[:-1] + dz[1:])
        return out


def fit_layers(dz_ref, h, rtol=1e-9):
    """Number of leading reference layers whose summed thickness fits in ``h``."""
    bottoms = np.cumsum(dz_ref)
    h = np.asarray(h, dtype=float)
    tol = rtol * np.maximum(h, 1.0)
    return np.searchsorted(bottoms, h + tol, side="right")


def build_grid(spec: GridSpec) -> Grid:
    """Validate ``spec`` and derive stair-step masks for cells and faces."""
    if spec.ni < 1 or spec.nj < 1 or spec.nk < 1:
        raise GridError("cell counts must be positive")
    if not (spec.dx > 0 and spec.dy > 0):
        raise GridError(f"non-positive horizontal spacing dx={spec.dx}, dy={spec.dy}")
    dz_ref = np.asarray(spec.dz_ref, dtype=float)
    if dz_ref.shape != (spec.nk,):
        raise GridError(f"dz_ref must have {spec.nk} entries, got {dz_ref.shape}")
    if np.any(dz_ref <= 0):
        raise GridError("every reference layer thickness must be positive")
    h = np.asarray(spec.h, dtype=float)
    if h.shape != (spec.ni, spec.nj):
        raise GridError(f"bathymetry must be ({spec.ni}, {spec.nj}), got {h.shape}")
    if np.any(h < 0):
        raise GridError("negative still-water depth")

    kmax = fit_layers(dz_ref, h)
    if np.any(kmax == 0):
        bad = np.argwhere(kmax == 0)[0]
        raise GridError(f"column {tuple(bad)} has no active layer (h={h[tuple(bad)]})")

    spec = replace(spec, dz_ref=dz_ref, h=h)
    snapped = np.concatenate(([0.0], np.cumsum(dz_ref)))[kmax]
    levels = np.arange(spec.nk)[:, None, None]
    wet = levels < kmax[None]

    ku = np.zeros((spec.ni + 1, spec.nj), dtype=int)
    ku[1:-1] = np.minimum(kmax[:-1], kmax[1:])
    kv = np.zeros((spec.ni, spec.nj + 1), dtype=int)
    kv[:, 1:-1] = np.minimum(kmax[:, :-1], kmax[:, 1:])

    return Grid(
        spec=spec,
        kmax=kmax,
        h=snapped,
        wet=wet,
        u_mask=levels < ku[None],
        v_mask=levels < kv[None],
        ku=ku,
        kv=kv,
    )


@dataclass
class State:
    zeta: np.ndarray
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    nu_z: np.ndarray
    t: float = 0.0

    @classmethod
    def rest(cls, grid: Grid, nu_z=0.0):
        ni, nj, nk = grid.ni, grid.nj, grid.nk
        return cls(
            zeta=np.zeros((ni, nj)),
            u=np.zeros((nk, ni + 1, nj)),
            v=np.zeros((nk, ni, nj + 1)),
            w=np.zeros((nk + 1, ni, nj)),
            nu_z=np.full((nk + 1, ni, nj), float(nu_z)),
        )

    def copy(self):
        return State(self.zeta.copy(), self.u.copy(), self.v.copy(),
                     self.w.copy(), self.nu_z.copy(), self.t)

    def check(self, grid: Grid):
        """Enforce the state invariants; raises on violation."""
        if np.any(self.zeta <= -grid.dz_ref[0]):
            i, j = np.argwhere(self.zeta <= -grid.dz_ref[0])[0]
            raise DriedLayerError(
                f"top layer dried in column ({i}, {j}): zeta={self.zeta[i, j]:.6g}"
            )
        if np.any(self.u[~grid.u_mask]) or np.any(self.v[~grid.v_mask]):
            raise ValueError("non-zero velocity on a closed face")


@dataclass
class FaceGeometry:
    """Layer thicknesses seen by one velocity column."""

    dz: np.ndarray
    nk_active: int
    half: np.ndarray = field(init=False)

    def __post_init__(self):
        self.half = 0.5 * (self.dz[:-1] + self.dz[1:])


def face_thickness(grid: Grid, state: State, face) -> FaceGeometry:
    """Thicknesses of the active layers at a single face.

    ``face`` is ``("x", i, j)`` for the x-face between cells ``i - 1`` and
    ``i`` or ``("y", i, j)`` for the y-face between cells ``j - 1`` and ``j``.
    """
    axis, i, j = face
    if axis == "x":
        n = grid.ku[i, j]
        zbar = 0.5 * (state.zeta[i - 1, j] + state.zeta[i, j]) if n else 0.0
    elif axis == "y":
        n = grid.kv[i, j]
        zbar = 0.5 * (state.zeta[i, j - 1] + state.zeta[i, j]) if n else 0.0
    else:
        raise ValueError(f"unknown face axis {axis!r}")
    if n == 0:
        raise GridError(f"face {face} is closed")
    dz = grid.dz_ref[:n].copy()
    dz[0] += zbar
    if dz[0] <= 0:
        raise DriedLayerError(f"top layer at face {face} has thickness {dz[0]:.6g}")
    return FaceGeometry(dz=dz, nk_active=int(n))


def face_thicknesses(grid: Grid, zeta):
    """Vectorised face thicknesses for all x- and y-faces.

    Returns ``(dz_u, dz_v)`` shaped like ``u`` and ``v``; inactive entries are
    zero.
    """
    nk = grid.nk
    dz_u = np.where(grid.u_mask, grid.dz_ref[:, None, None], 0.0)
    dz_v = np.where(grid.v_mask, grid.dz_ref[:, None, None], 0.0)
    zu = np.zeros((grid.ni + 1, grid.nj))
    zu[1:-1] = 0.5 * (zeta[:-1] + zeta[1:])
    zv = np.zeros((grid.ni, grid.nj + 1))
    zv[:, 1:-1] = 0.5 * (zeta[:, :-1] + zeta[:, 1:])
    dz_u[0] += np.where(grid.u_mask[0], zu, 0.0)
    dz_v[0] += np.where(grid.v_mask[0], zv, 0.0)
    if nk and (np.any(dz_u[0][grid.u_mask[0]] <= 0) or np.any(dz_v[0][grid.v_mask[0]] <= 0)):
        raise DriedLayerError("non-positive top-layer thickness at a face")
    return dz_u, dz_v

