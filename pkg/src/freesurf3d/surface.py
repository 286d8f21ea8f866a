"""Five-point free-surface system and its conjugate-gradient solution."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class SurfaceSystemError(ValueError):
    """The assembled surface matrix violates its structural guarantees."""


class ConvergenceError(RuntimeError):
    pass


@dataclass
class SurfaceSystem:
    diag: np.ndarray
    east: np.ndarray
    west: np.ndarray
    north: np.ndarray
    south: np.ndarray
    rhs: np.ndarray

    @property
    def shape(self):
        return self.diag.shape

    def matvec(self, x):
        y = self.diag * x
        y[:-1] += self.east[:-1] * x[1:]
        y[1:] += self.west[1:] * x[:-1]
        y[:, :-1] += self.north[:, :-1] * x[:, 1:]
        y[:, 1:] += self.south[:, 1:] * x[:, :-1]
        return y

    def to_dense(self):
        """Dense matrix in row-major (i, j) ordering; for small test systems."""
        ni, nj = self.shape
        n = ni * nj
        A = np.zeros((n, n))
        idx = np.arange(n).reshape(ni, nj)
        A[idx.ravel(), idx.ravel()] = self.diag.ravel()
        A[idx[:-1].ravel(), idx[1:].ravel()] = self.east[:-1].ravel()
        A[idx[1:].ravel(), idx[:-1].ravel()] = self.west[1:].ravel()
        A[idx[:, :-1].ravel(), idx[:, 1:].ravel()] = self.north[:, :-1].ravel()
        A[idx[:, 1:].ravel(), idx[:, :-1].ravel()] = self.south[:, 1:].ravel()
        return A


def depth_sum(dz, values):
    """Layer-weighted column sum ``dz^T values`` over the leading axis."""
    return np.einsum("k...,k...->...", dz, values)


def assemble_surface(zeta, dz_u, coef_u, dz_v, coef_v, dx, dy, dt,
                     check=True, rtol=1e-13) -> SurfaceSystem:
    """Assemble the linear system for the new surface elevation.

    ``coef_u``/``coef_v`` carry ``omega1``/``omega2`` on all x-/y-faces
    (including the closed boundary faces, whose ``dz`` is zero so they
    contribute no flux).
    """
    qx1 = depth_sum(dz_u, coef_u.omega1)
    qx2 = depth_sum(dz_u, coef_u.omega2)
    qy1 = depth_sum(dz_v, coef_v.omega1)
    qy2 = depth_sum(dz_v, coef_v.omega2)
    rx, ry = dt / dx, dt / dy

    east = rx * qx2[1:]
    west = rx * qx2[:-1]
    north = ry * qy2[:, 1:]
    south = ry * qy2[:, :-1]
    # closed outer boundary
    east[-1] = 0.0
    west[0] = 0.0
    north[:, -1] = 0.0
    south[:, 0] = 0.0

    diag = 1.0 - (east + west + north + south)
    rhs = zeta - rx * (qx1[1:] - qx1[:-1]) - ry * (qy1[:, 1:] - qy1[:, :-1])
    system = SurfaceSystem(diag, east, west, north, south, rhs)
    if check:
        check_surface_system(system, rtol)
    return system


def check_surface_system(system: SurfaceSystem, rtol=1e-13):
    """Symmetry, sign pattern and diagonal dominance; raises on failure."""
    scale = np.max(np.abs(system.diag))
    asym_x = np.max(np.abs(system.east[:-1] - system.west[1:]), initial=0.0)
    asym_y = np.max(np.abs(system.north[:, :-1] - system.south[:, 1:]), initial=0.0)
    if max(asym_x, asym_y) > rtol * scale:
        raise SurfaceSystemError(f"surface matrix not symmetric (defect {max(asym_x, asym_y):.3e})")
    off = (system.east, system.west, system.north, system.south)
    if any(np.any(o > 0) for o in off):
        raise SurfaceSystemError("positive off-diagonal entry")
    excess = system.diag - (1.0 + sum(np.abs(o) for o in off))
    if np.any(excess < -rtol * scale):
        raise SurfaceSystemError("surface matrix not diagonally dominant")


@dataclass
class CGResult:
    x: np.ndarray
    iterations: int
    residual: float      # ||b - A x|| / ||b||


def cg_solve(system: SurfaceSystem, tol=1e-10, max_iter=None, x0=None, callback=None) -> CGResult:
    """Unpreconditioned conjugate gradients on the five-point system.

    Stops when the relative residual ``||b - A x|| / ||b||`` drops to ``tol``.
    ``callback(x)`` is called after every iteration.
    """
    b = system.rhs
    if max_iter is None:
        max_iter = 10 * b.size
    bnorm = np.sqrt(np.sum(b * b))
    if bnorm == 0.0:
        return CGResult(np.zeros_like(b), 0, 0.0)
    x = np.zeros_like(b) if x0 is None else np.array(x0, dtype=float)
    target = (tol * bnorm) ** 2
    it = 0
    while True:
        # restart from the true residual until it meets the target
        r = b - system.matvec(x)
        rr = np.sum(r * r)
        if rr <= target:
            break
        p = r.copy()
        while rr > target:
            if it >= max_iter:
                raise ConvergenceError(
                    f"CG did not converge in {max_iter} iterations "
                    f"(residual {np.sqrt(rr) / bnorm:.3e})"
                )
            Ap = system.matvec(p)
            alpha = rr / np.sum(p * Ap)
            x += alpha * p
            r -= alpha * Ap
            rr_new = np.sum(r * r)
            p = r + (rr_new / rr) * p
            rr = rr_new
            it += 1
            if callback is not None:
                callback(x)
    return CGResult(x, it, float(np.sqrt(rr) / bnorm))
