"""Closed-form reference solutions and error norms.

Vertical coordinate: ``z`` points up from the still-water surface, so
``z`` lies in ``[-h, 0]`` and ``h + z`` is the height above the bottom.
Vertical velocities follow the model convention (positive downward).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class StandingWaveParams:
    A: float = 0.1
    Lx: float = 500.0
    Ly: float = 500.0
    h: float = 10.0
    g: float = 9.81

    def __post_init__(self):
        if not (self.A > 0 and self.Lx > 0 and self.Ly > 0 and self.h > 0):
            raise ValueError("standing-wave parameters must be positive")

    @property
    def kx(self):
        return math.pi / self.Lx

    @property
    def ky(self):
        return math.pi / self.Ly

    @property
    def k(self):
        return math.hypot(self.kx, self.ky)

    @property
    def sigma(self):
        return self.k * math.sqrt(self.g * self.h)

    @property
    def period(self):
        return 2.0 * math.pi / self.sigma


def standing_wave_analytic(p: StandingWaveParams, x, y, z, t):
    """Small-amplitude standing wave in a closed rectangular basin.

    Returns ``(zeta, u, v, w)`` broadcast over ``x, y, z``.
    """
    x, y, z = np.asarray(x, float), np.asarray(y, float), np.asarray(z, float)
    cx, sx = np.cos(p.kx * x), np.sin(p.kx * x)
    cy, sy = np.cos(p.ky * y), np.sin(p.ky * y)
    st = math.sin(p.sigma * t)
    zeta = p.A * cx * cy * math.cos(p.sigma * t)
    depth_factor = np.cosh(p.k * (p.h + z)) / math.cosh(p.k * p.h)
    amp = p.A * p.g / p.sigma * depth_factor * st
    u = amp * p.kx * sx * cy
    v = amp * p.ky * cx * sy
    w = (p.A * p.g * p.k / p.sigma * np.sinh(p.k * (p.h + z)) / math.cosh(p.k * p.h)
         * cx * cy * st)
    return zeta, u, v, w


@dataclass(frozen=True)
class WindDrivenParams:
    H: float = 40.0
    nu_z: float = 0.03
    k_lin: float = 0.005
    rho: float = 1000.0
    tau_w: float = 0.1      # dynamic stress, N/m^2
    g: float = 9.81

    def __post_init__(self):
        if min(self.H, self.nu_z, self.k_lin, self.rho, self.tau_w) <= 0:
            raise ValueError("wind-driven parameters must be positive")

    @property
    def surface_slope(self):
        tau = self.tau_w / self.rho
        return (1.5 * tau / (self.g * self.H)
                * (2 * self.nu_z + self.k_lin * self.H) / (3 * self.nu_z + self.k_lin * self.H))


def wind_driven_analytic(p: WindDrivenParams, z):
    """Steady wind-driven return-flow profile ``u(z)`` and the surface slope."""
    z = np.asarray(z, dtype=float)
    slope = p.surface_slope
    tau = p.tau_w / p.rho
    u = (p.g * slope / (6 * p.nu_z) * (3 * z**2 - p.H**2)
         + tau / (2 * p.nu_z) * (p.H + 2 * z))
    return u, slope


@dataclass(frozen=True)
class ErrorNorms:
    l2_rel: float
    linf: float
    absolute: bool = False     # True when the reference vanished and norms are absolute


def error_norms(numeric, analytic, mask=None) -> ErrorNorms:
    """Relative L2 and max-norm errors of ``numeric`` against ``analytic``."""
    numeric = np.asarray(numeric, dtype=float)
    analytic = np.asarray(analytic, dtype=float)
    if numeric.shape != analytic.shape:
        raise ValueError(f"shape mismatch {numeric.shape} vs {analytic.shape}")
    if mask is not None:
        numeric, analytic = numeric[mask], analytic[mask]
    diff = numeric - analytic
    ref2 = np.linalg.norm(analytic)
    if ref2 == 0.0:
        return ErrorNorms(float(np.linalg.norm(diff)), float(np.max(np.abs(diff), initial=0.0)), True)
    return ErrorNorms(float(np.linalg.norm(diff) / ref2),
                      float(np.max(np.abs(diff)) / np.max(np.abs(analytic))))
