"""Independent reference computations used by the tests.

Nothing here calls the recursions under test: columns are solved with dense
LAPACK factorisations, surfaces with dense solves, and layer fitting by a
plain per-column loop.
"""

import numpy as np

from freesurf3d.coupling import assemble_column


def random_column(rng, nk=None, stair=True):
    """A random valid column system with its d' and pressure factor.

    Thicknesses span 0.2-5 m, viscosities 0-0.1 m^2/s (sometimes exactly
    zero), time steps 0.1-100 s and spacings 5-500 m.  When ``stair`` is set
    the lower rows may be inactive, as under a stair-step bottom.
    """
    nk = int(rng.integers(1, 65)) if nk is None else nk
    dz = rng.uniform(0.2, 5.0, nk)
    nu = rng.uniform(0.0, 0.1, nk + 1)
    if rng.random() < 0.1:
        nu[:] = 0.0
    dt = float(rng.uniform(0.1, 100.0))
    dx = float(rng.uniform(5.0, 500.0))
    active = np.ones(nk, dtype=bool)
    if stair and nk > 1 and rng.random() < 0.3:
        active[int(rng.integers(1, nk)):] = False
    dprime = rng.normal(0.0, 0.5, nk)
    return assemble_column(dz, nu, dt, active=active, dprime=dprime, gx=-9.81 * dt / dx)


def dense_matrix(a, b, c):
    n = len(b)
    A = np.diag(np.asarray(b, dtype=float))
    if n > 1:
        A += np.diag(a[1:], -1) + np.diag(c[:-1], 1)
    return A


def dense_column_solve(sys, dzeta):
    """Solve one column with a dense LU factorisation."""
    d = sys.dprime + np.where(sys.active, sys.gx, 0.0) * dzeta
    return np.linalg.solve(dense_matrix(sys.a, sys.b, sys.c), d)


def brute_force_layers(dz_ref, h):
    """Count the leading layers that fit in each column, one column at a time."""
    kmax = np.zeros(h.shape, dtype=int)
    for idx in np.ndindex(h.shape):
        total = 0.0
        for thickness in dz_ref:
            if total + thickness > h[idx] * (1 + 1e-9):
                break
            total += thickness
            kmax[idx] += 1
    return kmax


def rel_err(x, ref):
    x, ref = np.asarray(x), np.asarray(ref)
    scale = max(np.max(np.abs(ref)), 1e-300)
    return float(np.max(np.abs(x - ref)) / scale)
