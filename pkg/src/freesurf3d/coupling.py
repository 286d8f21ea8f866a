"""Implicit vertical momentum columns and their coupling to the free surface.

Each velocity column obeys a tridiagonal system ``A u = d' + gx * dzeta``
where ``dzeta`` is the (unknown) new surface-elevation difference across
the face.  Three O(nk) recursions turn this into the affine form

    u[k] = omega1[k] + omega2[k] * dzeta

which can be substituted into the depth-integrated continuity equation
before ``dzeta`` is known.

All functions accept arrays with the layer index first and any number of
trailing "face" axes, so a whole field of columns is processed at once.
Rows flagged inactive (below a stair-step bottom) are carried as identity
rows with zero right-hand side and contribute nothing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_EPS = 1e-14


class SingularPivotError(ArithmeticError):
    pass


@dataclass
class ColumnSystem:
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    dprime: np.ndarray | None = None
    gx: float | np.ndarray = 0.0
    active: np.ndarray | None = None

    @property
    def nk(self):
        return self.a.shape[0]

    def pressure_column(self):
        """The pressure-gradient factor broadcast over rows, zero on inactive ones."""
        gx = np.broadcast_to(np.asarray(self.gx, dtype=float), self.a.shape[1:])
        col = np.broadcast_to(gx, self.a.shape)
        if self.active is None:
            return np.array(col)
        return np.where(self.active, col, 0.0)

    def rhs(self, dzeta):
        """Full right-hand side ``d = d' + gx * dzeta``."""
        return self.dprime + self.pressure_column() * dzeta


@dataclass
class CouplingCoefficients:
    omega1: np.ndarray
    omega2: np.ndarray
    e: np.ndarray | None = None
    psi1: np.ndarray | None = None
    psi2: np.ndarray | None = None


def assemble_column(dz, nu_half, dt, active=None, dprime=None, gx=0.0) -> ColumnSystem:
    """Tridiagonal coefficients of the implicit vertical-viscosity column.

    ``dz`` holds layer thicknesses (nk, ...), ``nu_half`` the eddy viscosity
    at the nk + 1 half levels (surface first).  The half-level spacing is
    the mean of the two adjacent thicknesses.  Off-diagonals are
    non-positive so that ``b = 1 - (a + c) >= 1``.
    """
    dz = np.asarray(dz, dtype=float)
    nu_half = np.asarray(nu_half, dtype=float)
    if active is None:
        active = np.ones(dz.shape, dtype=bool)
    if dt <= 0:
        raise ValueError("dt must be positive")
    if np.any(dz[active] <= 0):
        raise ValueError("non-positive layer thickness in an active row")
    if np.any(nu_half < 0):
        raise ValueError("negative eddy viscosity")

    nk = dz.shape[0]
    a = np.zeros_like(dz)
    c = np.zeros_like(dz)
    if nk > 1:
        link = active[:-1] & active[1:]           # half level k+1 joins rows k and k+1
        safe = np.where(active, dz, 1.0)
        dzh = 0.5 * (safe[:-1] + safe[1:])
        flux = np.where(link, nu_half[1:-1] * dt / dzh, 0.0)
        a[1:] = -flux / safe[1:]
        c[:-1] = -flux / safe[:-1]
    b = 1.0 - (a + c)
    if dprime is not None:
        dprime = np.where(active, dprime, 0.0)
    return ColumnSystem(a=a, b=b, c=c, dprime=dprime, gx=gx, active=active)


def _check_pivots(den):
    if np.any(np.abs(den) < PIVOT_EPS):
        raise SingularPivotError("vanishing pivot in tridiagonal sweep")


def forward_sweep(sys: ColumnSystem):
    """Sweep factors ``e[k] = -c[k] / (a[k] e[k-1] + b[k])`` with ``e[-1] = 0``."""
    a, b, c = sys.a, sys.b, sys.c
    e = np.empty_like(b)
    den = b[0]
    _check_pivots(den)
    e[0] = -c[0] / den
    with np.errstate(divide="ignore", invalid="ignore"):
        for k in range(1, sys.nk):
            den = a[k] * e[k - 1] + b[k]
            e[k] = -c[k] / den
    _check_pivots(a[1:] * e[:-1] + b[1:])
    return e


def psi_recursions(sys: ColumnSystem, e):
    """Known and surface-dependent parts of the forward-swept right-hand side.

    ``f[k] = psi1[k] + psi2[k] * dzeta`` for every ``dzeta``.
    """
    a, b = sys.a, sys.b
    d = sys.dprime
    gcol = sys.pressure_column()
    psi1 = np.empty_like(b)
    psi2 = np.empty_like(b)
    psi1[0] = d[0] / b[0]
    psi2[0] = gcol[0] / b[0]
    for k in range(1, sys.nk):
        den = a[k] * e[k - 1] + b[k]
        psi1[k] = (d[k] - a[k] * psi1[k - 1]) / den
        psi2[k] = (gcol[k] - a[k] * psi2[k - 1]) / den
    return psi1, psi2


def omega_recursions(e, psi1, psi2):
    """Back-substitution of both parts: ``omega[k] = psi[k] + e[k] omega[k+1]``."""
    omega1 = np.empty_like(psi1)
    omega2 = np.empty_like(psi2)
    omega1[-1] = psi1[-1]
    omega2[-1] = psi2[-1]
    for k in range(psi1.shape[0] - 2, -1, -1):
        omega1[k] = psi1[k] + e[k] * omega1[k + 1]
        omega2[k] = psi2[k] + e[k] * omega2[k + 1]
    return omega1, omega2


def couple_columns(sys: ColumnSystem) -> CouplingCoefficients:
    """Run the forward sweep, psi and omega recursions on ``sys``."""
    e = forward_sweep(sys)
    psi1, psi2 = psi_recursions(sys, e)
    omega1, omega2 = omega_recursions(e, psi1, psi2)
    return CouplingCoefficients(omega1=omega1, omega2=omega2, e=e, psi1=psi1, psi2=psi2)


def recover_velocity(omega1, omega2, dzeta):
    """Velocities once the surface-elevation difference is known."""
    return omega1 + omega2 * dzeta


# -- explicit-inverse baseline -------------------------------------------------

_CHUNK_ELEMENTS = 1 << 21


def _inverse_rows(a, b, c):
    """Full inverses of a batch of tridiagonals given as (n, batch) diagonals.

    Entries are built from the forward and backward elimination pivots,
    row by row outward from the diagonal, so the cost is Theta(n^2) per
    matrix.  The result has shape (n, n, batch).
    """
    n = b.shape[0]
    p = np.empty_like(b)
    q = np.empty_like(b)
    p[0] = b[0]
    for i in range(1, n):
        p[i] = b[i] - a[i] * c[i - 1] / p[i - 1]
    q[-1] = b[-1]
    for i in range(n - 2, -1, -1):
        q[i] = b[i] - c[i] * a[i + 1] / q[i + 1]
    diag = p + q - b
    _check_pivots(diag)

    inv = np.empty((n, n) + b.shape[1:])      # every entry is written below
    idx = np.arange(n)
    inv[idx, idx] = 1.0 / diag
    up = -c / p
    lo = -a / q
    for i in range(n - 2, -1, -1):
        inv[i, i + 1:] = inv[i + 1, i + 1:] * up[i]
    for i in range(1, n):
        inv[i, :i] = inv[i - 1, :i] * lo[i]
    return inv


def inverse_tridiagonal(a, b, c):
    """Dense inverse of one tridiagonal matrix given by its three diagonals."""
    col = lambda x: np.asarray(x, dtype=float)[:, None]
    return _inverse_rows(col(a), col(b), col(c))[..., 0]


def _apply_inverse(sys: ColumnSystem, *rhs):
    """Multiply every column's explicit inverse with each right-hand side.

    Right-hand sides are shaped like ``sys.a``; columns are processed in
    chunks so the stored inverses stay within a fixed memory budget.
    """
    nk = sys.nk
    shape = sys.a.shape
    nf = int(np.prod(shape[1:], dtype=int))
    flat = lambda x: np.ascontiguousarray(x).reshape(nk, nf)
    a, b, c = flat(sys.a), flat(sys.b), flat(sys.c)
    rhs = [flat(r) for r in rhs]
    outs = [np.empty((nk, nf)) for _ in rhs]
    chunk = max(1, _CHUNK_ELEMENTS // (nk * nk))
    for s in range(0, nf, chunk):
        sl = slice(s, s + chunk)
        inv = _inverse_rows(a[:, sl], b[:, sl], c[:, sl])
        for r, o in zip(rhs, outs):
            o[:, sl] = np.einsum("ijf,jf->if", inv, r[:, sl])
    return [o.reshape(shape) for o in outs]


def direct_column_solve(sys: ColumnSystem, dzeta):
    """Solve ``A u = d' + gx * dzeta`` by building the full inverse of ``A``."""
    d = np.broadcast_to(np.asarray(sys.rhs(dzeta), dtype=float), sys.a.shape)
    return _apply_inverse(sys, d)[0]


def direct_coupling(sys: ColumnSystem) -> CouplingCoefficients:
    """Affine coefficients obtained from the explicit inverse instead of recursions."""
    omega1, omega2 = _apply_inverse(sys, sys.dprime, sys.pressure_column())
    return CouplingCoefficients(omega1=omega1, omega2=omega2)
