"""Discrete Wirtinger calculus and (1,1)-form densities.

Normalization: d^c = (i/2pi)(dbar - d), so dd^c u = (i/pi) sum u_{j kbar} dz_j ^ dzbar_k.
A HermitianField stores the coefficient matrix A of (i/pi) sum A_{jk} dz_j ^ dzbar_k.
Densities against Lebesgue measure that follow from this:

    k=1:  dd^c u            = (2/pi) A          = Laplacian(u) / (2 pi)
          omega             = 1/pi
    k=2:  dd^c u ^ omega    = (2/pi^2) tr A     = Laplacian(u) / (2 pi^2)
          (dd^c u)^2        = (8/pi^2) det A
          S ^ T             = (4/pi^2) (S11 T22 + S22 T11 - 2 Re(S12 conj T12))
          omega^2           = 2/pi^2

These are pinned against symbolic differentiation in tests/test_normalization.py.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .grid import GridDomain, Mask, ScalarField

# dd^c u ^ omega^{k-1} per unit trace of A
TRACE_DENSITY = {1: 2.0 / np.pi, 2: 2.0 / np.pi**2}
# same quantity per unit Laplacian
LAPLACIAN_DENSITY = {1: 1.0 / (2.0 * np.pi), 2: 1.0 / (2.0 * np.pi**2)}
OMEGA_K_DENSITY = {1: 1.0 / np.pi, 2: 2.0 / np.pi**2}
MA_DET_DENSITY_K2 = 8.0 / np.pi**2
MIXED_DENSITY_K2 = 4.0 / np.pi**2


def _sl(ndim: int, a: int, start, stop) -> tuple:
    s = [slice(None)] * ndim
    s[a] = slice(start, stop)
    return tuple(s)


def _outside(g: GridDomain, a: int, step: int) -> np.ndarray:
    """True where the neighbour at ``step`` along axis ``a`` is off-grid or outside the ball."""
    out = np.ones(g.shape, dtype=bool)
    nd = g.ndim
    if step > 0:
        out[_sl(nd, a, None, -step)] = g.exterior[_sl(nd, a, step, None)]
    else:
        out[_sl(nd, a, -step, None)] = g.exterior[_sl(nd, a, None, step)]
    return out


def _finite_or_nan(v: np.ndarray) -> np.ndarray:
    v[~np.isfinite(v)] = np.nan
    return v


def _fallback(g: GridDomain, a: int, out: np.ndarray, fwd: np.ndarray, bwd: np.ndarray) -> np.ndarray:
    """Replace missing central values by one-sided ones where the stencil leaves the ball."""
    missing = np.isnan(out) & g.ball
    if not missing.any():
        return out
    plus_out = _outside(g, a, 1)
    minus_out = _outside(g, a, -1)
    use_b = missing & plus_out & ~minus_out
    use_f = missing & minus_out & ~plus_out
    out[use_b] = bwd[use_b]
    out[use_f] = fwd[use_f]
    return out


def diff1(v: np.ndarray, g: GridDomain, a: int) -> np.ndarray:
    """Second-order first derivative along axis ``a``; NaN where no stencil is available."""
    nd, h = g.ndim, g.h
    with np.errstate(invalid="ignore", over="ignore"):
        out = np.full(v.shape, np.nan)
        out[_sl(nd, a, 1, -1)] = (v[_sl(nd, a, 2, None)] - v[_sl(nd, a, None, -2)]) / (2 * h)
        _finite_or_nan(out)
        fwd = np.full(v.shape, np.nan)
        fwd[_sl(nd, a, None, -2)] = (-3 * v[_sl(nd, a, None, -2)] + 4 * v[_sl(nd, a, 1, -1)]
                                     - v[_sl(nd, a, 2, None)]) / (2 * h)
        bwd = np.full(v.shape, np.nan)
        bwd[_sl(nd, a, 2, None)] = (3 * v[_sl(nd, a, 2, None)] - 4 * v[_sl(nd, a, 1, -1)]
                                    + v[_sl(nd, a, None, -2)]) / (2 * h)
        out = _fallback(g, a, out, _finite_or_nan(fwd), _finite_or_nan(bwd))
    return out


def diff2(v: np.ndarray, g: GridDomain, a: int) -> np.ndarray:
    """Second-order pure second derivative along axis ``a``."""
    nd, h2 = g.ndim, g.h**2
    with np.errstate(invalid="ignore", over="ignore"):
        out = np.full(v.shape, np.nan)
        out[_sl(nd, a, 1, -1)] = (v[_sl(nd, a, 2, None)] - 2 * v[_sl(nd, a, 1, -1)]
                                  + v[_sl(nd, a, None, -2)]) / h2
        _finite_or_nan(out)
        fwd = np.full(v.shape, np.nan)
        fwd[_sl(nd, a, None, -3)] = (2 * v[_sl(nd, a, None, -3)] - 5 * v[_sl(nd, a, 1, -2)]
                                     + 4 * v[_sl(nd, a, 2, -1)] - v[_sl(nd, a, 3, None)]) / h2
        bwd = np.full(v.shape, np.nan)
        bwd[_sl(nd, a, 3, None)] = (2 * v[_sl(nd, a, 3, None)] - 5 * v[_sl(nd, a, 2, -1)]
                                    + 4 * v[_sl(nd, a, 1, -2)] - v[_sl(nd, a, None, -3)]) / h2
        out = _fallback(g, a, out, _finite_or_nan(fwd), _finite_or_nan(bwd))
    return out


def laplacian(f: ScalarField) -> ScalarField:
    g = f.grid
    out = np.zeros(g.shape)
    for a in range(g.ndim):
        out += diff2(f.values, g, a)
    return ScalarField(g, out)


@dataclass(frozen=True, eq=False)
class HermitianField:
    """Per-node Hermitian k x k coefficients; NaN marks undefined nodes.

    ``diag`` has shape (k, *grid.shape); ``off`` holds A_12 (k=2 only).
    """

    grid: GridDomain
    diag: np.ndarray
    off: np.ndarray | None = None

    @property
    def k(self) -> int:
        return self.grid.k

    @property
    def defined(self) -> np.ndarray:
        d = ~np.isnan(self.diag).any(axis=0)
        if self.off is not None:
            d &= ~np.isnan(self.off)
        return d

    def trace(self) -> np.ndarray:
        return self.diag.sum(axis=0)

    def det(self) -> np.ndarray:
        if self.k == 1:
            return self.diag[0].copy()
        return self.diag[0] * self.diag[1] - np.abs(self.off) ** 2

    def min_eig(self) -> np.ndarray:
        if self.k == 1:
            return self.diag[0].copy()
        a, b = self.diag
        disc = np.sqrt((a - b) ** 2 + 4 * np.abs(self.off) ** 2)
        return 0.5 * (a + b - disc)

    def matrix(self, node) -> np.ndarray:
        node = tuple(node)
        if self.k == 1:
            return np.array([[self.diag[0][node]]], dtype=complex)
        c = self.off[node]
        return np.array([[self.diag[0][node], c], [np.conj(c), self.diag[1][node]]])

    def psd(self, tol: float = 0.0) -> np.ndarray:
        """Positive flag per node: trace >= -tol and det >= -tol (k=2), A >= -tol (k=1)."""
        with np.errstate(invalid="ignore"):
            if self.k == 1:
                return self.diag[0] >= -tol
            return (self.trace() >= -tol) & (self.det() >= -tol)

    def _combine(self, other: "HermitianField", op) -> "HermitianField":
        off = None if self.off is None else op(self.off, other.off)
        return HermitianField(self.grid, op(self.diag, other.diag), off)

    def __add__(self, other):
        return self._combine(other, np.add)

    def __sub__(self, other):
        return self._combine(other, np.subtract)

    def scale(self, c) -> "HermitianField":
        """Multiply by a scalar or a per-node real array."""
        c = np.asarray(c)
        off = None if self.off is None else self.off * c
        return HermitianField(self.grid, self.diag * c, off)

    def __mul__(self, c):
        return self.scale(c)

    __rmul__ = __mul__


def wirtinger_gradient(f: ScalarField) -> np.ndarray:
    """Array of shape (k, *grid.shape) holding df/dz_j = (d/dx_j - i d/dy_j) f / 2."""
    g = f.grid
    out = np.empty((g.k,) + g.shape, dtype=complex)
    for j in range(g.k):
        out[j] = 0.5 * (diff1(f.values, g, 2 * j) - 1j * diff1(f.values, g, 2 * j + 1))
    return out


def gradient_form(f: ScalarField) -> HermitianField:
    """Coefficients of df ^ d^c f: A_jk = (df/dz_j) conj(df/dz_k), rank one and PSD."""
    grad = wirtinger_gradient(f)
    diag = np.abs(grad) ** 2
    off = grad[0] * np.conj(grad[1]) if f.grid.k == 2 else None
    return HermitianField(f.grid, diag, off)


def complex_hessian(f: ScalarField) -> HermitianField:
    """Coefficients A_jk = d^2 f / dz_j dzbar_k (for k=1, A = Laplacian / 4)."""
    g, v = f.grid, f.values
    diag = np.empty((g.k,) + g.shape)
    for j in range(g.k):
        diag[j] = 0.25 * (diff2(v, g, 2 * j) + diff2(v, g, 2 * j + 1))
    off = None
    if g.k == 2:
        dx2 = diff1(v, g, 2)
        dy2 = diff1(v, g, 3)
        re = diff1(dx2, g, 0) + diff1(dy2, g, 1)
        im = diff1(dy2, g, 0) - diff1(dx2, g, 1)
        off = 0.25 * (re + 1j * im)
    return HermitianField(g, diag, off)


class Mass(NamedTuple):
    value: float
    skipped: int


class MAMass(NamedTuple):
    value: float
    clipped_mass: float
    clipped_fraction: float
    skipped: int


def _masked_sum(density: np.ndarray, m: Mask) -> tuple[float, int]:
    vals = density[m.data]
    ok = ~np.isnan(vals)
    if vals.size and not ok.any():
        raise ValueError("density undefined on every node of the mask")
    return float(np.sum(vals[ok])) * m.grid.cell_volume, int(vals.size - ok.sum())


def ddc_mass(f: ScalarField, m: Mask) -> Mass:
    """Integral of dd^c f ^ omega^{k-1} over ``m`` (Laplacian path)."""
    dens = laplacian(f).values * LAPLACIAN_DENSITY[f.grid.k]
    return Mass(*_masked_sum(dens, m))


def ddc_mass_from_hessian(hess: HermitianField, m: Mask) -> Mass:
    """Same integral computed from the trace of a complex Hessian."""
    dens = hess.trace() * TRACE_DENSITY[hess.k]
    return Mass(*_masked_sum(dens, m))


def ma_density(f: ScalarField) -> tuple[np.ndarray, np.ndarray]:
    """Node density of (dd^c f)^k against Lebesgue measure, and the clipped-node flags.

    For k=2 nodes whose Hessian is not positive (negative determinant or
    negative trace) get density 0 and are flagged.  Undefined nodes are NaN.
    """
    g = f.grid
    if g.k == 1:
        dens = laplacian(f).values * LAPLACIAN_DENSITY[1]
        return dens, np.zeros(g.shape, dtype=bool)
    hess = complex_hessian(f)
    det = hess.det()
    tr = hess.trace()
    del hess
    with np.errstate(invalid="ignore"):
        bad = (det < 0) | (tr < 0)
    dens = MA_DET_DENSITY_K2 * det
    dens[bad] = -np.abs(dens[bad])
    return dens, bad


def ma_mass(f: ScalarField, m: Mask) -> MAMass:
    """Integral of (dd^c f)^k over ``m``.

    For k=2 nodes whose Hessian is not positive (negative determinant or
    negative trace) are clipped to zero; the discarded mass is reported.
    """
    g = f.grid
    if g.k == 1:
        mass = ddc_mass(f, m)
        return MAMass(mass.value, 0.0, 0.0, mass.skipped)
    dens, bad = ma_density(f)
    d = dens[m.data]
    b = bad[m.data]
    ok = ~np.isnan(d)
    if d.size and not ok.any():
        raise ValueError("Hessian undefined on every node of the mask")
    d, b = d[ok], b[ok]
    value = float(np.sum(np.where(b, 0.0, d))) * g.cell_volume
    clipped = float(np.sum(np.abs(d[b]))) * g.cell_volume
    frac = float(b.mean()) if d.size else 0.0
    return MAMass(value, clipped, frac, int((~ok).sum()))


def wedge_density(s: HermitianField, t: HermitianField) -> np.ndarray:
    """Density of S ^ T against Lebesgue measure for k=2 (4/pi^2 times the mixed determinant)."""
    if s.k != 2:
        raise ValueError("wedge of two (1,1)-forms is a top-degree form only for k=2")
    mixed = s.diag[0] * t.diag[1] + s.diag[1] * t.diag[0] - 2 * np.real(s.off * np.conj(t.off))
    return MIXED_DENSITY_K2 * mixed


@dataclass
class DominationReport:
    violation_fraction: float
    worst_violation: float
    n_checked: int
    n_violating: int
    skipped: int
    violation_mask: Mask

    @property
    def passed(self) -> bool:
        return self.n_violating == 0


def domination_check(phi: ScalarField, psi: ScalarField, m: Mask, tol: float) -> DominationReport:
    """Test dd^c psi - dphi ^ d^c phi >= 0 node-wise on ``m``.

    k=1 tests the scalar sign; k=2 tests trace >= -tol and det >= -tol.  The
    reported violation of a node is max(-trace, -det, 0) (k=2) or max(-A, 0).
    """
    g = phi.grid
    diff = complex_hessian(psi) - gradient_form(phi)
    with np.errstate(invalid="ignore"):
        if g.k == 1:
            amount = np.maximum(-diff.diag[0], 0.0)
        else:
            amount = np.maximum(np.maximum(-diff.trace(), -diff.det()), 0.0)
    del diff
    sel = m.data & ~np.isnan(amount)
    skipped = int(np.count_nonzero(m.data & np.isnan(amount)))
    viol = sel & (amount > tol)
    n_checked = int(np.count_nonzero(sel))
    n_viol = int(np.count_nonzero(viol))
    worst = float(amount[sel].max()) if n_checked else 0.0
    frac = n_viol / n_checked if n_checked else 0.0
    return DominationReport(frac, worst, n_checked, n_viol, skipped, Mask(g, viol))
