"""Dominated pairs (phi, psi) with dphi ^ d^c phi <= dd^c psi, the witness norm and moments.

The norm reported here uses the supplied psi, so it is an upper bound for the
infimum over all dominating currents; reports call it the witness norm.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numba
import numpy as np
from scipy.special import logsumexp

from .calculus import LAPLACIAN_DENSITY, OMEGA_K_DENSITY, DominationReport, domination_check, wirtinger_gradient
from .grid import GridDomain, Mask, ScalarField, integrate

log = logging.getLogger(__name__)

PROVENANCES = ("analytic", "poisson-solved", "user-supplied")
# fraction of checked nodes allowed to violate domination (grid noise near singularities)
DOMINATION_SLACK = 1e-3


class ConvergenceError(RuntimeError):
    pass


class DominationError(ValueError):
    def __init__(self, report: DominationReport):
        super().__init__(f"domination fails on {report.violation_fraction:.3%} of nodes "
                         f"(worst {report.worst_violation:.3e})")
        self.report = report


@dataclass(frozen=True, eq=False)
class WStarPair:
    phi: ScalarField
    psi: ScalarField
    provenance: str = "user-supplied"
    # nodes where pointwise domination is asserted; None means the interior
    check_region: Mask | None = None

    def __post_init__(self):
        if self.provenance not in PROVENANCES:
            raise ValueError(f"unknown provenance {self.provenance!r}")
        if self.phi.grid != self.psi.grid:
            raise ValueError("phi and psi live on different grids")
        with np.errstate(invalid="ignore"):
            if (self.psi.values[self.grid.ball] > 1e-12).any():
                raise ValueError("psi must be nonpositive on the ball")

    @property
    def grid(self) -> GridDomain:
        return self.phi.grid

    def domination(self, tol: float | None = None, m: Mask | None = None) -> DominationReport:
        g = self.grid
        tol = 10 * g.h**2 if tol is None else tol
        if m is None:
            m = Mask.interior_of(g) if self.check_region is None else self.check_region
        return domination_check(self.phi, self.psi, m, tol)


# ---------------------------------------------------------------- Poisson solve

def _axis_weights(g: GridDomain, idx: np.ndarray) -> np.ndarray:
    """Shortley-Weller arm lengths (in units of h) for each node and axis direction.

    Returns an (nodes, ndim, 2) array: 1 for a full arm, theta < 1 when the arm
    crosses the unit sphere before reaching the next node.
    """
    coords = (np.stack(np.unravel_index(idx, g.shape), axis=1) - g.n_per_axis // 2) * g.h
    r2 = (coords**2).sum(axis=1)
    arms = np.ones((idx.size, g.ndim, 2))
    for a in range(g.ndim):
        for s, sign in enumerate((1.0, -1.0)):
            x = coords[:, a]
            y = x + sign * g.h
            rest = r2 - x * x
            out = rest + y * y >= 1.0 - 1e-12
            if out.any():
                # |x + sign*theta*h e_a| = 1
                disc = np.sqrt(np.maximum(1.0 - rest[out], 0.0))
                theta = (disc - sign * x[out]) / g.h
                arms[out, a, s] = np.clip(theta, 1e-6, 1.0)
    return arms


@numba.njit(cache=True)
def _poisson_sweep(u, rhs, idx, strides, arms, h2, omega):
    res = 0.0
    for t in range(idx.size):
        i = idx[t]
        num = -rhs[i] * h2
        den = 0.0
        for a in range(strides.size):
            hp = arms[t, a, 0]
            hm = arms[t, a, 1]
            c = 2.0 / (hp + hm)
            up = u[i + strides[a]] if hp == 1.0 else 0.0
            um = u[i - strides[a]] if hm == 1.0 else 0.0
            num += c * (up / hp + um / hm)
            den += c * (1.0 / hp + 1.0 / hm)
        new = num / den
        d = new - u[i]
        if abs(d) > res:
            res = abs(d)
        u[i] += omega * d
    return res


@dataclass
class PoissonResult:
    psi: ScalarField
    iterations: int
    update: float
    converged: bool
    skipped: int


def poisson_solve(rhs: ScalarField, tol: float = 1e-10, max_iter: int | None = None,
                  omega: float | None = None) -> PoissonResult:
    """Solve Laplacian(psi) = rhs in the open ball with psi = 0 on the sphere.

    Boundary arms use Shortley-Weller lengths, so the sphere itself carries
    the zero data.  Undefined rhs nodes are treated as zero source and counted.
    ``omega=1`` gives Gauss-Seidel; the default is the optimal SOR factor.
    """
    g = rhs.grid
    solve = g.radius < 1.0 - 1e-12
    idx = np.flatnonzero(solve).astype(np.int64)
    f = rhs.values.ravel().copy()
    bad = ~np.isfinite(f) & solve.ravel()
    skipped = int(np.count_nonzero(bad))
    f[~np.isfinite(f)] = 0.0
    arms = _axis_weights(g, idx)
    strides = np.array([g.n_per_axis ** (g.ndim - 1 - a) for a in range(g.ndim)], dtype=np.int64)
    w = 2.0 / (1.0 + np.sin(np.pi * g.h / 2.0)) if omega is None else omega
    max_iter = 10 * g.n_per_axis**2 if max_iter is None else max_iter
    u = np.zeros(g.size)
    it, upd, converged = 0, np.inf, False
    while it < max_iter:
        upd = _poisson_sweep(u, f, idx, strides, arms, g.h**2, w)
        it += 1
        if upd <= tol:
            converged = True
            break
    return PoissonResult(ScalarField(g, u.reshape(g.shape)), it, float(upd), converged, skipped)


def poisson_dominator(phi: ScalarField, g: GridDomain | None = None, tol: float = 1e-10,
                      max_iter: int | None = None) -> ScalarField:
    """psi with Laplacian(psi) = |grad phi|^2 and psi = 0 on the sphere (k=1 only).

    In one complex variable this makes dd^c psi equal dphi ^ d^c phi, and the
    maximum principle gives psi <= 0.
    """
    g = phi.grid if g is None else g
    if g.k != 1:
        raise NotImplementedError("Poisson dominators are only available for k=1; "
                                  "k=2 dominators must be supplied analytically")
    grad = wirtinger_gradient(phi)[0]
    rhs = ScalarField(g, 4.0 * np.abs(grad) ** 2)
    res = poisson_solve(rhs, tol=tol, max_iter=max_iter)
    if not res.converged:
        raise ConvergenceError(f"Poisson solve stalled: update {res.update:.3e} after {res.iterations} sweeps")
    if res.skipped:
        log.warning("%d nodes with undefined gradient treated as zero source", res.skipped)
    return ScalarField(g, np.minimum(res.psi.values, 0.0))


# ---------------------------------------------------------------- norms

def flux_mass(psi: ScalarField, region: Mask | None = None) -> float:
    """Integral of dd^c psi ^ omega^{k-1} over ``region`` by the discrete divergence theorem.

    The sum of the 2k-point Laplacian over a node set telescopes to the sum of
    (psi_out - psi_in) h^{2k-2} over lattice edges leaving the set, so only the
    values next to the region's edge matter.  This is the same number as the
    Laplacian Riemann sum but insensitive to undefined nodes deep inside.
    """
    g = psi.grid
    R = (Mask.interior_of(g) if region is None else region).data
    v = psi.values
    total = 0.0
    for a in range(g.ndim):
        for step in (1, -1):
            nb = np.roll(R, -step, axis=a)
            vn = np.roll(v, -step, axis=a)
            edge = R & ~nb
            # rolled-in wraparound entries sit on the box faces, never next to a ball node
            d = vn[edge] - v[edge]
            if np.isnan(d).any():
                raise ValueError("psi undefined next to the region's edge")
            total += float(d.sum())
    return total * g.h ** (g.ndim - 2) * LAPLACIAN_DENSITY[g.k]


@dataclass
class StarNorm:
    value: float
    l1: float
    mass: float
    domination: DominationReport
    label: str = "witness norm"

    def __float__(self):
        return self.value


def star_norm_report(p: WStarPair, g: GridDomain | None = None, check: bool = True) -> StarNorm:
    g = p.grid if g is None else g
    rep = p.domination()
    if check and rep.violation_fraction > DOMINATION_SLACK:
        raise DominationError(rep)
    absphi = ScalarField(g, np.abs(p.phi.values))
    l1 = integrate(absphi, Mask.whole_ball(g)).value * OMEGA_K_DENSITY[g.k]
    mass = max(flux_mass(p.psi), 0.0)
    return StarNorm(l1 + np.sqrt(mass), l1, mass, rep)


def star_norm(p: WStarPair, g: GridDomain | None = None) -> float:
    """int |phi| omega^k + (int dd^c psi ^ omega^{k-1})^{1/2} with the pair's own psi."""
    return star_norm_report(p, g).value


@dataclass
class ExpMoment:
    value: float
    log_value: float
    skipped: int
    overflow_nodes: int


def exp_moment(phi: ScalarField, K: Mask, c: float, alpha: float) -> ExpMoment:
    """int_K exp(c |phi|^alpha) dLeb, accumulated in log-sum-exp form."""
    if not 1.0 <= alpha < 2.0:
        raise ValueError(f"alpha must lie in [1, 2), got {alpha}")
    if c <= 0:
        raise ValueError("c must be positive")
    g = phi.grid
    vals = phi.values[K.data]
    ok = ~np.isnan(vals)
    skipped = int(vals.size - ok.sum())
    vals = vals[ok]
    if vals.size == 0:
        return ExpMoment(0.0, -np.inf, skipped, 0)
    with np.errstate(over="ignore"):
        expo = c * np.abs(vals) ** alpha
    overflow = int(np.count_nonzero(~np.isfinite(expo)))
    if overflow:
        return ExpMoment(np.inf, np.inf, skipped, overflow)
    lv = float(logsumexp(expo)) + g.ndim * np.log(g.h)
    value = float(np.exp(lv)) if lv < 709.0 else np.inf
    return ExpMoment(value, lv, skipped, int(value == np.inf))


def normalize_pair(p: WStarPair) -> WStarPair:
    """Rescale to witness norm 1: phi / s and psi / s^2."""
    s = star_norm(p)
    if s <= 0:
        raise ValueError("pair has zero norm")
    return replace(p, phi=p.phi * (1.0 / s), psi=p.psi * (1.0 / s**2))
