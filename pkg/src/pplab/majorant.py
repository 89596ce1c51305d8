"""The truncated psh majorant built from level sets of a dominated pair.

With K_n = {x in K : phi >= 2^n, psi >= -lambda^n} and u*_n the relative
extremal function of K_n,

    u = sum_{n<=N} 2^{n alpha} u*_n + sum_{n<=N} 2^{n alpha} max(psi, -lambda^n) / lambda^n.

On nodes with phi in [2^n, 2^{n+1}) either psi <= -lambda^n, so the tail term
of index n alone is <= -2^{n alpha}, or x lies in K_n and u*_n(x) = -1.  Either
way 2^alpha u(x) <= -phi(x)^alpha.  The truncated sum can only certify nodes
with phi < 2^{N+1} and psi >= -lambda^N; the rest goes to the exception mask.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .envelope import psh_defect, psh_residual, relative_extremal
from .grid import GridDomain, Mask, ScalarField, integrate
from .wstar import WStarPair

log = logging.getLogger(__name__)


def default_lambda(alpha: float) -> float:
    """Midpoint of the admissible interval (2^alpha, 4)."""
    return (2.0**alpha + 4.0) / 2.0


def check_parameters(alpha: float, lam: float) -> None:
    if not 1.0 <= alpha < 2.0:
        raise ValueError(f"alpha must lie in [1, 2), got {alpha}")
    if not 2.0**alpha < lam < 4.0:
        raise ValueError(f"lambda must satisfy 2^alpha = {2.0**alpha:.6g} < lambda < 4, got {lam}")


def level_sets(phi: ScalarField, psi: ScalarField, K: Mask, lam: float, N: int) -> list[Mask]:
    """K_n = K cap {phi >= 2^n} cap {psi >= -lambda^n} for n = 1..N (ties go into K_n)."""
    with np.errstate(invalid="ignore"):
        if (phi.values[K.data] < 0).any():
            raise ValueError("phi must be nonnegative on K")
        if (psi.values[K.data] > 1e-12).any():
            raise ValueError("psi must be nonpositive on K")
        out = []
        for n in range(1, N + 1):
            sel = K.data & (phi.values >= 2.0**n) & (psi.values >= -(lam**n))
            out.append(Mask(K.grid, sel))
    return out


@dataclass
class TailSeries:
    w: ScalarField
    dropped_bound: float
    dropped_field: ScalarField = field(repr=False)


def tail_series(psi: ScalarField, alpha: float, lam: float, N: int) -> TailSeries:
    """Partial sum w_N = sum_{n=1}^N 2^{n alpha} max(psi, -lambda^n) / lambda^n.

    The dropped tail at a node is at most |psi| q^{N+1} / (1 - q), q = 2^alpha / lambda;
    ``dropped_bound`` is its sup (infinite when psi is unbounded).
    """
    q = 2.0**alpha / lam
    if q >= 1.0:
        raise ValueError(f"lambda = {lam} must exceed 2^alpha = {2.0**alpha:.6g} for the series to converge")
    v = psi.values
    w = np.zeros(v.shape)
    with np.errstate(invalid="ignore"):
        for n in range(1, N + 1):
            w += (2.0**alpha / lam) ** n * np.maximum(v, -(lam**n))
        per_node = np.abs(v) * q ** (N + 1) / (1.0 - q)
    finite = per_node[~np.isnan(per_node)]
    bound = float(finite.max()) if finite.size else 0.0
    return TailSeries(ScalarField(psi.grid, w), bound, ScalarField(psi.grid, per_node))


@dataclass
class MajorantReport:
    certified_nodes: int
    violating_nodes: int
    violation_fraction: float
    worst_violation: float
    weak_bound_violations: int
    psh_residual: float
    psh_residual_all: float
    input_defect_nodes: int
    l1_norm: float
    witness_value: float
    witness_node: tuple[int, ...]
    exception_nodes: int
    level_counts: list[int]
    vacuous: bool

    def as_dict(self) -> dict:
        d = dict(self.__dict__)
        d["witness_node"] = list(self.witness_node)
        return d


@dataclass
class MajorantBundle:
    alpha: float
    lam: float
    N: int
    K_masks: list[Mask] = field(repr=False)
    u_fields: list[ScalarField | None] = field(repr=False)
    w_tail: TailSeries = field(repr=False)
    u: ScalarField = field(repr=False)
    exception_mask: Mask = field(repr=False)
    certified_mask: Mask = field(repr=False)
    violation_mask: Mask = field(repr=False)
    report: MajorantReport = None


def build_majorant(p: WStarPair, K: Mask, alpha: float, lam: float | None = None, N: int = 8,
                   tol: float = 1e-9, max_iter: int | None = None) -> MajorantBundle:
    """Assemble u and check 2^alpha u <= -phi^alpha node-wise on the certified region."""
    g = p.grid
    lam = default_lambda(alpha) if lam is None else lam
    check_parameters(alpha, lam)
    phi, psi = p.phi, p.psi
    Ks = level_sets(phi, psi, K, lam, N)
    u_stars: list[ScalarField | None] = []
    total = np.zeros(g.shape)
    for n, Kn in enumerate(Ks, start=1):
        if Kn.is_empty():
            u_stars.append(None)
            continue
        res = relative_extremal(Kn, g, tol=tol, max_iter=max_iter)
        if not res.converged:
            log.warning("u*_%d did not converge (residual %.3e)", n, res.residual)
        u_stars.append(res.u)
        total += 2.0 ** (n * alpha) * res.u.values
    tail = tail_series(psi, alpha, lam, N)
    u = ScalarField(g, total + tail.w.values)

    pv, sv, uv = phi.values, psi.values, u.values
    with np.errstate(invalid="ignore"):
        undefined = np.isnan(pv) | np.isnan(sv) | np.isnan(uv)
        beyond = (pv >= 2.0 ** (N + 1)) | (sv < -(lam**N))
        exception = K.data & (undefined | beyond)
        certified = K.data & ~exception & (pv >= 2.0)
        gap = 2.0**alpha * uv + np.abs(pv) ** alpha
        # each u*_n carries envelope error <= tol, amplified by its coefficient 2^{n alpha}
        slack = 2.0**alpha * tol * sum(2.0 ** (n * alpha) for n in range(1, N + 1))
        viol = certified & (gap > slack)
        weak = K.data & ~undefined & (2.0**alpha * uv > -(np.abs(pv) ** alpha) + 2.0**alpha + slack)

    ncert = int(np.count_nonzero(certified))
    nviol = int(np.count_nonzero(viol))
    worst = float(gap[certified].max()) if ncert else 0.0
    defined_ball = g.ball & ~np.isnan(uv)
    flat = np.where(defined_ball, uv, -np.inf)
    x0 = np.unravel_index(int(np.argmax(flat)), g.shape)
    l1 = integrate(ScalarField(g, np.abs(uv)), K).value
    # u can only be as psh as the psi it is built from: nodes where psi itself fails
    # the discrete submean test (near its singularities) are reported separately
    with np.errstate(invalid="ignore"):
        input_bad = g.interior & ~(psh_defect(psi) <= tol)
    interior = Mask.interior_of(g)
    report = MajorantReport(
        certified_nodes=ncert, violating_nodes=nviol, violation_fraction=nviol / ncert if ncert else 0.0,
        worst_violation=worst, weak_bound_violations=int(np.count_nonzero(weak)),
        psh_residual=psh_residual(u, m=interior - Mask(g, input_bad)),
        psh_residual_all=psh_residual(u, m=interior), input_defect_nodes=int(np.count_nonzero(input_bad)),
        l1_norm=l1,
        witness_value=float(uv[x0]), witness_node=tuple(int(i) for i in x0),
        exception_nodes=int(np.count_nonzero(exception)), level_counts=[m.count for m in Ks],
        vacuous=ncert == 0)
    return MajorantBundle(alpha, lam, N, Ks, u_stars, tail, u, Mask(g, exception), Mask(g, certified),
                          Mask(g, viol), report)


def split_signed(phi: ScalarField) -> tuple[ScalarField, ScalarField]:
    """(max(phi, 0), -min(phi, 0)); their difference reproduces phi exactly."""
    with np.errstate(invalid="ignore"):
        return (ScalarField(phi.grid, np.maximum(phi.values, 0.0)),
                ScalarField(phi.grid, -np.minimum(phi.values, 0.0)))


@dataclass
class BudgetSummary:
    masks: list[Mask] = field(repr=False)
    measures: list[float] = field(default_factory=list)
    n0: int = 1
    tail_measure: float = 0.0
    ball_measure: float = 0.0

    @property
    def holds(self) -> bool:
        return self.tail_measure < self.ball_measure


def budget_sets(u_fields: list[ScalarField | None], alpha: float, g: GridDomain | None = None,
                n0: int = 4) -> BudgetSummary:
    """B_n = {2^{n alpha} u*_n < rho / n^2} with rho = |z|^2 - 1, indexed n = 1, 2, ...

    ``None`` entries stand for u*_n = 0, whose budget set is empty since rho <= 0.
    """
    if g is None:
        g = next((u.grid for u in u_fields if u is not None), None)
        if g is None:
            raise ValueError("grid needed when every u*_n is zero")
    rho = g.r2 - 1.0
    masks, meas = [], []
    for n, u in enumerate(u_fields, start=1):
        if u is None:
            m = Mask.empty(g)
        else:
            with np.errstate(invalid="ignore"):
                m = Mask.from_array(g, 2.0 ** (n * alpha) * u.values < rho / n**2)
        masks.append(m)
        meas.append(m.measure())
    tail = float(sum(meas[n0 - 1:]))
    return BudgetSummary(masks, meas, n0, tail, Mask.whole_ball(g).measure())
