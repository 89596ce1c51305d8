"""Bedford-Taylor capacity of grid masks through the relative extremal function.

Cap(E) is read off as the Monge-Ampere mass of u*_E over the whole ball.
Envelopes have kinks, so the field is mollified once at scale 2h before the
second differences are taken; the unsmoothed value is reported alongside.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import ndimage

from .calculus import ma_density
from .envelope import EnvelopeResult, relative_extremal
from .grid import GridDomain, Mask, ScalarField
from .lebesgue import make_kernel, mollify

log = logging.getLogger(__name__)


@dataclass
class CapacityEstimate:
    value: float
    resolution: int
    residual: float
    mass_outside_E: float
    raw_value: float = 0.0
    clipped_fraction: float = 0.0
    converged: bool = True
    iterations: int = 0
    u: ScalarField | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.value < 0:
            raise ValueError("capacity must be nonnegative")
        if not 0.0 <= self.mass_outside_E <= 1.0:
            raise ValueError("mass_outside_E must lie in [0, 1]")


def _total(dens: np.ndarray, sel: np.ndarray, cell: float) -> float:
    v = dens[sel]
    return float(np.sum(np.maximum(v[~np.isnan(v)], 0.0))) * cell


def dilation(E: Mask, radius: float) -> np.ndarray:
    """Nodes within Euclidean distance ``radius`` of E (exact via a distance transform)."""
    g = E.grid
    dist = ndimage.distance_transform_edt(~E.data, sampling=g.h)
    return dist <= radius + 1e-12


def cap_bt(E: Mask, g: GridDomain | None = None, tol: float = 1e-9, max_iter: int | None = None,
           kernel: str = "indicator", keep_field: bool = False,
           envelope: EnvelopeResult | None = None) -> CapacityEstimate:
    """Capacity of E relative to the unit ball.

    Negative-determinant nodes (k=2) count as zero mass; the share of such
    nodes is ``clipped_fraction``.  ``mass_outside_E`` is the share of the
    smoothed mass lying farther than 3h from E.  A precomputed u*_E can be
    passed as ``envelope`` to skip the solve.
    """
    g = E.grid if g is None else g
    if E.is_empty():
        return CapacityEstimate(0.0, g.n_per_axis, 0.0, 0.0)
    if (E.data & (g.radius > 1.0 - 2 * g.h + 1e-12)).any():
        raise ValueError("E must lie within |z| <= 1 - 2h")
    res = relative_extremal(E, g, tol=tol, max_iter=max_iter) if envelope is None else envelope
    u = res.u
    ball = g.ball

    raw, raw_bad = ma_density(u)
    raw_value = _total(raw, ball & ~raw_bad, g.cell_volume)

    smooth = mollify(u, make_kernel(g, kernel, 2 * g.h))
    dens, bad = ma_density(smooth)
    good = ball & ~bad
    value = _total(dens, good, g.cell_volume)
    near = dilation(E, 3 * g.h)
    outside = _total(dens, good & ~near, g.cell_volume)
    frac_out = outside / value if value > 0 else 0.0
    defined = ball & ~np.isnan(dens)
    clipped = float(np.count_nonzero(bad & defined)) / max(int(np.count_nonzero(defined)), 1)
    if not res.converged:
        log.warning("capacity computed from a non-converged envelope (residual %.3e)", res.residual)
    return CapacityEstimate(value, g.n_per_axis, res.residual, min(max(frac_out, 0.0), 1.0),
                            raw_value, clipped, res.converged, res.iterations, u if keep_field else None)


@dataclass
class DecayFit:
    slope: float
    intercept: float
    r2: float
    used: list[int]
    dropped: list[int]

    def bound_slope(self, lam: float, m: int = 1) -> float:
        """The slope m log(lambda/4) of the decay bound, for comparison."""
        return m * float(np.log(lam / 4.0))


def cap_decay_fit(caps: Sequence[tuple[int, float]]) -> DecayFit:
    """Least-squares fit of log Cap(K_n) against n.

    Zero capacities satisfy any decay bound trivially; they are dropped and
    listed in ``dropped``.  At least three positive values must remain.
    """
    ns, vals, dropped = [], [], []
    for n, c in caps:
        if c > 0:
            ns.append(int(n))
            vals.append(float(c))
        else:
            dropped.append(int(n))
    if dropped:
        log.info("dropped zero capacities at n=%s", dropped)
    if len(ns) < 3:
        raise ValueError(f"need at least 3 positive capacities, got {len(ns)} (dropped n={dropped})")
    x = np.asarray(ns, dtype=float)
    y = np.log(np.asarray(vals))
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    ss_res = float(np.sum(resid**2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return DecayFit(float(slope), float(intercept), r2, ns, dropped)
