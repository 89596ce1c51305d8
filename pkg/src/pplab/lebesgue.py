"""Averaging kernels, mollification and Lebesgue-point diagnostics.

Kernels live on the lattice: a kernel of scale eps is a set of integer
offsets with |offset| h <= eps and nonnegative weights summing to one.
Non-finite samples (undefined or -inf) are dropped and the remaining weights
renormalized; the dropped weight is reported as the excluded-mass fraction.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numba
import numpy as np

from .grid import GridDomain, Mask, ScalarField

KINDS = ("indicator", "smooth_radial")


def ball_volume(k: int) -> float:
    return np.pi**k / float(np.prod(np.arange(1, k + 1)))


def density_cap(k: int) -> float:
    """The constant M in eps^{2k} * density <= M: twice the indicator's value 1/vol(B(0,1))."""
    return 2.0 / ball_volume(k)


def lattice_ball(ndim: int, radius: float) -> np.ndarray:
    """Integer offsets within ``radius`` (in node units), in lexicographic order."""
    m = int(np.floor(radius + 1e-9))
    pts = np.array(list(itertools.product(range(-m, m + 1), repeat=ndim)), dtype=np.int64)
    keep = (pts**2).sum(axis=1) <= radius * radius + 1e-9
    return pts[keep]


@dataclass(frozen=True, eq=False)
class UnityKernel:
    """Discrete approximation of unity supported in B(0, eps).

    ``smooth_radial`` uses the profile 1 - (|y|/eps)^(2k+2), whose peak stays
    below twice the mean so the density bound holds with M = 2/vol(B(0,1)).
    """

    grid: GridDomain
    kind: str
    eps: float
    offsets: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)

    @property
    def density_bound(self) -> float:
        """eps^{2k} times the largest weight density."""
        g = self.grid
        return self.eps ** g.ndim * float(self.weights.max()) / g.cell_volume

    def flat_offsets(self) -> np.ndarray:
        g = self.grid
        strides = np.array([g.n_per_axis ** (g.ndim - 1 - a) for a in range(g.ndim)], dtype=np.int64)
        return self.offsets @ strides


def make_kernel(g: GridDomain, kind: str, eps: float) -> UnityKernel:
    if kind not in KINDS:
        raise ValueError(f"unknown kernel kind {kind!r}")
    if eps < 2 * g.h - 1e-12:
        raise ValueError(f"eps={eps:g} is below 2h={2 * g.h:g}; kernel is not resolved")
    R = eps / g.h
    offs = lattice_ball(g.ndim, R)
    if kind == "indicator":
        w = np.ones(len(offs))
    else:
        rho = np.sqrt((offs**2).sum(axis=1)) / R
        w = 1.0 - rho ** (g.ndim + 2)
    w = w / w.sum()
    kern = UnityKernel(g, kind, float(eps), offs, w)
    if kern.density_bound > density_cap(g.k) + 1e-12:
        raise AssertionError("kernel violates the density bound")
    return kern


@numba.njit(cache=True)
def _convolve(v, idx, offs, w, out, excluded):
    for t in range(idx.size):
        i = idx[t]
        s = 0.0
        ws = 0.0
        for j in range(offs.size):
            x = v[i + offs[j]]
            if np.isfinite(x):
                s += w[j] * x
                ws += w[j]
        out[i] = s / ws if ws > 0.0 else np.nan
        excluded[t] = 1.0 - ws


def mollify_region(g: GridDomain, eps: float) -> np.ndarray:
    """Nodes whose eps-ball stays clear of the boundary band."""
    return g.radius + eps <= 1.0 - g.h + 1e-12


def mollify_with_report(phi: ScalarField, kern: UnityKernel) -> tuple[ScalarField, float]:
    """Convolve with ``kern``; returns the field and the largest excluded-mass fraction."""
    g = phi.grid
    if kern.grid != g:
        raise ValueError("kernel built for a different grid")
    idx = np.flatnonzero(mollify_region(g, kern.eps)).astype(np.int64)
    out = np.full(g.size, np.nan)
    excluded = np.zeros(idx.size)
    _convolve(np.ascontiguousarray(phi.values).ravel(), idx, kern.flat_offsets(), kern.weights, out, excluded)
    worst = float(excluded.max()) if excluded.size else 0.0
    return ScalarField(g, out.reshape(g.shape)), worst


def mollify(phi: ScalarField, kern: UnityKernel) -> ScalarField:
    return mollify_with_report(phi, kern)[0]


def _check_node(g: GridDomain, node, radius_nodes: float) -> tuple[int, ...]:
    node = tuple(int(i) for i in node)
    m = int(np.floor(radius_nodes + 1e-9))
    if any(i - m < 0 or i + m >= g.n_per_axis for i in node):
        raise ValueError(f"ball of radius {radius_nodes:g}h around {node} leaves the grid")
    return node


def _ball_samples(phi: ScalarField, node, radius: float) -> tuple[np.ndarray, np.ndarray]:
    g = phi.grid
    R = radius / g.h
    node = _check_node(g, node, R)
    offs = lattice_ball(g.ndim, R)
    pts = tuple((offs + np.asarray(node)).T)
    return phi.values[pts], offs


def mollify_at(phi: ScalarField, kern: UnityKernel, node) -> float:
    g = phi.grid
    node = _check_node(g, node, kern.eps / g.h)
    vals = phi.values[tuple((kern.offsets + np.asarray(node)).T)]
    ok = np.isfinite(vals)
    ws = kern.weights[ok].sum()
    return float(np.dot(kern.weights[ok], vals[ok]) / ws) if ws > 0 else float("nan")


def _center_value(phi: ScalarField, node, value: float | None) -> float:
    v = phi.at(node) if value is None else float(value)
    if not np.isfinite(v):
        raise ValueError(f"value at {tuple(node)} is {v}; not a candidate Lebesgue point")
    return v


def lebesgue_ratio(phi: ScalarField, x0, eps_list: Iterable[float], value: float | None = None) -> list[float]:
    """Mean of |phi(x0 + y) - phi(x0)| over the lattice ball |y| <= eps.

    ``value`` overrides phi(x0), e.g. a declared placeholder at a singular point.
    """
    g = phi.grid
    c = _center_value(phi, x0, value)
    out = []
    for eps in eps_list:
        if eps < 2 * g.h - 1e-12:
            raise ValueError(f"eps={eps:g} is below 2h")
        vals, _ = _ball_samples(phi, x0, eps)
        vals = vals[~np.isnan(vals)]
        out.append(float(np.mean(np.abs(vals - c))))
    return out


def density_ratio(u: ScalarField, x0, delta: float, r_list: Iterable[float]) -> list[tuple[float, float, float]]:
    """(b_r, c_r, b_r/c_r) with b_r the measure of B(x0,r) where |u - u(x0)| >= delta."""
    if delta <= 0:
        raise ValueError("delta must be positive")
    g = u.grid
    c0 = _center_value(u, x0, None)
    out = []
    for r in r_list:
        vals, _ = _ball_samples(u, x0, r)
        vals = vals[~np.isnan(vals)]
        with np.errstate(invalid="ignore"):
            far = np.abs(vals - c0) >= delta
        c_r = vals.size * g.cell_volume
        b_r = int(np.count_nonzero(far)) * g.cell_volume
        out.append((b_r, c_r, b_r / c_r if c_r else float("nan")))
    return out


def masked_mean(u: ScalarField, x0, r_list: Iterable[float], V: Mask) -> list[tuple[float, float]]:
    """(c_r^-1 int_{B cap V} u, c_r^-1 int_{B minus V} |u|) for each radius."""
    g = u.grid
    _center_value(u, x0, None)
    out = []
    for r in r_list:
        vals, offs = _ball_samples(u, x0, r)
        inside = V.data[tuple((offs + np.asarray(x0)).T)]
        ok = ~np.isnan(vals)
        n = np.count_nonzero(ok)
        if n == 0:
            raise ValueError("no defined samples in the ball")
        vin = vals[ok & inside]
        vout = vals[ok & ~inside]
        out.append((float(vin.sum()) / n, float(np.abs(vout).sum()) / n))
    return out


def mollifier_convergence(phi: ScalarField, points: Sequence, kinds: Sequence[str] = KINDS,
                          eps_list: Sequence[float] = (), values: Sequence[float | None] | None = None) -> list[dict]:
    """Table of |phi_eps(x) - phi(x)| per point, eps and kernel kind, plus cross-kernel deviation.

    ``values`` optionally supplies declared reference values (one per point).
    """
    g = phi.grid
    rows = []
    for p_i, node in enumerate(points):
        node = tuple(int(i) for i in node)
        if not (g.radius[node] < 1.0 - g.h):
            raise ValueError(f"point {node} is not an interior node")
        ref = values[p_i] if values is not None and values[p_i] is not None else phi.at(node)
        for eps in eps_list:
            by_kind = {kind: mollify_at(phi, make_kernel(g, kind, eps), node) for kind in kinds}
            vals = list(by_kind.values())
            cross = float(max(vals) - min(vals))
            for kind, v in by_kind.items():
                rows.append({"point": p_i, "eps": float(eps), "kind": kind, "value": v,
                             "reference": float(ref), "error": abs(v - ref), "cross_deviation": cross})
    return rows
