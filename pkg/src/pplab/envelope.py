"""Discrete plurisubharmonic envelopes and relative extremal functions.

A grid function is treated as psh when, at every interior node x and for
every direction zeta of a fixed finite set, it lies below its four-point
average on the circle of radius |zeta| h in the complex line through zeta:

    u(x) <= (u(x + h zeta) + u(x - h zeta) + u(x + i h zeta) + u(x - i h zeta)) / 4.

Directions are lattice vectors (integer real and imaginary parts in {-1, 0, 1})
so every stencil point is a grid node.  The envelope of an obstacle g is the
largest such u with u <= g, obtained as the fixed point of
u <- min(g, min_zeta average_zeta(u)).  The fixed point is unique, so the
Jacobi iteration and the projected SOR accelerator land on the same field.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numba
import numpy as np

from .grid import GridDomain, Mask, ScalarField

log = logging.getLogger(__name__)

K1_DIRECTIONS = ((1 + 0j,),)
K2_DIRECTIONS = (
    (1, 0), (0, 1),
    (1, 1), (1, -1), (1, 1j), (1, -1j),
    (1 + 1j, 1), (1 - 1j, 1), (1, 1 + 1j), (1, 1 - 1j),
)


def default_directions(k: int) -> tuple[tuple[complex, ...], ...]:
    if k == 1:
        return K1_DIRECTIONS
    if k == 2:
        return tuple(tuple(complex(c) for c in d) for d in K2_DIRECTIONS)
    raise ValueError(f"unsupported dimension k={k}")


def stencil_shifts(zeta) -> tuple[np.ndarray, np.ndarray]:
    """Real lattice shifts of h*zeta and i*h*zeta in axis order (x1, y1, x2, y2)."""
    z = np.asarray(zeta, dtype=complex)
    s1 = np.column_stack([z.real, z.imag]).ravel()
    iz = 1j * z
    s2 = np.column_stack([iz.real, iz.imag]).ravel()
    for s in (s1, s2):
        if not np.allclose(s, np.rint(s)) or np.abs(s).max() > 1:
            raise ValueError(f"direction {zeta!r} is not a unit lattice direction")
    return np.rint(s1).astype(int), np.rint(s2).astype(int)


def flat_offsets(g: GridDomain, dirs) -> np.ndarray:
    """(ndir, 4) flat-index offsets of the four stencil points of each direction."""
    if any(len(d) != g.k for d in dirs):
        raise ValueError("direction length does not match the grid dimension")
    if not dirs:
        raise ValueError("direction set is empty")
    strides = np.array([g.n_per_axis ** (g.ndim - 1 - a) for a in range(g.ndim)])
    offs = np.empty((len(dirs), 4), dtype=np.int64)
    for i, d in enumerate(dirs):
        s1, s2 = stencil_shifts(d)
        o1, o2 = int(s1 @ strides), int(s2 @ strides)
        offs[i] = (o1, -o1, o2, -o2)
    return offs


@numba.njit(cache=True)
def _best(u, g, i, t, offs, bpos, binv):
    """min(g, min over directions of the (boundary-corrected) four-point average) at node i."""
    best = g[i]
    row = bpos[t]
    for d in range(offs.shape[0]):
        if row < 0:
            a = 0.25 * (u[i + offs[d, 0]] + u[i + offs[d, 1]] + u[i + offs[d, 2]] + u[i + offs[d, 3]])
        else:
            num = 0.0
            den = 0.0
            for j in range(4):
                w = binv[row, d, j]
                if w > 0.0:
                    num += w * u[i + offs[d, j]]
                    den += w
                else:
                    num += u[i + offs[d, j]]
                    den += 1.0
            a = num / den
        if a < best:
            best = a
    return best


@numba.njit(cache=True)
def _jacobi_update(u, g, idx, offs, bpos, binv, out):
    res = 0.0
    for t in range(idx.size):
        i = idx[t]
        best = _best(u, g, i, t, offs, bpos, binv)
        out[i] = best
        r = abs(u[i] - best)
        if r > res:
            res = r
    return res


@numba.njit(cache=True)
def _residual(u, g, idx, offs, bpos, binv):
    res = 0.0
    for t in range(idx.size):
        i = idx[t]
        r = abs(u[i] - _best(u, g, i, t, offs, bpos, binv))
        if r > res:
            res = r
    return res


@numba.njit(cache=True)
def _sor_sweep(u, g, idx, offs, bpos, binv, omega):
    for t in range(idx.size):
        i = idx[t]
        best = _best(u, g, i, t, offs, bpos, binv)
        if best < g[i]:
            best = u[i] + omega * (best - u[i])
            if best > g[i]:
                best = g[i]
        u[i] = best


def _solve_nodes(g: GridDomain) -> np.ndarray:
    """Nodes updated by the solver: the open unit ball."""
    return g.radius < 1.0 - 1e-12


def boundary_weights(g: GridDomain, idx: np.ndarray, offs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sphere-crossing weights for stencil points outside the open ball.

    A stencil point y = x + s with |y| >= 1 is replaced by the linear
    interpolant through u(x) and the boundary value at the crossing
    x + theta s, |x + theta s| = 1.  Solving the submean condition for u(x)
    turns this into a positive weight 1/theta on the boundary value.  Returns
    ``bpos`` (row per solver node, -1 when no stencil point leaves the ball)
    and the (rows, ndir, 4) weight table (0 marks an inside point).
    """
    coords = np.stack(np.unravel_index(idx, g.shape), axis=1).astype(float)
    coords = (coords - g.n_per_axis // 2) * g.h
    r2 = g.r2.ravel()
    outside = np.zeros((idx.size, offs.shape[0], 4), dtype=bool)
    for d in range(offs.shape[0]):
        for j in range(4):
            outside[:, d, j] = r2[idx + offs[d, j]] >= 1.0 - 1e-12
    rows = np.flatnonzero(outside.any(axis=(1, 2)))
    bpos = np.full(idx.size, -1, dtype=np.int64)
    bpos[rows] = np.arange(rows.size)
    binv = np.zeros((rows.size, offs.shape[0], 4))
    x = coords[rows]
    for d in range(offs.shape[0]):
        for j in range(4):
            sel = outside[rows, d, j]
            if not sel.any():
                continue
            yi = idx[rows[sel]] + offs[d, j]
            y = (np.stack(np.unravel_index(yi, g.shape), axis=1) - g.n_per_axis // 2) * g.h
            xs = x[sel]
            s = y - xs
            a = (s * s).sum(axis=1)
            b = 2.0 * (xs * s).sum(axis=1)
            c = (xs * xs).sum(axis=1) - 1.0
            theta = (-b + np.sqrt(b * b - 4.0 * a * c)) / (2.0 * a)
            binv[sel.nonzero()[0], d, j] = 1.0 / np.clip(theta, 1e-6, 1.0)
    return bpos, binv


@dataclass
class EnvelopeResult:
    u: ScalarField
    iterations: int
    residual: float
    psh_violation: float
    converged: bool
    method: str


def sor_factor(g: GridDomain) -> float:
    """Relaxation factor for the "sor" method.

    k=1 uses the optimal factor for the slowest mode of the disc.  For k=2 the
    minimum over several directions does not tolerate over-relaxation (the
    iteration stalls or blows up from about 1.5 on), so plain Gauss-Seidel is used.
    """
    if g.k == 1:
        return 2.0 / (1.0 + np.sin(np.pi * g.h / 2.0))
    return 1.0


def psh_envelope(obstacle: ScalarField, boundary_value: ScalarField, dirs=None,
                 tol: float = 1e-9, max_iter: int | None = None, method: str = "jacobi",
                 omega: float | None = None, check_every: int = 25) -> EnvelopeResult:
    """Largest discrete psh field below ``obstacle`` with the given values on the sphere.

    Nodes of the open ball are solved for; the remaining nodes hold
    min(boundary_value, obstacle) and enter stencils through the crossing
    weights of :func:`boundary_weights`.  ``method`` is "jacobi"
    (simultaneous updates, monotone decreasing iterates) or "sor" (in-place
    projected over-relaxation; ``omega=1`` is plain Gauss-Seidel).
    """
    g = obstacle.grid
    dirs = default_directions(g.k) if dirs is None else tuple(dirs)
    if max_iter is None:
        max_iter = 10 * g.n_per_axis**2
    solve = _solve_nodes(g)
    near = ~solve & (g.radius <= 1.0 + 2 * g.h)
    if np.isnan(obstacle.values).any() or (~np.isfinite(boundary_value.values[near])).any():
        raise ValueError("obstacle must be defined and boundary values finite near the sphere")
    offs = flat_offsets(g, dirs)
    idx = np.flatnonzero(solve).astype(np.int64)
    bpos, binv = boundary_weights(g, idx, offs)
    gv = obstacle.values.ravel().astype(float)
    u = gv.copy()
    pinned = ~solve.ravel()
    u[pinned] = np.minimum(boundary_value.values.ravel()[pinned], gv[pinned])

    it, res, converged = 0, np.inf, False
    if method == "jacobi":
        other = u.copy()
        while it < max_iter:
            res = _jacobi_update(u, gv, idx, offs, bpos, binv, other)
            u, other = other, u
            it += 1
            if res <= tol:
                converged = True
                break
    elif method == "sor":
        w = sor_factor(g) if omega is None else omega
        while it < max_iter:
            n = min(check_every, max_iter - it)
            for _ in range(n):
                _sor_sweep(u, gv, idx, offs, bpos, binv, w)
            it += n
            res = _residual(u, gv, idx, offs, bpos, binv)
            if res <= tol:
                converged = True
                break
            if not np.isfinite(res):
                break
    else:
        raise ValueError(f"unknown method {method!r}")
    if not converged:
        log.warning("envelope did not converge: residual %.3e after %d iterations", res, it)
    field = ScalarField(g, u.reshape(g.shape))
    viol = psh_residual(field, dirs, Mask.interior_of(g))
    return EnvelopeResult(field, it, float(res), viol, converged, method)


def relative_extremal(E: Mask, g: GridDomain | None = None, tol: float = 1e-9,
                      max_iter: int | None = None, dirs=None, method: str = "sor") -> EnvelopeResult:
    """Discrete u*_E: envelope of the obstacle -1 on E, 0 elsewhere, with zero boundary values."""
    g = E.grid if g is None else g
    if E.is_empty():
        raise ValueError("E must be non-empty")
    obstacle = ScalarField(g, np.where(E.data, -1.0, 0.0))
    return psh_envelope(obstacle, ScalarField.constant(g, 0.0), dirs, tol, max_iter, method)


def _stencil_ok(g: GridDomain) -> np.ndarray:
    n = g.n_per_axis
    ok = np.zeros(g.shape, dtype=bool)
    ok[(slice(1, n - 1),) * g.ndim] = True
    return ok


def psh_defect(u: ScalarField, dirs=None) -> np.ndarray:
    """Per-node max over directions of u(x) - four-point average (NaN where no stencil is defined)."""
    g = u.grid
    dirs = default_directions(g.k) if dirs is None else tuple(dirs)
    out = np.full(g.size, np.nan)
    idx = np.flatnonzero(_stencil_ok(g))
    v = u.values.ravel()
    center = v[idx]
    with np.errstate(invalid="ignore"):
        worst = np.full(idx.size, -np.inf)
        for o in flat_offsets(g, dirs):
            avg = 0.25 * (v[idx + o[0]] + v[idx + o[1]] + v[idx + o[2]] + v[idx + o[3]])
            worst = np.fmax(worst, center - avg)
    worst[~np.isfinite(worst)] = np.nan
    out[idx] = worst
    return out.reshape(g.shape)


def psh_residual(u: ScalarField, dirs=None, m: Mask | None = None) -> float:
    """max over nodes of m and directions of u(x) - four-point average, floored at 0.

    Nodes whose stencil touches an undefined value are skipped.
    """
    g = u.grid
    dirs = default_directions(g.k) if dirs is None else tuple(dirs)
    sel = _stencil_ok(g) if m is None else (m.data & _stencil_ok(g))
    idx = np.flatnonzero(sel)
    if idx.size == 0:
        return 0.0
    v = u.values.ravel()
    center = v[idx]
    worst = 0.0
    with np.errstate(invalid="ignore"):
        for o in flat_offsets(g, dirs):
            avg = 0.25 * (v[idx + o[0]] + v[idx + o[1]] + v[idx + o[2]] + v[idx + o[3]])
            d = center - avg
            d = d[~np.isnan(d)]
            if d.size:
                worst = max(worst, float(d.max()))
    return max(worst, 0.0)
