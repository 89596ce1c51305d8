"""Uniform box grids over the unit ball of C^k, masks, scalar fields and quadrature.

Axes are ordered (x1, y1, x2, y2, ...) so that z_j = x_j + i y_j lives on axes
2j and 2j+1.  Undefined values are stored as NaN and the extended value -inf
is stored as-is, so numpy's IEEE rules give extended-real arithmetic for free.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np

FINITE, NEG_INFINITY, UNDEFINED = 0, 1, 2


@dataclass(frozen=True)
class GridDomain:
    k: int
    n_per_axis: int

    @property
    def h(self) -> float:
        return 2.0 / (self.n_per_axis - 1)

    @property
    def ndim(self) -> int:
        return 2 * self.k

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n_per_axis,) * self.ndim

    @property
    def size(self) -> int:
        return self.n_per_axis ** self.ndim

    @property
    def cell_volume(self) -> float:
        return self.h ** self.ndim

    @property
    def center_index(self) -> tuple[int, ...]:
        return (self.n_per_axis // 2,) * self.ndim

    @cached_property
    def axis(self) -> np.ndarray:
        n = self.n_per_axis
        c = n // 2
        # exact symmetric coordinates, the origin is exactly 0
        return (np.arange(n) - c) * self.h

    def coord(self, a: int) -> np.ndarray:
        """Real coordinate along axis ``a`` as an open-mesh (broadcastable) array."""
        shp = [1] * self.ndim
        shp[a] = self.n_per_axis
        return self.axis.reshape(shp)

    def z(self, j: int) -> np.ndarray:
        """Complex coordinate z_j as an open-mesh array."""
        return self.coord(2 * j) + 1j * self.coord(2 * j + 1)

    @cached_property
    def r2(self) -> np.ndarray:
        out = np.zeros(self.shape)
        for a in range(self.ndim):
            out += self.coord(a) ** 2
        return out

    @cached_property
    def radius(self) -> np.ndarray:
        return np.sqrt(self.r2)

    @cached_property
    def interior(self) -> np.ndarray:
        return self.radius < 1.0 - self.h

    @cached_property
    def ball(self) -> np.ndarray:
        return self.radius <= 1.0 + 1e-12

    @cached_property
    def band(self) -> np.ndarray:
        return self.ball & ~self.interior

    @cached_property
    def exterior(self) -> np.ndarray:
        return ~self.ball

    def node_coords(self, node: Sequence[int]) -> np.ndarray:
        return self.axis[np.asarray(node)]

    def nearest_node(self, point) -> tuple[int, ...]:
        """Index of the node closest to a point given as k complex numbers or 2k reals."""
        x = as_real_point(point, self.k)
        idx = np.rint(x / self.h).astype(int) + self.n_per_axis // 2
        if np.any(idx < 0) or np.any(idx >= self.n_per_axis):
            raise ValueError(f"point {point!r} lies outside the grid box")
        return tuple(int(i) for i in idx)

    def ball_volume(self) -> float:
        """Exact Lebesgue measure of the unit ball in C^k."""
        return np.pi ** self.k / float(np.prod(np.arange(1, self.k + 1)))


def as_real_point(point, k: int) -> np.ndarray:
    """k complex numbers (or k reals, read as real parts) or 2k reals -> 2k reals."""
    p = np.atleast_1d(np.asarray(point))
    if np.iscomplexobj(p) or p.size == k:
        p = np.column_stack([p.real, p.imag]).ravel()
    p = p.astype(float)
    if p.size != 2 * k:
        raise ValueError(f"expected {k} complex or {2 * k} real coordinates, got {point!r}")
    return p


def make_ball_grid(k: int, n_per_axis: int) -> GridDomain:
    if k not in (1, 2):
        raise ValueError(f"unsupported dimension k={k}; only k=1 and k=2 are implemented")
    if n_per_axis % 2 == 0:
        raise ValueError(f"n_per_axis must be odd so that the origin is a node, got {n_per_axis}")
    if n_per_axis < 17:
        raise ValueError(f"n_per_axis must be at least 17, got {n_per_axis}")
    return GridDomain(k, n_per_axis)


@dataclass(frozen=True, eq=False)
class Mask:
    """Boolean node set, always a subset of the closed unit ball."""

    grid: GridDomain
    data: np.ndarray

    def __post_init__(self):
        if self.data.shape != self.grid.shape or self.data.dtype != bool:
            raise ValueError("mask data must be a boolean array of the grid shape")
        if (self.data & ~self.grid.ball).any():
            raise ValueError("mask contains nodes outside the closed unit ball")

    @classmethod
    def from_array(cls, grid: GridDomain, data: np.ndarray) -> "Mask":
        """Build a mask, clipping ``data`` to the closed ball."""
        return cls(grid, np.asarray(data, dtype=bool) & grid.ball)

    @classmethod
    def empty(cls, grid: GridDomain) -> "Mask":
        return cls(grid, np.zeros(grid.shape, dtype=bool))

    @classmethod
    def whole_ball(cls, grid: GridDomain) -> "Mask":
        return cls(grid, grid.ball.copy())

    @classmethod
    def interior_of(cls, grid: GridDomain) -> "Mask":
        return cls(grid, grid.interior.copy())

    def __and__(self, other: "Mask") -> "Mask":
        return Mask(self.grid, self.data & other.data)

    def __or__(self, other: "Mask") -> "Mask":
        return Mask(self.grid, self.data | other.data)

    def __sub__(self, other: "Mask") -> "Mask":
        return Mask(self.grid, self.data & ~other.data)

    def __invert__(self) -> "Mask":
        return Mask(self.grid, self.grid.ball & ~self.data)

    def __eq__(self, other) -> bool:
        return isinstance(other, Mask) and self.grid == other.grid and np.array_equal(self.data, other.data)

    def __le__(self, other: "Mask") -> bool:
        return not (self.data & ~other.data).any()

    @property
    def count(self) -> int:
        return int(np.count_nonzero(self.data))

    def is_empty(self) -> bool:
        return not self.data.any()

    def measure(self) -> float:
        """Discrete Lebesgue measure (node count times cell volume)."""
        return self.count * self.grid.cell_volume


def ball_mask(g: GridDomain, center, r: float) -> Mask:
    if r <= 0:
        raise ValueError("radius must be positive")
    c = as_real_point(center, g.k)
    d2 = np.zeros(g.shape)
    for a in range(g.ndim):
        d2 += (g.coord(a) - c[a]) ** 2
    return Mask.from_array(g, d2 <= r * r * (1 + 1e-12))


@dataclass(frozen=True, eq=False)
class ScalarField:
    grid: GridDomain
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != self.grid.shape:
            raise ValueError(f"field shape {self.values.shape} does not match grid {self.grid.shape}")

    @classmethod
    def constant(cls, grid: GridDomain, c: float) -> "ScalarField":
        return cls(grid, np.full(grid.shape, float(c)))

    @classmethod
    def from_function(cls, grid: GridDomain, fn) -> "ScalarField":
        """Sample ``fn(grid)``; the result is broadcast to the full grid shape."""
        with np.errstate(all="ignore"):
            v = np.asarray(fn(grid), dtype=float)
        return cls(grid, np.array(np.broadcast_to(v, grid.shape)))

    @property
    def flags(self) -> np.ndarray:
        out = np.full(self.values.shape, FINITE, dtype=np.int8)
        out[np.isneginf(self.values)] = NEG_INFINITY
        out[np.isnan(self.values) | np.isposinf(self.values)] = UNDEFINED
        return out

    @property
    def defined(self) -> np.ndarray:
        return ~np.isnan(self.values)

    @property
    def finite(self) -> np.ndarray:
        return np.isfinite(self.values)

    def undefined_where(self, where: np.ndarray) -> "ScalarField":
        v = self.values.copy()
        v[where] = np.nan
        return ScalarField(self.grid, v)

    def at(self, node: Sequence[int]) -> float:
        return float(self.values[tuple(node)])

    def _binary(self, other, op):
        o = other.values if isinstance(other, ScalarField) else other
        with np.errstate(invalid="ignore", over="ignore"):
            return ScalarField(self.grid, op(self.values, o))

    def __add__(self, other):
        return self._binary(other, np.add)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binary(other, np.subtract)

    def __rsub__(self, other):
        return self._binary(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._binary(other, np.multiply)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binary(other, np.divide)

    def __neg__(self):
        return ScalarField(self.grid, -self.values)

    def maximum(self, other) -> "ScalarField":
        return self._binary(other, np.maximum)

    def minimum(self, other) -> "ScalarField":
        return self._binary(other, np.minimum)


class Integral(NamedTuple):
    value: float
    skipped: int


def integrate(f: ScalarField, m: Mask) -> Integral:
    """Riemann sum of ``f`` over ``m``; undefined nodes are skipped and counted."""
    vals = f.values[m.data]
    if vals.size == 0:
        return Integral(0.0, 0)
    ok = ~np.isnan(vals)
    skipped = int(vals.size - np.count_nonzero(ok))
    if skipped == vals.size:
        raise ValueError("every node of the mask is undefined")
    # numpy's pairwise summation over a C-ordered selection is order-fixed
    total = float(np.sum(vals[ok])) * f.grid.cell_volume
    return Integral(total, skipped)
