"""Truncated potentials h_n, the currents T_n and energy probes over test dictionaries.

The energies are suprema over psh test functions with values in [0, 1].
Here the supremum runs over a finite dictionary, so every probe value is a
lower bound for the true quantity.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .calculus import (OMEGA_K_DENSITY, TRACE_DENSITY, HermitianField, complex_hessian, gradient_form,
                       wedge_density)
from .envelope import psh_residual
from .grid import GridDomain, Mask, ScalarField
from .wstar import WStarPair

PHI_CLIP = 1e3
MAX_M = 3
LOWER_BOUND = "lower bound (finite dictionary)"


@dataclass
class TestDictionary:
    __test__ = False  # not a pytest class

    grid: GridDomain
    members: list[ScalarField] = field(repr=False)
    names: list[str]

    def __len__(self):
        return len(self.members)

    def check(self, tol: float) -> list[tuple[str, float]]:
        """Raise unless every member lies in [0, 1] on the ball and has psh residual <= tol."""
        out = []
        ball = self.grid.ball
        for name, v in zip(self.names, self.members):
            vals = v.values[ball]
            if np.isnan(vals).any() or vals.min() < 0.0 or vals.max() > 1.0:
                raise ValueError(f"dictionary member {name} leaves [0, 1]")
            r = psh_residual(v, m=Mask.interior_of(self.grid))
            if r > tol:
                raise ValueError(f"dictionary member {name} has psh residual {r:.3e} > {tol:.3e}")
            out.append((name, r))
        return out

    def hessians(self) -> list[HermitianField]:
        return [complex_hessian(v) for v in self.members]


def default_dictionary(g: GridDomain, seed: int = 0, n_shifts: int = 2) -> TestDictionary:
    """|z|^2, shifted |z - a|^2 / 4, clipped logs max(0, 1 + log(|z - a|/2)/3) and 1/2.

    Shifts a = s e_j are drawn from ``seed`` with s uniform in [0.2, 0.8]
    along a random coordinate axis.
    """
    rng = np.random.default_rng(seed)
    members = [ScalarField.from_function(g, lambda g: g.r2)]
    names = ["|z|^2"]
    for _ in range(n_shifts):
        j = int(rng.integers(g.ndim))
        s = float(rng.uniform(0.2, 0.8)) * (1 if rng.integers(2) else -1)
        a = np.zeros(g.ndim)
        a[j] = s
        d2 = sum((g.coord(ax) - a[ax]) ** 2 for ax in range(g.ndim))
        members.append(ScalarField.from_function(g, lambda g, d2=d2: d2 / 4.0))
        names.append(f"|z-a|^2/4 (axis {j}, {s:+.4f})")
        with np.errstate(divide="ignore"):
            logv = np.maximum(0.0, 1.0 + np.log(np.sqrt(d2) / 2.0) / 3.0)
        members.append(ScalarField.from_function(g, lambda g, v=logv: v))
        names.append(f"max(0, 1 + log(|z-a|/2)/3) (axis {j}, {s:+.4f})")
    members.append(ScalarField.constant(g, 0.5))
    names.append("1/2")
    return TestDictionary(g, members, names)


def h_level(psi: ScalarField, n: int) -> ScalarField:
    """h_n = 1 + max(psi, -n)/n, in [0, 1] for psi <= 0 and 0 on {psi <= -n}."""
    if n < 1:
        raise ValueError("n must be at least 1")
    with np.errstate(invalid="ignore"):
        if (psi.values[psi.grid.ball] > 1e-12).any():
            raise ValueError("psi must be nonpositive on the ball")
        return ScalarField(psi.grid, 1.0 + np.maximum(psi.values, -float(n)) / n)


def _stencil_inside(region: np.ndarray, reach: int = 2) -> np.ndarray:
    """Nodes whose whole box of half-width ``reach`` lies in ``region``."""
    return ndimage.binary_erosion(region, structure=np.ones((2 * reach + 1,) * region.ndim, dtype=bool),
                                  border_value=0)


@dataclass
class TCurrent:
    T: HermitianField = field(repr=False)
    h: ScalarField = field(repr=False)
    checked: int
    gradient_violations: int
    potential_violations: int
    worst: float

    @property
    def passed(self) -> bool:
        return self.gradient_violations == 0 and self.potential_violations == 0


def t_current(psi: ScalarField, n: int, tol: float | None = None, m: Mask | None = None) -> TCurrent:
    """T_n = dd^c h_n^2 / 2 with the node-wise checks T_n >= dh ^ d^c h and T_n >= h dd^c h.

    Checks run on ``m`` (default: interior) minus nodes whose stencil meets an
    undefined value or straddles the kink {psi = -n}.
    """
    g = psi.grid
    tol = 10 * g.h**2 if tol is None else tol
    h = h_level(psi, n)
    T = complex_hessian(h * h).scale(0.5)
    G = gradient_form(h)
    hh = complex_hessian(h).scale(h.values)
    with np.errstate(invalid="ignore"):
        above = psi.values > -n
        below = psi.values < -n
    smooth = _stencil_inside(above) | _stencil_inside(below)
    base = Mask.interior_of(g).data if m is None else m.data
    sel = base & smooth & T.defined & G.defined & hh.defined
    ok1 = (T - G).psd(tol)
    ok2 = (T - hh).psd(tol)
    with np.errstate(invalid="ignore"):
        d1 = np.maximum(-(T - G).min_eig(), 0.0)
        d2 = np.maximum(-(T - hh).min_eig(), 0.0)
    worst = float(max(d1[sel].max(initial=0.0), d2[sel].max(initial=0.0)))
    return TCurrent(T, h, int(sel.sum()), int((sel & ~ok1).sum()), int((sel & ~ok2).sum()), worst)


def clip_hessian_check(psi: ScalarField, n: int) -> tuple[int, float]:
    """Max |dd^c max(psi, -n) - dd^c psi| over nodes whose stencil lies in {psi > -n}.

    Returns (node count, max deviation); the deviation is exactly 0 since both
    stencils read identical values there.
    """
    with np.errstate(invalid="ignore"):
        above = psi.values > -n
    sel = _stencil_inside(above) & psi.grid.ball
    clipped = ScalarField(psi.grid, np.maximum(psi.values, -float(n)))
    a, b = complex_hessian(clipped), complex_hessian(psi)
    dev = np.abs(a.diag - b.diag).max(axis=0)
    if a.off is not None:
        dev = np.maximum(dev, np.abs(a.off - b.off))
    dev = dev[sel & ~np.isnan(dev)]
    return int(sel.sum()), float(dev.max(initial=0.0))


@dataclass
class Probe:
    value: float
    best: tuple[int, ...]
    skipped: int
    label: str = LOWER_BOUND


def _phi_power(phi: ScalarField, m: int) -> np.ndarray:
    if not 0 <= m <= MAX_M:
        raise ValueError(f"m must lie in 0..{MAX_M}")
    with np.errstate(invalid="ignore"):
        return np.minimum(np.abs(phi.values), PHI_CLIP) ** (2 * m)


def _integrate(dens: np.ndarray, K: Mask) -> tuple[float, int]:
    v = dens[K.data]
    ok = ~np.isnan(v)
    return float(v[ok].sum()) * K.grid.cell_volume, int(v.size - ok.sum())


def _sup(weight: np.ndarray, K: Mask, p_deg: int, dictionary: TestDictionary | None,
         top: HermitianField | None) -> Probe:
    """max over p_deg-tuples of int_K weight * dd^c v_1 ^ ... ^ [top] ^ omega^rest."""
    g = K.grid
    k = g.k
    if p_deg == 0:
        if top is None:
            dens = weight * OMEGA_K_DENSITY[k]
        else:
            dens = weight * TRACE_DENSITY[k] * top.trace()
        val, sk = _integrate(dens, K)
        return Probe(val, (), sk)
    if dictionary is None or len(dictionary) == 0:
        raise ValueError("a non-empty test dictionary is required when p_deg > 0")
    hs = dictionary.hessians()
    best = None
    for combo in itertools.combinations_with_replacement(range(len(hs)), p_deg):
        forms = [hs[i] for i in combo] + ([top] if top is not None else [])
        if len(forms) == 1:
            dens = weight * TRACE_DENSITY[k] * forms[0].trace()
        else:
            dens = weight * wedge_density(forms[0], forms[1])
        val, sk = _integrate(dens, K)
        if best is None or val > best.value:
            best = Probe(val, combo, sk)
    return best


def probe_J(p: WStarPair, psi: ScalarField | None, n: int, m: int, p_deg: int, K: Mask,
            dictionary: TestDictionary | None = None) -> Probe:
    """sup over the dictionary of int_K phi^{2m} dd^c v_1 ^ ... ^ T_n ^ omega^{k-1-p}."""
    k = p.grid.k
    if not 0 <= p_deg <= k - 1:
        raise ValueError(f"p_deg must lie in 0..{k - 1}")
    psi = p.psi if psi is None else psi
    T = t_current(psi, n).T
    return _sup(_phi_power(p.phi, m), K, p_deg, dictionary, T)


def probe_I(p: WStarPair, psi: ScalarField | None, n: int, m: int, p_deg: int, K: Mask,
            dictionary: TestDictionary | None = None) -> Probe:
    """sup over the dictionary of int_K h_n^2 phi^{2m} dd^c v_1 ^ ... ^ omega^{k-p}."""
    k = p.grid.k
    if not 0 <= p_deg <= k:
        raise ValueError(f"p_deg must lie in 0..{k}")
    psi = p.psi if psi is None else psi
    h = h_level(psi, n).values
    return _sup(h * h * _phi_power(p.phi, m), K, p_deg, dictionary, None)


@dataclass
class GrowthFit:
    exponent: float
    intercept: float
    r2: float


def growth_exponent(ns, values) -> GrowthFit:
    """Least-squares slope of log(value) against log(n); nonpositive values are rejected."""
    ns = np.asarray(ns, dtype=float)
    vals = np.asarray(values, dtype=float)
    if (vals <= 0).any():
        raise ValueError("growth fit needs positive values")
    x, y = np.log(ns), np.log(vals)
    slope, icpt = np.polyfit(x, y, 1)
    ss_tot = float(((y - y.mean()) ** 2).sum())
    ss_res = float(((y - slope * x - icpt) ** 2).sum())
    return GrowthFit(float(slope), float(icpt), 1.0 if ss_tot == 0 else 1 - ss_res / ss_tot)
