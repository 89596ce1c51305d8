"""Registry of analytic (phi, psi) pairs with closed-form facts.

Radial dominators follow one recipe.  Writing s = log|w|^2, phi = g(s) and
psi = f(s), the complex Hessian of psi minus the gradient form of phi has
eigenvalue (f'' - g'^2)/|w|^2 in the radial line and f'/|w|^2 on the
orthogonal complement (k=2).  So f'' >= g'^2 with f' >= 0 gives domination
in both dimensions, and the dominator mass over the unit ball is 2 f'(0).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import integrate as spi

from .grid import GridDomain, Mask, ScalarField
from .wstar import WStarPair, poisson_dominator

LOG4 = 2.0 * np.log(2.0)


@dataclass(frozen=True)
class Fact:
    quantity: str
    value: float
    tolerance: float
    oracle: str

    def as_dict(self) -> dict:
        return {"quantity": self.quantity, "value": self.value, "tolerance": self.tolerance, "oracle": self.oracle}


@dataclass(frozen=True)
class GalleryEntry:
    name: str
    ks: tuple[int, ...]
    defaults: dict
    description: str
    alpha_range: tuple[float, float]
    build: Callable = field(repr=False)
    poisson: bool = False

    def describe(self) -> dict:
        return {"name": self.name, "k": list(self.ks), "params": {k: _jsonable(v) for k, v in self.defaults.items()},
                "description": self.description, "alpha_range": list(self.alpha_range),
                "dominator": "poisson-solved" if self.poisson else "analytic"}


def _jsonable(v):
    if isinstance(v, complex):
        return [v.real, v.imag]
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


REGISTRY: dict[str, GalleryEntry] = {}


def register(entry: GalleryEntry) -> GalleryEntry:
    REGISTRY[entry.name] = entry
    return entry


def _radial_l1(profile, k: int) -> float:
    """int_ball |profile(|w|)| omega^k: the omega^k-measure of the shell at r is 2r dr (k=1), 4r^3 dr (k=2)."""
    w = (lambda r: 2 * r) if k == 1 else (lambda r: 4 * r**3)
    val, _ = spi.quad(lambda r: abs(profile(r)) * w(r), 0.0, 1.0, limit=200, points=[1e-6, 1e-3])
    return float(val)


def _shift(g: GridDomain, a) -> np.ndarray:
    """|w - a|^2 as an open-mesh array; ``a`` is one complex number per coordinate."""
    a = np.atleast_1d(np.asarray(a, dtype=complex))
    if a.size != g.k:
        raise ValueError(f"center needs {g.k} complex coordinates")
    out = 0.0
    for j in range(g.k):
        out = out + np.abs(g.z(j) - a[j]) ** 2
    return np.broadcast_to(out, g.shape)


def truncation_radius(k: int, fprime_max: float) -> float:
    """Radius below which stencil truncation of a radial log-type Hessian exceeds the 10 h^2 tolerance.

    For psi = f(log|z|^2) the second-order stencils err by about h^2 f'/(2 r^4)
    in the radial eigenvalue.  For k=2 the determinant check multiplies that
    error by the tangential eigenvalue f'/r^2.  Both errors scale like the
    tolerance, so the radius does not shrink with h.  A 25% margin is added.
    """
    if k == 1:
        return 1.25 * (fprime_max / 20.0) ** 0.25
    return 1.25 * (fprime_max**2 / 20.0) ** (1.0 / 6.0)


def smooth_region(g: GridDomain, centers=(), radius: float = 0.0, kinks=()) -> Mask:
    """Interior nodes at distance >= radius from each center and > 3h from each kink sphere.

    ``kinks`` holds (center, rho) pairs describing spheres |z - center| = rho.
    """
    keep = g.interior.copy()
    for c in centers:
        keep &= _shift(g, np.atleast_1d(c)) >= radius**2
    for c, rho in kinks:
        d = np.sqrt(_shift(g, np.atleast_1d(c)))
        keep &= np.abs(d - rho) > 3 * g.h
    return Mask(g, keep)


def _center(g: GridDomain, a=0.0) -> np.ndarray:
    v = np.zeros(g.k, dtype=complex)
    v[0] = complex(np.atleast_1d(a)[0])
    return v


def _clip_on_ball(g: GridDomain, psi: np.ndarray) -> np.ndarray:
    """Remove rounding above 0 on the ball; outside it the analytic continuation is kept
    so that stencils reaching past the sphere see a smooth field."""
    with np.errstate(invalid="ignore"):
        return np.where(g.ball, np.minimum(psi, 0.0), psi)


def _undefined_near(g: GridDomain, values: np.ndarray, d2: np.ndarray) -> np.ndarray:
    v = np.array(values, dtype=float)
    v[d2 < (2 * g.h) ** 2] = np.nan
    return v


# ------------------------------------------------------------------ constant

def _build_constant(g: GridDomain, c: float = 0.0):
    phi = ScalarField.constant(g, c)
    psi = ScalarField.constant(g, 0.0)
    facts = [Fact("dominator_mass", 0.0, 1e-12, "psi = 0"),
             Fact("l1_norm", abs(c), 0.02, "int |c| omega^k = |c|")]
    return phi, psi, facts, "analytic", None


register(GalleryEntry("constant", (1, 2), {"c": 0.0}, "phi = c, psi = 0", (1.0, 2.0), _build_constant))


# ------------------------------------------------------------------ linear

def _build_linear(g: GridDomain):
    phi = ScalarField.from_function(g, lambda g: g.coord(0))
    psi = poisson_dominator(phi)
    facts = [Fact("dominator_mass", 0.5, 0.02, "Laplacian(psi) = 1, mass = (1/2pi) * pi"),
             Fact("l1_norm", 4.0 / (3.0 * np.pi), 0.02, "int |Re z| / pi over the disc"),
             Fact("psi_closed_form_sup_error", 0.0, 1e-3, "psi = (|z|^2 - 1)/4")]
    return phi, psi, facts, "poisson-solved", None


register(GalleryEntry("linear", (1,), {}, "phi = Re z, psi solves Laplacian(psi) = |grad phi|^2",
                      (1.0, 2.0), _build_linear, poisson=True))


# ------------------------------------------------------------------ loglog

def loglog_profiles(delta: float):
    """(phi, psi, f') as functions of t = -log|z|^2 with z = w/2, so t = 2 log 2 - log|w|^2."""
    b = 0.5 - delta
    coef = b * b / (2 * b * (1 - 2 * b))

    def phi(t):
        return t**b

    def psi(t):
        return -coef * (t ** (2 * b) - LOG4 ** (2 * b))

    def fprime(t):
        return b * b * t ** (2 * b - 1) / (1 - 2 * b)

    return phi, psi, fprime


def loglog_mass(delta: float) -> float:
    """Mass of dphi ^ d^c phi over B(0, 1/2) for phi = (-log|z|^2)^{1/2-delta} (k=1)."""
    b = 0.5 - delta
    return b * b * LOG4 ** (-2 * delta) / delta


def _build_loglog(g: GridDomain, delta: float = 0.1):
    if not 0.0 < delta < 0.5:
        raise ValueError(f"delta must lie in (0, 1/2), got {delta}")
    fphi, fpsi, fprime = loglog_profiles(delta)
    with np.errstate(divide="ignore", invalid="ignore"):
        t = LOG4 - np.log(g.r2)
        phi = _undefined_near(g, fphi(t), g.r2)
        psi = _undefined_near(g, fpsi(t), g.r2)
    psi = _clip_on_ball(g, psi)
    mass = 2 * fprime(LOG4)
    facts = [Fact("dominator_mass", mass, 0.01, "2 f'(0) for the radial dominator f(log|w|^2)"),
             Fact("pullback_leb_factor", 4.0 ** (-g.k), 0.0, "z = w/2 so dLeb_z = 4^-k dLeb_w"),
             Fact("l1_norm", _radial_l1(lambda r: fphi(LOG4 - 2 * np.log(max(r, 1e-300))), g.k), 0.02,
                  "radial quadrature of |phi| against omega^k")]
    if g.k == 1:
        facts.insert(0, Fact("gradient_form_mass", loglog_mass(delta), 0.01,
                             "int over B(0,1/2) of (2/pi) b^2 t^(-1-2 delta) |z|^-2, t = -log|z|^2"))
    region = smooth_region(g, [_center(g)], truncation_radius(g.k, mass / 2))
    return ScalarField(g, phi), ScalarField(g, psi), facts, "analytic", region


register(GalleryEntry("loglog", (1, 2), {"delta": 0.1},
                      "phi = (-log|z|^2)^(1/2-delta) on B(0,1/2), rescaled to the unit ball by z = w/2",
                      (1.0, 2.0), _build_loglog))


# ------------------------------------------------------------------ logmax

def logmax_dominator(s: np.ndarray, c: float) -> np.ndarray:
    """f(s) = s^2/8 - (c/2) s for s >= 2c and -c^2/2 below; f'' = 1/4 = g'^2 where g = s/2."""
    with np.errstate(invalid="ignore"):
        return np.where(s >= 2 * c, s * s / 8.0 - 0.5 * c * s, -0.5 * c * c)


def _build_logmax(g: GridDomain, c: float = -3.0):
    if c >= 0:
        raise ValueError("c must be negative")
    with np.errstate(divide="ignore", invalid="ignore"):
        s = np.log(g.r2)
    phi = np.maximum(0.5 * s, c)
    psi = _clip_on_ball(g, logmax_dominator(s, c))
    facts = [Fact("dominator_mass", -c, 0.02, "2 f'(0) = -c"),
             Fact("ma_mass_phi", 1.0, 0.03 if g.k == 1 else 0.15, "(dd^c log|z|)^k = Dirac mass at 0"),
             Fact("l1_norm", _radial_l1(lambda r: max(np.log(max(r, 1e-300)), c), g.k), 0.02,
                  "radial quadrature of |phi| against omega^k")]
    region = smooth_region(g, [_center(g)], truncation_radius(g.k, -c / 2), kinks=[(_center(g), np.exp(c))])
    return ScalarField(g, phi), ScalarField(g, psi), facts, "analytic", region


register(GalleryEntry("logmax", (1, 2), {"c": -3.0}, "phi = max(log|z|, c)", (1.0, 2.0), _build_logmax))


# ------------------------------------------------------------------ logsum

def _build_logsum(g: GridDomain, a=(0.3 + 0j, -0.4 + 0.2j), c=(1.0, -0.5), kappa: float = -3.0):
    a = [complex(x) for x in np.atleast_1d(a)]
    c = [float(x) for x in np.atleast_1d(c)]
    if len(a) != len(c) or not a:
        raise ValueError("a and c must be non-empty and of equal length")
    if kappa >= 0:
        raise ValueError("kappa must be negative")
    if any(abs(x) + np.exp(kappa) >= 1.0 for x in a):
        raise ValueError("every truncation disc |z - a_j| <= e^kappa must lie inside the unit disc")
    J = len(a)
    phi = np.zeros(g.shape)
    psi = np.zeros(g.shape)
    for aj, cj in zip(a, c):
        with np.errstate(divide="ignore"):
            s = np.log(_shift(g, aj))
        phi += cj * np.maximum(0.5 * s, kappa)
        top = logmax_dominator(np.array(2 * np.log(1 + abs(aj))), kappa)
        psi += J * cj * cj * (logmax_dominator(s, kappa) - top)
    facts = [Fact("phi_ddc_mass", float(sum(c)), 0.03, "each max(log|z-a_j|, kappa) carries unit dd^c mass inside the disc"),
             Fact("cauchy_schwarz_factor", float(J), 0.0, "dphi^d^cphi <= J sum c_j^2 dphi_j^d^cphi_j")]
    # the Cauchy-Schwarz factor leaves slack away from the kinks, so only the kink shells are dropped
    region = smooth_region(g, kinks=[(aj, np.exp(kappa)) for aj in a])
    return ScalarField(g, phi), ScalarField(g, _clip_on_ball(g, psi)), facts, "analytic", region


register(GalleryEntry("logsum", (1,), {"a": (0.3 + 0j, -0.4 + 0.2j), "c": (1.0, -0.5), "kappa": -3.0},
                      "phi = sum c_j max(log|z - a_j|, kappa), psi = J sum c_j^2 psi_j shifted below 0",
                      (1.0, 2.0), _build_logsum))


# ------------------------------------------------------------------ log_single

def _build_log_single(g: GridDomain, a=0.0):
    a_vec = np.zeros(g.k, dtype=complex)
    a_vec[0] = complex(np.atleast_1d(a)[0])
    if abs(a_vec[0]) >= 1:
        raise ValueError("the pole must lie inside the ball")
    d2 = _shift(g, a_vec)
    with np.errstate(divide="ignore"):
        psi = 0.5 * np.log(d2) - np.log(1 + abs(a_vec[0]))
    psi = _undefined_near(g, _clip_on_ball(g, psi), d2)
    facts = []
    if g.k == 1 or a_vec[0] == 0:
        facts.append(Fact("dominator_mass", 1.0, 0.03, "dd^c log|z - a| = Dirac mass at a"))
    region = smooth_region(g, [a_vec], truncation_radius(g.k, 0.5))
    return ScalarField.constant(g, 0.0), ScalarField(g, psi), facts, "analytic", region


register(GalleryEntry("log_single", (1, 2), {"a": 0.0}, "phi = 0, psi = log|z - a| - log(1 + |a|)",
                      (1.0, 2.0), _build_log_single))


# ------------------------------------------------------------------ api

def names() -> list[str]:
    return sorted(REGISTRY)


def get(name: str) -> GalleryEntry:
    try:
        return REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown gallery entry {name!r}; known: {', '.join(names())}") from None


def instantiate(name: str, g: GridDomain, **params) -> tuple[WStarPair, list[Fact]]:
    entry = get(name)
    if g.k not in entry.ks:
        raise ValueError(f"entry {name!r} supports k in {entry.ks}, not {g.k}")
    unknown = set(params) - set(entry.defaults)
    if unknown:
        raise ValueError(f"unknown parameters for {name!r}: {sorted(unknown)}")
    phi, psi, facts, prov, region = entry.build(g, **{**entry.defaults, **params})
    return WStarPair(phi, psi, prov, region), facts


@dataclass
class WitnessRow:
    r: float
    circle_mean: float
    ratio: float
    closed_form: float


@dataclass
class Alpha2Witness:
    beta: float
    rows: list[WitnessRow]
    inconclusive: bool
    increasing: bool


def alpha2_failure_witness(g: GridDomain, delta: float, alpha: float, r_list, n_theta: int = 256) -> Alpha2Witness:
    """Circle means M(r) of -phi^alpha for phi = (-log|z|^2)^{1/2-delta} and the ratio -M(r)/log(1/r).

    A subharmonic u <= -phi^alpha would force this ratio to stay bounded as r -> 0.
    When beta = alpha (1/2 - delta) <= 1 the ratio tends to 0 and nothing is certified.
    """
    if g.k != 1:
        raise ValueError("the witness is one-dimensional")
    if not 0.0 < delta < 0.5:
        raise ValueError("delta must lie in (0, 1/2)")
    beta = alpha * (0.5 - delta)
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    rows = []
    for r in sorted(r_list, reverse=True):
        if not 0.0 < r < 0.5:
            raise ValueError("radii must lie in (0, 1/2)")
        z = r * np.exp(1j * theta)
        vals = -((-np.log(np.abs(z) ** 2)) ** (0.5 - delta)) ** alpha
        M = float(vals.mean())
        L = np.log(1.0 / r)
        rows.append(WitnessRow(float(r), M, -M / L, 2.0 * (2.0 * L) ** (beta - 1.0)))
    ratios = [row.ratio for row in rows]
    increasing = bool(np.all(np.diff(ratios) > 0))
    return Alpha2Witness(beta, rows, beta <= 1.0, increasing)
