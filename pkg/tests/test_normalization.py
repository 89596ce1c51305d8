"""Density constants pinned against symbolic differentiation and exact integrals."""
import numpy as np
import pytest
import sympy as sp

from pplab.calculus import (LAPLACIAN_DENSITY, MA_DET_DENSITY_K2, MIXED_DENSITY_K2, OMEGA_K_DENSITY,
                            TRACE_DENSITY, complex_hessian, ddc_mass, ma_mass, wedge_density)
from pplab.grid import Mask, ScalarField, integrate, make_ball_grid


def _symbolic_hessian(expr, zs):
    """d^2 f / dz_j dzbar_k from real coordinates, z_j = x_j + i y_j."""
    out = sp.zeros(len(zs), len(zs))
    for j, (xj, yj) in enumerate(zs):
        for k, (xk, yk) in enumerate(zs):
            dzj = lambda e: (sp.diff(e, xj) - sp.I * sp.diff(e, yj)) / 2  # noqa: E731
            dzbk = lambda e: (sp.diff(e, xk) + sp.I * sp.diff(e, yk)) / 2  # noqa: E731
            out[j, k] = sp.simplify(dzj(dzbk(expr)))
    return out


def test_symbolic_hessian_of_log_has_unit_flux():
    # dd^c log|z| has total mass 1: the flux of (1/2pi) grad log|z| through any circle
    x, y = sp.symbols("x y", real=True)
    r, t = sp.symbols("r t", positive=True)
    f = sp.log(x**2 + y**2) / 2
    grad_r = sp.simplify((x * sp.diff(f, x) + y * sp.diff(f, y)).subs({x: r * sp.cos(t), y: r * sp.sin(t)}) / r)
    flux = sp.integrate(grad_r * r, (t, 0, 2 * sp.pi)) * LAPLACIAN_DENSITY[1]
    assert float(flux) == pytest.approx(1.0)


def test_trace_and_laplacian_densities_agree():
    for k in (1, 2):
        # Laplacian = 4 tr A
        assert TRACE_DENSITY[k] == pytest.approx(4 * LAPLACIAN_DENSITY[k])


def test_symbolic_hessian_entries_of_monomials():
    x1, y1, x2, y2 = sp.symbols("x1 y1 x2 y2", real=True)
    zs = [(x1, y1), (x2, y2)]
    z1, z2 = x1 + sp.I * y1, x2 + sp.I * y2
    H = _symbolic_hessian(sp.expand(z1 * sp.conjugate(z2) + z2 * sp.conjugate(z1)), zs)
    assert H == sp.Matrix([[0, 1], [1, 0]])
    H = _symbolic_hessian(x1**2 + y1**2 + x2**2 + y2**2, zs)
    assert H == sp.eye(2)


def test_omega_power_volume_exact():
    # Leb(B^2) = pi, Leb(B^4) = pi^2 / 2
    assert OMEGA_K_DENSITY[1] * np.pi == pytest.approx(1.0)
    assert OMEGA_K_DENSITY[2] * np.pi**2 / 2 == pytest.approx(1.0)


def test_ma_of_r2_mass_k2():
    # (dd^c |z|^2)^2 over the unit ball of C^2: det A = 1, so (8/pi^2)(pi^2/2) = 4
    assert MA_DET_DENSITY_K2 * np.pi**2 / 2 == pytest.approx(4.0)
    g = make_ball_grid(2, 33)
    f = ScalarField.from_function(g, lambda g: g.r2)
    assert ma_mass(f, Mask.whole_ball(g)).value == pytest.approx(4.0, rel=0.05)


def test_wedge_constant_on_monomial_pairs():
    g = make_ball_grid(2, 17)
    a = complex_hessian(ScalarField.from_function(g, lambda g: np.abs(g.z(0)) ** 2))
    b = complex_hessian(ScalarField.from_function(g, lambda g: np.abs(g.z(1)) ** 2))
    c = g.center_index
    # dd^c|z1|^2 ^ dd^c|z2|^2 = (dd^c|z|^2)^2 / 2 by multilinearity
    assert wedge_density(a, b)[c] == pytest.approx(MIXED_DENSITY_K2)
    ab = a + b
    assert wedge_density(ab, ab)[c] == pytest.approx(MA_DET_DENSITY_K2 * ab.det()[c])


@pytest.mark.parametrize("k,n,tol", [(1, 257, 0.01), (2, 33, 0.05)])
def test_omega_integral(k, n, tol):
    g = make_ball_grid(k, n)
    vol = integrate(ScalarField.constant(g, 1.0), Mask.whole_ball(g)).value * OMEGA_K_DENSITY[k]
    assert vol == pytest.approx(1.0, rel=tol)


@pytest.mark.parametrize("k,n,tol", [(1, 129, 0.03), (2, 33, 0.15)])
def test_log_mass_is_one(k, n, tol):
    g = make_ball_grid(k, n)
    with np.errstate(divide="ignore"):
        f = ScalarField(g, np.maximum(np.log(g.radius), -3.0))
    assert ddc_mass(f, Mask.interior_of(g)).value == pytest.approx(1.0, rel=tol)
