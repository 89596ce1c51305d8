import numpy as np
import pytest

from pplab.grid import Mask, ScalarField, ball_mask, make_ball_grid
from pplab.wstar import (DominationError, WStarPair, exp_moment, flux_mass, normalize_pair, poisson_dominator,
                         poisson_solve, star_norm, star_norm_report)


def test_poisson_dominator_of_linear_function():
    g = make_ball_grid(1, 129)
    phi = ScalarField.from_function(g, lambda g: np.real(g.z(0)))
    psi = poisson_dominator(phi)
    exact = (g.r2 - 1) / 4
    assert np.abs(psi.values - exact)[g.ball].max() < 1e-6
    # the discrete Laplacian of a quadratic is exact, so the flux equals the scaled interior area
    interior = Mask.interior_of(g)
    assert flux_mass(psi) == pytest.approx(interior.measure() / (2 * np.pi), rel=1e-6)


def test_poisson_solve_constant_source():
    g = make_ball_grid(1, 65)
    res = poisson_solve(ScalarField.constant(g, 4.0))
    assert res.converged
    np.testing.assert_allclose(res.psi.values[g.ball], (g.r2 - 1)[g.ball], atol=1e-7)


def test_poisson_dominator_only_in_one_variable():
    g = make_ball_grid(2, 17)
    with pytest.raises(NotImplementedError):
        poisson_dominator(ScalarField.constant(g, 0.0))


def test_pair_validation():
    g = make_ball_grid(1, 17)
    with pytest.raises(ValueError):
        WStarPair(ScalarField.constant(g, 1.0), ScalarField.constant(g, 0.5))
    with pytest.raises(ValueError):
        WStarPair(ScalarField.constant(g, 1.0), ScalarField.constant(g, -1.0), provenance="guess")


def test_star_norm_and_normalization():
    g = make_ball_grid(1, 129)
    phi = ScalarField.from_function(g, lambda g: np.real(g.z(0)))
    p = WStarPair(phi, poisson_dominator(phi), "poisson-solved")
    rep = star_norm_report(p)
    assert rep.l1 == pytest.approx(4 / (3 * np.pi), rel=0.01)
    assert rep.value == pytest.approx(rep.l1 + np.sqrt(rep.mass))
    assert star_norm(normalize_pair(p)) == pytest.approx(1.0, abs=1e-9)


def test_star_norm_refuses_undominated_pair():
    g = make_ball_grid(1, 65)
    phi = ScalarField.from_function(g, lambda g: 3 * np.real(g.z(0)))
    p = WStarPair(phi, ScalarField.from_function(g, lambda g: (g.r2 - 1) / 4))
    with pytest.raises(DominationError):
        star_norm(p)


def test_exp_moment_of_zero_is_volume():
    g = make_ball_grid(1, 129)
    K = ball_mask(g, [0], 0.5)
    m = exp_moment(ScalarField.constant(g, 0.0), K, 1.0, 1.5)
    assert m.value == pytest.approx(K.measure())
    with pytest.raises(ValueError):
        exp_moment(ScalarField.constant(g, 0.0), K, 1.0, 2.0)
    with pytest.raises(ValueError):
        exp_moment(ScalarField.constant(g, 0.0), K, 0.0, 1.5)


def test_exp_moment_overflow_reported():
    g = make_ball_grid(1, 33)
    m = exp_moment(ScalarField.constant(g, 1e4), Mask.whole_ball(g), 1.0, 1.5)
    assert m.value == np.inf and m.overflow_nodes > 0
