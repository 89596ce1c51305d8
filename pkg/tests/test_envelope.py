import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pplab.acceptance import extremal_closed_form
from pplab.envelope import psh_defect, psh_envelope, psh_residual, relative_extremal
from pplab.grid import Mask, ScalarField, ball_mask, make_ball_grid


def test_disc_extremal_matches_closed_form():
    g = make_ball_grid(1, 129)
    res = relative_extremal(ball_mask(g, [0], 0.3), g)
    assert res.converged
    err = np.abs(res.u.values - extremal_closed_form(g, 0.3))[g.ball].max()
    assert err < 0.03
    assert res.psh_violation < 1e-8


def test_jacobi_and_sor_agree():
    g = make_ball_grid(1, 65)
    E = ball_mask(g, [0.2], 0.25)
    a = relative_extremal(E, g, method="jacobi", tol=1e-10)
    b = relative_extremal(E, g, method="sor", tol=1e-10)
    assert np.abs(a.u.values - b.u.values).max() < 1e-7


def test_envelope_stays_below_obstacle():
    g = make_ball_grid(1, 65)
    obs = ScalarField.from_function(g, lambda g: np.cos(4 * g.coord(0)) * np.sin(3 * g.coord(1)))
    res = psh_envelope(obs, ScalarField.constant(g, 0.0), method="sor")
    assert (res.u.values <= obs.values + 1e-12).all()
    assert psh_residual(res.u, m=Mask.interior_of(g)) < 1e-8


@settings(max_examples=8, deadline=None)
@given(st.floats(0.1, 0.4), st.floats(0.05, 0.3))
def test_envelope_monotone_in_the_set(r, extra):
    g = make_ball_grid(1, 33)
    small = relative_extremal(ball_mask(g, [0], r), g, tol=1e-11).u.values
    big = relative_extremal(ball_mask(g, [0], min(r + extra, 0.85)), g, tol=1e-11).u.values
    assert (big <= small + 1e-9).all()


def test_k2_envelope_is_radial_and_close():
    g = make_ball_grid(2, 17)
    res = relative_extremal(ball_mask(g, [0, 0], 0.5), g)
    assert res.converged
    err = np.abs(res.u.values - extremal_closed_form(g, 0.5))[g.ball].max()
    assert err < 0.2
    assert (res.u.values[g.ball] <= 1e-12).all()


def test_psh_defect_of_convex_function_is_nonpositive():
    g = make_ball_grid(2, 17)
    d = psh_defect(ScalarField.from_function(g, lambda g: g.r2))
    assert np.nanmax(d) <= 1e-12


def test_relative_extremal_rejects_empty_set():
    g = make_ball_grid(1, 17)
    with pytest.raises(ValueError):
        relative_extremal(Mask.empty(g), g)
