import numpy as np
import pytest

from pplab import gallery
from pplab.calculus import TRACE_DENSITY
from pplab.energy import (LOWER_BOUND, TestDictionary, default_dictionary, growth_exponent, h_level,
                          clip_hessian_check, probe_I, probe_J, t_current)
from pplab.grid import Mask, ScalarField, ball_mask, integrate, make_ball_grid

G1 = make_ball_grid(1, 129)
G2 = make_ball_grid(2, 17)


def log_abs(g):
    return ScalarField.from_function(g, lambda g: np.log(np.where(g.radius > 0, g.radius, np.nan)))


def test_h_level_values():
    psi = ScalarField(G1, np.where(G1.ball, -G1.radius * 10, 0.0))
    h = h_level(psi, 2)
    assert h.values[G1.center_index] == pytest.approx(1.0)
    assert np.nanmin(h.values[G1.ball]) == pytest.approx(0.0)
    with pytest.raises(ValueError):
        h_level(psi, 0)
    with pytest.raises(ValueError):
        h_level(ScalarField.constant(G1, 0.1), 1)


def test_constant_potential_gives_zero_current():
    tc = t_current(ScalarField.constant(G1, -0.5), 1)
    assert np.nanmax(np.abs(tc.T.trace())) == pytest.approx(0.0, abs=1e-12)
    assert tc.passed


def test_current_of_log_has_mass_one_half():
    tc = t_current(log_abs(G1), 2)
    mass = integrate(ScalarField(G1, TRACE_DENSITY[1] * tc.T.trace()), Mask.interior_of(G1)).value
    assert mass == pytest.approx(0.5, rel=0.03)
    assert tc.passed and tc.checked > 0


@pytest.mark.parametrize("n", [1, 2, 3])
def test_current_dominations_in_two_variables(n):
    p, _ = gallery.instantiate("loglog", G2)
    # stay clear of the small ball where the profile is truncated
    region = Mask(G2, G2.interior & (G2.radius >= 0.3))
    tc = t_current(p.psi, n, m=region)
    assert tc.checked > 0
    assert tc.passed, tc.worst


def test_clipping_leaves_the_hessian_alone_above_the_cut():
    p, _ = gallery.instantiate("loglog", G2)
    count, dev = clip_hessian_check(p.psi, 2)
    assert count > 0 and dev == 0.0
    count, dev = clip_hessian_check(log_abs(G1), 3)
    assert count > 0 and dev == 0.0


def test_default_dictionary_is_admissible():
    for g in (G1, G2):
        d = default_dictionary(g, seed=3)
        assert len(d) == 6
        d.check(10 * g.h**2)


def test_dictionary_check_rejects_bad_members():
    d = TestDictionary(G1, [ScalarField.constant(G1, 2.0)], ["two"])
    with pytest.raises(ValueError):
        d.check(1e-3)
    d = TestDictionary(G1, [ScalarField.from_function(G1, lambda g: 1 - g.r2)], ["concave"])
    with pytest.raises(ValueError):
        d.check(1e-6)


def test_probes_are_lower_bounds_and_validate_degree():
    p, _ = gallery.instantiate("loglog", G2)
    K = ball_mask(G2, [0, 0], 0.5)
    d = default_dictionary(G2)
    J = probe_J(p, None, 2, 1, 1, K, d)
    I = probe_I(p, None, 2, 1, 2, K, d)
    assert J.label == I.label == LOWER_BOUND
    assert J.value > 0 and I.value > 0
    assert len(J.best) == 1 and len(I.best) == 2
    with pytest.raises(ValueError):
        probe_J(p, None, 2, 1, 2, K, d)
    with pytest.raises(ValueError):
        probe_I(p, None, 2, 1, 1, K, None)
    with pytest.raises(ValueError):
        probe_I(p, None, 2, 9, 0, K, d)


def test_probe_without_dictionary_uses_volume_form():
    p, _ = gallery.instantiate("loglog", G1)
    K = ball_mask(G1, [0], 0.5)
    I0 = probe_I(p, None, 1, 0, 0, K)
    # h_1 = 1 wherever psi >= -1, so the zeroth probe is at most the normalized area of K
    assert 0 < I0.value <= K.measure() / np.pi + 1e-12


def test_growth_exponent():
    ns = np.arange(1, 6)
    fit = growth_exponent(ns, 2.0 * ns**-1.5)
    assert fit.exponent == pytest.approx(-1.5)
    assert fit.r2 == pytest.approx(1.0)
    with pytest.raises(ValueError):
        growth_exponent(ns, [1, 0, 1, 1, 1])
