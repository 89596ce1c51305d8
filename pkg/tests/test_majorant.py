import numpy as np
import pytest

from pplab import gallery
from pplab.grid import Mask, ScalarField, ball_mask, make_ball_grid
from pplab.majorant import (budget_sets, build_majorant, check_parameters, default_lambda, level_sets,
                            split_signed, tail_series)


@pytest.fixture(scope="module")
def g():
    return make_ball_grid(1, 129)


@pytest.mark.parametrize("alpha,lam", [(0.5, 3.0), (2.0, 4.5), (1.5, 2.5), (1.0, 4.0), (1.0, 2.0)])
def test_parameters_rejected(alpha, lam):
    with pytest.raises(ValueError):
        check_parameters(alpha, lam)


def test_default_lambda_is_admissible():
    for a in np.linspace(1, 1.99, 7):
        check_parameters(a, default_lambda(a))


def test_level_sets_nest(g):
    p, _ = gallery.instantiate("loglog", g)
    Ks = level_sets(p.phi, p.psi, ball_mask(g, [0], 0.5), 3.0, 5)
    for a, b in zip(Ks, Ks[1:]):
        assert b <= a


def test_level_sets_reject_signs(g):
    K = ball_mask(g, [0], 0.5)
    with pytest.raises(ValueError):
        level_sets(ScalarField.constant(g, -1.0), ScalarField.constant(g, -1.0), K, 3.0, 2)
    with pytest.raises(ValueError):
        level_sets(ScalarField.constant(g, 1.0), ScalarField.constant(g, 1.0), K, 3.0, 2)


def test_tail_bound_dominates_dropped_terms(g):
    psi = ScalarField.from_function(g, lambda g: -50 * (1 - g.r2))
    alpha, lam = 1.2, 3.0
    short, long = tail_series(psi, alpha, lam, 3), tail_series(psi, alpha, lam, 40)
    dropped = np.abs(long.w.values - short.w.values)[g.ball]
    assert dropped.max() <= short.dropped_bound * (1 + 1e-12)
    with pytest.raises(ValueError):
        tail_series(psi, 1.5, 2.5, 3)


def test_build_certifies_unnormalized_loglog(g):
    p, _ = gallery.instantiate("loglog", g)
    b = build_majorant(p, ball_mask(g, [0], 0.5), 1.5, N=6)
    r = b.report
    assert not r.vacuous and r.certified_nodes > 0
    assert r.violating_nodes == 0
    assert r.weak_bound_violations == 0
    assert r.psh_residual < 8e-9
    assert r.input_defect_nodes > 0
    assert b.certified_mask <= ball_mask(g, [0], 0.5)
    assert budget_sets(b.u_fields, 1.5, g).holds


def test_vacuous_build_is_flagged(g):
    p, _ = gallery.instantiate("log_single", g)
    r = build_majorant(p, ball_mask(g, [0], 0.5), 1.5, N=4).report
    assert r.vacuous and r.certified_nodes == 0 and r.violation_fraction == 0.0


def test_split_signed_reassembles(g):
    phi = ScalarField.from_function(g, lambda g: np.cos(5 * g.coord(0)))
    pos, neg = split_signed(phi)
    assert (pos.values >= 0).all() and (neg.values >= 0).all()
    np.testing.assert_array_equal(pos.values - neg.values, phi.values)


def test_budget_of_zero_fields(g):
    s = budget_sets([None, None, None], 1.5, g)
    assert s.tail_measure == 0.0 and s.holds
    with pytest.raises(ValueError):
        budget_sets([None], 1.5)
    assert Mask.whole_ball(g).measure() == pytest.approx(s.ball_measure)
