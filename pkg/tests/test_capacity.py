import numpy as np
import pytest

from pplab.capacity import CapacityEstimate, cap_bt, cap_decay_fit, dilation
from pplab.grid import Mask, ball_mask, make_ball_grid


def test_disc_capacity_k1():
    g = make_ball_grid(1, 257)
    c = cap_bt(ball_mask(g, [0], 0.3), g)
    assert c.value == pytest.approx(1 / np.log(1 / 0.3), rel=0.03)
    assert c.mass_outside_E < 0.01


def test_empty_set_has_zero_capacity():
    g = make_ball_grid(1, 33)
    assert cap_bt(Mask.empty(g), g).value == 0.0


def test_set_must_avoid_the_boundary():
    g = make_ball_grid(1, 33)
    with pytest.raises(ValueError):
        cap_bt(Mask.whole_ball(g), g)


def test_capacity_monotone_and_translation_insensitive():
    g = make_ball_grid(1, 129)
    caps = [cap_bt(ball_mask(g, [0], r), g).value for r in (0.1, 0.2, 0.35)]
    assert caps == sorted(caps)
    # a small off-center disc has larger capacity relative to the unit disc
    off = cap_bt(ball_mask(g, [0.4], 0.1), g).value
    assert off > caps[0]


def test_k2_ball_capacity():
    g = make_ball_grid(2, 33)
    c = cap_bt(ball_mask(g, [0, 0], 0.5), g)
    assert c.value == pytest.approx(1 / np.log(2) ** 2, rel=0.15)


def test_estimate_invariants():
    with pytest.raises(ValueError):
        CapacityEstimate(-1.0, 17, 0.0, 0.0)
    with pytest.raises(ValueError):
        CapacityEstimate(1.0, 17, 0.0, 1.5)


def test_decay_fit_recovers_slope():
    caps = [(n, 3.0 * np.exp(-0.7 * n)) for n in range(1, 6)]
    fit = cap_decay_fit(caps)
    assert fit.slope == pytest.approx(-0.7)
    assert fit.r2 == pytest.approx(1.0)
    assert fit.bound_slope(3.0) == pytest.approx(np.log(0.75))


def test_decay_fit_drops_zeros_and_needs_three():
    fit = cap_decay_fit([(1, 1.0), (2, 0.5), (3, 0.0), (4, 0.125)])
    assert fit.dropped == [3]
    with pytest.raises(ValueError):
        cap_decay_fit([(1, 1.0), (2, 0.0), (3, 0.0)])


def test_dilation_contains_set():
    g = make_ball_grid(1, 33)
    E = ball_mask(g, [0], 0.2)
    d = dilation(E, 2 * g.h)
    assert (E.data <= d).all()
    assert d.sum() > E.count
