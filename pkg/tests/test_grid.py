import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pplab.grid import Mask, ScalarField, ball_mask, integrate, make_ball_grid


def test_grid_geometry():
    g = make_ball_grid(1, 33)
    assert g.h == pytest.approx(2 / 32)
    assert g.shape == (33, 33)
    assert g.radius[g.center_index] == 0.0
    assert g.nearest_node([0.5]) == (24, 16)
    assert g.nearest_node([0.5j]) == (16, 24)
    g2 = make_ball_grid(2, 17)
    assert g2.ndim == 4 and g2.shape == (17,) * 4


@pytest.mark.parametrize("n", [16, 15, 32])
def test_grid_rejects_bad_sizes(n):
    with pytest.raises(ValueError):
        make_ball_grid(1, n)


def test_mask_rejects_nodes_outside_ball():
    g = make_ball_grid(1, 17)
    with pytest.raises(ValueError):
        Mask(g, np.ones(g.shape, dtype=bool))
    assert Mask.from_array(g, np.ones(g.shape, dtype=bool)) == Mask.whole_ball(g)


radii = st.floats(0.05, 0.95)


@settings(max_examples=30, deadline=None)
@given(radii, radii)
def test_ball_masks_nest(r1, r2):
    g = make_ball_grid(1, 33)
    a, b = ball_mask(g, [0], min(r1, r2)), ball_mask(g, [0], max(r1, r2))
    assert a <= b
    assert (b - a) | a == b
    assert (a & ~a).is_empty()
    assert a.measure() <= b.measure()


def test_integrate_skips_undefined():
    g = make_ball_grid(1, 65)
    v = np.ones(g.shape)
    v[g.center_index] = np.nan
    res = integrate(ScalarField(g, v), Mask.whole_ball(g))
    assert res.skipped == 1
    assert res.value == pytest.approx(np.pi, rel=0.02)


def test_field_arithmetic_and_flags():
    g = make_ball_grid(1, 17)
    f = ScalarField.constant(g, 2.0)
    h = ScalarField.from_function(g, lambda g: g.r2)
    assert np.allclose((f * h - h).values, h.values)
    assert np.allclose(f.maximum(h).values, np.maximum(2.0, g.r2))
    u = f.undefined_where(g.radius < 0.2)
    assert not u.defined[g.center_index]
