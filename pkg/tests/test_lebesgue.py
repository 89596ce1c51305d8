import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pplab.grid import Mask, ScalarField, ball_mask, make_ball_grid
from pplab.lebesgue import (KINDS, density_cap, density_ratio, lebesgue_ratio, make_kernel, masked_mean, mollify,
                            mollify_at, mollifier_convergence)

G1 = make_ball_grid(1, 129)


@pytest.mark.parametrize("kind", KINDS)
@pytest.mark.parametrize("eps_h", [2, 3.5, 8])
def test_kernel_is_a_probability_within_the_cap(kind, eps_h):
    k = make_kernel(G1, kind, eps_h * G1.h)
    assert k.weights.sum() == pytest.approx(1.0)
    assert (k.weights >= 0).all()
    assert k.density_bound <= density_cap(1)
    assert (np.sqrt((k.offsets**2).sum(axis=1)) <= eps_h + 1e-9).all()


def test_kernel_in_two_variables():
    g = make_ball_grid(2, 17)
    k = make_kernel(g, "smooth_radial", 3 * g.h)
    assert k.density_bound <= density_cap(2)


def test_kernel_rejects_bad_input():
    with pytest.raises(ValueError):
        make_kernel(G1, "gauss", 0.1)
    with pytest.raises(ValueError):
        make_kernel(G1, "indicator", G1.h)


@settings(max_examples=10, deadline=None)
@given(st.floats(-3, 3), st.floats(-2, 2))
def test_mollify_preserves_constants_and_order(c, shift):
    kern = make_kernel(G1, "smooth_radial", 4 * G1.h)
    f = ScalarField.from_function(G1, lambda g: np.sin(3 * g.coord(0)) + c)
    lo, hi = mollify(f, kern), mollify(f + ScalarField.constant(G1, abs(shift)), kern)
    ok = ~np.isnan(lo.values)
    assert ok.sum() > 0
    assert (lo.values[ok] <= hi.values[ok] + 1e-12).all()
    const = mollify(ScalarField.constant(G1, c), kern).values[ok]
    np.testing.assert_allclose(const, c)


def test_mollify_at_matches_full_convolution():
    kern = make_kernel(G1, "indicator", 3 * G1.h)
    f = ScalarField.from_function(G1, lambda g: g.r2 * np.cos(g.coord(1)))
    node = (70, 50)
    assert mollify_at(f, kern, node) == pytest.approx(mollify(f, kern).values[node])


def test_half_space_indicator_has_half_density():
    A = ScalarField.from_function(G1, lambda g: (g.coord(0) >= 0).astype(float) * np.ones(g.shape))
    node = G1.center_index
    eps = 32 * G1.h
    assert mollify_at(A, make_kernel(G1, "indicator", eps), node) == pytest.approx(0.5, abs=0.02)


def test_continuous_function_has_no_far_mass():
    u = ScalarField.from_function(G1, lambda g: g.r2)
    rows = density_ratio(u, G1.center_index, 0.5, [4 * G1.h, 8 * G1.h])
    assert all(b == 0.0 and c > 0 for b, c, _ in rows)
    with pytest.raises(ValueError):
        density_ratio(u, G1.center_index, 0.0, [0.1])


def test_lebesgue_ratio_of_smooth_function_shrinks():
    u = ScalarField.from_function(G1, lambda g: np.real(g.z(0)))
    r = lebesgue_ratio(u, (80, 60), [2 * G1.h, 4 * G1.h, 8 * G1.h])
    assert r[0] < r[1] < r[2]
    assert r[2] / r[1] == pytest.approx(2.0, rel=0.1)


def test_lebesgue_ratio_refuses_singular_center():
    u = ScalarField.from_function(G1, lambda g: np.log(np.where(g.radius > 0, g.radius, np.nan)))
    with pytest.raises(ValueError):
        lebesgue_ratio(u, G1.center_index, [4 * G1.h])
    assert np.isfinite(lebesgue_ratio(u, G1.center_index, [4 * G1.h], value=-5.0)[0])


def test_masked_mean_splits_the_ball():
    u = ScalarField.constant(G1, -2.0)
    node = G1.center_index
    whole = masked_mean(u, node, [0.2], Mask.whole_ball(G1))[0]
    none = masked_mean(u, node, [0.2], Mask.empty(G1))[0]
    assert whole == pytest.approx((-2.0, 0.0))
    assert none == pytest.approx((0.0, 2.0))
    half = masked_mean(u, node, [0.2], ball_mask(G1, [0], 0.1))[0]
    assert half[0] / -2.0 + half[1] / 2.0 == pytest.approx(1.0)


def test_ball_leaving_the_grid_is_rejected():
    u = ScalarField.constant(G1, 0.0)
    with pytest.raises(ValueError):
        lebesgue_ratio(u, (2, 64), [4 * G1.h])


def test_convergence_table_cross_deviation():
    f = ScalarField.from_function(G1, lambda g: g.r2)
    rows = mollifier_convergence(f, [(70, 60)], eps_list=[4 * G1.h, 8 * G1.h])
    assert len(rows) == 2 * len(KINDS)
    for row in rows:
        assert row["error"] < 0.02
        assert row["cross_deviation"] >= 0
    with pytest.raises(ValueError):
        mollifier_convergence(f, [(0, 64)], eps_list=[4 * G1.h])
