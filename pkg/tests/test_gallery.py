import numpy as np
import pytest

from pplab import gallery
from pplab.grid import make_ball_grid
from pplab.wstar import flux_mass, star_norm_report

GRIDS = {1: make_ball_grid(1, 129), 2: make_ball_grid(2, 33)}
CASES = [(name, k) for name in gallery.names() for k in gallery.get(name).ks]


@pytest.mark.parametrize("name,k", CASES)
def test_entry_is_dominated(name, k):
    p, _ = gallery.instantiate(name, GRIDS[k])
    rep = p.domination()
    assert rep.n_checked > 0
    assert rep.n_violating == 0, f"worst {rep.worst_violation:.3e}"


def test_facts_hold_k1():
    g = make_ball_grid(1, 257)
    for name in ("loglog", "logmax", "linear", "log_single"):
        p, facts = gallery.instantiate(name, g)
        rep = star_norm_report(p)
        measured = {"dominator_mass": flux_mass(p.psi), "gradient_form_mass": flux_mass(p.psi), "l1_norm": rep.l1}
        for f in facts:
            if f.quantity in measured:
                assert measured[f.quantity] == pytest.approx(f.value, rel=max(f.tolerance, 1e-9)), (name, f)


def test_loglog_mass_closed_form():
    # (1/2 - delta)^2 (2 log 2)^(-2 delta) / delta
    assert gallery.loglog_mass(0.1) == pytest.approx(0.16 * (2 * np.log(2)) ** -0.2 / 0.1)
    _, _, fprime = gallery.loglog_profiles(0.1)
    assert 2 * fprime(gallery.LOG4) == pytest.approx(gallery.loglog_mass(0.1))


def test_unknown_entry_and_params():
    g = GRIDS[1]
    with pytest.raises(KeyError):
        gallery.get("nope")
    with pytest.raises(ValueError):
        gallery.instantiate("loglog", g, gamma=1.0)
    with pytest.raises(ValueError):
        gallery.instantiate("linear", GRIDS[2])
    with pytest.raises(ValueError):
        gallery.instantiate("loglog", g, delta=0.7)


def test_describe_is_json_ready():
    import json
    for name in gallery.names():
        json.dumps(gallery.get(name).describe())


def test_alpha2_witness_increases_for_alpha_3():
    w = gallery.alpha2_failure_witness(GRIDS[1], 0.1, 3.0, [2.0**-j for j in range(2, 13)])
    assert w.increasing and not w.inconclusive
    for row in w.rows:
        assert row.ratio == pytest.approx(row.closed_form, rel=0.02)


def test_alpha2_witness_inconclusive_below_threshold():
    w = gallery.alpha2_failure_witness(GRIDS[1], 0.1, 2.0, [0.25, 0.125, 0.0625])
    assert w.inconclusive
    assert not w.increasing
