"""Acceptance criteria, one printed line each.

The full profile takes about nine minutes on one core.  Set
PPLAB_ACCEPTANCE_PROFILE=quick for a coarse smoke pass whose tolerances are
not expected to hold everywhere.
"""
import os

import pytest

from pplab.acceptance import Suite

PROFILE = os.environ.get("PPLAB_ACCEPTANCE_PROFILE", "full")


@pytest.fixture(scope="module")
def suite():
    return Suite(PROFILE, seed=0)


@pytest.mark.slow
@pytest.mark.parametrize("number", range(1, 12))
def test_criterion(suite, number, capsys):
    result = suite.criteria()[number]()
    with capsys.disabled():
        print("\n" + result.line())
    assert result.status != "fail", result.line()
