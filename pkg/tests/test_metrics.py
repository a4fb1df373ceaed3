import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dsvmsim import (EmptyTestSet, consensus_gap, empirical_risk_global,
                     empirical_risk_node, moving_average)


def test_node_risk_extremes_and_half():
    y = np.array([1.0, -1.0, 1.0, -1.0])
    assert empirical_risk_node(y, y) == 0.0
    assert empirical_risk_node(-y, y) == 1.0
    assert empirical_risk_node(np.array([1.0, -1.0, -1.0, 1.0]), y) == 0.5


def test_node_risk_empty():
    with pytest.raises(EmptyTestSet):
        empirical_risk_node([], [])


def test_global_risk_weighted():
    y1 = np.ones(100)
    y2 = np.ones(300)
    # node risks 0 and 1 with equal sizes -> 0.5
    assert empirical_risk_global([(y1, y1), (-y1, y1)]) == 0.5
    # sizes (100, 300), risks (0, 1) -> 0.75
    assert empirical_risk_global([(y1, y1), (-y2, y2)]) == 0.75
    # single node equals the node risk
    assert empirical_risk_global([(-y1, y1)]) == empirical_risk_node(-y1, y1)


def test_moving_average_cases():
    assert np.allclose(moving_average([0.3] * 5, 3), [0.3] * 5)
    assert np.allclose(moving_average([1, 2, 3], 1), [1, 2, 3])
    assert np.allclose(moving_average([0.0, 1.0], 2), [0.0, 0.5])
    with pytest.raises(ValueError):
        moving_average([1.0], 0)


def test_consensus_gap_cases():
    r = np.array([1.0, 2.0])
    assert consensus_gap([r, r, r]) == 0.0
    assert consensus_gap([np.array([0.0]), np.array([1.0])]) == 1.0
    assert consensus_gap([np.array([5.0])]) == 0.0


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(st.floats(-5, 5), min_size=2, max_size=2),
                min_size=2, max_size=5),
       st.randoms(use_true_random=False))
def test_consensus_gap_permutation_invariant(vecs, rnd):
    arrs = [np.array(v) for v in vecs]
    shuffled = list(arrs)
    rnd.shuffle(shuffled)
    assert consensus_gap(arrs) == pytest.approx(consensus_gap(shuffled))
