import numpy as np
import pytest
from hypothesis import given, strategies as st

from contactgt.metrics import evaluate, sweep_thresholds
from contactgt.population import GroundTruth

bits = st.lists(st.integers(0, 1), min_size=1, max_size=40)


def test_evaluate_counts():
    m = evaluate([1, 0, 1, 0], [1, 1, 0, 0])
    assert not m.success
    assert m.fnr == 0.5 and m.fpr == 0.5
    assert m.total_error == 1.0


def test_undefined_rates():
    assert evaluate([0, 0], [0, 0]).fnr is None
    assert evaluate([1, 1], [1, 1]).fpr is None
    assert evaluate([1, 1], [1, 1]).total_error is None


def test_accepts_ground_truth_and_checks_shape():
    truth = GroundTruth(x0=np.array([0, 0, 1]), x1=np.array([0, 1, 1]))
    assert evaluate([0, 1, 1], truth).success
    with pytest.raises(ValueError):
        evaluate([0, 1], truth)


@given(st.data())
def test_success_iff_exact(data):
    truth = np.array(data.draw(bits))
    decision = np.array(data.draw(st.lists(st.integers(0, 1), min_size=truth.size, max_size=truth.size)))
    m = evaluate(decision, truth)
    assert m.success == bool(np.all(decision == truth))
    if m.fnr is not None and m.fpr is not None:
        assert m.success == (m.fnr == 0 and m.fpr == 0)


@given(st.data())
def test_rates_permutation_invariant(data):
    truth = np.array(data.draw(bits))
    decision = np.array(data.draw(st.lists(st.integers(0, 1), min_size=truth.size, max_size=truth.size)))
    perm = np.array(data.draw(st.permutations(range(truth.size))))
    assert evaluate(decision, truth) == evaluate(decision[perm], truth[perm])


@given(
    st.lists(st.floats(-20, 20), min_size=1, max_size=30),
    st.data(),
    st.lists(st.floats(-25, 25), min_size=1, max_size=15),
)
def test_sweep_matches_pointwise(llr, data, taus):
    truth = np.array(data.draw(st.lists(st.integers(0, 1), min_size=len(llr), max_size=len(llr))))
    llr = np.array(llr)
    sweep = sweep_thresholds(llr, truth, taus)
    for k, tau in enumerate(taus):
        m = evaluate((llr >= tau).astype(int), truth)
        assert sweep.success[k] == m.success
        if m.fnr is not None:
            assert sweep.fnr[k] == m.fnr
        if m.fpr is not None:
            assert sweep.fpr[k] == m.fpr


def test_sweep_tie_counts_as_infected():
    sweep = sweep_thresholds([0.0, -1.0], [1, 0], [0.0])
    assert sweep.success[0]
