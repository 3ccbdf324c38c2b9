import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pinsync.dynamics import FailureMask
from pinsync.generators import gen_ba, gen_er
from pinsync.graph import PinSet, grounded_view
from pinsync.robustness import (
    apply_failures,
    effective_lambda1,
    failure_count,
    robustness_curve,
)
from pinsync.spectral import smallest_eigenpair
from pinsync.strategies import select

from _helpers import complete_graph


def test_failure_count_rounding():
    assert failure_count(0.3, 10) == 3
    assert failure_count(0.25, 10) == 3
    assert failure_count(0.05, 10) == 1
    assert failure_count(0.04, 10) == 0
    assert failure_count(1.0, 7) == 7


def test_apply_failures_examples():
    pins = PinSet(tuple(range(10)))
    assert apply_failures(pins, 0.0, 1).n_failed == 0
    assert apply_failures(pins, 1.0, 1).beta == (1,) * 10
    assert apply_failures(pins, 0.3, 1).n_failed == 3
    with pytest.raises(ValueError):
        apply_failures(pins, 1.5, 1)


def test_apply_failures_deterministic_and_uniform():
    pins = PinSet(tuple(range(10)))
    assert apply_failures(pins, 0.3, 42) == apply_failures(pins, 0.3, 42)
    hits = np.zeros(10)
    for s in range(2000):
        hits += apply_failures(pins, 0.3, s).beta
    assert np.allclose(hits / 2000, 0.3, atol=0.05)


def test_effective_lambda1_examples():
    g = complete_graph(3)
    assert effective_lambda1(g, [0, 1], FailureMask((0, 1))) == pytest.approx(1.0)
    gb = gen_ba(80, 2, seed=0)
    pins = [0, 1, 2, 3]
    base = smallest_eigenpair(grounded_view(gb, pins)).lambda1
    assert effective_lambda1(gb, pins, FailureMask.none(pins)) == pytest.approx(base, abs=1e-12)
    assert effective_lambda1(gb, pins, FailureMask((1,) * 4)) == 0.0


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 1000), st.data())
def test_superset_mask_never_raises_lambda(seed, data):
    g = gen_er(30, 0.2, seed=seed)
    pins = data.draw(st.lists(st.integers(0, 29), min_size=1, max_size=10, unique=True))
    beta = data.draw(st.lists(st.integers(0, 1), min_size=len(pins), max_size=len(pins)))
    extra = data.draw(st.lists(st.integers(0, 1), min_size=len(pins), max_size=len(pins)))
    wider = [max(a, b) for a, b in zip(beta, extra)]
    lo = effective_lambda1(g, pins, FailureMask(wider))
    hi = effective_lambda1(g, pins, FailureMask(beta))
    base = effective_lambda1(g, pins, FailureMask.none(pins))
    assert lo <= hi + 1e-9 <= base + 2e-9


def test_curve_ratio_zero_and_single_trial():
    g = gen_ba(100, 2, seed=2)
    curve = robustness_curve(g, "degree", [5, 10], [0.0, 0.3], trials=1, seed=0)
    pins, tr = select(g, "degree", 10)
    for row in curve.rows:
        assert row.lambda1_std == 0.0 and row.trials == 1
    assert curve.at(10, 0.0).lambda1_mean == pytest.approx(tr.lambdas[-1], abs=1e-10)
    assert curve.at(5, 0.0).lambda1_mean == pytest.approx(tr.lambdas[4], abs=1e-10)
    with pytest.raises(KeyError):
        curve.at(7, 0.0)


def test_curve_statistics_match_manual_loop():
    g = gen_er(60, 0.1, seed=3)
    curve = robustness_curve(g, "pbo", [6], 0.5, trials=8, seed=5)
    pins, _ = select(g, "pbo", 6)
    from pinsync.robustness import trial_seed
    vals = [effective_lambda1(g, pins, apply_failures(pins, 0.5, trial_seed(5, 6, 0.5, t)))
            for t in range(8)]
    row = curve.rows[0]
    assert row.lambda1_mean == pytest.approx(np.mean(vals), abs=1e-10)
    assert row.lambda1_std == pytest.approx(np.std(vals), abs=1e-10)
    assert row.stderr == pytest.approx(np.std(vals) / np.sqrt(8))


def test_curve_mean_bounds_and_csv():
    g = gen_ba(150, 3, seed=4)
    curve = robustness_curve(g, "betweenness", [10, 20], [0.1, 0.2, 0.3], trials=10, seed=1)
    for row in curve.rows:
        assert 0 <= row.lambda1_mean <= g.degrees.max() and row.lambda1_std >= 0
    rows = list(curve.csv_rows())
    assert rows[0][0] == "betweenness" and len(rows) == 6


def test_curve_reuses_supplied_pins():
    g = gen_ba(80, 2, seed=5)
    pins, _ = select(g, "bfg", 8)
    a = robustness_curve(g, "bfg", [4, 8], [0.25], trials=5, seed=3, pins=pins)
    b = robustness_curve(g, "bfg", [4, 8], [0.25], trials=5, seed=3)
    assert a == b
    with pytest.raises(ValueError):
        robustness_curve(g, "bfg", [10], [0.25], trials=5, pins=pins)
    with pytest.raises(ValueError):
        robustness_curve(g, "bfg", [4], [0.25], trials=0)
