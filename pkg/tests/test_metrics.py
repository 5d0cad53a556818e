import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from oranlb.metrics import (NoActiveRuError, balance_metrics, coefficient_of_variation,
                            jain_index, load_imbalance_factor, metrics)
from conftest import bare_state

loads = st.lists(st.floats(0, 100, allow_nan=False), min_size=1, max_size=8)
positive_loads = st.lists(st.floats(0.01, 100), min_size=1, max_size=8)


def _pop_cv(p):
    mu = sum(p) / len(p)
    return 0.0 if mu == 0 else math.sqrt(sum((x - mu) ** 2 for x in p) / len(p)) / mu


@pytest.mark.parametrize("p,cv", [([50, 50, 50], 0.0), ([20, 40, 60], 0.408248), ([90, 5, 5], 1.202082)])
def test_cv_examples(p, cv):
    assert coefficient_of_variation(p) == pytest.approx(cv, abs=1e-6)


@pytest.mark.parametrize("p,j", [([50, 50, 50], 1.0), ([100, 0, 0], 1 / 3), ([20, 40, 60], 14400 / 16800)])
def test_jain_examples(p, j):
    assert jain_index(p) == pytest.approx(j, abs=1e-9)


@pytest.mark.parametrize("p,lif", [([50, 50, 50], 0.0), ([20, 40, 60], 0.5), ([100, 0], 1.0)])
def test_lif_examples(p, lif):
    assert load_imbalance_factor(p) == pytest.approx(lif, abs=1e-12)


def test_zero_mean_conventions():
    assert balance_metrics([0, 0, 0]).as_tuple() == (0.0, 1.0, 0.0)


@pytest.mark.parametrize("fn", [coefficient_of_variation, jain_index, load_imbalance_factor])
def test_empty_input_is_an_error(fn):
    with pytest.raises(NoActiveRuError):
        fn([])


def test_state_metrics_use_active_rus_only():
    m = metrics(bare_state([1, 1, 1, 0], [20, 40, 60, 0]))
    assert m.as_tuple() == pytest.approx((0.408248, 0.857143, 0.5), abs=1e-6)


def test_singleton_state():
    assert metrics(bare_state([0, 1, 0], [0, 73, 0])).as_tuple() == (0.0, 1.0, 0.0)


def test_high_cv_regime_is_reachable():
    # one RU at full load, five idle: cv = sqrt(5) > 1.458
    m = metrics(bare_state([1] * 6, [100, 0, 0, 0, 0, 0]))
    assert m.cv > 1.458


@given(loads)
def test_cv_matches_population_definition(p):
    assert coefficient_of_variation(p) == pytest.approx(_pop_cv(p), rel=1e-9, abs=1e-12)


@given(loads)
def test_bounds(p):
    m = balance_metrics(p)
    n = len(p)
    assert m.cv >= 0
    assert 1 / n - 1e-12 <= m.jain <= 1 + 1e-12
    assert 0 <= m.lif <= n - 1 + 1e-9


@given(loads)
def test_jain_cv_identity(p):
    m = balance_metrics(p)
    assert m.jain == pytest.approx(1 / (1 + m.cv**2), abs=1e-9)


@given(loads, st.randoms(use_true_random=False))
def test_permutation_invariance(p, rnd):
    q = list(p)
    rnd.shuffle(q)
    a, b = balance_metrics(p).as_tuple(), balance_metrics(q).as_tuple()
    assert a == pytest.approx(b, abs=1e-12)


@given(positive_loads, st.floats(0.01, 1.0))
def test_scale_invariance(p, c):
    a, b = balance_metrics(p).as_tuple(), balance_metrics([c * x for x in p]).as_tuple()
    assert a == pytest.approx(b, abs=1e-9)


@given(st.floats(0.01, 100), st.integers(1, 8))
def test_equal_loads_are_perfect(v, n):
    m = balance_metrics([v] * n)
    assert m.cv == pytest.approx(0, abs=1e-12)
    assert m.jain == pytest.approx(1, abs=1e-12)
    assert m.lif == pytest.approx(0, abs=1e-12)


def test_metrics_accept_numpy():
    assert coefficient_of_variation(np.array([20.0, 40.0, 60.0])) == pytest.approx(0.408248, abs=1e-6)
