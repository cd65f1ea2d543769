import math
import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from swkcenter.model import (Ball, EuclideanMetric, SpreadBounds, StreamError, TableMetric,
                             WindowConfig, fmt_number, window_contents)
from swkcenter.harness import gen_table


def test_window_contents_empty():
    assert window_contents([], 5) == []


def test_window_half_open_boundary():
    cfg = WindowConfig(10, 1, 0, 0.5)
    p = cfg.make_point(0, (0.0,), 0)
    assert window_contents([p], 9) == [p]
    assert window_contents([p], 10) == []


def test_window_three_arrivals():
    cfg = WindowConfig(2, 1, 0, 0.5)
    ps = [cfg.make_point(i, (float(i),), i) for i in range(3)]
    assert [p.id for p in window_contents(ps, 2)] == [1, 2]


@given(st.lists(st.integers(0, 30), unique=True, max_size=40), st.integers(1, 10), st.integers(0, 40))
def test_window_size_bounded_by_recent_arrivals(times, W, t):
    cfg = WindowConfig(W, 1, 0, 0.5)
    ps = [cfg.make_point(i, (0.0,), tt) for i, tt in enumerate(sorted(times))]
    got = window_contents(ps, t)
    assert len(got) <= sum(1 for tt in times if t - W < tt <= t)
    assert all(p.t_arr <= t < p.t_exp for p in got)


def test_config_validation():
    for bad in [dict(W=0, k=1, z=0, eps=0.5), dict(W=5, k=0, z=0, eps=0.5),
                dict(W=5, k=1, z=-1, eps=0.5), dict(W=5, k=1, z=0, eps=1.0),
                dict(W=5, k=1, z=0, eps=0.0)]:
        with pytest.raises(StreamError):
            WindowConfig(**bad)
    with pytest.raises(StreamError):
        SpreadBounds(2, 1)
    with pytest.raises(ValueError):
        Ball((0.0,), -1)


def test_spread_levels():
    assert SpreadBounds(1, 8).n_levels == 4
    assert SpreadBounds(1, 9).n_levels == 4
    assert SpreadBounds(1, 7.99).n_levels == 3
    assert SpreadBounds(3, 3).n_levels == 1
    assert SpreadBounds(0.5, 64).log_sigma == 7


def _triangle_audit(metric, locs, rng, n=1000):
    for _ in range(n):
        a, b, c = (locs[rng.randrange(len(locs))] for _ in range(3))
        ab, bc, ac = metric.distance(a, b), metric.distance(b, c), metric.distance(a, c)
        assert ab == metric.distance(b, a)
        assert metric.distance(a, a) == 0
        assert ac <= ab + bc + 1e-12 * max(1.0, ab + bc)


@pytest.mark.parametrize("dim", [1, 2, 3])
def test_euclidean_metric_audit(dim):
    rng = random.Random(dim)
    m = EuclideanMetric(dim)
    locs = [tuple(rng.uniform(-50, 50) for _ in range(dim)) for _ in range(60)]
    _triangle_audit(m, locs, rng)
    D = m.pairwise(locs, locs)
    assert all(D[i, j] == m.distance(locs[i], locs[j]) for i in range(20) for j in range(20))


def test_table_metric_audit():
    ev = gen_table(4, 10, 5, names=15)
    m = ev.metric
    _triangle_audit(m, m.names, random.Random(0))


def test_table_metric_rejects_bad_tables():
    with pytest.raises(StreamError):
        TableMetric(["a", "b"], [[0, 1], [2, 0]])
    with pytest.raises(StreamError):
        TableMetric(["a", "b"], [[1, 1], [1, 0]])
    with pytest.raises(StreamError):
        TableMetric(["a", "a"], [[0, 1], [1, 0]])
    assert TableMetric(["a", "b", "c"], np.ones((3, 3)) - np.eye(3)).doubling_dim == 2


def test_fmt_number():
    assert fmt_number(3.0) == "3"
    assert fmt_number(0.25) == "0.25"
    assert fmt_number(7) == "7"
    assert float(fmt_number(0.1)) == 0.1


def test_location_parsing():
    m = EuclideanMetric(2)
    assert m.location(["1", "2.5"]) == (1.0, 2.5)
    with pytest.raises(StreamError):
        m.location(["1"])
    with pytest.raises(StreamError):
        m.location(["1", "nan"])
