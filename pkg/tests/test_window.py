import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from helpers import LINE
from swkcenter.harness import gen_uniform
from swkcenter.model import EuclideanMetric, SpreadBounds, StreamError, WindowConfig
from swkcenter.solvers import RESTRICTED
from swkcenter.window import NoLevelAnswered, WindowSketch


def build(xs, k=1, z=0, eps=0.2, W=100, dmin=1, dmax=16, **kw):
    ws = WindowSketch(WindowConfig(W, k, z, eps), SpreadBounds(dmin, dmax), LINE, **kw)
    for x in xs:
        ws.insert((float(x),))
    return ws


def test_ladder_radii():
    ws = WindowSketch(WindowConfig(10, 1, 0, 0.5), SpreadBounds(1, 8), LINE, solver=RESTRICTED)
    assert ws.rhos == [1, 2, 4, 8]
    assert WindowSketch(WindowConfig(10, 1, 0, 0.5), SpreadBounds(1, 8), LINE).rhos == [0.5, 1, 2, 4]
    assert all(lv.eps == 0.25 for lv in ws.levels)


def test_ingest_order_errors():
    ws = build([0, 1])
    with pytest.raises(StreamError):
        ws.ingest(ws.config.make_point(5, (2.0,), 1))
    ws.advance(10)
    with pytest.raises(StreamError):
        ws.ingest(ws.config.make_point(5, (2.0,), 9))
    with pytest.raises(StreamError):
        ws.advance(3)


def test_advance():
    ws = build([0, 1, 2], W=10)
    before = ws.dump()
    ws.advance(ws.clock)
    assert ws.dump() == before
    ws.advance(10)  # t_exp of the first point
    assert all(0 not in {q.id for q in lv.stored_points()} for lv in ws.levels)
    ws.advance(100)
    assert ws.storage_report()["total"] == 0


def test_colocated_snaps_to_zero():
    ws = build([3, 3, 3], k=1, z=0)
    res = ws.find_approximate_centers()
    assert res.radius == 0
    assert [b.center for b in res.balls] == [(3.0,)]


def test_find_centers_example():
    ws = build([0, 1, 2, 10], k=1, z=1, eps=0.2)
    assert oracles.opt_1d([0, 1, 2, 10], 1, 1) == 1
    res = ws.find_approximate_centers()
    assert 1 <= res.radius <= 1.2
    assert [p.location for p in res.outliers] == [(10.0,)]


def test_kprime_examples():
    ws = build([0, 1, 2, 10], k=2, z=1, eps=0.2)
    r = ws.query_kprime(1).radius
    assert 1 <= r <= 1.2
    assert ws.query_kprime(2).radius == ws.find_approximate_centers().radius
    ws = build([0, 4, 10, 14], k=3, z=0, eps=0.2)
    assert oracles.opt_1d([0, 4, 10, 14], 2, 0) == 2
    assert 2 <= ws.query_kprime(2).radius <= 2.4
    with pytest.raises(ValueError):
        ws.query_kprime(4)


def test_diameter_examples():
    assert build([7], z=0).query_diameter().diameter == 0
    d = build([0, 5, 100], z=1, eps=0.2, dmax=128).query_diameter().diameter
    assert 3 <= d <= 5
    assert build([0, 5, 100], z=2, eps=0.2, dmax=128).query_diameter().diameter == 0


def test_storage_report_empty():
    st_ = build([]).storage_report()
    assert st_["total"] == 0
    assert st_["total_ceiling"] == st_["level_ceiling"] * 5


def test_no_level_answers_under_wrong_bounds():
    ws = build([0, 1000], k=1, z=0, dmax=2, check_spread=False)
    with pytest.raises(NoLevelAnswered):
        ws.find_approximate_centers()


def test_query_json_shape():
    out = build([0, 1, 2, 10], k=1, z=1).find_approximate_centers().to_json(LINE)
    assert set(out) == {"radius", "centers", "outliers", "level", "storage"}
    assert out["outliers"] == [3]


@given(st.integers(0, 10_000))
def test_replay_matches_rebuild(seed):
    ev = gen_uniform(seed, 80, 20, SpreadBounds(1, 32), k=2, z=1, eps=0.25)
    runs = []
    for _ in range(2):
        ws = WindowSketch(ev.config, ev.spread, ev.metric)
        for p in ev.points:
            ws.ingest(p)
        r = ws.find_approximate_centers()
        runs.append((ws.dump(), r.radius, [b.center for b in r.balls]))
    assert runs[0] == runs[1]


@given(st.lists(st.integers(0, 24), min_size=1, max_size=9), st.integers(1, 3), st.integers(0, 2),
       st.sampled_from([0.1, 0.25, 0.5]))
def test_radius_within_one_plus_eps(xs, k, z, eps):
    ws = build(xs, k=k, z=z, eps=eps, dmax=32)
    opt = oracles.opt_1d(xs, k, z)
    r = ws.find_approximate_centers().radius
    assert opt <= r <= (1 + eps) * opt


@given(st.lists(st.tuples(st.integers(0, 6), st.integers(0, 6)), min_size=1, max_size=8),
       st.integers(1, 2), st.integers(0, 1))
def test_2d_within_two_plus_two_eps(pairs, k, z):
    m = EuclideanMetric(2)
    ws = WindowSketch(WindowConfig(50, k, z, 0.5), SpreadBounds(1, 9), m)
    for a, b in pairs:
        ws.insert((float(a), float(b)))
    locs = [(float(a), float(b)) for a, b in pairs]
    opt = oracles.opt_centers(locs, locs, k, z, m.distance)
    assert ws.find_approximate_centers().radius <= 2 * 1.5 * opt
