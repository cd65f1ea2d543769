import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from helpers import LINE
from swkcenter.decision import DecisionSketch, MiniBall, pack_bound, storage_ceiling
from swkcenter.harness import ReferenceStore, Referee, gen_uniform
from swkcenter.model import SpreadBounds, StreamPoint, WindowConfig
from swkcenter.solvers import EXACT_1D


def sketch(rho=1.0, eps=0.5, k=1, z=0):
    return DecisionSketch(rho, eps, k, z, LINE, EXACT_1D)


def feed(sk, xs, W=100, t0=0):
    cfg = WindowConfig(W, sk.k, sk.z, 0.5)
    ps = [cfg.make_point(i, (float(x),), t0 + i) for i, x in enumerate(xs)]
    for p in ps:
        sk.handle_departure(p.t_arr)
        sk.handle_arrival(p)
    return ps


def test_first_arrival():
    sk = sketch()
    feed(sk, [3])
    assert sk.dump() == "rho=1.0 tau=0\nball 0 reps=0\noutliers="


def test_close_arrival_joins_and_trims():
    sk = sketch()
    feed(sk, [0, 0.3])
    assert sk.dump() == "rho=1.0 tau=0\nball 0 reps=1\noutliers="
    assert sk.balls[0].center.location == (0.0,)


def test_far_arrival_opens_second_ball():
    sk = sketch()
    feed(sk, [0, 0.8])
    assert sk.dump() == "rho=1.0 tau=0\nball 0 reps=0\nball 1 reps=1\noutliers="


def test_departures():
    sk = sketch(z=1)
    feed(sk, [0, 50], W=10)
    n = len(sk.balls)
    sk.handle_departure(5)
    assert len(sk.balls) == n
    sk.handle_departure(10)  # the point at 0 expires exactly here
    assert len(sk.balls) == n - 1


def test_outlier_departure():
    sk = sketch(k=1, z=1)
    feed(sk, [0, 0.1, 30], W=10)  # 30 cannot share the 6-rho ball: outlier
    assert [q.location for q in sk.outliers] == [(30.0,)]
    balls = sk.dump().splitlines()[1:-1]
    sk.outliers[0] = StreamPoint(sk.outliers[0].id, (30.0,), 0, 1)
    sk.handle_departure(1)
    assert sk.outliers == []
    assert sk.dump().splitlines()[1:-1] == balls


def test_try_to_cover_empty_and_tau():
    sk = sketch()
    cov = sk.try_to_cover(0)
    assert cov is not None and cov.balls == [] and cov.outliers == []
    sk.tau = 10
    assert sk.try_to_cover(9) is None


def test_try_to_cover_says_no():
    sk = sketch()
    feed(sk, [0, 5])
    assert oracles.opt_1d([0, 5], 1, 0) == 2.5
    assert sk.try_to_cover(1) is None


def test_try_to_cover_expands():
    sk = sketch(rho=2.0)
    feed(sk, [0, 2])
    cov = sk.try_to_cover(1)
    assert cov.solver_radius == 1.0
    assert cov.radius == 1.0 + 2 * 0.5 * 2.0


def test_storage_size():
    assert sketch().storage_size() == 0
    sk = sketch(z=2)
    feed(sk, [0, 0.1, 0.2])
    assert len(sk.balls) == 1 and len(sk.balls[0].reps) == 3
    assert sk.storage_size() == 4


def test_pack_bound_formula():
    assert pack_bound(2, 0.5, 1) == 2 * 27
    assert storage_ceiling(2, 1, 0.5, 1) == 54 * 3 + 1


def test_audit_flags_close_centers():
    sk = sketch(eps=0.5, k=2)
    ps = feed(sk, [0, 10])
    b = sk.balls[0]
    near = StreamPoint(99, (b.center.location[0] + 0.25,), 0, 100)
    sk.balls.append(MiniBall(near, sk.mini_radius, [sk.balls[1].reps[0]]))
    kinds = {v.invariant for v in sk.audit(ps, 1)}
    assert "well-spread" in kinds


def test_audit_flags_oversized_reps():
    sk = sketch(z=1)
    ps = feed(sk, [0, 0.1])
    sk.balls[0].reps.append(ps[0])
    sk.balls[0].reps.append(ps[1])
    kinds = {v.invariant for v in sk.audit(ps, 1)}
    assert "rep-size" in kinds


def test_audit_flags_lost_point():
    sk = sketch(z=1)
    ps = feed(sk, [0, 0.1, 0.2])
    sk.balls[0].reps.pop()  # newest point silently dropped
    kinds = {v.invariant for v in sk.audit(ps, 2)}
    assert "discard" in kinds


def test_audit_inv1_hook():
    sk = sketch()
    ps = feed(sk, [0, 1])
    sk.tau = 50
    assert [v.invariant for v in sk.audit(ps, 2, lambda w, rho: False)] == ["tau"]
    assert sk.audit(ps, 2, lambda w, rho: True) == []


@given(st.integers(0, 100_000), st.sampled_from([1, 2]), st.sampled_from([0, 1, 2]),
       st.sampled_from([0.2, 0.5]), st.sampled_from([1.0, 2.0, 4.0]))
def test_audit_clean_after_every_event(seed, k, z, eps, rho):
    ev = gen_uniform(seed, 60, 15, SpreadBounds(1, 40), k=k, z=z, eps=eps)
    sk = DecisionSketch(rho, eps, k, z, LINE, EXACT_1D)
    ref = ReferenceStore()
    inv1 = Referee(LINE, EXACT_1D).inv1_check(k, z)
    tau = 0
    for p in ev.points:
        sk.handle_departure(p.t_arr)
        sk.handle_arrival(p)
        ref.add(p)
        assert sk.audit(ref.window(), p.t_arr, inv1) == []
        assert sk.tau >= tau
        tau = sk.tau
        assert sk.storage_size() <= sk.storage_ceiling


@given(st.integers(0, 100_000))
def test_dump_deterministic(seed):
    ev = gen_uniform(seed, 40, 10, SpreadBounds(1, 30), k=2, z=1)
    dumps = []
    for _ in range(2):
        sk = DecisionSketch(2.0, 0.25, 2, 1, LINE, EXACT_1D)
        for p in ev.points:
            sk.handle_departure(p.t_arr)
            sk.handle_arrival(p)
        dumps.append(sk.dump())
    assert dumps[0] == dumps[1]


def test_rejects_bad_params():
    with pytest.raises(ValueError):
        DecisionSketch(0, 0.5, 1, 0, LINE)
    with pytest.raises(ValueError):
        DecisionSketch(1, 1.5, 1, 0, LINE)
