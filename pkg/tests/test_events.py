import pytest

from swkcenter import events
from swkcenter.harness import gen_table, gen_uniform
from swkcenter.model import SpreadBounds, StreamError


def test_roundtrip_euclidean():
    ev = gen_uniform(1, 30, 10, SpreadBounds(1, 20), dim=2)
    again = events.loads(ev.dumps())
    assert again.points == ev.points
    assert again.dumps() == ev.dumps()


def test_roundtrip_table():
    ev = gen_table(2, 25, 8, names=6)
    again = events.loads(ev.dumps())
    assert again.points == ev.points
    assert (again.metric.matrix == ev.metric.matrix).all()


def test_untimed_arrivals_use_rank():
    ev = events.loads("config k=1 z=0 eps=0.5 W=3 dmin=1 dmax=4\narrive 2\narrive 0 # c\n\narrive 1\n")
    assert [(p.t_arr, p.location, p.t_exp) for p in ev.points] == [
        (0, (2.0,), 3), (1, (0.0,), 4), (2, (1.0,), 5)]
    assert ev.explicit_times is False


def test_expectation_lines():
    ev = events.loads("config k=1 z=1 eps=0.5 W=9 dmin=1 dmax=4\narrive 3 1\nexpect-ratio-gap 4 5 1.5\n")
    assert ev.expectations[0].t_plus == 5 and ev.expectations[0].bound == 1.5


@pytest.mark.parametrize("text", [
    "",
    "arrive 1 2\n",
    "config k=1 z=0 eps=0.5 W=3 dmin=1\n",
    "config k=1 z=0 eps=0.5 W=3 dmin=1 dmax=4 foo=1\n",
    "config k=1 z=0 eps=0.5 W=3 dmin=1 dmax=4\narrive 1 1\narrive 1 2\n",
    "config k=1 z=0 eps=0.5 W=3 dmin=1 dmax=4\narrive 2 1\narrive 1 2\n",
    "config k=1 z=0 eps=0.5 W=3 dmin=1 dmax=4\narrive 1 x\n",
    "config k=1 z=0 eps=0.5 W=3 dmin=1 dmax=4\narrive 1 1 1\n",
    "config k=1 z=0 eps=0.5 W=3 dmin=1 dmax=4\narrive 1 1\narrive 2\n",
    "config k=1 z=0 eps=0.5 W=3 dmin=1 dmax=4\nleave 1\n",
    "config k=1 z=0 eps=1.5 W=3 dmin=1 dmax=4\n",
    "config k=1 z=0 eps=0.5 W=3 dmin=1 dmax=4 metric=table\ndist a b 1\narrive c\n",
    "config k=1 z=0 eps=0.5 W=3 dmin=1 dmax=4 metric=table\ndist a b 1\ndist a c 1\narrive a\n",
    "config k=1 z=0 eps=0.5 W=3 dmin=1 dmax=4 metric=hyperbolic\n",
])
def test_malformed(text):
    with pytest.raises(StreamError):
        events.loads(text)
