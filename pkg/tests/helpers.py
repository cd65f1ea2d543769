from swkcenter.model import EuclideanMetric, StreamPoint

LINE = EuclideanMetric(1)


def pts1d(xs, t0=0, W=1000):
    return [StreamPoint(i, (float(x),), t0 + i, t0 + i + W) for i, x in enumerate(xs)]


def xs_of(points):
    return [p.location[0] for p in points]
