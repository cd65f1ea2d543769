"""Stream points, metric spaces, and the window / spread configuration.

Timestamps are plain non-negative ints. Locations are tuples of floats in
Euclidean mode and point names (str) in distance-table mode; a metric object
knows how to compare them, both one pair at a time and in bulk.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Hashable, Iterable, Sequence

import numpy as np

Location = Hashable


class StreamError(ValueError):
    """Malformed stream or configuration."""


class SpreadViolation(ValueError):
    """A location breaks the declared [dmin, dmax] distance bounds."""


@dataclass(frozen=True, slots=True)
class StreamPoint:
    id: int
    location: Location
    t_arr: int
    t_exp: int


@dataclass(frozen=True, slots=True)
class Ball:
    center: Location
    radius: float

    def __post_init__(self):
        if not self.radius >= 0:
            raise ValueError(f"negative ball radius {self.radius}")


@dataclass(frozen=True)
class WindowConfig:
    W: int
    k: int
    z: int
    eps: float

    def __post_init__(self):
        if int(self.W) != self.W or self.W < 1:
            raise StreamError(f"window W must be a positive integer, got {self.W}")
        if int(self.k) != self.k or self.k < 1:
            raise StreamError(f"k must be a positive integer, got {self.k}")
        if int(self.z) != self.z or self.z < 0:
            raise StreamError(f"z must be a non-negative integer, got {self.z}")
        if not 0 < self.eps < 1:
            raise StreamError(f"eps must lie strictly between 0 and 1, got {self.eps}")

    def make_point(self, pid: int, location: Location, t_arr: int) -> StreamPoint:
        return StreamPoint(pid, location, t_arr, t_arr + self.W)


@dataclass(frozen=True)
class SpreadBounds:
    delta_min: float
    delta_max: float

    def __post_init__(self):
        if not self.delta_min > 0:
            raise StreamError(f"dmin must be positive, got {self.delta_min}")
        if self.delta_max < self.delta_min:
            raise StreamError(f"need dmin <= dmax, got {self.delta_min} > {self.delta_max}")

    @property
    def sigma(self) -> float:
        return self.delta_max / self.delta_min

    @property
    def log_sigma(self) -> int:
        """floor(log2 sigma), computed exactly from the float exponent."""
        return math.frexp(self.sigma)[1] - 1

    @property
    def n_levels(self) -> int:
        return self.log_sigma + 1

    def admits(self, d: float) -> bool:
        # distance 0 is a repeated location, which the model allows
        return d == 0 or self.delta_min <= d <= self.delta_max


class EuclideanMetric:
    """R^d with the l2 distance.

    The scalar and bulk distance routines evaluate the same float operations
    in the same order, so a comparison made one way never disagrees with the
    other.
    """

    kind = "euclidean"

    def __init__(self, dim: int = 1):
        if dim < 1:
            raise StreamError(f"dimension must be positive, got {dim}")
        self.dim = dim
        self.doubling_dim = dim

    def __repr__(self):
        return f"EuclideanMetric(dim={self.dim})"

    @property
    def spec(self) -> str:
        return f"euclidean:{self.dim}"

    def location(self, values: Sequence) -> tuple:
        if len(values) != self.dim:
            raise StreamError(f"expected {self.dim} coordinates, got {len(values)}")
        try:
            loc = tuple(float(v) for v in values)
        except ValueError as exc:
            raise StreamError(f"bad coordinate in {values!r}") from exc
        if not all(math.isfinite(v) for v in loc):
            raise StreamError(f"non-finite coordinate in {values!r}")
        return loc

    def distance(self, a, b) -> float:
        if self.dim == 1:
            return abs(a[0] - b[0])
        s = 0.0
        for x, y in zip(a, b):
            d = x - y
            s += d * d
        return math.sqrt(s)

    def coords(self, locs: Iterable) -> np.ndarray:
        arr = np.asarray(list(locs), dtype=float)
        return arr.reshape(-1, self.dim)

    def pairwise(self, A, B) -> np.ndarray:
        a = A if isinstance(A, np.ndarray) else self.coords(A)
        b = B if isinstance(B, np.ndarray) else self.coords(B)
        if self.dim == 1:
            return np.abs(a[:, 0, None] - b[None, :, 0])
        acc = np.zeros((a.shape[0], b.shape[0]))
        for i in range(self.dim):
            d = a[:, i, None] - b[None, :, i]
            acc += d * d
        return np.sqrt(acc)

    def paired(self, A, B) -> np.ndarray:
        """Distances between A[i] and B[i]."""
        a, b = self.coords(A), self.coords(B)
        if self.dim == 1:
            return np.abs(a[:, 0] - b[:, 0])
        acc = np.zeros(a.shape[0])
        for i in range(self.dim):
            d = a[:, i] - b[:, i]
            acc += d * d
        return np.sqrt(acc)

    def greedy_candidates(self, locs: Sequence, radius: float):
        """Extra ball centers for the fixed-radius greedy, with owner indices.

        On the line every cluster of radius r fits in [a, a + 2r] for its
        leftmost point a, so the shifted points a + r make the greedy's
        guarantee hold against centers placed anywhere, not just at input
        points. No such finite set is generated in higher dimensions.
        """
        if self.dim != 1:
            return [], []
        return [(x[0] + radius,) for x in locs], list(range(len(locs)))

    def dump_location(self, loc) -> list[str]:
        return [fmt_number(v) for v in loc]


class TableMetric:
    """A finite metric given by an explicit symmetric distance table.

    The point names in the table are the whole space, so they double as the
    candidate centers for the greedy and for the center-restricted oracle.
    """

    kind = "table"

    def __init__(self, names: Sequence[str], matrix, doubling_dim: int | None = None):
        self.names = list(names)
        self.index = {n: i for i, n in enumerate(self.names)}
        if len(self.index) != len(self.names):
            raise StreamError("duplicate names in distance table")
        self.matrix = np.asarray(matrix, dtype=float)
        n = len(self.names)
        if self.matrix.shape != (n, n):
            raise StreamError(f"distance table must be {n}x{n}, got {self.matrix.shape}")
        if not np.all(np.isfinite(self.matrix)):
            raise StreamError("distance table has missing or non-finite entries")
        if np.any(self.matrix < 0) or not np.array_equal(self.matrix, self.matrix.T):
            raise StreamError("distance table must be symmetric and non-negative")
        if np.any(np.diag(self.matrix) != 0):
            raise StreamError("distance table must have a zero diagonal")
        if doubling_dim is None:
            # any ball of m points is covered by m balls, so 2^d >= n suffices
            doubling_dim = max(1, math.ceil(math.log2(max(n, 2))))
        self.doubling_dim = doubling_dim

    def __repr__(self):
        return f"TableMetric({len(self.names)} points, doubling_dim={self.doubling_dim})"

    @property
    def spec(self) -> str:
        return f"table:{self.doubling_dim}"

    def location(self, values: Sequence) -> str:
        if len(values) != 1:
            raise StreamError(f"table mode expects one point name, got {values!r}")
        name = values[0]
        if name not in self.index:
            raise StreamError(f"unknown point name {name!r}")
        return name

    def distance(self, a, b) -> float:
        return float(self.matrix[self.index[a], self.index[b]])

    def coords(self, locs: Iterable) -> np.ndarray:
        return np.fromiter((self.index[x] for x in locs), dtype=np.intp)

    def pairwise(self, A, B) -> np.ndarray:
        a = A if isinstance(A, np.ndarray) else self.coords(A)
        b = B if isinstance(B, np.ndarray) else self.coords(B)
        return self.matrix[np.ix_(a, b)]

    def paired(self, A, B) -> np.ndarray:
        return self.matrix[self.coords(A), self.coords(B)]

    def greedy_candidates(self, locs: Sequence, radius: float):
        return list(self.names), [-1] * len(self.names)

    def dump_location(self, loc) -> list[str]:
        return [loc]

    def check_spread(self, spread: SpreadBounds) -> None:
        off = self.matrix[~np.eye(len(self.names), dtype=bool)]
        bad = (off < spread.delta_min) | (off > spread.delta_max)
        if bad.any():
            raise SpreadViolation(
                f"table distance {off[bad][0]} outside [{spread.delta_min}, {spread.delta_max}]")


Metric = EuclideanMetric | TableMetric


def window_contents(events: Sequence[StreamPoint], t: int) -> list[StreamPoint]:
    """Points alive at t: t_arr <= t < t_exp (absent at the expiration instant)."""
    return [p for p in events if p.t_arr <= t < p.t_exp]


def as_decimal(x) -> Fraction:
    """The rational a float was written as: 0.1 -> 1/10, not the nearest double."""
    return Fraction(repr(float(x)))


def fmt_number(x) -> str:
    """Shortest exact text for a number; integral floats print without '.0'."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    s = repr(float(x))
    return s[:-2] if s.endswith(".0") else s
