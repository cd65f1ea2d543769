"""The radius ladder: one decision sketch per guess rho_i = 2^i * rho_0.

Queries walk the ladder from the smallest guess up and answer from the
first level that does not say NO.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .decision import Cover, DecisionSketch, storage_ceiling
from .model import (Ball, EuclideanMetric, SpreadBounds, SpreadViolation, StreamError,
                    StreamPoint, TableMetric, WindowConfig)
from .solvers import SolverSpec, default_solver


class NoLevelAnswered(RuntimeError):
    """Every level said NO; the declared spread bounds must be wrong."""


@dataclass
class QueryResult:
    radius: float
    balls: list[Ball]
    outliers: list[StreamPoint]
    level: int | None
    storage: dict
    exact_radius: Fraction | None = None

    def to_json(self, metric) -> dict:
        return {
            "radius": self.radius,
            "centers": [_jsonable(b.center, metric) for b in self.balls],
            "outliers": [p.id for p in self.outliers],
            "level": self.level,
            "storage": self.storage,
        }


@dataclass
class DiameterResult:
    diameter: float
    level: int | None
    storage: dict
    exact_radius: Fraction | None = None

    def to_json(self, metric=None) -> dict:
        return {"diameter": self.diameter, "level": self.level, "storage": self.storage}


def _jsonable(loc, metric):
    if isinstance(metric, TableMetric):
        return loc
    return [float(v) for v in loc]


def ladder_base(spread: SpreadBounds, solver: SolverSpec) -> float:
    """Smallest positive optimum the solver's notion of opt can take.

    Centers restricted to input points give at least dmin; free centers on
    the line can sit halfway between two points, giving dmin / 2.
    """
    return spread.delta_min if solver.restricted else spread.delta_min / 2


class WindowSketch:
    def __init__(self, config: WindowConfig, spread: SpreadBounds, metric=None,
                 solver: SolverSpec | None = None, check_spread: bool = True):
        self.config = config
        self.spread = spread
        self.metric = metric or EuclideanMetric(1)
        self.solver = solver or default_solver(self.metric)
        self.eps_level = config.eps / 2
        self.rho0 = ladder_base(spread, self.solver)
        self.levels = [DecisionSketch(self.rho0 * 2 ** i, self.eps_level, config.k, config.z,
                                      self.metric, self.solver)
                       for i in range(spread.n_levels)]
        self.check_spread = check_spread
        self.clock: int | None = None
        self.last_arrival: int | None = None
        self.n_arrivals = 0
        self._seen: list = []  # distinct locations so far, for the spread check
        self._seen_set: set = set()

    @property
    def rhos(self) -> list[float]:
        return [lv.rho for lv in self.levels]

    def _check_location(self, loc) -> None:
        if loc in self._seen_set:
            return
        if self._seen:
            d = self.metric.pairwise([loc], self._seen)[0]
            bad = (d != 0) & ((d < self.spread.delta_min) | (d > self.spread.delta_max))
            if bad.any():
                j = int(np.flatnonzero(bad)[0])
                raise SpreadViolation(f"location {loc!r} is {d[j]} from earlier location "
                                      f"{self._seen[j]!r}, outside [{self.spread.delta_min}, "
                                      f"{self.spread.delta_max}]")
        self._seen.append(loc)
        self._seen_set.add(loc)

    def insert(self, location, t_arr: int | None = None) -> StreamPoint:
        """Build the next stream point (id = arrival rank) and ingest it."""
        if t_arr is None:
            t_arr = 0 if self.last_arrival is None else self.last_arrival + 1
        p = self.config.make_point(self.n_arrivals, location, t_arr)
        self.ingest(p)
        return p

    def ingest(self, p: StreamPoint) -> None:
        if self.last_arrival is not None and p.t_arr <= self.last_arrival:
            raise StreamError(f"arrival time {p.t_arr} not after previous arrival {self.last_arrival}")
        if self.clock is not None and p.t_arr < self.clock:
            raise StreamError(f"arrival time {p.t_arr} is behind the clock {self.clock}")
        if p.t_exp != p.t_arr + self.config.W:
            raise StreamError(f"point {p.id} has t_exp {p.t_exp} != t_arr + W")
        if self.check_spread:
            self._check_location(p.location)
        self.clock = p.t_arr
        self.last_arrival = p.t_arr
        self.n_arrivals += 1
        for lv in self.levels:
            lv.handle_departure(p.t_arr)
            lv.handle_arrival(p)

    def advance(self, t: int) -> None:
        if self.clock is not None and t < self.clock:
            raise StreamError(f"cannot move the clock back from {self.clock} to {t}")
        self.clock = t
        for lv in self.levels:
            lv.handle_departure(t)

    @property
    def now(self) -> int:
        return 0 if self.clock is None else self.clock

    def _ladder(self, k: int):
        for i, lv in enumerate(self.levels):
            cov = lv.try_to_cover(self.now, k=k)
            if cov is not None:
                return i, cov
        raise NoLevelAnswered(f"no level answered at t={self.now}; check dmin/dmax")

    def _answer(self, k: int) -> QueryResult:
        i, cov = self._ladder(k)
        r, exact = cov.radius, cov.exact_radius
        if r < self.rho0:
            r, exact = 0.0, Fraction(0)
        return QueryResult(r, [Ball(b.center, r) for b in cov.balls], cov.outliers, i,
                           self.storage_report(), exact)

    def find_approximate_centers(self) -> QueryResult:
        return self._answer(self.config.k)

    def query_kprime(self, kprime: int) -> QueryResult:
        if not 1 <= kprime <= self.config.k:
            raise ValueError(f"k' must lie in [1, {self.config.k}], got {kprime}")
        return self._answer(kprime)

    def query_diameter(self) -> DiameterResult:
        for i, lv in enumerate(self.levels):
            D = lv.try_diameter(self.now)
            if D is not None:
                return DiameterResult(D, i, self.storage_report())
        raise NoLevelAnswered(f"no level answered the diameter query at t={self.now}")

    def level_cover(self, i: int, k: int | None = None) -> Cover | None:
        return self.levels[i].try_to_cover(self.now, k=k)

    def storage_report(self) -> dict:
        per = [lv.storage_size() for lv in self.levels]
        ceil = storage_ceiling(self.config.k, self.config.z, self.eps_level,
                               self.metric.doubling_dim)
        return {"levels": per, "total": sum(per), "level_ceiling": ceil,
                "total_ceiling": ceil * len(self.levels)}

    def dump(self) -> str:
        parts = [f"clock={self.clock}"]
        for i, lv in enumerate(self.levels):
            parts.append(f"level {i}\n{lv.dump()}")
        return "\n".join(parts)
