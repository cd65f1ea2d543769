"""Sketch for the decision version at one radius guess rho.

State is a timestamp tau, a set of well-spread mini-balls of radius
eps*rho each holding up to z+1 representative points, and a pool of at most
z outliers. `try_to_cover` either certifies that the window optimum exceeds
2*rho or returns k balls covering the window minus at most z points.
"""

from __future__ import annotations

import math
from bisect import insort
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .model import Ball, StreamPoint, as_decimal
from .solvers import SolverSpec, default_solver, diam_with_outliers, greedy_prefix_search


def pack_bound(k: int, eps: float, d: int) -> int:
    """Ceiling on the mini-ball count.

    Centers are more than eps*rho apart and sit inside k balls of radius
    (6+eps)*rho, so disjoint radius eps*rho/2 balls around them fit in the
    k balls grown by eps*rho/2; compare volumes.
    """
    return k * math.ceil((1 + 2 * (6 + eps) / eps) ** d)


def storage_ceiling(k: int, z: int, eps: float, d: int) -> int:
    return pack_bound(k, eps, d) * (z + 2) + z


@dataclass
class MiniBall:
    center: StreamPoint
    radius: float
    reps: list[StreamPoint] = field(default_factory=list)  # ascending arrival

    def full(self, z: int) -> bool:
        return len(self.reps) == z + 1


@dataclass
class Cover:
    balls: list[Ball]
    outliers: list[StreamPoint]
    solver_radius: float
    radius: float
    exact_radius: Fraction  # solver radius + 2*eps*rho with eps read as written


@dataclass(frozen=True)
class Violation:
    invariant: str
    message: str
    witness: object = None

    def __str__(self):
        return f"[{self.invariant}] {self.message}"


def _by_arrival(p: StreamPoint):
    return p.t_arr


class DecisionSketch:
    def __init__(self, rho: float, eps: float, k: int, z: int, metric,
                 solver: SolverSpec | None = None):
        if not rho > 0:
            raise ValueError(f"rho must be positive, got {rho}")
        if not 0 < eps < 1:
            raise ValueError(f"eps must lie in (0, 1), got {eps}")
        self.rho = rho
        self.eps = eps
        self.k = k
        self.z = z
        self.metric = metric
        self.solver = solver or default_solver(metric)
        self.tau = 0
        self.balls: list[MiniBall] = []
        self.outliers: list[StreamPoint] = []

    @property
    def mini_radius(self) -> float:
        return self.eps * self.rho

    @property
    def pack_bound(self) -> int:
        return pack_bound(self.k, self.eps, self.metric.doubling_dim)

    @property
    def storage_ceiling(self) -> int:
        return storage_ceiling(self.k, self.z, self.eps, self.metric.doubling_dim)

    def stored_points(self) -> list[StreamPoint]:
        pts = [q for b in self.balls for q in b.reps]
        pts.extend(self.outliers)
        return pts

    def storage_size(self) -> int:
        return len(self.outliers) + sum(len(b.reps) for b in self.balls) + len(self.balls)

    def _host(self, balls: Sequence[MiniBall], loc) -> MiniBall | None:
        """Containing mini-ball with the smallest center id, if any."""
        if not balls:
            return None
        d = self.metric.pairwise([loc], [b.center.location for b in balls])[0]
        hits = np.flatnonzero(d <= self.mini_radius)
        if hits.size == 0:
            return None
        return min((balls[i] for i in hits), key=lambda b: b.center.id)

    def handle_departure(self, now: int) -> None:
        """Drop every stored point with t_exp <= now, and any mini-ball left empty."""
        for b in self.balls:
            reps = b.reps
            if reps and reps[0].t_exp <= now:
                b.reps = [q for q in reps if q.t_exp > now]
        self.balls = [b for b in self.balls if b.reps]
        if self.outliers and min(q.t_exp for q in self.outliers) <= now:
            self.outliers = [q for q in self.outliers if q.t_exp > now]

    def handle_arrival(self, p: StreamPoint) -> None:
        rho, z = self.rho, self.z

        # 1: file p under an existing mini-ball, else as an outlier
        host = self._host(self.balls, p.location)
        if host is not None:
            host.reps.append(p)
        else:
            self.outliers.append(p)

        # 2: longest newest-first prefix the greedy can cover at radius 6*rho
        Q = self.stored_points()
        Q.sort(key=_by_arrival, reverse=True)
        istar, sol = greedy_prefix_search(Q, self.k, z, rho, self.metric)

        # 3: discard the rest; tau moves to the newest discarded expiration
        if istar < len(Q):
            self.tau = max(self.tau, Q[istar].t_exp)
            gone = {q.id for q in Q[istar:]}
            for b in self.balls:
                b.reps = [q for q in b.reps if q.id not in gone]
            self.balls = [b for b in self.balls if b.reps]
            self.outliers = [q for q in self.outliers if q.id not in gone]
            Q = Q[:istar]

        # 4: rebuild around the greedy balls grown by eps*rho
        reach = 6 * rho + self.mini_radius
        big = [b.center for b in sol.balls]
        kept: list[MiniBall] = []
        if self.balls and big:
            d = self.metric.pairwise([b.center.location for b in self.balls], big)
            keep = (d <= reach).any(axis=1)
            kept = [b for b, ok in zip(self.balls, keep) if ok]
        in_kept = {q.id for b in kept for q in b.reps}
        Z = [q for q in Q if q.id not in in_kept]  # newest first
        inside = np.zeros(len(Z), dtype=bool)
        if Z and big:
            d = self.metric.pairwise([q.location for q in Z], big)
            inside = (d <= reach).any(axis=1)
        balls = kept
        zin = [q for q, ok in zip(Z, inside) if ok]
        if zin:
            r = self.mini_radius
            zloc = [q.location for q in zin]
            near_kept = (self.metric.pairwise(zloc, [b.center.location for b in kept]) <= r
                         if kept else np.zeros((len(zin), 0), dtype=bool))
            near_new = self.metric.pairwise(zloc, zloc) <= r
            kept_ids = np.array([b.center.id for b in kept], dtype=np.int64)
            new_balls: list[tuple[int, MiniBall]] = []  # (index into zin, ball)
            for j, q in enumerate(zin):
                host, hid = None, None
                hits = np.flatnonzero(near_kept[j])
                if hits.size:
                    a = hits[np.argmin(kept_ids[hits])]
                    host, hid = kept[a], int(kept_ids[a])
                for c, b in new_balls:
                    if near_new[j, c] and (hid is None or b.center.id < hid):
                        host, hid = b, b.center.id
                if host is not None:
                    insort(host.reps, q, key=_by_arrival)
                else:
                    b = MiniBall(q, r, [q])
                    new_balls.append((j, b))
                    balls.append(b)
        for b in balls:
            if len(b.reps) > z + 1:
                b.reps = b.reps[-(z + 1):]
        self.balls = balls
        self.outliers = sorted((q for q, ok in zip(Z, inside) if not ok), key=_by_arrival)

    def try_to_cover(self, now: int, k: int | None = None,
                     solver: SolverSpec | None = None) -> Cover | None:
        """Solve on the stored points; None means NO (window optimum > 2*rho)."""
        if now < self.tau:
            return None
        S = self.stored_points()
        sol = (solver or self.solver)(S, k or self.k, self.z, self.metric)
        if sol.radius > 2 * self.rho:
            return None
        r = sol.radius + 2 * self.mini_radius
        exact = Fraction(sol.radius) + 2 * as_decimal(self.eps) * Fraction(self.rho)
        return Cover([Ball(b.center, r) for b in sol.balls], sol.outliers, sol.radius, r, exact)

    def try_diameter(self, now: int) -> float | None:
        if now < self.tau:
            return None
        D = diam_with_outliers(self.stored_points(), self.z, self.metric)
        return None if D > 2 * self.rho else D

    def audit(self, window: Sequence[StreamPoint], now: int, inv1_check=None) -> list[Violation]:
        """Check the structural invariants against the true window contents.

        `inv1_check(window, rho) -> bool` is the optional certified-optimum
        test applied when now < tau.
        """
        out: list[Violation] = []
        r = self.mini_radius
        z = self.z
        metric = self.metric
        alive = {p.id: p for p in window}
        if len(self.balls) > 1:
            C = metric.pairwise([b.center.location for b in self.balls],
                                [b.center.location for b in self.balls])
            np.fill_diagonal(C, np.inf)
            i, j = np.unravel_index(np.argmin(C), C.shape)
            if C[i, j] <= r:
                out.append(Violation("well-spread",
                                     f"centers {self.balls[i].center.id} and {self.balls[j].center.id} "
                                     f"at distance {C[i, j]} <= {r}",
                                     (self.balls[i].center.id, self.balls[j].center.id)))
        seen: dict[int, int] = {}
        pairs = [(q, b) for b in self.balls for q in b.reps]
        if pairs:
            d = metric.paired([q.location for q, _ in pairs], [b.center.location for _, b in pairs])
            for i in np.flatnonzero(d > r):
                q, b = pairs[i]
                out.append(Violation("rep-inside", f"rep {q.id} outside ball {b.center.id}", q.id))
        for b in self.balls:
            reps = b.reps
            if not 1 <= len(reps) <= z + 1:
                out.append(Violation("rep-size", f"ball {b.center.id} holds {len(reps)} reps",
                                     b.center.id))
            if len(reps) > 1 and any(a.t_arr >= c.t_arr for a, c in zip(reps, reps[1:])):
                out.append(Violation("rep-order", f"ball {b.center.id} reps out of arrival order",
                                     b.center.id))
            for q in reps:
                if q.id in seen:
                    out.append(Violation("rep-disjoint",
                                         f"point {q.id} in balls {seen[q.id]} and {b.center.id}", q.id))
                seen[q.id] = b.center.id
        for qid in seen.keys() - alive.keys():
            out.append(Violation("rep-alive", f"rep {qid} not in the window", qid))
        if len(self.outliers) > z:
            out.append(Violation("outlier-count", f"{len(self.outliers)} outliers > z={z}"))
        for q in self.outliers:
            if q.id not in alive:
                out.append(Violation("outlier-alive", f"outlier {q.id} not in the window", q.id))
            if q.id in seen:
                out.append(Violation("rep-disjoint", f"point {q.id} is both rep and outlier", q.id))
        if len(self.balls) > self.pack_bound:
            out.append(Violation("ball-count", f"{len(self.balls)} mini-balls > {self.pack_bound}"))

        stored = set(seen) | {q.id for q in self.outliers}
        missing = [p for p in window if p.id not in stored and p.t_exp > self.tau]
        if missing:
            full = [b for b in self.balls if b.full(z)]
            if not full:
                p = missing[0]
                out.append(Violation("discard", f"point {p.id} discarded with no full mini-ball", p.id))
            else:
                d = metric.pairwise([p.location for p in missing], [b.center.location for b in full])
                oldest = np.array([b.reps[0].t_arr for b in full])
                arr = np.array([p.t_arr for p in missing])
                vouched = ((d <= r) & (oldest[None, :] > arr[:, None])).any(axis=1)
                for i in np.flatnonzero(~vouched):
                    p = missing[i]
                    out.append(Violation("discard",
                                         f"point {p.id} discarded but t_exp={p.t_exp} > tau={self.tau} "
                                         f"and no full newer mini-ball contains it", p.id))
        if inv1_check is not None and now < self.tau and not inv1_check(window, self.rho):
            out.append(Violation("tau", f"now={now} < tau={self.tau} but window optimum <= 2*rho"))
        return out

    def dump(self) -> str:
        lines = [f"rho={self.rho!r} tau={self.tau}"]
        for b in sorted(self.balls, key=lambda b: b.center.id):
            lines.append(f"ball {b.center.id} reps={','.join(str(q.id) for q in b.reps)}")
        lines.append("outliers=" + ",".join(str(q.id) for q in sorted(self.outliers, key=lambda q: q.id)))
        return "\n".join(lines)
