"""Batch k-center-with-outliers solvers for small point sets.

Three jobs: the fixed-radius greedy that drives sketch maintenance, exact
solvers used on the stored points at query time (and by the test oracles),
and the exact diameter-after-deleting-z-points routine.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .model import Ball, EuclideanMetric, StreamPoint


class InstanceTooLarge(ValueError):
    pass


class WrongMetric(TypeError):
    pass


@dataclass
class StaticSolution:
    balls: list[Ball]
    outliers: list[StreamPoint]
    radius: float

    def uncovered(self, points: Sequence[StreamPoint], metric, radius=None) -> list[StreamPoint]:
        """Points lying in none of the balls (grown to `radius` if given)."""
        if not points:
            return []
        if not self.balls:
            return list(points)
        r = self.radius if radius is None else radius
        d = metric.pairwise([b.center for b in self.balls], [p.location for p in points])
        hit = (d <= r).any(axis=0)
        return [p for p, h in zip(points, hit) if not h]


@dataclass(frozen=True)
class SolverSpec:
    name: str
    factor: float
    solve: Callable = field(repr=False)
    # restricted solvers place centers on input points; their smallest
    # positive optimum is dmin rather than dmin / 2
    restricted: bool = True

    def __call__(self, points, k, z, metric) -> StaticSolution:
        return self.solve(points, k, z, metric)


def _by_id(points):
    return sorted(points, key=lambda p: p.id)


def _greedy(G: np.ndarray, E: np.ndarray, cand_ok: np.ndarray, k: int):
    """Run k rounds of pick-heaviest-disk; returns chosen rows and the uncovered mask."""
    n = G.shape[1]
    unc = np.ones(n, dtype=bool)
    chosen = []
    for _ in range(k):
        if not unc.any():
            break
        counts = G @ unc.astype(float)
        counts[~cand_ok] = -1.0
        c = int(np.argmax(counts))
        chosen.append(c)
        unc &= ~E[c]
    return chosen, unc


def _candidates(locs, rho, metric):
    extra, owners = metric.greedy_candidates(locs, 2 * rho)
    return list(locs) + list(extra), list(range(len(locs))) + list(owners)


def charikar_fixed_radius(points: Sequence[StreamPoint], k: int, z: int, rho: float,
                          metric) -> StaticSolution | None:
    """Fixed-radius greedy of Charikar et al.; None when more than z points stay uncovered.

    Each of k rounds takes the candidate center whose 2*rho-ball holds the
    most uncovered points (ties to the smallest point id) and marks its
    6*rho-ball covered. Succeeds whenever the optimum is at most 2*rho.
    """
    if rho <= 0:
        raise ValueError(f"rho must be positive, got {rho}")
    pts = _by_id(points)
    if not pts:
        return StaticSolution([], [], 6 * rho)
    locs = [p.location for p in pts]
    cands, _ = _candidates(locs, rho, metric)
    D = metric.pairwise(cands, locs)
    G = (D <= 2 * rho).astype(float)
    E = D <= 6 * rho
    chosen, unc = _greedy(G, E, np.ones(len(cands), dtype=bool), k)
    if unc.sum() > z:
        return None
    return StaticSolution([Ball(cands[c], 6 * rho) for c in chosen],
                          [p for p, u in zip(pts, unc) if u], 6 * rho)


def greedy_prefix_search(Q: Sequence[StreamPoint], k: int, z: int, rho: float, metric):
    """Largest i such that the greedy succeeds on Q[:i], with that solution.

    Q must be sorted newest first. Success is not assumed monotone in i, so
    prefixes are tried from the full list downwards; Q[:1] always succeeds.
    The candidate/point distance matrix is built once and sliced per prefix.
    """
    n = len(Q)
    if n == 0:
        return 0, StaticSolution([], [], 6 * rho)
    # candidate rows ordered by ascending id so argmax ties go to the oldest point
    rev = list(reversed(Q))
    cands, owners = _candidates([q.location for q in rev], rho, metric)
    owner_q = np.array([n - 1 - o if o >= 0 else -1 for o in owners])
    D = metric.pairwise(cands, [q.location for q in Q])
    G = (D <= 2 * rho).astype(float)
    E = D <= 6 * rho
    for i in range(n, 0, -1):
        chosen, unc = _greedy(G[:, :i], E[:, :i], owner_q < i, k)
        if unc.sum() <= z:
            sol = StaticSolution([Ball(cands[c], 6 * rho) for c in chosen],
                                 [q for q, u in zip(Q[:i], unc) if u], 6 * rho)
            return i, sol
    raise AssertionError("greedy failed on a single point")


def radius_for_centers(points: Sequence[StreamPoint], centers: Sequence, z: int, metric) -> float:
    """Least radius covering all but z points with balls at the given centers."""
    n = len(points)
    if n <= z:
        return 0.0
    if not centers:
        return float("inf")
    d = metric.pairwise(list(centers), [p.location for p in points]).min(axis=0)
    return float(np.partition(d, n - z - 1)[n - z - 1])


def _assign(points, centers, z, metric, radius) -> StaticSolution:
    """Designate as outliers the z points farthest from their nearest center."""
    if not centers or len(points) <= z:
        return StaticSolution([], list(points), 0.0 if len(points) <= z else float("inf"))
    d = metric.pairwise(list(centers), [p.location for p in points]).min(axis=0)
    order = sorted(range(len(points)), key=lambda i: (d[i], points[i].id))
    outliers = sorted((points[i] for i in order[len(points) - z:]), key=lambda p: p.id) if z else []
    return StaticSolution([Ball(c, radius) for c in centers], outliers, radius)


def exact_kcenter_restricted(points: Sequence[StreamPoint], k: int, z: int, metric,
                             candidates: Sequence | None = None, *,
                             max_points: int = 64, max_k: int = 3) -> StaticSolution:
    """Optimal k-center with z outliers when centers must come from a finite set.

    The candidate set defaults to the distinct input locations, which is
    within a factor 2 of the unrestricted optimum. Enumerates every k-subset.
    """
    pts = _by_id(points)
    n = len(pts)
    if n <= z:
        return StaticSolution([], pts, 0.0)
    if candidates is None:
        candidates = list(dict.fromkeys(p.location for p in pts))
    cands = list(candidates)
    m = len(cands)
    if m <= k:
        r = radius_for_centers(pts, cands, z, metric)
        return _assign(pts, cands, z, metric, r)
    if n > max_points or k > max_k:
        raise InstanceTooLarge(f"restricted solver capped at n<={max_points}, k<={max_k}; "
                               f"got n={n}, k={k}")
    D = metric.pairwise(cands, [p.location for p in pts])
    best_r, best = float("inf"), None
    combos = itertools.combinations(range(m), k)
    while True:
        chunk = np.array(list(itertools.islice(combos, 4096)), dtype=np.intp)
        if chunk.size == 0:
            break
        M = D[chunk].min(axis=1)
        r = np.partition(M, n - z - 1, axis=1)[:, n - z - 1]
        j = int(np.argmin(r))
        if r[j] < best_r:
            best_r, best = float(r[j]), chunk[j]
    centers = [cands[c] for c in best]
    return _assign(pts, centers, z, metric, best_r)


def _interval_plan(xs: np.ndarray, diffs: np.ndarray, k: int, z: int, r: float):
    """Cover sorted xs with <= k intervals of length 2r and <= z skips, or None."""
    n = len(xs)
    nxt = (diffs <= 2 * r).sum(axis=1)
    INF = n + 1
    f = [[INF] * (z + 1) for _ in range(n + 1)]
    parent = [[None] * (z + 1) for _ in range(n + 1)]
    f[0][0] = 0
    for i in range(n):
        row = f[i]
        t = int(nxt[i])
        for j in range(z + 1):
            v = row[j]
            if v == INF:
                continue
            if v + 1 < f[t][j]:
                f[t][j] = v + 1
                parent[t][j] = (i, j, True)
            if j < z and v < f[i + 1][j + 1]:
                f[i + 1][j + 1] = v
                parent[i + 1][j + 1] = (i, j, False)
    ends = [j for j in range(z + 1) if f[n][j] <= k]
    if not ends:
        return None
    j = min(ends, key=lambda jj: (f[n][jj], jj))
    spans, skipped = [], []
    i = n
    while i > 0:
        pi, pj, is_ball = parent[i][j]
        if is_ball:
            spans.append((pi, i - 1))
        else:
            skipped.append(pi)
        i, j = pi, pj
    return spans[::-1], skipped[::-1]


def exact_kcenter_1d(points: Sequence[StreamPoint], k: int, z: int, metric=None) -> StaticSolution:
    """Exact unrestricted optimum on the real line.

    The optimum is half of some pairwise gap, so binary-search the sorted
    half-gaps with an interval-cover DP over (index, outliers used).
    """
    if metric is not None and not (isinstance(metric, EuclideanMetric) and metric.dim == 1):
        raise WrongMetric(f"exact_kcenter_1d needs a 1-dimensional Euclidean metric, got {metric!r}")
    pts = sorted(points, key=lambda p: (p.location[0], p.id))
    n = len(pts)
    if n <= z:
        return StaticSolution([], _by_id(pts), 0.0)
    xs = np.array([p.location[0] for p in pts])
    diffs = xs[None, :] - xs[:, None]
    radii = np.unique(np.concatenate(([0.0], diffs[np.triu_indices(n, 1)]))) / 2
    lo, hi = 0, len(radii) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        if _interval_plan(xs, diffs, k, z, radii[mid]) is None:
            lo = mid + 1
        else:
            hi = mid
    r = float(radii[lo])
    spans, skipped = _interval_plan(xs, diffs, k, z, r)
    balls = [Ball(((xs[a] + xs[b]) / 2,), r) for a, b in spans]
    return StaticSolution(balls, _by_id(pts[i] for i in skipped), r)


def _has_small_cover(edges: list[tuple[int, int]], budget: int) -> bool:
    if not edges:
        return True
    if budget == 0:
        return False
    u, v = edges[0]
    for w in (u, v):
        rest = [e for e in edges if w not in e]
        if _has_small_cover(rest, budget - 1):
            return True
    return False


def diam_with_outliers(points: Sequence[StreamPoint], z: int, metric, *,
                       max_points: int = 256, max_z: int = 4) -> float:
    """Smallest diameter left after deleting z points.

    Deleting z points to reach diameter <= delta is a vertex cover of size
    <= z in the graph of pairs farther apart than delta; that is decided by
    a depth-z branching search, and delta is binary-searched over the
    pairwise distances.
    """
    n = len(points)
    if n <= z + 1:
        return 0.0
    if n > max_points or z > max_z:
        raise InstanceTooLarge(f"diameter solver capped at n<={max_points}, z<={max_z}; "
                               f"got n={n}, z={z}")
    locs = [p.location for p in points]
    D = metric.pairwise(locs, locs)
    iu = np.triu_indices(n, 1)
    pair_d = D[iu]
    vals = np.unique(pair_d)
    lo, hi = 0, len(vals) - 1
    while lo < hi:
        mid = (lo + hi) // 2
        far = pair_d > vals[mid]
        edges = list(zip(iu[0][far].tolist(), iu[1][far].tolist()))
        if _has_small_cover(edges, z):
            hi = mid
        else:
            lo = mid + 1
    return float(vals[lo])


def _solve_1d(points, k, z, metric):
    return exact_kcenter_1d(points, k, z, metric)


def _solve_restricted(points, k, z, metric):
    return exact_kcenter_restricted(points, k, z, metric)


EXACT_1D = SolverSpec("exact-1d", 1.0, _solve_1d, restricted=False)
RESTRICTED = SolverSpec("restricted", 2.0, _solve_restricted, restricted=True)


def default_solver(metric) -> SolverSpec:
    if isinstance(metric, EuclideanMetric) and metric.dim == 1:
        return EXACT_1D
    return RESTRICTED
