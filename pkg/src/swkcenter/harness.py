"""Ground truth and stress streams for the window sketch.

A ReferenceStore keeps the exact window, a Referee knows which optimum the
sketch should be compared with in each metric, and `evaluate` replays an
event file through both, checking every contract along the way. The two
adversarial generators build the constant-factor and (1+eps) lower-bound
streams in R^1.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .decision import DecisionSketch, Violation
from .events import EventFile, RatioGapExpectation
from .model import (EuclideanMetric, SpreadBounds, StreamError, StreamPoint, TableMetric,
                    WindowConfig, as_decimal, window_contents)
from .solvers import (EXACT_1D, RESTRICTED, SolverSpec, exact_kcenter_1d,
                      exact_kcenter_restricted)
from .window import WindowSketch


class ReferenceStore:
    """Every unexpired point, in arrival order."""

    def __init__(self):
        self._q: deque[StreamPoint] = deque()
        self.now: int | None = None

    def add(self, p: StreamPoint) -> None:
        self.advance(p.t_arr)
        self._q.append(p)

    def advance(self, t: int) -> None:
        self.now = t
        while self._q and self._q[0].t_exp <= t:
            self._q.popleft()

    def window(self) -> list[StreamPoint]:
        return list(self._q)

    def __len__(self):
        return len(self._q)


def diam_z_enumerate(points, z, metric, max_points: int = 40, max_z: int = 4) -> float:
    """diam_z by trying every z-subset to delete."""
    n = len(points)
    if n <= z + 1:
        return 0.0
    if n > max_points or z > max_z:
        raise ValueError(f"enumeration oracle capped at n<={max_points}, z<={max_z}")
    D = metric.pairwise([p.location for p in points], [p.location for p in points])
    best = math.inf
    idx = np.arange(n)
    for drop in itertools.combinations(range(n), z):
        keep = np.delete(idx, drop)
        best = min(best, float(D[np.ix_(keep, keep)].max()))
    return best


class Referee:
    """Which optimum the sketch answers against, and what NO certifies.

    On the line: the exact optimum, c = 1, and NO means opt > 2 rho.
    Elsewhere: the optimum with centers among the window points, c = 2.
    A NO from the solver step only certifies that optimum > rho; a NO from
    the timestamp certifies opt > 2 rho against centers anywhere in a table
    (the greedy tries every table point) but only opt > rho in R^d, d >= 2.
    """

    def __init__(self, metric, solver: SolverSpec):
        self.metric = metric
        self.solver = solver
        self.line = isinstance(metric, EuclideanMetric) and metric.dim == 1
        self.factor = 1.0 if self.line else solver.factor
        self.no_factor = 2 if self.line else 1

    def opt(self, window, k, z) -> float:
        if self.line:
            return exact_kcenter_1d(window, k, z, self.metric).radius
        return exact_kcenter_restricted(window, k, z, self.metric, max_points=128).radius

    def tau_certificate(self, window, k, z, rho) -> bool:
        """Does the window optimum exceed what a timestamp NO at rho promises?"""
        if self.line:
            return exact_kcenter_1d(window, k, z, self.metric).radius > 2 * rho
        if isinstance(self.metric, TableMetric):
            r = exact_kcenter_restricted(window, k, z, self.metric, candidates=self.metric.names,
                                         max_points=128).radius
            return r > 2 * rho
        return self.opt(window, k, z) > rho

    def inv1_check(self, k, z):
        return lambda window, rho: self.tau_certificate(window, k, z, rho)


# ---------------------------------------------------------------- evaluation

@dataclass
class LevelCheck:
    level: int
    rho: float
    answer: str  # "cover", "no-tau" or "no-solver"
    ok: bool
    detail: str = ""


@dataclass
class QueryRecord:
    t: int
    kind: str
    radius: float
    level: int | None
    opt: float
    ratio: float
    bound: float
    within: bool
    covered: bool
    storage: dict
    storage_ok: bool
    levels: list[LevelCheck] = field(default_factory=list)
    window_size: int = 0

    @property
    def ok(self) -> bool:
        return self.within and self.covered and self.storage_ok and all(c.ok for c in self.levels)

    def to_json(self) -> dict:
        return {"t": self.t, "kind": self.kind, "radius": self.radius, "level": self.level,
                "opt": self.opt, "ratio": self.ratio, "bound": self.bound, "ok": self.ok,
                "storage": self.storage}


@dataclass
class GapCheck:
    expectation: RatioGapExpectation
    opt_minus: float
    opt_plus: float
    ok: bool


@dataclass
class EvalReport:
    queries: list[QueryRecord] = field(default_factory=list)
    violations: list[tuple[int, int, Violation]] = field(default_factory=list)  # (t, level, v)
    events: int = 0  # arrivals replayed
    audited_events: int = 0
    storage_violations: int = 0
    max_level_storage: int = 0
    gaps: list[GapCheck] = field(default_factory=list)
    stored_exp_at: dict = field(default_factory=dict)  # t -> per-level distinct t_exp count

    @property
    def ok(self) -> bool:
        return (not self.violations and self.storage_violations == 0
                and all(q.ok for q in self.queries) and all(g.ok for g in self.gaps))

    @property
    def max_ratio(self) -> float:
        return max((q.ratio for q in self.queries), default=1.0)


def _ratio(r: float, opt: float) -> float:
    if opt == 0:
        return 1.0 if r == 0 else math.inf
    return r / opt


def _within(r, opt: float, factor: float, eps: float) -> bool:
    """opt <= r <= factor*(1+eps)*opt in exact rationals.

    `r` may be a Fraction (the sketch's exact radius); eps is taken as the
    decimal it was written as, so eps=0.1 means 1/10.
    """
    r, opt = Fraction(r), Fraction(opt)
    if r < opt:
        return False
    return r <= Fraction(factor) * (1 + as_decimal(eps)) * opt


def _uncovered(window, balls, metric, radius) -> int:
    if not window:
        return 0
    if not balls:
        return len(window)
    d = metric.pairwise([b.center for b in balls], [p.location for p in window])
    return int((~(d <= radius).any(axis=0)).sum())


class _Tracker:
    """Per-level tau monotonicity and discarded-expiration bookkeeping."""

    def __init__(self, n):
        self.tau = [0] * n
        self.carried = [set() for _ in range(n)]
        self.dropped = [set() for _ in range(n)]

    def step(self, levels, now) -> list[tuple[int, Violation]]:
        out = []
        for i, lv in enumerate(levels):
            if lv.tau < self.tau[i]:
                out.append((i, Violation("tau-monotone", f"tau fell from {self.tau[i]} to {lv.tau}")))
            self.tau[i] = lv.tau
            cur = {q.t_exp for q in lv.stored_points()}
            back = cur & self.dropped[i]
            if back:
                out.append((i, Violation("discard-persistence",
                                         f"expiration times {sorted(back)} reappeared", sorted(back))))
            self.dropped[i] |= {e for e in self.carried[i] - cur if e > now}
            self.carried[i] = cur
        return out


class Evaluator:
    """Replays one stream through a WindowSketch and the reference store."""

    def __init__(self, ev: EventFile, solver: SolverSpec | None = None, audit: str = "events",
                 check_levels: bool = True):
        self.ev = ev
        self.ws = WindowSketch(ev.config, ev.spread, ev.metric, solver)
        self.ref = ReferenceStore()
        self.referee = Referee(ev.metric, self.ws.solver)
        self.audit = audit  # "events", "queries" or "none"
        self.check_levels = check_levels
        self.report = EvalReport()
        self.tracker = _Tracker(len(self.ws.levels))
        self._i = 0
        self.fault = None  # callable(ws, event_index) used by fault injection

    def _audit(self):
        cfg = self.ev.config
        win = self.ref.window()
        now = self.ws.now
        for i, lv in enumerate(self.ws.levels):
            for v in lv.audit(win, now):
                self.report.violations.append((now, i, v))
        for i, v in self.tracker.step(self.ws.levels, now):
            self.report.violations.append((now, i, v))
        self.report.audited_events += 1
        self._check_storage()

    def _check_storage(self):
        st = self.ws.storage_report()
        self.report.max_level_storage = max(self.report.max_level_storage, max(st["levels"]))
        if max(st["levels"]) > st["level_ceiling"] or st["total"] > st["total_ceiling"]:
            self.report.storage_violations += 1

    def step_to(self, t: int) -> None:
        """Ingest every arrival with t_arr <= t, then move the clock to t."""
        pts = self.ev.points
        while self._i < len(pts) and pts[self._i].t_arr <= t:
            p = pts[self._i]
            self.ws.ingest(p)
            self.ref.add(p)
            self.report.events += 1
            if self.fault is not None:
                self.fault(self.ws, self._i)
            self._i += 1
            if self.audit == "events":
                self._audit()
        if self.ws.clock is None or t > self.ws.clock:
            self.ws.advance(t)
            self.ref.advance(t)
            if self.audit == "events":
                self._audit()

    def finish(self) -> None:
        if self._i < len(self.ev.points):
            self.step_to(self.ev.points[-1].t_arr)

    def stored_expirations(self) -> list[int]:
        return [len({q.t_exp for q in lv.stored_points()}) for lv in self.ws.levels]

    def _level_checks(self, win, k, opt) -> list[LevelCheck]:
        ws, ref, cfg = self.ws, self.referee, self.ev.config
        out = []
        for i, lv in enumerate(ws.levels):
            cov = lv.try_to_cover(ws.now, k=k)
            if cov is None:
                kind = "no-tau" if ws.now < lv.tau else "no-solver"
                if kind == "no-tau":
                    ok = ref.tau_certificate(win, k, cfg.z, lv.rho)
                else:
                    ok = opt > ref.no_factor * lv.rho
                out.append(LevelCheck(i, lv.rho, kind, ok,
                                      "" if ok else f"NO at rho={lv.rho} but opt={opt}"))
                continue
            unc = _uncovered(win, cov.balls, ws.metric, cov.radius)
            bound = ref.factor * opt + 2 * lv.eps * lv.rho
            ok = unc <= cfg.z and cov.radius <= bound and len(cov.balls) <= k
            out.append(LevelCheck(i, lv.rho, "cover", ok,
                                  "" if ok else f"radius {cov.radius} vs {bound}, {unc} uncovered"))
        return out

    def query(self, t: int, kind: str = "centers", kprime: int | None = None) -> QueryRecord:
        self.step_to(t)
        if self.audit == "queries":
            self._audit()
        cfg, ws, ref = self.ev.config, self.ws, self.referee
        win = self.ref.window()
        self.report.stored_exp_at[t] = self.stored_expirations()
        st = ws.storage_report()
        storage_ok = max(st["levels"]) <= st["level_ceiling"] and st["total"] <= st["total_ceiling"]
        if kind == "diameter":
            res = ws.query_diameter()
            opt = diam_z_enumerate(win, cfg.z, ws.metric)
            lo = (1 - 2 * as_decimal(cfg.eps)) * Fraction(opt)
            within = lo <= Fraction(res.diameter) <= Fraction(opt)
            rec = QueryRecord(t, kind, res.diameter, res.level, opt, _ratio(res.diameter, opt),
                              1 - 2 * cfg.eps, within, True, st, storage_ok, window_size=len(win))
        else:
            k = cfg.k if kind == "centers" else kprime
            res = ws.find_approximate_centers() if kind == "centers" else ws.query_kprime(k)
            opt = ref.opt(win, k, cfg.z)
            within = _within(res.exact_radius, opt, ref.factor, cfg.eps)
            covered = (_uncovered(win, res.balls, ws.metric, res.radius) <= cfg.z
                       and len(res.balls) <= k)
            rec = QueryRecord(t, kind, res.radius, res.level, opt, _ratio(res.radius, opt),
                              ref.factor * (1 + cfg.eps), within, covered, st, storage_ok,
                              window_size=len(win))
            if self.check_levels:
                rec.levels = self._level_checks(win, k, opt)
        self.report.queries.append(rec)
        return rec


def default_queries(ev: EventFile, every: int | None = None) -> list[int]:
    if not ev.points:
        return [0]
    t0, t1 = ev.points[0].t_arr, ev.points[-1].t_arr
    if every is None:
        every = max(1, (t1 - t0) // 20)
    ticks = list(range(t0 + every - 1, t1 + 1, every))
    return ticks or [t1]


def evaluate(ev: EventFile, queries=None, *, kind: str = "centers", kprime=None,
             solver: SolverSpec | None = None, audit: str = "events",
             check_levels: bool = True, fault=None) -> EvalReport:
    """Replay `ev`, answering queries at the given ticks and at every expect-ratio-gap instant."""
    E = Evaluator(ev, solver, audit=audit, check_levels=check_levels)
    E.fault = fault
    ticks = set(default_queries(ev) if queries is None else queries)
    for e in ev.expectations:
        ticks |= {e.t_minus, e.t_plus}
    opts = {}
    for t in sorted(ticks):
        rec = E.query(t, kind, kprime)
        opts[t] = rec.opt if kind != "diameter" else None
    E.finish()
    for e in ev.expectations:
        om, op = opts.get(e.t_minus), opts.get(e.t_plus)
        if om is None or kind == "diameter":
            win_m = window_contents(ev.points, e.t_minus)
            win_p = window_contents(ev.points, e.t_plus)
            om = E.referee.opt(win_m, ev.config.k, ev.config.z)
            op = E.referee.opt(win_p, ev.config.k, ev.config.z)
        ok = om > e.bound * op
        E.report.gaps.append(GapCheck(e, om, op, ok))
    return E.report


# ---------------------------------------------------------------- fault injection

FAULTS = ("reps", "center", "outliers")


def inject_fault(kind: str, at: int):
    """A hook for Evaluator.fault that corrupts the sketch once, after event `at`."""
    if kind not in FAULTS:
        raise ValueError(f"unknown fault {kind!r}; choose from {', '.join(FAULTS)}")

    def hook(ws: WindowSketch, i: int):
        if i != at:
            return
        for lv in ws.levels:
            if _corrupt(lv, kind):
                return

    return hook


def _corrupt(lv: DecisionSketch, kind: str) -> bool:
    if kind == "reps":
        if not lv.balls:
            return False
        b = lv.balls[0]
        while len(b.reps) < lv.z + 2:
            b.reps.append(b.reps[-1])
        return True
    if kind == "center":
        if not lv.balls or not isinstance(lv.metric, EuclideanMetric):
            return False
        c = lv.balls[0].center
        loc = (c.location[0] + lv.mini_radius / 2,) + tuple(c.location[1:])
        fake = StreamPoint(c.id, loc, c.t_arr, c.t_exp)
        from .decision import MiniBall
        lv.balls.append(MiniBall(fake, lv.mini_radius, [lv.balls[0].reps[-1]]))
        return True
    pts = lv.stored_points()
    if not pts:
        return False
    lv.outliers.extend([pts[0]] * (lv.z + 1))
    return True


# ---------------------------------------------------------------- generators

def _header(bounds: SpreadBounds | None, locs, metric) -> SpreadBounds:
    if bounds is not None:
        return bounds
    if len(locs) < 2:
        return SpreadBounds(1.0, 1.0)
    u = list(dict.fromkeys(locs))
    D = metric.pairwise(u, u)
    pos = D[D > 0]
    if pos.size == 0:
        return SpreadBounds(1.0, 1.0)
    return SpreadBounds(float(pos.min()), float(pos.max()))


def gen_uniform(seed: int, n: int, W: int, bounds: SpreadBounds, *, k: int = 2, z: int = 1,
                eps: float = 0.25, dim: int = 1, clusters: int | None = None,
                noise: float = 0.1) -> EventFile:
    """n arrivals at ticks 1..n on the dmin-grid inside a box of diameter <= dmax.

    Locations come from a few Gaussian blobs plus a fraction `noise` of
    uniform points, so that windows have genuine clusters and outliers.
    """
    if n < 0:
        raise StreamError("n must be non-negative")
    steps = int(math.floor(bounds.delta_max / bounds.delta_min / math.sqrt(dim)))
    if steps < 1:
        raise StreamError(f"bounds admit no two distinct grid points in {dim} dimensions")
    cfg = WindowConfig(W, k, z, eps)
    metric = EuclideanMetric(dim)
    rng = np.random.default_rng(seed)
    m = clusters if clusters is not None else k + int(rng.integers(0, 2))
    centers = rng.uniform(0, steps, size=(m, dim))
    spread = rng.uniform(0.02, 0.12, size=m) * steps
    which = rng.integers(0, m, size=n)
    g = centers[which] + rng.normal(size=(n, dim)) * spread[which, None]
    wild = rng.random(n) < noise
    g[wild] = rng.uniform(0, steps, size=(int(wild.sum()), dim))
    g = np.clip(np.rint(g), 0, steps)
    pts = [cfg.make_point(i, tuple(float(v) * bounds.delta_min for v in row), i + 1)
           for i, row in enumerate(g)]
    return EventFile(cfg, bounds, metric, pts)


def gen_table(seed: int, n: int, W: int, *, names: int = 12, k: int = 2, z: int = 1,
              eps: float = 0.25, max_weight: int = 6, edge_prob: float = 0.3) -> EventFile:
    """Shortest-path metric of a random connected weighted graph, then random arrivals."""
    rng = np.random.default_rng(seed)
    m = names
    M = np.full((m, m), np.inf)
    np.fill_diagonal(M, 0)
    order = rng.permutation(m)
    for a, b in zip(order, order[1:]):  # a spanning path keeps it connected
        M[a, b] = M[b, a] = rng.integers(1, max_weight + 1)
    for a in range(m):
        for b in range(a + 1, m):
            if rng.random() < edge_prob:
                w = rng.integers(1, max_weight + 1)
                M[a, b] = M[b, a] = min(M[a, b], w)
    for c in range(m):
        M = np.minimum(M, M[:, c, None] + M[None, c, :])
    labels = [f"v{i}" for i in range(m)]
    metric = TableMetric(labels, M)
    hot = rng.choice(m, size=min(m, k + 1), replace=False)
    pick = np.where(rng.random(n) < 0.7, rng.choice(hot, size=n), rng.integers(0, m, size=n))
    cfg = WindowConfig(W, k, z, eps)
    pts = [cfg.make_point(i, labels[int(j)], i + 1) for i, j in enumerate(pick)]
    off = M[~np.eye(m, dtype=bool)]
    return EventFile(cfg, SpreadBounds(float(off.min()), float(off.max())), metric, pts)


@dataclass
class LowerBoundInstance:
    events: EventFile
    t_stage: int  # last arrival of the initial configuration
    t_minus: int
    t_plus: int
    p_star: int  # id of the point whose expiration is staged
    census: int  # |T_exp|, expiration times any exact sketch must keep
    storage_floor: float  # storage count implied by the lower-bound argument
    opt_minus_claim: float
    opt_plus_claim: float


@dataclass(frozen=True)
class LowerBoundConstantSpec:
    k: int
    z: int
    c: float
    eps: float = 0.5  # the sketch's eps, written to the header
    target: int | None = None  # index (arrival rank) of p*; default the last point

    def __post_init__(self):
        if self.z < 1:
            raise StreamError("the constant-factor construction needs z >= 1")
        if self.k < 1 or self.c < 1:
            raise StreamError("need k >= 1 and c >= 1")

    @property
    def gap(self) -> float:
        return self.c * self.z + 1

    @property
    def spread(self) -> float:
        return (self.k + 1) * self.z + self.k * self.gap

    @property
    def n_points(self) -> int:
        return (self.k + 1) * (self.z + 1)


def _lb_loc(x):
    return (float(x),)


def gen_lowerbound_constant(spec: LowerBoundConstantSpec) -> LowerBoundInstance:
    """k+1 clusters of z+1 unit-spaced points, then the replacement adversary.

    Base points arrive at even ticks 2i; with W = 2N+1 every base
    expiration is odd and each replacement lands one tick after the
    expiration it mirrors, so all instants stay distinct.
    """
    k, z = spec.k, spec.z
    N = spec.n_points
    W = 2 * N + 1
    cfg = WindowConfig(W, k, z, spec.eps)
    xs = [(i // (z + 1)) * (z + spec.gap) + (i % (z + 1)) for i in range(N)]
    star = N - 1 if spec.target is None else spec.target
    if not 1 <= star < N:
        raise StreamError(f"target must be in [1, {N - 1}] (the first point is excluded)")
    base = [cfg.make_point(i, _lb_loc(x), 2 * i) for i, x in enumerate(xs)]
    t_star = base[star].t_exp
    pts = list(base)
    repl = []
    for p in base:
        if p.t_exp < t_star:
            repl.append((p.t_exp + 1, p.location))
    # replacements of replacements are never needed: each lives W > t_star - t_exp ticks
    for t, loc in sorted(repl):
        pts.append(cfg.make_point(len(pts), loc, t))
    ev = EventFile(cfg, SpreadBounds(1.0, float(spec.spread)), EuclideanMetric(1), pts,
                   [RatioGapExpectation(t_star - 1, t_star, float(spec.c))])
    return LowerBoundInstance(ev, base[-1].t_arr, t_star - 1, t_star, base[star].id, N - 1,
                              float(N - 1), spec.gap / 2, z / 2)


@dataclass(frozen=True)
class LowerBoundEpsSpec:
    k: int
    z: int
    s: int
    eps: Fraction  # construction eps; the sketch it defeats is (1 + 8 eps)-approximate
    sketch_eps: float = 0.5
    target: tuple[int, int, int, int] | None = None  # (i*, j*, l*, m*), 1-based; m* 0-based

    @classmethod
    def from_eps_prime(cls, k, z, s, eps_prime, **kw):
        ep = Fraction(eps_prime).limit_denominator(10**6)
        if not 0 < ep < 1 or ep.numerator != 1:
            raise StreamError(f"1/eps' must be an integer with 0 < eps' < 1, got {eps_prime}")
        return cls(k, z, s, ep / 8, **kw)

    @classmethod
    def from_eps(cls, k, z, s, eps, **kw):
        e = Fraction(eps).limit_denominator(10**6)
        if not 0 < e < 1 or e.numerator != 1:
            raise StreamError(f"1/eps must be an integer with 0 < eps < 1, got {eps}")
        return cls(k, z, s, e, **kw)

    def __post_init__(self):
        if self.s < 2 or self.z < 1 or self.k < 1:
            raise StreamError("need s >= 2, z >= 1 and k >= 1")
        if self.eps.numerator != 1:
            raise StreamError(f"1/eps must be an integer, got eps={self.eps}")

    @property
    def eps_prime(self) -> Fraction:
        return 8 * self.eps

    @property
    def per_group(self) -> int:
        return self.eps.denominator

    @property
    def L(self) -> Fraction:
        """The cluster length used for the inter-cluster gap 2L."""
        return (2 ** (self.s + 1) - 3) * self.z / self.eps

    @property
    def census(self) -> int:
        return int(self.k * (self.z + 1) * (self.s - 1) / self.eps) - 1

    @property
    def storage_floor(self) -> float:
        return float(self.k * (self.z + 1) * (self.s - 1) / (8 * self.eps_prime))


def eps_layout(spec: LowerBoundEpsSpec):
    """Point positions keyed by (i, j, l, m), plus per-cluster offsets."""
    z, s, g = spec.z, spec.s, spec.per_group
    rel = {}
    x = 0
    for j in range(1, s + 1):
        u = 2 ** (j - 1)
        for l in range(1, g + 1):
            x += u * z  # empty interval before each subgroup
            for m in range(z + 1):
                rel[(j, l, m)] = x + m * u
            x += u * z
    first = 2 ** 0 * z  # the leading gap of G^{1,1} is not part of the cluster
    extent = x - first
    gap = 2 * spec.L
    offsets = [Fraction(i) * (extent + gap) for i in range(spec.k)]
    pos = {(i + 1, j, l, m): offsets[i] + v - first for i in range(spec.k) for (j, l, m), v in rel.items()}
    return pos, offsets, extent


def gen_lowerbound_eps(spec: LowerBoundEpsSpec) -> LowerBoundInstance:
    """The (1+eps) construction: k clusters of s doubling groups, then G_new.

    Base points arrive M ticks apart; the adversary's 2z+1 points land in
    the M-1 ticks just before t_exp(p*), after every older point is gone.
    """
    k, z, s, g = spec.k, spec.z, spec.s, spec.per_group
    pos, offsets, extent = eps_layout(spec)
    order = sorted(((i, j, l) for i in range(1, k + 1) for j in range(1, s + 1)
                    for l in range(1, g + 1)), key=lambda t: (-t[1], -t[2], -t[0]))
    seq = [(i, j, l, m) for (i, j, l) in order for m in range(z + 1)]
    n = len(seq)
    M = 2 * z + 4
    W = M * n + 1
    cfg = WindowConfig(W, k, z, spec.sketch_eps)
    istar, jstar, lstar, mstar = spec.target or (1, 2, 1, z)
    if not (1 <= istar <= k and 2 <= jstar <= s and 1 <= lstar <= g and 0 <= mstar <= z):
        raise StreamError(f"target {spec.target} outside the construction (j* must be >= 2)")
    rank = {key: r for r, key in enumerate(seq)}
    star = rank[(istar, jstar, lstar, mstar)]
    if star == 0:
        raise StreamError("p* cannot be the very first point")
    base = [cfg.make_point(r, (float(pos[key]),), M * r) for r, key in enumerate(seq)]
    t_star = base[star].t_exp
    u = 2 ** (jstar - 1) * z
    step = 2 ** (jstar - 1)
    left = offsets[istar - 1]
    new = [(float(left - u - z * step + m * step),) for m in range(z + 1)]
    back = [base[rank[(istar, jstar, lstar, m)]].location
            for m in range(z + 1) if rank[(istar, jstar, lstar, m)] < star]
    extra = new + back
    pts = list(base)
    for q, loc in enumerate(extra, 1):
        pts.append(cfg.make_point(len(pts), loc, t_star - M + 1 + q))
    # material of C_{i*} before G^{j*,l*}: everything strictly left of it
    sub_left = pos[(istar, jstar, lstar, 0)]
    Lstar = float(sub_left - u - left)
    locs = [p.location for p in pts]
    xs = [x[0] for x in locs]
    cover = SpreadBounds(1.0, float(max(xs) - min(xs)))
    claim_m = (Lstar + 3 * u) / 2
    claim_p = (Lstar + 2 * u) / 2
    bound = float(1 + spec.eps / 8)
    ev = EventFile(cfg, cover, EuclideanMetric(1), pts,
                   [RatioGapExpectation(t_star - 1, t_star, bound)])
    return LowerBoundInstance(ev, base[-1].t_arr, t_star - 1, t_star, base[star].id, spec.census,
                              spec.storage_floor, claim_m, claim_p)
