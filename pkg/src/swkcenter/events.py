"""Line-oriented event files.

    config k=2 z=1 eps=0.25 W=50 dmin=1 dmax=64 metric=euclidean:1
    dist a b 3              (table mode only, one line per unordered pair)
    arrive 7 3.5            (time then coordinates; the time may be omitted)
    expect-ratio-gap 40 41 1.5

Blank lines and text after '#' are ignored. Omitted times default to the
arrival rank (0, 1, 2, ...).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import (EuclideanMetric, SpreadBounds, StreamError, StreamPoint, TableMetric,
                    WindowConfig, fmt_number)


@dataclass(frozen=True)
class RatioGapExpectation:
    t_minus: int
    t_plus: int
    bound: float


@dataclass
class EventFile:
    config: WindowConfig
    spread: SpreadBounds
    metric: object
    points: list[StreamPoint] = field(default_factory=list)
    expectations: list[RatioGapExpectation] = field(default_factory=list)
    explicit_times: bool = True
    comments: list[str] = field(default_factory=list)

    @property
    def last_time(self) -> int:
        return self.points[-1].t_arr if self.points else 0

    def dumps(self) -> str:
        c, s, m = self.config, self.spread, self.metric
        lines = [f"config k={c.k} z={c.z} eps={fmt_number(c.eps)} W={c.W} "
                 f"dmin={fmt_number(s.delta_min)} dmax={fmt_number(s.delta_max)} metric={m.spec}"]
        lines.extend(f"# {c}" for c in self.comments)
        if isinstance(m, TableMetric):
            for i, j in itertools.combinations(range(len(m.names)), 2):
                lines.append(f"dist {m.names[i]} {m.names[j]} {fmt_number(m.matrix[i, j])}")
        for p in self.points:
            loc = " ".join(m.dump_location(p.location))
            lines.append(f"arrive {p.t_arr} {loc}" if self.explicit_times else f"arrive {loc}")
        for e in self.expectations:
            lines.append(f"expect-ratio-gap {e.t_minus} {e.t_plus} {fmt_number(e.bound)}")
        return "\n".join(lines) + "\n"

    def write(self, path) -> None:
        Path(path).write_text(self.dumps())


def _num(tok: str, what: str, lineno: int, cast=float):
    try:
        v = cast(tok)
    except ValueError:
        raise StreamError(f"line {lineno}: bad {what} {tok!r}") from None
    if cast is float and not np.isfinite(v):
        raise StreamError(f"line {lineno}: non-finite {what} {tok!r}")
    return v


def _parse_header(tokens, lineno):
    kv = {}
    for tok in tokens:
        key, eq, val = tok.partition("=")
        if not eq:
            raise StreamError(f"line {lineno}: expected key=value in config, got {tok!r}")
        kv[key] = val
    need = {"k", "z", "eps", "W", "dmin", "dmax"}
    missing = need - kv.keys()
    if missing:
        raise StreamError(f"line {lineno}: config lacks {', '.join(sorted(missing))}")
    unknown = kv.keys() - need - {"metric"}
    if unknown:
        raise StreamError(f"line {lineno}: unknown config keys {', '.join(sorted(unknown))}")
    config = WindowConfig(W=_num(kv["W"], "W", lineno, int), k=_num(kv["k"], "k", lineno, int),
                          z=_num(kv["z"], "z", lineno, int), eps=_num(kv["eps"], "eps", lineno))
    spread = SpreadBounds(_num(kv["dmin"], "dmin", lineno), _num(kv["dmax"], "dmax", lineno))
    kind, _, arg = kv.get("metric", "euclidean:1").partition(":")
    if kind == "euclidean":
        metric = ("euclidean", _num(arg or "1", "dimension", lineno, int))
    elif kind == "table":
        metric = ("table", _num(arg, "doubling dimension", lineno, int) if arg else None)
    else:
        raise StreamError(f"line {lineno}: unknown metric {kind!r}")
    return config, spread, metric


def _build_table(dists, ddim, lineno):
    names = list(dict.fromkeys(n for a, b, _ in dists for n in (a, b)))
    idx = {n: i for i, n in enumerate(names)}
    M = np.full((len(names), len(names)), np.nan)
    np.fill_diagonal(M, 0.0)
    for a, b, v in dists:
        i, j = idx[a], idx[b]
        if i == j:
            if v != 0:
                raise StreamError(f"nonzero self-distance for {a!r}")
            continue
        if not np.isnan(M[i, j]) and M[i, j] != v:
            raise StreamError(f"conflicting distances for {a!r}, {b!r}")
        M[i, j] = M[j, i] = v
    if np.isnan(M).any():
        i, j = np.argwhere(np.isnan(M))[0]
        raise StreamError(f"distance table lacks the pair {names[i]!r}, {names[j]!r}")
    return TableMetric(names, M, ddim)


def loads(text: str) -> EventFile:
    header = None
    dists: list[tuple[str, str, float]] = []
    raw_arrivals: list[tuple[int, list[str]]] = []
    expectations: list[RatioGapExpectation] = []
    for lineno, line in enumerate(text.splitlines(), 1):
        tokens = line.split("#", 1)[0].split()
        if not tokens:
            continue
        head, rest = tokens[0], tokens[1:]
        if head == "config":
            if header is not None:
                raise StreamError(f"line {lineno}: second config line")
            header = _parse_header(rest, lineno)
        elif header is None:
            raise StreamError(f"line {lineno}: events before the config line")
        elif head == "dist":
            if header[2][0] != "table":
                raise StreamError(f"line {lineno}: dist line in euclidean mode")
            if raw_arrivals:
                raise StreamError(f"line {lineno}: dist line after the first arrival")
            if len(rest) != 3:
                raise StreamError(f"line {lineno}: dist needs two names and a value")
            v = _num(rest[2], "distance", lineno)
            if v < 0:
                raise StreamError(f"line {lineno}: negative distance")
            dists.append((rest[0], rest[1], v))
        elif head == "arrive":
            raw_arrivals.append((lineno, rest))
        elif head == "expect-ratio-gap":
            if len(rest) != 3:
                raise StreamError(f"line {lineno}: expect-ratio-gap needs t_minus t_plus bound")
            expectations.append(RatioGapExpectation(_num(rest[0], "time", lineno, int),
                                                    _num(rest[1], "time", lineno, int),
                                                    _num(rest[2], "bound", lineno)))
        else:
            raise StreamError(f"line {lineno}: unknown directive {head!r}")
    if header is None:
        raise StreamError("missing config line")
    config, spread, (kind, dim) = header
    if kind == "table":
        if not dists:
            raise StreamError("table metric without any dist lines")
        metric = _build_table(dists, dim, 0)
        width = 1
    else:
        metric = EuclideanMetric(dim)
        width = dim

    points = []
    explicit = None
    last = None
    for rank, (lineno, rest) in enumerate(raw_arrivals):
        if len(rest) == width + 1:
            t = _num(rest[0], "time", lineno, int)
            vals = rest[1:]
            has_t = True
        elif len(rest) == width:
            t, vals, has_t = rank, rest, False
        else:
            raise StreamError(f"line {lineno}: arrive expects {width} location token(s), "
                              f"with an optional leading time")
        if explicit is None:
            explicit = has_t
        elif explicit != has_t:
            raise StreamError(f"line {lineno}: mixing timed and untimed arrivals")
        if t < 0:
            raise StreamError(f"line {lineno}: negative time {t}")
        if last is not None and t <= last:
            raise StreamError(f"line {lineno}: arrival time {t} not after previous arrival {last}")
        last = t
        try:
            loc = metric.location(vals)
        except StreamError as exc:
            raise StreamError(f"line {lineno}: {exc}") from None
        points.append(config.make_point(rank, loc, t))
    return EventFile(config, spread, metric, points, expectations,
                     explicit_times=True if explicit is None else explicit)


def load(path) -> EventFile:
    return loads(Path(path).read_text())
