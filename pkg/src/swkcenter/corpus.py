"""Seeded stream corpora for the acceptance run and the experiment scripts."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .events import EventFile
from .harness import gen_table, gen_uniform
from .model import SpreadBounds


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    events: EventFile
    every: int  # query spacing in ticks

    def queries(self) -> list[int]:
        if not self.events.points:
            return [0]
        t1 = self.events.points[-1].t_arr
        return list(range(self.every, t1 + 1, self.every))


def line_corpus(repeats: int = 3) -> list[CorpusEntry]:
    """1-D streams over the full grid W x k x z x eps, `repeats` seeds each."""
    out = []
    grid = itertools.product([50, 100], [1, 2, 3], [0, 1, 2], [0.1, 0.25, 0.5])
    for i, ((W, k, z, eps), r) in enumerate(itertools.product(grid, range(repeats))):
        seed = 1000 + i
        n = 200 + (seed * 37) % 201
        dmax = 64 if i % 2 else 128
        ev = gen_uniform(seed, n, W, SpreadBounds(1, dmax), k=k, z=z, eps=eps)
        out.append(CorpusEntry(f"line-{i:03d}-W{W}-k{k}-z{z}-e{eps}", ev, 10))
    return out


def general_corpus(n_plane: int = 30, n_table: int = 30, n: int = 120) -> list[CorpusEntry]:
    """Small 2-D and distance-table streams for the restricted-center solver."""
    out = []
    for i in range(n_plane):
        W = (20, 40)[i % 2]
        k, z, eps = 1 + i % 3, (i // 3) % 3, (0.25, 0.5)[(i // 9) % 2]
        ev = gen_uniform(2000 + i, n, W, SpreadBounds(1, 24), k=k, z=z, eps=eps, dim=2)
        out.append(CorpusEntry(f"plane-{i:02d}-k{k}-z{z}", ev, 10))
    for i in range(n_table):
        W = (20, 40)[i % 2]
        k, z, eps = 1 + i % 3, (i // 3) % 3, (0.25, 0.5)[(i // 9) % 2]
        ev = gen_table(3000 + i, n, W, names=10 + i % 7, k=k, z=z, eps=eps)
        out.append(CorpusEntry(f"table-{i:02d}-k{k}-z{z}", ev, 10))
    return out


def diameter_corpus(n_line: int = 30, n_table: int = 25) -> list[CorpusEntry]:
    """Streams whose windows stay within the enumeration oracle's n <= 40."""
    out = []
    for i in range(n_line):
        z, eps = i % 3, (0.1, 0.2, 0.3)[(i // 3) % 3]
        n = 25 + i % 16
        ev = gen_uniform(4000 + i, n, 30, SpreadBounds(1, 64), k=1 + i % 2, z=z, eps=eps)
        out.append(CorpusEntry(f"diam-line-{i:02d}", ev, 3))
    for i in range(n_table):
        z, eps = i % 3, (0.1, 0.2, 0.3)[(i // 3) % 3]
        ev = gen_table(5000 + i, 40, 30, names=8 + i % 6, k=1, z=z, eps=eps)
        out.append(CorpusEntry(f"diam-table-{i:02d}", ev, 3))
    return out
