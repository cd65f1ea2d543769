"""swkc: replay event files through the sliding-window sketch.

Exit codes: 0 ok, 2 malformed input, 3 spread violation, 4 contract
violation (mode=both), 5 audit violation.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import dataclass, replace
from multiprocessing import Pool

import numpy as np

from . import events as evio
from .harness import (FAULTS, Evaluator, LowerBoundConstantSpec, LowerBoundEpsSpec,
                      Referee, diam_z_enumerate, gen_lowerbound_constant, gen_lowerbound_eps,
                      gen_table, gen_uniform, inject_fault)
from .model import SpreadBounds, SpreadViolation, StreamError, WindowConfig, window_contents
from .solvers import InstanceTooLarge
from .window import NoLevelAnswered, WindowSketch

EXIT_OK, EXIT_MALFORMED, EXIT_SPREAD, EXIT_CONTRACT, EXIT_AUDIT = 0, 2, 3, 4, 5


@dataclass
class RunConfig:
    path: str
    queries: str | None = None
    mode: str = "sketch"
    query: str = "centers"
    kprime: int | None = None
    fmt: str = "jsonl"
    seed: int = 0
    k: int | None = None
    z: int | None = None
    eps: float | None = None
    window: int | None = None
    dmin: float | None = None
    dmax: float | None = None
    metric: str | None = None


def _apply_overrides(ev: evio.EventFile, rc) -> evio.EventFile:
    if rc.metric is not None and rc.metric != ev.metric.spec and rc.metric != ev.metric.kind:
        raise StreamError(f"--metric {rc.metric} does not match the file's {ev.metric.spec}")
    c = ev.config
    cfg = WindowConfig(rc.window if rc.window is not None else c.W,
                       rc.k if rc.k is not None else c.k,
                       rc.z if rc.z is not None else c.z,
                       rc.eps if rc.eps is not None else c.eps)
    spread = SpreadBounds(rc.dmin if rc.dmin is not None else ev.spread.delta_min,
                          rc.dmax if rc.dmax is not None else ev.spread.delta_max)
    if cfg == c and spread == ev.spread:
        return ev
    pts = [cfg.make_point(p.id, p.location, p.t_arr) for p in ev.points]
    return replace(ev, config=cfg, spread=spread, points=pts)


def parse_queries(spec: str | None, ev: evio.EventFile, seed: int = 0) -> list[int]:
    """Explicit 't1,t2,...', 'every:N', or 'random:N' (seeded); default the last arrival."""
    last = ev.last_time
    if not spec:
        ticks = [last]
    elif spec.startswith("every:"):
        n = int(spec.split(":", 1)[1])
        if n < 1:
            raise StreamError("every:N needs N >= 1")
        first = ev.points[0].t_arr if ev.points else 0
        ticks = list(range(first, last + 1, n)) or [last]
    elif spec.startswith("random:"):
        n = int(spec.split(":", 1)[1])
        first = ev.points[0].t_arr if ev.points else 0
        rng = np.random.default_rng(seed)
        pool = np.arange(first, last + 1)
        ticks = sorted(int(t) for t in rng.choice(pool, size=min(n, pool.size), replace=False))
    else:
        try:
            ticks = [int(x) for x in spec.split(",") if x.strip()]
        except ValueError:
            raise StreamError(f"bad query list {spec!r}") from None
    if any(b <= a for a, b in zip(ticks, ticks[1:])):
        raise StreamError("query ticks must be strictly increasing")
    return ticks


CSV_FIELDS = ["file", "t", "kind", "radius", "level", "opt", "ratio", "ok", "storage_total"]


def _sketch_answer(ws: WindowSketch, rc) -> dict:
    if rc.query == "diameter":
        return ws.query_diameter().to_json()
    res = ws.find_approximate_centers() if rc.query == "centers" else ws.query_kprime(rc.kprime)
    return res.to_json(ws.metric)


def _run_one(rc: RunConfig):
    """Returns (exit code, output records, error message)."""
    try:
        ev = _apply_overrides(evio.load(rc.path), rc)
        ticks = parse_queries(rc.queries, ev, rc.seed)
        if rc.query == "kprime" and rc.kprime is None:
            raise StreamError("--query kprime needs --kprime")
        out, code = [], EXIT_OK
        if rc.mode == "sketch":
            ws = WindowSketch(ev.config, ev.spread, ev.metric)
            i = 0
            for t in ticks:
                while i < len(ev.points) and ev.points[i].t_arr <= t:
                    ws.ingest(ev.points[i])
                    i += 1
                ws.advance(t)
                rec = {"file": rc.path, "t": t, "kind": rc.query}
                rec.update(_sketch_answer(ws, rc))
                out.append(rec)
        elif rc.mode == "oracle":
            ref = Referee(ev.metric, WindowSketch(ev.config, ev.spread, ev.metric).solver)
            k = rc.kprime if rc.query == "kprime" else ev.config.k
            for t in ticks:
                win = window_contents(ev.points, t)
                if rc.query == "diameter":
                    opt = diam_z_enumerate(win, ev.config.z, ev.metric)
                else:
                    opt = ref.opt(win, k, ev.config.z)
                out.append({"file": rc.path, "t": t, "kind": rc.query, "opt": opt})
        else:
            E = Evaluator(ev, audit="none", check_levels=False)
            for t in ticks:
                q = E.query(t, rc.query, rc.kprime)
                rec = {"file": rc.path}
                rec.update(q.to_json())
                out.append(rec)
                if not q.ok:
                    code = EXIT_CONTRACT
            for e in ev.expectations:
                win_m = window_contents(ev.points, e.t_minus)
                win_p = window_contents(ev.points, e.t_plus)
                om = E.referee.opt(win_m, ev.config.k, ev.config.z)
                op = E.referee.opt(win_p, ev.config.k, ev.config.z)
                ok = om > e.bound * op
                out.append({"file": rc.path, "kind": "expect-ratio-gap", "t_minus": e.t_minus,
                            "t_plus": e.t_plus, "opt_minus": om, "opt_plus": op,
                            "bound": e.bound, "ok": ok})
                if not ok:
                    code = EXIT_CONTRACT
        return code, out, None
    except SpreadViolation as exc:
        return EXIT_SPREAD, [], f"{rc.path}: spread violation: {exc}"
    except NoLevelAnswered as exc:
        return EXIT_SPREAD, [], f"{rc.path}: {exc}"
    except (StreamError, InstanceTooLarge, OSError, ValueError) as exc:
        return EXIT_MALFORMED, [], f"{rc.path}: {exc}"


def _format(records, fmt: str) -> str:
    if fmt == "jsonl":
        return "".join(json.dumps(r) + "\n" for r in records)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=CSV_FIELDS, extrasaction="ignore", lineterminator="\n")
    for r in records:
        row = dict(r)
        row.setdefault("radius", row.get("diameter"))
        if isinstance(row.get("storage"), dict):
            row["storage_total"] = row["storage"]["total"]
        w.writerow(row)
    return buf.getvalue()


def cmd_run(args) -> int:
    base = dict(queries=args.queries, mode=args.mode, query=args.query, kprime=args.kprime,
                fmt=args.format, seed=args.seed, k=args.k, z=args.z, eps=args.eps,
                window=args.window, dmin=args.dmin, dmax=args.dmax, metric=args.metric)
    configs = [RunConfig(path=p, **base) for p in args.files]
    if args.jobs > 1 and len(configs) > 1:
        with Pool(args.jobs) as pool:
            results = pool.map(_run_one, configs)
    else:
        results = [_run_one(rc) for rc in configs]
    if args.format == "csv":
        sys.stdout.write(",".join(CSV_FIELDS) + "\n")
    worst = EXIT_OK
    for code, recs, err in results:
        sys.stdout.write(_format(recs, args.format))
        if err:
            print(err, file=sys.stderr)
        worst = max(worst, code)
    return worst


def _emit(ev: evio.EventFile, out):
    text = ev.dumps()
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def cmd_gen(args) -> int:
    try:
        if args.generator == "uniform":
            dim = 1
            if args.metric:
                kind, _, d = args.metric.partition(":")
                if kind != "euclidean":
                    raise StreamError("gen uniform only makes euclidean streams")
                dim = int(d or 1)
            ev = gen_uniform(args.seed, args.n, args.window, SpreadBounds(args.dmin, args.dmax),
                             k=args.k, z=args.z, eps=args.eps, dim=dim)
        elif args.generator == "table":
            ev = gen_table(args.seed, args.n, args.window, names=args.names, k=args.k, z=args.z,
                           eps=args.eps)
        elif args.generator == "lb-constant":
            inst = gen_lowerbound_constant(LowerBoundConstantSpec(args.k, args.z, args.c,
                                                                  eps=args.eps, target=args.target))
            ev = inst.events
            ev.comments += _lb_comments(inst)
        else:
            target = tuple(int(x) for x in args.target.split(",")) if args.target else None
            if (args.eps_prime is None) == (args.construction_eps is None):
                raise StreamError("give exactly one of --eps-prime and --construction-eps")
            kw = dict(sketch_eps=args.eps, target=target)
            if args.eps_prime is not None:
                spec = LowerBoundEpsSpec.from_eps_prime(args.k, args.z, args.s, args.eps_prime, **kw)
            else:
                spec = LowerBoundEpsSpec.from_eps(args.k, args.z, args.s, args.construction_eps, **kw)
            inst = gen_lowerbound_eps(spec)
            ev = inst.events
            ev.comments += _lb_comments(inst) + [f"L={spec.L} construction-eps={spec.eps}"]
    except (StreamError, ValueError) as exc:
        print(f"gen: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    _emit(ev, args.out)
    return EXIT_OK


def _lb_comments(inst) -> list[str]:
    return [f"stage={inst.t_stage} t_minus={inst.t_minus} t_plus={inst.t_plus} p*={inst.p_star}",
            f"census={inst.census} opt_minus={inst.opt_minus_claim} opt_plus={inst.opt_plus_claim}"]


def cmd_audit(args) -> int:
    try:
        ev = evio.load(args.file)
        E = Evaluator(ev, audit="events", check_levels=False)
        if args.inject_fault:
            at = args.fault_at if args.fault_at is not None else max(0, len(ev.points) // 2)
            E.fault = inject_fault(args.inject_fault, at)
        for p in ev.points:
            E.step_to(p.t_arr)
            if E.report.violations:
                t, lvl, v = E.report.violations[0]
                print(f"t={t} level={lvl} {v} witness={v.witness!r}", file=sys.stderr)
                return EXIT_AUDIT
    except SpreadViolation as exc:
        print(f"{args.file}: spread violation: {exc}", file=sys.stderr)
        return EXIT_SPREAD
    except (StreamError, OSError, ValueError) as exc:
        print(f"{args.file}: {exc}", file=sys.stderr)
        return EXIT_MALFORMED
    print(f"{args.file}: {E.report.events} arrivals, {E.report.audited_events} audits, "
          f"no violations")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="swkc", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="replay files and answer queries")
    run.add_argument("files", nargs="+")
    run.add_argument("--queries", help="t1,t2,... | every:N | random:N (default: last arrival)")
    run.add_argument("--query", choices=["centers", "kprime", "diameter"], default="centers")
    run.add_argument("--kprime", type=int)
    run.add_argument("--mode", choices=["sketch", "oracle", "both"], default="sketch")
    run.add_argument("--format", choices=["jsonl", "csv"], default="jsonl")
    run.add_argument("--jobs", type=int, default=1)
    run.add_argument("--seed", type=int, default=0, help="seed for random:N query ticks")
    for flag, typ in [("--k", int), ("--z", int), ("--eps", float), ("--window", int),
                      ("--dmin", float), ("--dmax", float)]:
        run.add_argument(flag, type=typ, help="override the file header")
    run.add_argument("--metric", help="require the file's metric to be this one")
    run.set_defaults(func=cmd_run)

    gen = sub.add_parser("gen", help="write a generated event file")
    gsub = gen.add_subparsers(dest="generator", required=True)

    def common(p, k=2, z=1, eps=0.25, window=None):
        p.add_argument("--k", type=int, default=k)
        p.add_argument("--z", type=int, default=z)
        p.add_argument("--eps", type=float, default=eps, help="the sketch's eps (header)")
        p.add_argument("--out", "-o")
        if window is not None:  # the lower-bound constructions fix their own window
            p.add_argument("--window", type=int, default=window)

    u = gsub.add_parser("uniform")
    common(u, window=50)
    u.add_argument("--n", type=int, default=200)
    u.add_argument("--seed", type=int, default=0)
    u.add_argument("--dmin", type=float, default=1.0)
    u.add_argument("--dmax", type=float, default=64.0)
    u.add_argument("--metric", default="euclidean:1")

    t = gsub.add_parser("table")
    common(t, window=30)
    t.add_argument("--n", type=int, default=100)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--names", type=int, default=12)

    c = gsub.add_parser("lb-constant")
    common(c, eps=0.5)
    c.add_argument("--c", type=float, default=2.0)
    c.add_argument("--target", type=int, help="arrival rank of p* (default: last point)")

    e = gsub.add_parser("lb-eps")
    common(e, eps=0.5)
    e.add_argument("--s", type=int, default=2)
    e.add_argument("--eps-prime", type=float, dest="eps_prime")
    e.add_argument("--construction-eps", type=float, dest="construction_eps")
    e.add_argument("--target", help="i*,j*,l*,m* (default 1,2,1,z)")
    gen.set_defaults(func=cmd_gen)

    a = sub.add_parser("audit", help="replay with per-event invariant audits")
    a.add_argument("file")
    a.add_argument("--inject-fault", choices=FAULTS)
    a.add_argument("--fault-at", type=int, help="arrival index after which to corrupt")
    a.set_defaults(func=cmd_audit)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
