"""Replay one of the seeded corpora and print a per-stream summary.

    python3 scripts/run_corpus.py line --limit 20
    python3 scripts/run_corpus.py general --out general.jsonl
"""

import argparse
import json
import sys
import time

from swkcenter.corpus import diameter_corpus, general_corpus, line_corpus
from swkcenter.harness import evaluate

CORPORA = {"line": line_corpus, "general": general_corpus, "diameter": diameter_corpus}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("corpus", choices=sorted(CORPORA))
    ap.add_argument("--limit", type=int)
    ap.add_argument("--audit", choices=["events", "queries", "none"], default="events")
    ap.add_argument("--out", help="write one JSON line per stream here")
    args = ap.parse_args(argv)

    entries = CORPORA[args.corpus]()[: args.limit]
    kind = "diameter" if args.corpus == "diameter" else "centers"
    rows, t0 = [], time.perf_counter()
    for e in entries:
        r = evaluate(e.events, e.queries(), kind=kind, audit=args.audit)
        row = {"name": e.name, "n": len(e.events.points), "queries": len(r.queries),
               "max_ratio": r.max_ratio, "violations": len(r.violations),
               "max_level_storage": r.max_level_storage, "ok": r.ok}
        rows.append(row)
        print(f"{e.name:32s} n={row['n']:4d} q={row['queries']:3d} "
              f"ratio={row['max_ratio']:.4f} storage={row['max_level_storage']:4d} "
              f"{'ok' if r.ok else 'FAIL'}")
    bad = sum(not r["ok"] for r in rows)
    print(f"{len(rows)} streams, {bad} failing, {time.perf_counter() - t0:.1f}s")
    if args.out:
        with open(args.out, "w") as f:
            for r in rows:
                f.write(json.dumps(r) + "\n")
    return 1 if bad else 0


if __name__ == "__main__":
    sys.exit(main())
