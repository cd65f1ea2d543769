"""Peak per-level storage as eps, z and the window length vary.

Everything else is held fixed; each cell is the maximum over a few seeds.
"""

import argparse

from swkcenter.harness import evaluate, gen_uniform
from swkcenter.model import SpreadBounds


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=300)
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--seeds", type=int, default=3)
    args = ap.parse_args(argv)
    print("W     z  eps    peak  ceiling")
    for W in (50, 100, 200):
        for z in (0, 1, 2, 4):
            for eps in (0.1, 0.25, 0.5):
                peak, ceil = 0, 0
                for seed in range(args.seeds):
                    ev = gen_uniform(seed, args.n, W, SpreadBounds(1, 128), k=args.k, z=z, eps=eps)
                    rep = evaluate(ev, [ev.points[-1].t_arr], audit="none", check_levels=False)
                    st = rep.queries[-1].storage
                    peak = max(peak, max(st["levels"]))
                    ceil = st["level_ceiling"]
                print(f"{W:<5d} {z:<2d} {eps:<5g} {peak:5d} {ceil:8d}")


if __name__ == "__main__":
    main()
