"""Build both adversarial streams and report the staged optimum gap.

Sweeps z for the constant-factor construction and prints what the sketch
answers at the two instants around the staged expiration.
"""

import argparse
from fractions import Fraction

from swkcenter.harness import (LowerBoundConstantSpec, LowerBoundEpsSpec, evaluate,
                               gen_lowerbound_constant, gen_lowerbound_eps)


def report(name, inst):
    rep = evaluate(inst.events, [inst.t_stage])
    q = {r.t: r for r in rep.queries}
    m, p = q[inst.t_minus], q[inst.t_plus]
    staged = max(rep.stored_exp_at[inst.t_stage])
    print(f"{name}: opt {m.opt:g} -> {p.opt:g} (claimed {inst.opt_minus_claim:g} -> "
          f"{inst.opt_plus_claim:g}), sketch {m.radius:g} -> {p.radius:g}, "
          f"staged t_exp {staged}, census {inst.census}, ok={rep.ok}")


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k", type=int, default=2)
    ap.add_argument("--zmax", type=int, default=3)
    ap.add_argument("--c", type=float, default=2.0)
    args = ap.parse_args(argv)
    for z in range(1, args.zmax + 1):
        report(f"constant k={args.k} z={z} c={args.c:g}",
               gen_lowerbound_constant(LowerBoundConstantSpec(args.k, z, args.c)))
    for z in range(1, args.zmax + 1):
        for s in (2, 3):
            spec = LowerBoundEpsSpec.from_eps(args.k, z, s, Fraction(1, 2))
            report(f"eps k={args.k} z={z} s={s}", gen_lowerbound_eps(spec))


if __name__ == "__main__":
    main()
