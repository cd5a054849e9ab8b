#!/usr/bin/env python3
"""Measure greedy packing sizes and almost-period ball sizes against the
dimension-driven bounds (30/delta)^d and (delta/30)^d |G| on random sets.

For each delta the script reports how much headroom the bounds leave:
packing size over its ceiling, ball size over its floor.

Example:
    python3 scripts/packing_vs_delta.py --moduli 2,2,2,2,2,2,2,2 \
        --count 50 --deltas 1/4,1/2,3/4 --out runs/packing.jsonl
"""
import argparse
import random
from fractions import Fraction

from addcomb import (
    GroupDescriptor,
    GroupSubset,
    almost_periods,
    greedy_packing,
    set_vc_dimension,
)
from addcomb.io import canonical_dumps, write_text_atomic


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--moduli", default="2,2,2,2,2,2,2,2")
    ap.add_argument("--count", type=int, default=50)
    ap.add_argument("--deltas", default="1/4,1/2,3/4")
    ap.add_argument("--master-seed", type=int, default=2024)
    ap.add_argument("--out", default=None)
    args = ap.parse_args(argv)

    g = GroupDescriptor([int(m) for m in args.moduli.split(",")])
    deltas = [Fraction(s) for s in args.deltas.split(",")]
    records = []
    for i in range(args.count):
        rng = random.Random(args.master_seed + i)
        a = GroupSubset(g, rng.getrandbits(g.order) & g.full_mask)
        d = set_vc_dimension(a)
        for delta in deltas:
            pack = greedy_packing(a, delta)
            ball = almost_periods(a, delta)
            records.append({
                "seed": args.master_seed + i,
                "delta": str(delta),
                "dimension": d,
                "packing": len(pack.centers),
                "packing_cap": str((Fraction(30) / delta) ** d),
                "ball": ball.size,
                "ball_floor": str((delta / 30) ** d * g.order),
            })
    if args.out:
        lines = "\n".join(canonical_dumps(r) for r in records) + "\n"
        write_text_atomic(args.out, lines)
        print(f"wrote {len(records)} rows to {args.out}")

    print(f"{'delta':>6} {'mean dim':>9} {'mean pack':>10} "
          f"{'pack/cap max':>13} {'mean ball':>10} {'ball/floor min':>15}")
    for delta in deltas:
        sub = [r for r in records if r["delta"] == str(delta)]
        mean_d = sum(r["dimension"] for r in sub) / len(sub)
        mean_p = sum(r["packing"] for r in sub) / len(sub)
        mean_b = sum(r["ball"] for r in sub) / len(sub)
        worst_p = max(r["packing"] / Fraction(r["packing_cap"]) for r in sub)
        worst_b = min(r["ball"] / Fraction(r["ball_floor"]) for r in sub)
        print(f"{str(delta):>6} {mean_d:>9.2f} {mean_p:>10.1f} "
              f"{float(worst_p):>13.3g} {mean_b:>10.1f} "
              f"{float(worst_b):>15.3g}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
