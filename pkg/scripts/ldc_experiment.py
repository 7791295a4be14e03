"""Decoding success rate of the code from a family as the noise rate grows."""
import argparse
import json

from mvfam import constructions, ldc
from mvfam.family import MvFamily


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--family", help="family JSON (default: 6-subsets of 7 points over Z_6)")
    ap.add_argument("--deltas", default="0,0.01,0.02,0.05,0.1")
    ap.add_argument("--trials", type=int, default=20000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jsonl", action="store_true", help="print one JSON report per line")
    args = ap.parse_args()
    if args.family:
        with open(args.family) as fh:
            F = MvFamily.from_json(json.load(fh))
    else:
        F = constructions.uniform_subsets_family(6, 7)
    p = ldc.code_params(F)
    if not args.jsonl:
        print(f"m={p.m} n={p.n} k={p.k} N={p.N} P={p.P} gamma={p.gamma}")
        print(f"{'delta':>6} {'rate':>7} {'1-m*delta':>10} {'sigma':>7}")
    for d in (float(x) for x in args.deltas.split(",")):
        rep = ldc.rate_experiment(p, d, args.trials, args.seed)
        if args.jsonl:
            print(rep.dumps())
        else:
            print(f"{d:>6.3f} {rep.rate:>7.4f} {rep.floor:>10.4f} {rep.sigma:>7.4f}")


if __name__ == "__main__":
    main()
