"""Run the colrank-reduction loop on disguised Z_6 families and print the traces."""
import argparse
import json
import random

from mvfam import constructions, family, spectral


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--count", type=int, default=5)
    ap.add_argument("--size", type=int, default=18)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--strict", action="store_true")
    args = ap.parse_args()
    rng = random.Random(args.seed)
    G = constructions.uniform_subsets_family(6, 9)
    done = 0
    while done < args.count:
        F = constructions.disguise(constructions.random_subfamily(G, args.size, rng), rng)
        F = family.collision_free_extract(F)
        if F.t < 3 * F.m:
            continue
        res = spectral.iterate_reduce(F, strict=args.strict)
        print(f"family {done}: t={F.t} -> status={res.status} s={res.s} kept={len(res.indices)}")
        for rec in res.trace:
            print("   ", json.dumps(rec, sort_keys=True))
        done += 1


if __name__ == "__main__":
    main()
