"""Exact MV(m, n) for small parameters next to the prime-modulus bound."""
import argparse
import time

from mvfam import bounds, family
from mvfam.zm import is_prime


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--cases", default="2:1,2:2,2:3,3:2,3:3,4:2",
                    help="comma separated m:n pairs")
    ap.add_argument("--budget", type=int, default=10**6)
    args = ap.parse_args()
    print(f"{'m':>3} {'n':>3} {'MV':>4} {'bound':>6} {'nodes':>9} {'sec':>7}")
    for item in args.cases.split(","):
        m, n = (int(x) for x in item.split(":"))
        t0 = time.perf_counter()
        res = family.max_family_search(m, n, budget=args.budget)
        dt = time.perf_counter() - t0
        b = bounds.dgy_prime_bound(m, n) if is_prime(m) else "-"
        print(f"{m:>3} {n:>3} {res.t_max:>4} {b!s:>6} {res.metadata['nodes']:>9} {dt:>7.2f}")


if __name__ == "__main__":
    main()
