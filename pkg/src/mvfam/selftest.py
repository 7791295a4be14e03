"""Reduced-scale property checks, one group per module, runnable without pytest."""
from __future__ import annotations

import itertools
import math
import random
from fractions import Fraction
from typing import Callable

from . import bounds, constructions, family, ldc, linalg, spectral, zm


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise AssertionError(msg)


def check_zm(rng: random.Random, scale: int) -> None:
    for _ in range(20 * scale):
        m = rng.randrange(2, 40)
        u = zm.ZmVector.of([rng.randrange(m) for _ in range(3)], m)
        v = zm.ZmVector.of([rng.randrange(m) for _ in range(3)], m)
        _check(zm.inner_product(u, v) == zm.inner_product(v, u), "inner product not symmetric")
        a = rng.randrange(m)
        g = math.gcd(a, m)
        _check((g * zm.unit_part(a, m) - a) % m == 0, "unit part wrong")
    _check(zm.factorize(360) == ((2, 3), (3, 2), (5, 1)), "factorization of 360")


def check_linalg(rng: random.Random, scale: int) -> None:
    for _ in range(20 * scale):
        m = rng.choice([2, 4, 6, 12])
        t, s = rng.randrange(1, 5), rng.randrange(1, 5)
        M = linalg.ZmMatrix.of([[rng.randrange(m) for _ in range(s)] for _ in range(t)], m, s)
        sf = linalg.smith_form(M)
        _check(sf.U_left @ M @ sf.V_right == sf.diagonal(t, s), "Smith form identity")
        A, B = linalg.rank_factorization(M)
        _check(linalg.matmul(A, B) == M, "rank witness")
        _check(linalg.rank_report(M).sandwich_holds(), "rank sandwich")
    M = linalg.ZmMatrix.of([[4, 0], [0, 3]], 6)
    _check(linalg.rank(M) == 1, "rank example")


def check_family(rng: random.Random, scale: int) -> None:
    F = constructions.small_m2_family()
    _check(family.inner_product_matrix(F).entries == ((0, 1), (1, 0)), "inner-product matrix")
    _check(family.max_family_search(3, 2).t_max <= bounds.dgy_prime_bound(3, 2), "small search vs bound")
    G = constructions.uniform_subsets_family(6, 8)
    for _ in range(scale):
        H = constructions.disguise(constructions.random_subfamily(G, 10, rng), rng)
        C = family.collision_free_extract(H)
        _check(family.is_collision_free(C), "collision free extraction")
        P = family.inner_product_matrix(H)
        _check(linalg.rank(P) <= H.n, "rank of P above n")


def check_spectral(rng: random.Random, scale: int) -> None:
    for _ in range(50 * scale):
        m = rng.randrange(2, 9)
        counts = [rng.randrange(0, 5) for _ in range(m)]
        if not sum(counts):
            continue
        mu = spectral.ResidueDistribution(m, tuple(counts))
        eps = float(spectral.statistical_distance(mu, spectral.ResidueDistribution.uniform(m)))
        w = spectral.fourier_witness(mu, eps)
        _check(w.meets_bound, "Fourier witness below bound")
    G = constructions.uniform_subsets_family(6, 8)
    st = spectral.duality_stats(G.U, G.V, 6)
    _check(st.best_magnitude >= spectral.bias_bound(6) - 1e-9, "bias below floor")
    for _ in range(scale):
        X = family.collision_free_extract(constructions.disguise(constructions.random_subfamily(
            constructions.uniform_subsets_family(6, 9), 18, rng), rng))
        if X.t >= 18:
            res = spectral.iterate_reduce(X)
            P = family.inner_product_matrix(res.family)
            _check(all(e % res.s == 0 for row in P.entries for e in row), "iterate output not zero")


def check_bounds(rng: random.Random, scale: int) -> None:
    _check(bounds.dgy_prime_bound(3, 2) == 4, "dgy bound")
    _check(bounds.theorem1_bound(2, 2, 2).exact == 3 * 2**508, "first bound value")
    fails = bounds.DFunctionSystem().audit(range(2, 8), range(2, 16))
    _check(not any(fails.values()), "d-function audit")
    sw = bounds.partial_sum_sweep(Fraction(4, 3), 10**3 * scale)
    _check(sw.holds, "partial sum sweep")


def check_ldc(rng: random.Random, scale: int) -> None:
    F = constructions.small_m2_family()
    p = ldc.code_params(F)
    _check(ldc.encode([1, 0], p).values == (1, 2, 2, 1), "encoding example")
    G = constructions.standard_family(3, 4)
    p = ldc.code_params(G)
    x = [rng.randrange(p.P) for _ in range(p.k)]
    c = ldc.encode(x, p)
    for i in range(p.k):
        for w in itertools.product(range(p.m), repeat=p.n):
            _check(ldc.local_decode(i, lambda k: c.values[k], p, w) == x[i], "zero-noise decoding")
    rep = ldc.rate_experiment(p, 0.05, 500 * scale, 7)
    _check(rep.rate >= rep.floor - 3 * rep.sigma - 1e-12, "decoding rate below floor")


GROUPS: dict[str, Callable[[random.Random, int], None]] = {
    "zm": check_zm,
    "linalg": check_linalg,
    "family": check_family,
    "spectral": check_spectral,
    "bounds": check_bounds,
    "ldc": check_ldc,
}

COMMAND_GROUPS = {
    "verify": ["family"],
    "search": ["family"],
    "refine": ["spectral"],
    "iterate": ["spectral"],
    "rank": ["linalg"],
    "colrank": ["linalg"],
    "spectrum": ["spectral"],
    "rectangle": ["spectral"],
    "bounds": ["bounds"],
    "ldc-sim": ["ldc"],
    "selftest": list(GROUPS),
}


def run(groups: list[str], seed: int = 0, scale: int = 1) -> dict[str, str]:
    out = {}
    for g in groups:
        rng = random.Random(f"{seed}:{g}")
        try:
            GROUPS[g](rng, scale)
            out[g] = "pass"
        except AssertionError as exc:
            out[g] = f"fail: {exc}"
    return out
