"""Concrete families used by tests, scripts and the CLI."""
from __future__ import annotations

import itertools
import random
from typing import Sequence

from .family import MvFamily, set_system_family
from .linalg import ZmMatrix, smith_form


def standard_family(m: int, t: int) -> MvFamily:
    """u_i = e_i, v_i = 1 - e_i in Z_m^t; products are 0 on the diagonal, 1 off it."""
    U = tuple(tuple(int(k == i) for k in range(t)) for i in range(t))
    V = tuple(tuple(int(k != i) for k in range(t)) for i in range(t))
    return MvFamily(m, t, U, V)


def uniform_subsets_family(m: int, n: int, limit: int | None = None) -> MvFamily:
    """All m-subsets of {1..n} as a set system, valid while n < 2m.

    Two distinct m-subsets of an n-set with n < 2m meet in 2m - n .. m - 1
    points, never 0 mod m.
    """
    if not m <= n < 2 * m:
        raise ValueError(f"need m <= n < 2m, got m={m}, n={n}")
    sets = list(itertools.combinations(range(1, n + 1), m))
    if limit is not None:
        sets = sets[:limit]
    return set_system_family(sets, n, m)


def random_unimodular(n: int, m: int, rng: random.Random) -> tuple[ZmMatrix, ZmMatrix]:
    """A random invertible n x n matrix over Z_m together with its inverse."""
    while True:
        M = ZmMatrix.of([[rng.randrange(m) for _ in range(n)] for _ in range(n)], m, n)
        sf = smith_form(M)
        if all(d == 1 for d in sf.D):
            # M = Ui diag(1) Vi, so M^-1 = V_right U_left
            return M, sf.V_right @ sf.U_left


def disguise(F: MvFamily, rng: random.Random) -> MvFamily:
    """Apply u -> M u and v -> M^-T v; all inner products are unchanged."""
    M, Minv = random_unimodular(F.n, F.m, rng)
    MinvT = Minv.transpose()

    def apply(A: ZmMatrix, x: Sequence[int]) -> tuple[int, ...]:
        return tuple(sum(a * b for a, b in zip(row, x)) % F.m for row in A.entries)

    return MvFamily(F.m, F.n, tuple(apply(M, u) for u in F.U), tuple(apply(MinvT, v) for v in F.V))


def random_subfamily(F: MvFamily, size: int, rng: random.Random) -> MvFamily:
    return F.subfamily(rng.sample(range(F.t), min(size, F.t)))


def random_family(m: int, n: int, rng: random.Random, attempts: int = 200) -> MvFamily:
    """Greedy random family: keep adding random orthogonal pairs that fit."""
    U: list[tuple[int, ...]] = []
    V: list[tuple[int, ...]] = []
    for _ in range(attempts):
        u = tuple(rng.randrange(m) for _ in range(n))
        v = tuple(rng.randrange(m) for _ in range(n))
        if sum(a * b for a, b in zip(u, v)) % m:
            continue
        if u in U or v in V:
            continue
        if all(sum(a * b for a, b in zip(u, y)) % m and sum(a * b for a, b in zip(x, v)) % m for x, y in zip(U, V)):
            U.append(u)
            V.append(v)
    if not U:
        U, V = [(0,) * n], [(0,) * n]
    return MvFamily(m, n, tuple(U), tuple(V))


def small_m2_family() -> MvFamily:
    """The size-2 family over Z_2^2 with U = ((1,1),(0,1)), V = ((1,1),(1,0))."""
    return MvFamily(2, 2, ((1, 1), (0, 1)), ((1, 1), (1, 0)))
