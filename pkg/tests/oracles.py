"""Independent brute-force references used to cross-check the library."""
from __future__ import annotations

import itertools
from functools import lru_cache


def closure(gens, m, t):
    """Subgroup of Z_m^t generated by gens, by breadth-first addition."""
    zero = (0,) * t
    seen = {zero}
    frontier = [zero]
    gens = [tuple(g) for g in gens]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = tuple((a + b) % m for a, b in zip(x, g))
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return frozenset(seen)


@lru_cache(maxsize=None)
def generated_subgroups(m, t, r):
    """Every subgroup of Z_m^t generated by r vectors (the column spans of t x r matrices)."""
    vecs = list(itertools.product(range(m), repeat=t))
    out = set()
    for gens in itertools.combinations_with_replacement(vecs, r):
        out.add(closure(gens, m, t))
    return tuple(out)


def brute_rank(rows, m):
    """Least r with M = A B, A t x r: the columns of M must sit in the span of A's columns."""
    t, s = len(rows), len(rows[0])
    cols = [tuple(rows[i][j] % m for i in range(t)) for j in range(s)]
    if all(not any(c) for c in cols):
        return 0
    for r in range(1, min(t, s)):
        if any(all(c in H for c in cols) for H in generated_subgroups(m, t, r)):
            return r
    return min(t, s)


def brute_rank_2x2(rows, m):
    """Literal search over 2 x r and r x 2 factors for 2 x 2 matrices."""
    M = tuple(tuple(x % m for x in row) for row in rows)
    if not any(any(row) for row in M):
        return 0
    for a in itertools.product(range(m), repeat=2):
        for b in itertools.product(range(m), repeat=2):
            if all((a[i] * b[j]) % m == M[i][j] for i in range(2) for j in range(2)):
                return 1
    return 2


def colspan_size(rows, m):
    t = len(rows)
    cols = [tuple(rows[i][j] % m for i in range(t)) for j in range(len(rows[0]))]
    return len(closure(cols, m, t))


def is_mv_family(U, V, m):
    t = len(U)
    for i in range(t):
        for j in range(t):
            ip = sum(a * b for a, b in zip(U[i], V[j])) % m
            if (ip == 0) != (i == j):
                return False
    return len(set(map(tuple, U))) == t and len(set(map(tuple, V))) == t


def exhaustive_mv(m, n):
    """Largest MV family over Z_m^n by plain recursion over all orthogonal pairs."""
    vecs = list(itertools.product(range(m), repeat=n))
    pairs = [(u, v) for u in vecs for v in vecs if sum(a * b for a, b in zip(u, v)) % m == 0]

    def ok(p, q):
        return (sum(a * b for a, b in zip(p[0], q[1])) % m != 0
                and sum(a * b for a, b in zip(q[0], p[1])) % m != 0)

    best = 0

    def grow(chosen, start):
        nonlocal best
        best = max(best, len(chosen))
        for k in range(start, len(pairs)):
            if len(chosen) + (len(pairs) - k) <= best:
                return
            if all(ok(pairs[k], c) for c in chosen):
                grow(chosen + [pairs[k]], k + 1)

    grow([], 0)
    return best
