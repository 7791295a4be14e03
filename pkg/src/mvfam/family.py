"""Matching vector families and the combinatorics around them."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Literal, Sequence

from .linalg import ZmMatrix, rank_factorization
from .zm import ZmVector, dot, modulus

Vec = tuple[int, ...]


class FamilyError(ValueError):
    """A pair of lists fails to be a matching vector family."""


class ShapeMismatch(FamilyError):
    pass


class TwinPair(FamilyError):
    def __init__(self, side: str, i: int, j: int):
        self.side, self.i, self.j = side, i, j
        super().__init__(f"TwinPair({i}, {j}): {side}[{i}] == {side}[{j}]")


class DiagonalNonzero(FamilyError):
    def __init__(self, i: int, value: int):
        self.i, self.value = i, value
        super().__init__(f"DiagonalNonzero({i}): <u_{i}, v_{i}> = {value}")


class OffDiagonalZero(FamilyError):
    def __init__(self, i: int, j: int):
        self.i, self.j = i, j
        super().__init__(f"OffDiagonalZero({i}, {j}): <u_{i}, v_{j}> = 0")


def _first_twin(vs: Sequence[Vec]) -> tuple[int, int] | None:
    seen: dict[Vec, int] = {}
    for j, v in enumerate(vs):
        if v in seen:
            return seen[v], j
        seen[v] = j
    return None


@dataclass(frozen=True)
class MvFamily:
    """Validated pair of lists (U, V) over Z_m^n.

    Construction checks shape, twin-freeness (U first, then V), then scans
    the inner products in lexicographic (i, j) order and raises on the first
    violation.
    """

    m: int
    n: int
    U: tuple[Vec, ...]
    V: tuple[Vec, ...]

    def __post_init__(self):
        m, n = self.m, self.n
        if m < 2:
            raise ShapeMismatch(f"modulus must be >= 2, got {m}")
        if len(self.U) != len(self.V):
            raise ShapeMismatch(f"|U| = {len(self.U)} but |V| = {len(self.V)}")
        for side, vs in (("U", self.U), ("V", self.V)):
            for v in vs:
                if len(v) != n:
                    raise ShapeMismatch(f"{side} vector of length {len(v)}, expected {n}")
                if any(not 0 <= e < m for e in v):
                    raise ShapeMismatch(f"{side} vector {v} has entries outside [0, {m})")
        for side, vs in (("U", self.U), ("V", self.V)):
            twin = _first_twin(vs)
            if twin:
                raise TwinPair(side, *twin)
        for i, u in enumerate(self.U):
            for j, v in enumerate(self.V):
                ip = dot(u, v, m)
                if i == j and ip:
                    raise DiagonalNonzero(i, ip)
                if i != j and not ip:
                    raise OffDiagonalZero(i, j)

    @property
    def t(self) -> int:
        return len(self.U)

    def __len__(self) -> int:
        return len(self.U)

    def u_vectors(self) -> list[ZmVector]:
        return [ZmVector(self.m, u) for u in self.U]

    def v_vectors(self) -> list[ZmVector]:
        return [ZmVector(self.m, v) for v in self.V]

    def subfamily(self, idx: Iterable[int]) -> "MvFamily":
        idx = sorted(idx)
        return MvFamily(self.m, self.n, tuple(self.U[i] for i in idx), tuple(self.V[i] for i in idx))

    def pad(self, extra: int) -> "MvFamily":
        z = (0,) * extra
        return MvFamily(self.m, self.n + extra, tuple(u + z for u in self.U), tuple(v + z for v in self.V))

    def reduce(self, r: int) -> "MvFamily":
        """The same vectors read modulo a divisor r (validated again)."""
        if r < 2 or self.m % r:
            raise ValueError(f"{r} is not a nontrivial divisor of {self.m}")
        return MvFamily(
            r, self.n, tuple(tuple(e % r for e in u) for u in self.U), tuple(tuple(e % r for e in v) for v in self.V)
        )

    def to_json(self) -> dict:
        return {"m": self.m, "n": self.n, "U": [list(u) for u in self.U], "V": [list(v) for v in self.V]}

    @classmethod
    def from_json(cls, obj: dict) -> "MvFamily":
        return verify(obj["U"], obj["V"], int(obj["m"]), int(obj["n"]))


def verify(U: Sequence[Sequence[int]], V: Sequence[Sequence[int]], m: int, n: int | None = None) -> MvFamily:
    """Validate (U, V) as a matching vector family over Z_m."""
    if n is None:
        lengths = {len(x) for x in list(U) + list(V)}
        if len(lengths) > 1:
            raise ShapeMismatch(f"mixed vector lengths {sorted(lengths)}")
        n = lengths.pop() if lengths else 0
    for x in list(U) + list(V):
        if any(not 0 <= int(e) < m for e in x):
            raise ShapeMismatch(f"vector {list(x)} has entries outside [0, {m})")
    return MvFamily(m, n, tuple(tuple(int(e) for e in u) for u in U), tuple(tuple(int(e) for e in v) for v in V))


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QRestriction:
    value_set: frozenset[int]

    @property
    def q(self) -> int:
        return len(self.value_set)


def q_restriction(F: MvFamily) -> QRestriction:
    return QRestriction(frozenset(dot(u, v, F.m) for u in F.U for v in F.V))


def inner_product_matrix(F: MvFamily) -> ZmMatrix:
    return ZmMatrix.of([[dot(u, v, F.m) for v in F.V] for u in F.U], F.m, F.t)


def product_matrix(U: Sequence[Vec], V: Sequence[Vec], m: int) -> ZmMatrix:
    """P(i, j) = <U[i], V[j]> for arbitrary lists."""
    return ZmMatrix.of([[dot(u, v, m) for v in V] for u in U], m, len(V))


@dataclass(frozen=True)
class Bucket:
    r: int
    w: ZmVector
    member_indices: tuple[int, ...]


def buckets(F: MvFamily, side: Literal["U", "V"], r: int) -> list[Bucket]:
    """Partition the indices of one side by the residue of the vector mod r."""
    if r < 2 or F.m % r:
        raise ValueError(f"{r} is not a divisor >= 2 of {F.m}")
    vs = F.U if side == "U" else F.V
    groups: dict[Vec, list[int]] = {}
    for i, v in enumerate(vs):
        groups.setdefault(tuple(e % r for e in v), []).append(i)
    return [Bucket(r, ZmVector(r, w), tuple(idx)) for w, idx in groups.items()]


def is_collision_free(F: MvFamily) -> bool:
    for s in modulus(F.m).nontrivial_divisors():
        for vs in (F.U, F.V):
            if len({tuple(e % s for e in v) for v in vs}) != len(vs):
                return False
    return True


def collision_free_indices(F: MvFamily) -> list[int]:
    """Indices kept by pruning U, then V, one divisor at a time.

    For every proper divisor s (ascending) one representative per bucket
    survives, the lowest index.
    """
    keep = list(range(F.t))
    divs = modulus(F.m).proper_divisors()
    for vs in (F.U, F.V):
        for s in divs:
            seen: set[Vec] = set()
            nxt = []
            for i in keep:
                key = tuple(e % s for e in vs[i])
                if key not in seen:
                    seen.add(key)
                    nxt.append(i)
            keep = nxt
    return keep


def collision_free_extract(F: MvFamily) -> MvFamily:
    G = F.subfamily(collision_free_indices(F))
    assert is_collision_free(G)
    return G


@dataclass(frozen=True)
class DividedFamily:
    s: int
    matrix: ZmMatrix          # P / s over Z_{m/s}
    family: MvFamily          # rows of A and columns of B from P/s = A B


def divide_matrix(P: ZmMatrix, s: int) -> ZmMatrix:
    if s < 2 or P.m % s or s == P.m:
        raise ValueError(f"need 1 < s < m with s | m, got s={s}, m={P.m}")
    for i, row in enumerate(P.entries):
        for j, e in enumerate(row):
            if e % s:
                raise ValueError(f"entry ({i}, {j}) = {e} is not divisible by {s}")
    return ZmMatrix.of([[e // s for e in row] for row in P.entries], P.m // s, P.cols)


def divide_family(F: MvFamily, s: int) -> DividedFamily:
    """Transport a family whose products are all 0 mod s down to Z_{m/s}.

    The new family lives in dimension rank(P/s) <= n log2 m.
    """
    P2 = divide_matrix(inner_product_matrix(F), s)
    A, B = rank_factorization(P2)
    r2 = A.cols
    if F.t and r2 > F.n * math.log2(F.m) + 1e-9:
        raise AssertionError(f"rank {r2} of P/s exceeds n log m")
    fam = MvFamily(P2.m, r2, A.entries, tuple(B.column(j) for j in range(B.cols)))
    return DividedFamily(s, P2, fam)


# ---------------------------------------------------------------------------
# exhaustive search


class BudgetExceeded(RuntimeError):
    pass


@dataclass
class SearchResult:
    t_max: int
    witness: MvFamily
    metadata: dict = field(default_factory=dict)


def max_family_search(
    m: int,
    n: int,
    q: int | None = None,
    value_set: Iterable[int] | None = None,
    budget: int = 10**6,
) -> SearchResult:
    """Exact MV(m, n) (or MV(m, n, q)) by branch and bound.

    Vertices are the orthogonal pairs (u, v) in lexicographic order; a family
    is a set of pairwise compatible vertices.  With ``q`` the value set may
    float but is capped at q residues; with ``value_set`` every inner product
    must lie in the given set.
    """
    if m ** (2 * n) > budget:
        raise BudgetExceeded(f"m^(2n) = {m ** (2 * n)} exceeds budget {budget}")
    allowed = frozenset(int(x) % m for x in value_set) if value_set is not None else None
    if allowed is not None and 0 not in allowed:
        raise ValueError("value set must contain 0")
    vecs = list(itertools.product(range(m), repeat=n))
    pairs = [(u, v) for u in vecs for v in vecs if dot(u, v, m) == 0]
    k = len(pairs)
    comp = [0] * k
    for a in range(k):
        ua, va = pairs[a]
        for b in range(a + 1, k):
            ub, vb = pairs[b]
            x, y = dot(ua, vb, m), dot(ub, va, m)
            if not x or not y:
                continue
            if allowed is not None and (x not in allowed or y not in allowed):
                continue
            comp[a] |= 1 << b
            comp[b] |= 1 << a

    best: list[int] = [0]  # best[0] = index of lowest pair, a valid singleton
    stats = {"nodes": 0}
    track_values = q is not None

    def expand(clique: list[int], cand: int, values: frozenset[int]):
        stats["nodes"] += 1
        if len(clique) > len(best):
            best[:] = clique
        while cand:
            if len(clique) + cand.bit_count() <= len(best):
                return
            low = cand & -cand
            v = low.bit_length() - 1
            cand ^= low
            nv = values
            if track_values:
                uv, vv = pairs[v]
                extra = {dot(pairs[w][0], vv, m) for w in clique} | {dot(uv, pairs[w][1], m) for w in clique}
                nv = values | extra
                if len(nv) > q:
                    continue
            expand(clique + [v], cand & comp[v], nv)

    if k:
        expand([], (1 << k) - 1, frozenset({0}))
    chosen = sorted(best)
    witness = MvFamily(m, n, tuple(pairs[i][0] for i in chosen), tuple(pairs[i][1] for i in chosen))
    meta = {
        "m": m,
        "n": n,
        "q": q,
        "value_set": sorted(allowed) if allowed is not None else None,
        "pairs": k,
        "nodes": stats["nodes"],
        "symmetry": "member permutations only: families are increasing index sets of orthogonal pairs in lexicographic order",
    }
    return SearchResult(len(chosen), witness, meta)


# ---------------------------------------------------------------------------


class SetSystemError(FamilyError):
    def __init__(self, msg: str, i: int, j: int | None = None):
        self.i, self.j = i, j
        super().__init__(msg)


def set_system_family(sets: Sequence[Iterable[int]], n: int, m: int) -> MvFamily:
    """Characteristic vectors of sets F_i of {1..n} with |F_i| = 0 mod m and
    |F_i & F_j| != 0 mod m, used as both u_i and v_i."""
    fs = [frozenset(int(x) for x in s) for s in sets]
    for i, f in enumerate(fs):
        if any(not 1 <= x <= n for x in f):
            raise SetSystemError(f"set {i} has elements outside 1..{n}", i)
        if len(f) % m:
            raise SetSystemError(f"|F_{i}| = {len(f)} is not 0 mod {m}", i)
    for i, j in itertools.combinations(range(len(fs)), 2):
        if len(fs[i] & fs[j]) % m == 0:
            raise SetSystemError(f"|F_{i} & F_{j}| = {len(fs[i] & fs[j])} is 0 mod {m}", i, j)
    vecs = tuple(tuple(int(k + 1 in f) for k in range(n)) for f in fs)
    return MvFamily(m, n, vecs, vecs)
