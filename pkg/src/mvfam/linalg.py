"""Matrices over Z_m: Smith form, factorization rank, column rank.

Two rank notions live here.  ``rank`` is the least r with M = A B for a
t x r and an r x s factor; ``colrank`` is log base m of the size of the
subgroup of Z_m^t generated by the columns.  Both come out of one Smith
diagonalization, computed by gcd elimination directly on residues.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

from .zm import crt, modulus, unit_part

Rows = tuple[tuple[int, ...], ...]


@dataclass(frozen=True)
class ZmMatrix:
    m: int
    rows: int
    cols: int
    entries: Rows

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"bad modulus {self.m}")
        if len(self.entries) != self.rows:
            raise ValueError("row count mismatch")
        for row in self.entries:
            if len(row) != self.cols:
                raise ValueError("ragged matrix")
            for e in row:
                if not 0 <= e < self.m:
                    raise ValueError(f"entry {e} not canonical mod {self.m}")

    @classmethod
    def of(cls, entries: Iterable[Iterable[int]], m: int, cols: int | None = None) -> "ZmMatrix":
        rows = tuple(tuple(int(e) % m for e in row) for row in entries)
        if cols is None:
            cols = len(rows[0]) if rows else 0
        return cls(m, len(rows), cols, rows)

    @classmethod
    def identity(cls, t: int, m: int) -> "ZmMatrix":
        return cls.of([[1 % m if i == j else 0 for j in range(t)] for i in range(t)], m, t)

    @classmethod
    def zeros(cls, t: int, s: int, m: int) -> "ZmMatrix":
        return cls.of([[0] * s for _ in range(t)], m, s)

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    def __getitem__(self, ij: tuple[int, int]) -> int:
        i, j = ij
        return self.entries[i][j]

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(row[j] for row in self.entries)

    def columns(self) -> list[tuple[int, ...]]:
        return [self.column(j) for j in range(self.cols)]

    def transpose(self) -> "ZmMatrix":
        return ZmMatrix.of([self.column(j) for j in range(self.cols)], self.m, self.rows)

    def reduce(self, r: int) -> "ZmMatrix":
        if r < 1 or self.m % r:
            raise ValueError(f"{r} does not divide {self.m}")
        return ZmMatrix.of(self.entries, r, self.cols)

    def submatrix(self, rows: Sequence[int], cols: Sequence[int]) -> "ZmMatrix":
        return ZmMatrix.of([[self.entries[i][j] for j in cols] for i in rows], self.m, len(cols))

    def principal(self, idx: Sequence[int]) -> "ZmMatrix":
        return self.submatrix(idx, idx)

    def __matmul__(self, other: "ZmMatrix") -> "ZmMatrix":
        if self.m != other.m or self.cols != other.rows:
            raise ValueError("incompatible matrices")
        if self.cols == 0 or other.cols == 0:
            return ZmMatrix.zeros(self.rows, other.cols, self.m)
        return ZmMatrix.of(_matmul(self.entries, other.entries, self.m), self.m, other.cols)

    def __add__(self, other: "ZmMatrix") -> "ZmMatrix":
        if self.m != other.m or self.shape != other.shape:
            raise ValueError("incompatible matrices")
        return ZmMatrix.of(
            [[a + b for a, b in zip(r1, r2)] for r1, r2 in zip(self.entries, other.entries)],
            self.m,
            self.cols,
        )

    def is_zero(self) -> bool:
        return all(e == 0 for row in self.entries for e in row)

    def to_json(self) -> dict:
        return {"m": self.m, "rows": self.rows, "cols": self.cols, "entries": [list(r) for r in self.entries]}

    @classmethod
    def from_json(cls, obj: dict) -> "ZmMatrix":
        m, rows, cols = int(obj["m"]), int(obj["rows"]), int(obj["cols"])
        entries = obj["entries"]
        if len(entries) != rows or any(len(r) != cols for r in entries):
            raise ValueError("matrix JSON shape does not match rows/cols")
        for r in entries:
            for e in r:
                if not 0 <= int(e) < m:
                    raise ValueError(f"entry {e} out of range for m={m}")
        return cls.of(entries, m, cols)


def _matmul(a: Rows | list, b: Rows | list, m: int) -> list[list[int]]:
    # callers guarantee b has at least one row
    bt = list(zip(*b))
    return [[sum(x * y for x, y in zip(row, col)) % m for col in bt] for row in a]


def matmul(a: ZmMatrix, b: ZmMatrix) -> ZmMatrix:
    """Product that also handles an empty inner dimension."""
    if a.cols != b.rows or a.m != b.m:
        raise ValueError("incompatible matrices")
    if a.cols == 0 or b.cols == 0:
        return ZmMatrix.zeros(a.rows, b.cols, a.m)
    return a @ b


# ---------------------------------------------------------------------------
# Smith form


@dataclass(frozen=True)
class SmithForm:
    """U_left @ M @ V_right == diag(D), with the transforms invertible mod m.

    ``D`` has min(t, s) entries, each a divisor of m or 0, with every entry
    dividing the next (0 plays the role of m).
    """

    m: int
    D: tuple[int, ...]
    U_left: ZmMatrix
    V_right: ZmMatrix
    U_inv: ZmMatrix
    V_inv: ZmMatrix

    def diagonal(self, t: int, s: int) -> ZmMatrix:
        return ZmMatrix.of(
            [[self.D[i] if i == j else 0 for j in range(s)] for i in range(t)], self.m, s
        )

    def orders(self) -> tuple[int, ...]:
        """Additive order of each invariant factor in Z_m."""
        return tuple(self.m // math.gcd(self.m, d) for d in self.D)


class _Tracked:
    """Working copy of a matrix plus accumulated row/column transforms."""

    def __init__(self, M: ZmMatrix):
        m, t, s = M.m, M.rows, M.cols
        self.m = m
        self.a = [list(r) for r in M.entries]
        self.U = [[int(i == j) % m for j in range(t)] for i in range(t)]
        self.Ui = [row[:] for row in self.U]
        self.V = [[int(i == j) % m for j in range(s)] for i in range(s)]
        self.Vi = [row[:] for row in self.V]

    # Row op given by a 2x2 block [[x, y], [z, w]] acting on rows i, k.
    # U <- E U, U^-1 <- U^-1 E^-1.
    def rows2(self, i, k, x, y, z, w, inv):
        m = self.m
        for mat in (self.a, self.U):
            ri, rk = mat[i], mat[k]
            for c in range(len(ri)):
                a, b = ri[c], rk[c]
                ri[c] = (x * a + y * b) % m
                rk[c] = (z * a + w * b) % m
        (xi, yi), (zi, wi) = inv
        for row in self.Ui:
            a, b = row[i], row[k]
            row[i] = (a * xi + b * zi) % m
            row[k] = (a * yi + b * wi) % m

    # Column op [[x, y], [z, w]] acting on columns j, k (new_j = x c_j + z c_k...).
    # V <- V F, V^-1 <- F^-1 V^-1 with F the 2x2 block.
    def cols2(self, j, k, x, y, z, w, inv):
        m = self.m
        for mat in (self.a, self.V):
            for row in mat:
                a, b = row[j], row[k]
                row[j] = (a * x + b * z) % m
                row[k] = (a * y + b * w) % m
        (xi, yi), (zi, wi) = inv
        rj, rk = self.Vi[j], self.Vi[k]
        for c in range(len(rj)):
            a, b = rj[c], rk[c]
            rj[c] = (xi * a + yi * b) % m
            rk[c] = (zi * a + wi * b) % m

    def swap_rows(self, i, k):
        if i != k:
            self.rows2(i, k, 0, 1, 1, 0, ((0, 1), (1, 0)))

    def swap_cols(self, j, k):
        if j != k:
            self.cols2(j, k, 0, 1, 1, 0, ((0, 1), (1, 0)))

    def scale_row(self, i, u):
        m = self.m
        ui = pow(u, -1, m) if m > 1 else 0
        for mat in (self.a, self.U):
            mat[i] = [(u * e) % m for e in mat[i]]
        for row in self.Ui:
            row[i] = (row[i] * ui) % m


def _bezout_block(a: int, b: int) -> tuple[int, tuple, tuple]:
    """g and a det-1 block [[x, y], [-b/g, a/g]] sending (a, b) to (g, 0)."""
    g = math.gcd(a, b)
    # extended Euclid on nonnegative ints
    x0, y0, r0, x1, y1, r1 = 1, 0, a, 0, 1, b
    while r1:
        q = r0 // r1
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
        r0, r1 = r1, r0 - q * r1
    x, y = x0, y0
    c, d = b // g, a // g
    # [[x, y], [-c, d]] has det x d + y c = (x a + y b)/g = 1
    return g, (x, y, -c, d), ((d, -y), (c, x))


def smith_form(M: ZmMatrix) -> SmithForm:
    """Smith diagonalization over Z_m by gcd elimination on residues.

    Pivots are normalized to gcd(pivot, m), so the diagonal consists of
    divisors of m (with 0 for the zero ideal).
    """
    m, t, s = M.m, M.rows, M.cols
    w = _Tracked(M)
    a = w.a
    k = 0
    n = min(t, s)
    while k < n:
        # pick the entry generating the largest ideal (smallest gcd with m)
        best = None
        for i in range(k, t):
            for j in range(k, s):
                if a[i][j]:
                    g = math.gcd(a[i][j], m)
                    if best is None or g < best[0]:
                        best = (g, i, j)
        if best is None:
            break
        _, i, j = best
        w.swap_rows(k, i)
        w.swap_cols(k, j)
        while True:
            p = a[k][k]
            u = unit_part(p, m)
            if u != 1:
                w.scale_row(k, pow(u, -1, m))
            p = a[k][k]
            dirty = False
            # clear column k
            for i in range(k + 1, t):
                b = a[i][k]
                if not b:
                    continue
                if b % p == 0:
                    q = b // p
                    w.rows2(k, i, 1, 0, -q, 1, ((1, 0), (q, 1)))
                else:
                    _, (x, y, z, ww), inv = _bezout_block(p, b)
                    w.rows2(k, i, x, y, z, ww, inv)
                    dirty = True
                    break
            if dirty:
                continue
            # clear row k
            for j in range(k + 1, s):
                b = a[k][j]
                if not b:
                    continue
                if b % p == 0:
                    q = b // p
                    # new_j = c_j - q c_k
                    w.cols2(k, j, 1, -q, 0, 1, ((1, q), (0, 1)))
                else:
                    _, (x, y, z, ww), inv = _bezout_block(p, b)
                    # columns: new_k = x c_k + y c_j, new_j = z c_k + ww c_j
                    # cols2 computes new_k = a*X + b*Z, new_j = a*Y + b*W
                    w.cols2(k, j, x, z, y, ww, ((inv[0][0], inv[1][0]), (inv[0][1], inv[1][1])))
                    dirty = True
                    break
            if dirty:
                continue
            # divisibility of the remaining block
            bad = None
            for i in range(k + 1, t):
                for j in range(k + 1, s):
                    if a[i][j] % p:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            w.rows2(k, bad, 1, 1, 0, 1, ((1, -1), (0, 1)))
        k += 1
    D = tuple(a[i][i] for i in range(n))
    return SmithForm(
        m,
        D,
        ZmMatrix.of(w.U, m, t),
        ZmMatrix.of(w.V, m, s),
        ZmMatrix.of(w.Ui, m, t),
        ZmMatrix.of(w.Vi, m, s),
    )


# ---------------------------------------------------------------------------
# ranks


def colspan_size(M: ZmMatrix) -> int:
    """|subgroup of Z_m^t generated by the columns of M|."""
    if M.rows == 0 or M.cols == 0:
        return 1
    size = 1
    for o in smith_form(M).orders():
        size *= o
    return size


def _component_ranks(D: Sequence[int], m: int) -> dict[int, int]:
    """Count of invariant factors nonzero modulo each prime power of m."""
    return {q: sum(1 for d in D if d % q) for q in modulus(m).prime_powers} if m > 1 else {}


def rank(M: ZmMatrix) -> int:
    """Least r admitting M = A B with A t x r and B r x s over Z_m."""
    if M.rows == 0 or M.cols == 0 or M.m == 1:
        return 0
    comps = _component_ranks(smith_form(M).D, M.m)
    return max(comps.values(), default=0)


def rank_factorization(M: ZmMatrix) -> tuple[ZmMatrix, ZmMatrix]:
    """A witness pair (A, B) with A @ B == M and inner dimension rank(M).

    Each prime-power component is factored through its Smith form and the
    pieces are glued entrywise by CRT.
    """
    m, t, s = M.m, M.rows, M.cols
    if t == 0 or s == 0 or m == 1:
        return ZmMatrix.zeros(t, 0, m), ZmMatrix.zeros(0, s, m)
    r = rank(M)
    qs = modulus(m).prime_powers
    parts_a, parts_b = [], []
    for q in qs:
        sf = smith_form(M.reduce(q))
        rq = sum(1 for d in sf.D if d % q)
        Ui, Vi = sf.U_inv.entries, sf.V_inv.entries
        A = [[(Ui[i][c] * sf.D[c]) % q if c < rq else 0 for c in range(r)] for i in range(t)]
        B = [[Vi[c][j] if c < rq else 0 for j in range(s)] for c in range(r)]
        parts_a.append(A)
        parts_b.append(B)
    A = [[crt([pa[i][c] for pa in parts_a], qs) for c in range(r)] for i in range(t)]
    B = [[crt([pb[c][j] for pb in parts_b], qs) for j in range(s)] for c in range(r)]
    return ZmMatrix.of(A, m, r), ZmMatrix.of(B, m, s)


@dataclass(frozen=True)
class RankReport:
    m: int
    rank: int
    colspan_size: int

    @property
    def colrank(self) -> float:
        return math.log(self.colspan_size) / math.log(self.m)

    def sandwich_holds(self, tol: float = 1e-9) -> bool:
        """rank / log2 m <= colrank <= rank."""
        cr = self.colrank
        return self.rank / math.log2(self.m) <= cr + tol and cr <= self.rank + tol

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "rank": self.rank,
            "colspan_size": self.colspan_size,
            "colrank": self.colrank,
        }


def rank_report(M: ZmMatrix) -> RankReport:
    return RankReport(M.m, rank(M), colspan_size(M))


def colrank(M: ZmMatrix) -> float:
    return math.log(colspan_size(M)) / math.log(M.m)


def colrank_leq(M: ZmMatrix, bound: int) -> bool:
    """Exact test colrank(M) <= bound for integral bounds."""
    return colspan_size(M) <= M.m**bound


def spanning_columns(M: ZmMatrix) -> list[int]:
    """Greedy minimal set of column indices spanning every column.

    Columns are scanned left to right and dropped whenever the survivors
    still generate the full column span.
    """
    keep = list(range(M.cols))
    full = colspan_size(M)
    for j in range(M.cols):
        trial = [c for c in keep if c != j]
        if colspan_size(M.submatrix(range(M.rows), trial)) == full:
            keep = trial
    r = rank(M)
    if M.m > 1 and len(keep) > r * math.log2(M.m) + 1e-9:
        raise AssertionError(f"spanning set of size {len(keep)} exceeds rank*log m = {r * math.log2(M.m)}")
    return keep


def block_colrank_check(M: ZmMatrix) -> bool:
    """colrank(A) + colrank(B) <= colrank(M) for M = [[A, 0], [*, B]]."""
    if M.rows != M.cols or M.rows % 2:
        raise ValueError("expected a 2t x 2t matrix")
    t = M.rows // 2
    if any(M.entries[i][j] for i in range(t) for j in range(t, 2 * t)):
        raise ValueError("upper-right block is not zero")
    A = M.submatrix(range(t), range(t))
    B = M.submatrix(range(t, 2 * t), range(t, 2 * t))
    return colrank(A) + colrank(B) <= colrank(M) + 1e-9


def find_zero_principal_submatrix(M: ZmMatrix, s: int) -> list[int]:
    """Indices T with M restricted to T x T identically zero mod s.

    Requires a zero diagonal and colrank(M mod s) <= 2; returns the largest
    class of identical columns of M mod s (ties: lowest first index).
    """
    t = M.rows
    if M.rows != M.cols:
        raise ValueError("expected a square matrix")
    if s < 2 or M.m % s:
        raise ValueError(f"{s} is not a nontrivial divisor of {M.m}")
    if any(M.entries[i][i] for i in range(t)):
        raise ValueError("diagonal is not zero")
    Ms = M.reduce(s)
    if not colrank_leq(Ms, 2):
        raise ValueError(f"colrank of M mod {s} exceeds 2")
    classes: dict[tuple[int, ...], list[int]] = {}
    for j in range(t):
        classes.setdefault(Ms.column(j), []).append(j)
    if not classes:
        return []
    best = max(classes.values(), key=lambda idx: (len(idx), -idx[0]))
    assert len(best) * M.m**2 >= t
    assert all(Ms.entries[i][j] == 0 for i in best for j in best)
    return best
