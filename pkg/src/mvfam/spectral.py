"""Character sums over inner products and the refinement procedures built on them.

Masses are exact integer counts; complex numbers only appear when a character
sum is evaluated, and every comparison against a real threshold carries a
1e-9 slack.
"""
from __future__ import annotations

import cmath
import itertools
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .family import MvFamily, inner_product_matrix, is_collision_free, q_restriction
from .linalg import ZmMatrix, colspan_size, find_zero_principal_submatrix, smith_form
from .zm import CharacterValue, character_sum, dot, modulus

TOL = 1e-9
Vec = tuple[int, ...]


class PreconditionError(ValueError):
    pass


# ---------------------------------------------------------------------------
# distributions


@dataclass(frozen=True)
class ResidueDistribution:
    """Distribution on Z_m stored as integer counts over a finite universe."""

    m: int
    counts: tuple[int, ...]

    def __post_init__(self):
        if len(self.counts) != self.m:
            raise ValueError(f"expected {self.m} counts, got {len(self.counts)}")
        if any(c < 0 for c in self.counts) or sum(self.counts) == 0:
            raise ValueError("counts must be nonnegative with positive total")

    @classmethod
    def from_probabilities(cls, probs: Sequence[Fraction | int | str]) -> "ResidueDistribution":
        fr = [Fraction(p) for p in probs]
        if sum(fr) != 1:
            raise ValueError("probabilities must sum to 1")
        den = math.lcm(*(f.denominator for f in fr))
        return cls(len(fr), tuple(int(f * den) for f in fr))

    @classmethod
    def uniform(cls, m: int) -> "ResidueDistribution":
        return cls(m, (1,) * m)

    @classmethod
    def point_mass(cls, m: int, x: int = 0) -> "ResidueDistribution":
        return cls(m, tuple(int(i == x % m) for i in range(m)))

    @property
    def total(self) -> int:
        return sum(self.counts)

    def probabilities(self) -> tuple[Fraction, ...]:
        T = self.total
        return tuple(Fraction(c, T) for c in self.counts)

    def __getitem__(self, x: int) -> Fraction:
        return Fraction(self.counts[x % self.m], self.total)

    def fourier(self, j: int) -> complex:
        """E_{x ~ mu}[omega^(j x)] with omega = exp(2 pi i / m)."""
        return character_sum(self.counts, j, self.m)


def _pairs(F) -> tuple[Sequence[Vec], Sequence[Vec], int]:
    if isinstance(F, MvFamily):
        return F.U, F.V, F.m
    U, V, m = F
    return U, V, m


def product_distribution(F, divide: int = 1) -> ResidueDistribution:
    """Law of <u, v> for u, v uniform and independent over the two lists.

    ``F`` is an MvFamily or a triple (U, V, m).  With ``divide = d`` every
    product must be 0 mod d and the law of <u, v>/d on Z_{m/d} is returned.
    """
    U, V, m = _pairs(F)
    if not U or not V:
        raise ValueError("lists must be nonempty")
    if divide < 1 or m % divide or divide == m:
        raise ValueError(f"divisor {divide} must satisfy d | m and d < m")
    r = m // divide
    counts = [0] * r
    for u in U:
        for v in V:
            x = dot(u, v, m)
            if x % divide:
                raise PreconditionError(f"inner product {x} is not divisible by {divide}")
            counts[x // divide] += 1
    return ResidueDistribution(r, tuple(counts))


def statistical_distance(mu1: ResidueDistribution, mu2: ResidueDistribution) -> Fraction:
    if mu1.m != mu2.m:
        raise ValueError(f"modulus mismatch: {mu1.m} vs {mu2.m}")
    return sum((abs(a - b) for a, b in zip(mu1.probabilities(), mu2.probabilities())), Fraction(0)) / 2


def collision_probability(mu: ResidueDistribution) -> Fraction:
    return sum((p * p for p in mu.probabilities()), Fraction(0))


@dataclass(frozen=True)
class FourierWitness:
    j: int
    magnitude: float
    distance: Fraction
    bound: float        # 2 eps / sqrt(m)

    @property
    def meets_bound(self) -> bool:
        return self.magnitude >= self.bound - TOL


def fourier_witness(mu: ResidueDistribution, eps: float) -> FourierWitness | None:
    """Argmax over j in [1, m-1] of |E[omega^(j x)]| (None when m = 1).

    When Delta(mu, uniform) >= eps the maximum is at least 2 eps / sqrt(m).
    """
    m = mu.m
    if m < 2:
        return None
    mags = [abs(mu.fourier(j)) for j in range(1, m)]
    j = max(range(1, m), key=lambda k: (mags[k - 1], -k))
    return FourierWitness(j, mags[j - 1], statistical_distance(mu, ResidueDistribution.uniform(m)), 2 * eps / math.sqrt(m))


# ---------------------------------------------------------------------------
# duality measure


def _ip_counts(A: Iterable[Vec], B: Iterable[Vec], r: int) -> list[int]:
    B = list(B)
    counts = [0] * r
    for a in A:
        for b in B:
            counts[dot(a, b, r)] += 1
    return counts


def duality_measure(A: Sequence[Vec], B: Sequence[Vec], omega: CharacterValue) -> float:
    """|E_{a, b}[omega^<a, b>]| where omega = exp(2 pi i j / r).

    Inner products are taken mod r = omega.m, so vectors over Z_m with r | m
    are accepted as they are.
    """
    counts = _ip_counts(A, B, omega.m)
    return abs(character_sum(counts, omega.j, omega.m))


def duality_is_one(A: Sequence[Vec], B: Sequence[Vec], omega: CharacterValue) -> bool:
    """Exact test of D_omega(A, B) = 1: j <a, b> is a single residue."""
    vals = {(omega.j * dot(a, b, omega.m)) % omega.m for a in A for b in B}
    return len(vals) <= 1


@dataclass(frozen=True)
class DualityStats:
    m: int
    magnitudes: dict[int, float]
    best_j: int
    best_magnitude: float

    def to_json(self) -> dict:
        return {
            "m": self.m,
            "magnitudes": {str(j): v for j, v in self.magnitudes.items()},
            "best_j": self.best_j,
            "best_magnitude": self.best_magnitude,
        }


def duality_stats(A: Sequence[Vec], B: Sequence[Vec], m: int) -> DualityStats:
    if m < 2:
        raise ValueError("m must be >= 2")
    counts = _ip_counts(A, B, m)
    mags = {j: abs(character_sum(counts, j, m)) for j in range(1, m)}
    best = max(mags, key=lambda j: (mags[j], -j))
    return DualityStats(m, mags, best, mags[best])


def bias_bound(m: int) -> float:
    """The floor 2 / (3 m^1.5) on max_j D_{omega^j}(U, V) for t >= 3m."""
    return 2 / (3 * m**1.5)


def cp_lower_bound_check(
    mu1: dict[Vec, int], mu2: dict[Vec, int], omega: CharacterValue, eps: float
) -> bool:
    """cp(mu1) cp(mu2) >= eps^2 / m^n for distributions on Z_m^n (m = omega.m).

    Distributions are maps vector -> positive count.  Returns True when the
    premise |E[omega^<x, y>]| >= eps fails.
    """
    m = omega.m
    if not omega.is_primitive:
        raise ValueError("omega must be primitive")
    xs, ys = list(mu1.items()), list(mu2.items())
    n = len(xs[0][0])
    T1, T2 = sum(c for _, c in xs), sum(c for _, c in ys)
    counts = [0] * m
    for x, cx in xs:
        for y, cy in ys:
            counts[dot(x, y, m)] += cx * cy
    if abs(character_sum(counts, omega.j, m)) < eps - TOL:
        return True
    cp1 = Fraction(sum(c * c for _, c in xs), T1 * T1)
    cp2 = Fraction(sum(c * c for _, c in ys), T2 * T2)
    return float(cp1 * cp2) >= eps**2 / m**n - 1e-12


# ---------------------------------------------------------------------------
# spectra


class BudgetExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class SpectrumSet:
    eps: float
    omega: CharacterValue
    members: tuple[Vec, ...]

    def recheck(self, B: Sequence[Vec]) -> bool:
        return all(duality_measure([x], B, self.omega) >= self.eps - 1e-12 for x in self.members)


def spectrum(
    B: Sequence[Vec],
    eps: float,
    omega: CharacterValue,
    candidates: Iterable[Vec] | None = None,
    budget: int = 10**5,
) -> SpectrumSet:
    """Candidates x with |E_{b in B}[omega^<x, b>]| >= eps."""
    if candidates is None:
        n = len(B[0])
        if omega.m**n > budget:
            raise BudgetExceeded(f"{omega.m}^{n} candidates exceed budget {budget}")
        candidates = itertools.product(range(omega.m), repeat=n)
    candidates = [tuple(x) for x in candidates]
    if eps <= 0:
        return SpectrumSet(eps, omega, tuple(candidates))
    keep = tuple(x for x in candidates if duality_measure([x], B, omega) >= eps - 1e-12)
    return SpectrumSet(eps, omega, keep)


def span_closure(A: Sequence[Vec], m: int) -> set[Vec]:
    """Subgroup of Z_m^n generated by A, by breadth-first closure."""
    n = len(A[0])
    seen = {(0,) * n}
    frontier = [(0,) * n]
    gens = [tuple(a) for a in A]
    while frontier:
        nxt = []
        for x in frontier:
            for g in gens:
                y = tuple((p + q) % m for p, q in zip(x, g))
                if y not in seen:
                    seen.add(y)
                    nxt.append(y)
        frontier = nxt
    return seen


@dataclass(frozen=True)
class AbelianDecomposition:
    """span(A) = <v_1> + ... + <v_r> internally direct, with |<v_i>| = q_i."""

    m: int
    generators: tuple[Vec, ...]
    basis: tuple[Vec, ...]
    orders: tuple[int, ...]
    coefficients: tuple[tuple[int, ...], ...]   # one row of alphas per generator

    @property
    def size(self) -> int:
        return math.prod(self.orders)

    def combine(self, alpha: Sequence[int]) -> Vec:
        n = len(self.generators[0])
        return tuple(sum(a * v[k] for a, v in zip(alpha, self.basis)) % self.m for k in range(n))

    def basis_claim_holds(self) -> bool:
        return all(all((q * e) % self.m == 0 for e in v) for q, v in zip(self.orders, self.basis))

    def coefficients_hold(self) -> bool:
        return all(self.combine(al) == g for al, g in zip(self.coefficients, self.generators))

    def theta(self, budget: int = 10**5) -> set[tuple[int, ...]]:
        """{(<v_i, u>)_i : u in Z_m^n} by enumeration of u."""
        n = len(self.generators[0])
        if self.m**n > budget:
            raise BudgetExceeded(f"{self.m}^{n} exceeds budget {budget}")
        return {tuple(dot(v, u, self.m) for v in self.basis) for u in itertools.product(range(self.m), repeat=n)}

    def zero_sum_claim_holds(self, budget: int = 10**5) -> bool:
        """sum over alpha in C of omega^<alpha, beta> vanishes for nonzero beta."""
        if self.size > budget:
            raise BudgetExceeded(f"|W| = {self.size} exceeds budget {budget}")
        alphas = list(itertools.product(*(range(q) for q in self.orders)))
        w = 2j * math.pi / self.m
        for beta in self.theta(budget):
            if not any(beta):
                continue
            total = sum(cmath.exp(w * (sum(a * b for a, b in zip(al, beta)) % self.m)) for al in alphas)
            if abs(total) > 1e-6:
                return False
        return True


def abelian_decompose(A: Sequence[Sequence[int]], m: int) -> AbelianDecomposition:
    """Cyclic decomposition of span(A) read off the Smith form of [a_1 ... a_k].

    With S G T = D, G = S^-1 D T^-1, so the columns d_i S^-1 e_i generate
    independent cyclic pieces and a_j = sum_i (T^-1)_{ij} (d_i S^-1 e_i).
    """
    gens = tuple(tuple(int(e) % m for e in a) for a in A)
    if not gens:
        raise ValueError("need at least one generator")
    n, k = len(gens[0]), len(gens)
    G = ZmMatrix.of([[gens[j][i] for j in range(k)] for i in range(n)], m, k)
    sf = smith_form(G)
    Si, Ti = sf.U_inv.entries, sf.V_inv.entries
    pieces = []
    for i, d in enumerate(sf.D):
        q = m // math.gcd(m, d)
        if q == 1:
            continue
        v = tuple((d * Si[row][i]) % m for row in range(n))
        pieces.append((q, v, i))
    pieces.sort(key=lambda p: p[0])
    basis = tuple(p[1] for p in pieces)
    orders = tuple(p[0] for p in pieces)
    coeffs = tuple(tuple(Ti[i][j] % q for q, _, i in pieces) for j in range(k))
    dec = AbelianDecomposition(m, gens, basis, orders, coeffs)
    assert dec.basis_claim_holds() and dec.coefficients_hold()
    return dec


@dataclass(frozen=True)
class SpectrumRectangle:
    A_indices: tuple[int, ...]
    B_indices: tuple[int, ...]
    A: tuple[Vec, ...]
    B: tuple[Vec, ...]
    value: int
    span_size: int


def spectrum_rectangle(A: Sequence[Vec], B: Sequence[Vec], eps: float, omega: CharacterValue) -> SpectrumRectangle:
    """Sub-lists A' of A and B' of B on which <a, b> is constant.

    Buckets B by the profile beta(b) = (<v_i, b>)_i against a cyclic basis of
    span(A), keeps the heaviest profile, then splits A by the now-constant
    inner product.  Guarantees |A'| >= |A|/m and |B'| >= eps^2 |A| |B| / |span(A)|.
    """
    m = omega.m
    if not omega.is_primitive:
        raise ValueError("omega must be primitive")
    A = [tuple(a) for a in A]
    B = [tuple(b) for b in B]
    if len(set(A)) != len(A):
        raise ValueError("A must not repeat elements")
    for i, a in enumerate(A):
        if duality_measure([a], B, omega) < eps - TOL:
            raise PreconditionError(f"A[{i}] is not in the {eps}-spectrum of B")
    dec = abelian_decompose(A, m)
    profiles: dict[tuple[int, ...], list[int]] = {}
    for j, b in enumerate(B):
        profiles.setdefault(tuple(dot(v, b, m) for v in dec.basis), []).append(j)
    B_idx = max(profiles.values(), key=len)
    b0 = B[B_idx[0]]
    classes: dict[int, list[int]] = {}
    for i, a in enumerate(A):
        classes.setdefault(dot(a, b0, m), []).append(i)
    value, A_idx = max(classes.items(), key=lambda kv: len(kv[1]))
    A2 = tuple(A[i] for i in A_idx)
    B2 = tuple(B[j] for j in B_idx)
    assert all(dot(a, b, m) == value for a in A2 for b in B2)
    assert len(A2) * m >= len(A)
    assert len(B2) >= eps**2 * len(A) * len(B) / dec.size - TOL
    return SpectrumRectangle(tuple(A_idx), tuple(B_idx), A2, B2, value, dec.size)


# ---------------------------------------------------------------------------
# monochromatic rectangles


class SearchLimitExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class Rectangle:
    rows: tuple[int, ...]
    cols: tuple[int, ...]
    value: int
    engine: str

    @property
    def side(self) -> int:
        return len(self.rows)


def _check_rectangle(P: ZmMatrix, s: int, rect: Rectangle) -> None:
    E = P.entries
    assert len(rect.rows) == len(rect.cols)
    assert all(E[i][j] % s == rect.value for i in rect.rows for j in rect.cols)


def monochromatic_rectangle_search(P: ZmMatrix, s: int, limit: int = 18, heuristic: bool = False) -> Rectangle:
    """Square R x S with P[i][j] mod s constant, of maximum side.

    Exact depth-first search over column subsets for each value, tracking the
    rows compatible with the chosen columns as a bitmask.  Beyond ``limit``
    columns a greedy column-adding pass is used if ``heuristic`` is set.
    """
    if s < 1 or P.m % s:
        raise ValueError(f"{s} does not divide {P.m}")
    t, c = P.rows, P.cols
    if t == 0 or c == 0:
        return Rectangle((), (), 0, "exact")
    exact = c <= limit
    if not exact and not heuristic:
        raise SearchLimitExceeded(f"{c} columns exceed exact-search limit {limit}")
    E = P.entries
    masks = [[0] * c for _ in range(s)]
    for i in range(t):
        for j in range(c):
            masks[E[i][j] % s][j] |= 1 << i
    best = [0, 0, (), 0]   # side, rowmask, cols, value

    def record(side, R, cols, val):
        if side > best[0]:
            best[:] = [side, R, tuple(cols), val]

    for val in range(s):
        mv = masks[val]
        if exact:
            def dfs(j, R, cols):
                k = len(cols)
                if k:
                    record(min(R.bit_count(), k), R, cols, val)
                if j == c or min(R.bit_count(), k + c - j) <= best[0]:
                    return
                R2 = R & mv[j]
                if R2:
                    cols.append(j)
                    dfs(j + 1, R2, cols)
                    cols.pop()
                dfs(j + 1, R, cols)

            dfs(0, (1 << t) - 1, [])
        else:
            R, cols, remaining = (1 << t) - 1, [], set(range(c))
            while remaining:
                j = max(remaining, key=lambda k: ((R & mv[k]).bit_count(), -k))
                R2 = R & mv[j]
                if not R2:
                    break
                R = R2
                cols.append(j)
                remaining.discard(j)
                record(min(R.bit_count(), len(cols)), R, sorted(cols), val)
    side, R, cols, val = best
    rows = tuple(i for i in range(t) if R >> i & 1)[:side]
    rect = Rectangle(rows, tuple(sorted(cols))[:side], val, "exact" if exact else "heuristic")
    _check_rectangle(P, s, rect)
    return rect


# ---------------------------------------------------------------------------
# refinement toward divisibility by a larger modulus


class NoWitnessError(RuntimeError):
    """No character meets both the magnitude and order floors."""

    def __init__(self, msg: str, magnitudes: dict[int, float]):
        self.magnitudes = magnitudes
        super().__init__(msg)


@dataclass
class RefineResult:
    family: MvFamily
    indices: list[int]
    s: int
    j: int
    r1: int                  # new constancy modulus on U (r1 s if U was refined)
    r2: int
    side: str
    magnitude: float
    anchor_magnitude: float
    size_floor: float
    steps: dict = field(default_factory=dict)


def _lift_diff(x: Vec, base: Vec, m: int, d: int) -> tuple[int, ...]:
    diff = [(a - b) % m for a, b in zip(x, base)]
    assert all(e % d == 0 for e in diff)
    return tuple(e // d for e in diff)


def refine_family(F: MvFamily, r1: int = 1, r2: int = 1, q: int | None = None) -> RefineResult:
    """One refinement step: from divisibility by r1 r2 to r1 r2 s.

    Preconditions: U constant mod r1, V constant mod r2, every product
    0 mod r1 r2, r3 = m/(r1 r2) >= 2, t >= 12 q.  Returns a sub-family on
    which every product is 0 mod r1 r2 s and one side is constant mod r1 s
    (resp. r2 s).
    """
    m, n, t = F.m, F.n, F.t
    if r1 < 1 or r2 < 1 or m % (r1 * r2):
        raise PreconditionError(f"r1 r2 = {r1 * r2} must divide {m}")
    r3 = m // (r1 * r2)
    if r3 < 2:
        raise PreconditionError("r3 = m / (r1 r2) must be at least 2")
    qv = q_restriction(F).q
    q = qv if q is None else q
    if q < 2 or qv > q:
        raise PreconditionError(f"family takes {qv} values, budget q = {q}")
    if t < 12 * q:
        raise PreconditionError(f"need t >= 12 q = {12 * q}, got t = {t}")
    if len({tuple(e % r1 for e in u) for u in F.U}) > 1:
        raise PreconditionError(f"U is not constant mod {r1}")
    if len({tuple(e % r2 for e in v) for v in F.V}) > 1:
        raise PreconditionError(f"V is not constant mod {r2}")

    mu = product_distribution(F, divide=r1 * r2)
    eps = 1 / (12 * q**1.5)
    order_floor = max(2.0, r3 / float(q) ** (10 * q))
    mags = {j: abs(mu.fourier(j)) for j in range(1, r3)}
    ok = [j for j in mags if mags[j] >= eps - TOL and r3 // math.gcd(r3, j) >= order_floor]
    if not ok:
        raise NoWitnessError(f"no j in [1, {r3 - 1}] meets magnitude {eps:.3g} and order {order_floor:.3g}", mags)
    j = max(ok, key=lambda k: (r3 // math.gcd(r3, k), -k))
    s = r3 // math.gcd(r3, j)

    # anchors: maximize |E_{u,v} w^<(u - u~)/r1, (v - v~)/r2>| over u~ in U, v~ in V
    a = np.array([_lift_diff(u, F.U[0], m, r1) for u in F.U], dtype=np.int64).reshape(t, n)
    b = np.array([_lift_diff(v, F.V[0], m, r2) for v in F.V], dtype=np.int64).reshape(t, n)
    Q = (a % r3) @ (b % r3).T % r3
    W = np.exp(2j * np.pi * ((j * Q) % r3) / r3)
    S = np.abs(W @ W.conj().T @ W) / t**2
    k, l = divmod(int(np.argmax(S)), t)
    anchor_mag = float(S[k, l])
    assert anchor_mag >= mags[j] ** 4 - TOL

    ua = [tuple(int(e) % s for e in row) for row in (a - a[k])]
    vb = [tuple(int(e) % s for e in row) for row in (b - b[l])]
    cu, cv = Counter(ua), Counter(vb)
    cp_u = Fraction(sum(c * c for c in cu.values()), t * t)
    cp_v = Fraction(sum(c * c for c in cv.values()), t * t)
    side = "U" if cp_u >= cp_v else "V"
    keys = ua if side == "U" else vb
    counts = cu if side == "U" else cv
    w_star = max(counts, key=lambda w: (counts[w], -keys.index(w)))
    T1 = [i for i in range(t) if keys[i] == w_star]
    assert len(T1) >= t * anchor_mag**2 / s ** (n / 2) - TOL

    mod = r1 * r2 * s
    u0, v0 = F.U[T1[0]], F.V[T1[0]]

    def largest_class(idx, key):
        groups: dict[int, list[int]] = {}
        for i in idx:
            groups.setdefault(key(i), []).append(i)
        return max(groups.values(), key=lambda g: (len(g), -g[0]))

    T2 = largest_class(T1, lambda i: dot([(x - y) % m for x, y in zip(F.U[i], u0)], v0, m) % mod)
    T3 = largest_class(T2, lambda i: dot(u0, [(x - y) % m for x, y in zip(F.V[i], v0)], m) % mod)
    G = F.subfamily(T3)

    assert all(dot(u, v, m) % mod == 0 for u in G.U for v in G.V)
    if side == "U":
        assert len({tuple(e % (r1 * s) for e in u) for u in G.U}) == 1
        nr1, nr2 = r1 * s, r2
    else:
        assert len({tuple(e % (r2 * s) for e in v) for v in G.V}) == 1
        nr1, nr2 = r1, r2 * s
    floor = s ** (-n / 2) * float(q) ** -24 * t
    assert G.t >= floor - TOL
    assert q_restriction(G).q <= q
    return RefineResult(
        G, T3, s, j, nr1, nr2, side, mags[j], anchor_mag, floor,
        {"anchor": [k, l], "bucket": len(T1), "first_prune": len(T2), "second_prune": len(T3)},
    )


# ---------------------------------------------------------------------------
# colrank reduction by monochromatic rectangles


def _colranks(P: ZmMatrix, divs: Sequence[int]) -> dict[int, int]:
    """colspan sizes of P mod s (as a matrix over Z_s) for each divisor s."""
    return {s: colspan_size(P.reduce(s)) for s in divs}


@dataclass
class IterateResult:
    family: MvFamily
    indices: list[int]
    s: int | None
    trace: list[dict]
    status: str              # "zero" | "too_small"

    def to_json(self) -> dict:
        return {
            "status": self.status,
            "s": self.s,
            "indices": self.indices,
            "family": self.family.to_json(),
            "trace": self.trace,
        }


def iterate_reduce(
    F: MvFamily, strict: bool = False, limit: int = 18, heuristic: bool = False
) -> IterateResult:
    """Shrink a collision-free family until P mod some divisor s vanishes.

    Each round takes the character with the largest bias, finds a square
    monochromatic rectangle R x S in P mod s (s its order) and keeps either
    R & S or the half of the disjointified rectangle with smaller colrank.
    The loop stops when colrank(P mod s) <= 2 for some s and then extracts an
    all-zero principal block.  The bias guarantee needs t >= 3m; below that
    the loop carries on (strict=False) or returns the partial trace.
    """
    m = F.m
    if F.t < 3 * m:
        raise PreconditionError(f"need t >= 3m = {3 * m}, got {F.t}")
    if not is_collision_free(F):
        raise PreconditionError("family is not collision free")
    divs = modulus(m).nontrivial_divisors()
    P0 = inner_product_matrix(F)
    idx = list(range(F.t))
    trace: list[dict] = []
    prev = _colranks(P0, divs)
    step = 0
    while True:
        P = P0.principal(idx)
        sizes = _colranks(P, divs)
        for d in divs:
            assert sizes[d] <= prev[d], f"colrank mod {d} increased"
        prev = sizes
        rec = {
            "step": step,
            "t_i": len(idx),
            "colranks": {str(d): math.log(sizes[d]) / math.log(d) for d in divs},
        }
        done = [d for d in divs if sizes[d] <= d * d]
        if done:
            s_final = done[0]
            zero = find_zero_principal_submatrix(P, s_final)
            final = [idx[i] for i in zero]
            assert all(P0.entries[i][j] % s_final == 0 for i in final for j in final)
            rec.update({"s_i": s_final, "action": "zero_block", "engine": "exact", "t_out": len(final)})
            trace.append(rec)
            return IterateResult(F.subfamily(final), final, s_final, trace, "zero")
        guaranteed = len(idx) >= 3 * m
        if not guaranteed and strict:
            rec.update({"s_i": None, "action": "stop_too_small", "engine": None})
            trace.append(rec)
            return IterateResult(F.subfamily(idx), idx, None, trace, "too_small")
        sub = F.subfamily(idx)
        stats = duality_stats(sub.U, sub.V, m)
        j = stats.best_j
        s = m // math.gcd(m, j)
        rect = monochromatic_rectangle_search(P, s, limit=limit, heuristic=heuristic)
        R, S = set(rect.rows), set(rect.cols)
        T = R & S
        if 2 * len(T) > rect.side:
            keep = sorted(T)
            case = 1
        else:
            R2, S2 = sorted(R - T), sorted(S - T)
            c1 = colspan_size(P.principal(R2).reduce(s))
            c2 = colspan_size(P.principal(S2).reduce(s))
            keep = R2 if c1 <= c2 else S2
            case = 2
            # halving bound: colrank(P1) + colrank(P2) <= colrank(P mod s) + 1
            lhs = math.log(c1 * c2) / math.log(s)
            assert lhs <= math.log(sizes[s]) / math.log(s) + 1 + TOL
        new_idx = [idx[i] for i in keep]
        new_size = colspan_size(P0.principal(new_idx).reduce(s))
        cr_old = math.log(sizes[s]) / math.log(s)
        cr_new = math.log(new_size) / math.log(s)
        assert cr_new <= 0.75 * cr_old + TOL or new_size <= s * s
        rec.update({
            "s_i": s,
            "bias_j": j,
            "bias": stats.best_magnitude,
            "bias_floor_met": stats.best_magnitude >= bias_bound(m) - TOL,
            "guaranteed": guaranteed,
            "rectangle_side": rect.side,
            "engine": rect.engine,
            "case": case,
            "t_out": len(new_idx),
        })
        trace.append(rec)
        idx = new_idx
        step += 1


# ---------------------------------------------------------------------------
# exploratory difference-set iteration


@dataclass
class DifferenceIteration:
    """State of the iterated difference sets A_1, A_2, ... inside spectra of B."""

    eps: list[float]
    sets: list[list[Vec]]
    j_indices: list[int | None]
    first_step_ok: bool
    stop_index: int | None


def difference_iteration(
    A: Sequence[Vec], B: Sequence[Vec], omega: CharacterValue, eps: float, K: float, max_steps: int = 4
) -> DifferenceIteration:
    """A_1 = A in Spec_{eps/2}(B); A_i = popular differences of A_{i-1} in Spec_{eps_i}(B).

    ``first_step_ok`` records |A_1| >= (eps/2)|A| whenever D_omega(A, B) >= eps.
    Stops at the first i with |A_{i+1}| <= K |A_i|.  No size guarantee beyond
    the first step is asserted.
    """
    m = omega.m
    A = [tuple(a) for a in A]
    e = [eps / 2]
    A1 = [a for a in A if duality_measure([a], B, omega) >= e[0] - 1e-12]
    ok = True
    if duality_measure(A, B, omega) >= eps - TOL:
        ok = len(A1) >= e[0] * len(A) - TOL
    sets, js = [A1], [None]
    stop = None
    for i in range(1, max_steps + 1):
        prev = sets[-1]
        if not prev:
            break
        e.append(e[-1] ** 2 / 2)
        rep = Counter(tuple((x - y) % m for x, y in zip(a, b)) for a in prev for b in prev)
        spec_ok = {x for x in rep if duality_measure([x], B, omega) >= e[-1] - 1e-12}
        top = max(rep.values())
        best_j, best_count = 0, -1
        for jj in range(int(math.log(top, m)) + 2):
            cnt = sum(c for x, c in rep.items() if x in spec_ok and m**jj <= c <= m ** (jj + 1))
            if cnt > best_count:
                best_j, best_count = jj, cnt
        nxt = sorted(x for x, c in rep.items() if x in spec_ok and m**best_j <= c <= m ** (best_j + 1))
        sets.append(nxt)
        js.append(best_j)
        if len(nxt) <= K * len(prev):
            stop = i
            break
    return DifferenceIteration(e, sets, js, ok, stop)
