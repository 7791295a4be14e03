"""The code attached to a family: encoding, m-query local decoding, noise.

Position z in Z_m^n (lexicographic order) carries sum_i x_i g^<u_i, z> over
F_P, where g has multiplicative order exactly m.  Decoding x_i reads the m
points w + lam v_i of a random line.
"""
from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .family import MvFamily
from .zm import dot, factorize, is_prime


def smallest_prime_1_mod(m: int) -> int:
    P = m + 1
    while not is_prime(P):
        P += m
    return P


def smallest_primitive_root(P: int) -> int:
    qs = [p for p, _ in factorize(P - 1)] if P > 2 else []
    for g in range(1, P):
        if all(pow(g, (P - 1) // q, P) != 1 for q in qs):
            return g
    raise ArithmeticError(f"no primitive root mod {P}")


def multiplicative_order(g: int, P: int) -> int:
    k, x = 1, g % P
    while x != 1:
        x = x * g % P
        k += 1
    return k


@dataclass(frozen=True)
class CodeParams:
    family: MvFamily
    P: int
    gamma: int

    def __post_init__(self):
        m = self.family.m
        if (self.P - 1) % m:
            raise ValueError(f"{m} does not divide P - 1 = {self.P - 1}")
        if multiplicative_order(self.gamma, self.P) != m:
            raise ValueError(f"gamma = {self.gamma} does not have order {m} mod {self.P}")

    @property
    def m(self) -> int:
        return self.family.m

    @property
    def n(self) -> int:
        return self.family.n

    @property
    def k(self) -> int:
        return self.family.t

    @property
    def N(self) -> int:
        return self.m**self.n

    def index(self, z: Sequence[int]) -> int:
        idx = 0
        for e in z:
            idx = idx * self.m + e
        return idx

    def position(self, idx: int) -> tuple[int, ...]:
        out = []
        for _ in range(self.n):
            idx, r = divmod(idx, self.m)
            out.append(r)
        return tuple(reversed(out))


def code_params(F: MvFamily, P: int | None = None, gamma: int | None = None) -> CodeParams:
    """Smallest prime P = 1 mod m and gamma = g^((P-1)/m) for the least primitive root g."""
    P = smallest_prime_1_mod(F.m) if P is None else P
    if gamma is None:
        gamma = pow(smallest_primitive_root(P), (P - 1) // F.m, P)
    return CodeParams(F, P, gamma)


@dataclass(frozen=True)
class Codeword:
    params: CodeParams
    values: tuple[int, ...]


def _power_table(params: CodeParams) -> np.ndarray:
    return np.array([pow(params.gamma, e, params.P) for e in range(params.m)], dtype=np.int64)


def encode(x: Sequence[int], params: CodeParams) -> Codeword:
    if len(x) != params.k:
        raise ValueError(f"message has length {len(x)}, expected {params.k}")
    m, n, P = params.m, params.n, params.P
    if params.k == 0:
        return Codeword(params, (0,) * params.N)
    Z = np.array(list(itertools.product(range(m), repeat=n)), dtype=np.int64).reshape(-1, n)
    U = np.array(params.family.U, dtype=np.int64).reshape(-1, n)
    ip = (Z @ U.T) % m                                 # N x k exponents
    vals = (_power_table(params)[ip] * (np.array(x, dtype=np.int64) % P)).sum(axis=1) % P
    return Codeword(params, tuple(int(v) for v in vals))


def value_at(x: Sequence[int], params: CodeParams, z: Sequence[int], table: Sequence[int] | None = None) -> int:
    """One codeword symbol without building the whole word."""
    pw = table if table is not None else [pow(params.gamma, e, params.P) for e in range(params.m)]
    return sum(xi * pw[dot(u, z, params.m)] for xi, u in zip(x, params.family.U)) % params.P


def query_points(i: int, w: Sequence[int], params: CodeParams) -> list[tuple[int, ...]]:
    v, m = params.family.V[i], params.m
    return [tuple((a + lam * b) % m for a, b in zip(w, v)) for lam in range(m)]


def query_positions(i: int, w: Sequence[int], params: CodeParams) -> list[int]:
    return [params.index(z) for z in query_points(i, w, params)]


def local_decode(i: int, oracle: Callable[[int], int], params: CodeParams, w: Sequence[int]) -> int:
    """g^(-<u_i, w>) * (1/m) * sum over lam of oracle(w + lam v_i)."""
    P, m = params.P, params.m
    total = sum(oracle(p) for p in query_positions(i, w, params)) % P
    e = dot(params.family.U[i], w, m)
    return total * pow(m, -1, P) * pow(params.gamma, (m - e) % m, P) % P


def local_decode_random(i: int, oracle: Callable[[int], int], params: CodeParams, rng: np.random.Generator) -> int:
    w = tuple(int(a) for a in rng.integers(0, params.m, size=params.n))
    return local_decode(i, oracle, params, w)


def corruption_budget(delta: float, N: int) -> int:
    if not 0 <= delta <= 1:
        raise ValueError("delta must lie in [0, 1]")
    return math.floor(Fraction(str(delta)) * N)


def corrupt(
    c: Codeword,
    delta: float,
    rng: np.random.Generator,
    mode: str = "random",
    target: int = 0,
) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Change exactly floor(delta N) symbols, each to a different random value.

    ``mode="adversarial"`` puts one error on each line w + <v_target> first
    (at its lexicographically smallest point) so that as many decoding lines
    for index ``target`` as possible are hit.  Returns (word, sorted mask).
    """
    params = c.params
    N, P = params.N, params.P
    K = corruption_budget(delta, N)
    if mode == "random":
        pos = rng.choice(N, size=K, replace=False) if K else np.array([], dtype=np.int64)
    elif mode == "adversarial":
        seen, reps = set(), []
        for idx in range(N):
            if idx in seen:
                continue
            line = query_positions(target, params.position(idx), params)
            seen.update(line)
            reps.append(idx)
        chosen = reps[:K]
        if len(chosen) < K:
            rest = np.setdiff1d(np.arange(N), np.array(chosen, dtype=np.int64))
            chosen += rng.choice(rest, size=K - len(chosen), replace=False).tolist()
        pos = np.array(chosen, dtype=np.int64)
    else:
        raise ValueError(f"unknown corruption mode {mode!r}")
    word = list(c.values)
    for p in pos.tolist():
        word[p] = (word[p] + int(rng.integers(1, P))) % P
    return tuple(word), tuple(sorted(int(p) for p in pos))


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    """Independent counter-based stream for one trial."""
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, 0, trial]))


@dataclass(frozen=True)
class DecodeTrialReport:
    delta: float
    trials: int
    successes: int
    rate: float
    floor: float
    sigma: float
    k: int
    N: int
    m: int
    n: int
    P: int
    gamma: int
    seed: int
    corruptions: int
    N_over_k2: float
    mode: str

    def to_json(self) -> dict:
        return asdict(self)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


def rate_experiment(params: CodeParams, delta: float, trials: int, seed: int, mode: str = "random") -> DecodeTrialReport:
    """Random message, index and line per trial; count exact recoveries.

    Only the m queried symbols are materialized.  Their corruption status is
    drawn sequentially from the exact marginal of a uniform floor(delta N)
    subset, so the statistics match corrupting the whole word.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if mode != "random":
        raise ValueError("rate experiments use the random corruption mode")
    m, n, P, N, k = params.m, params.n, params.P, params.N, params.k
    K = corruption_budget(delta, N)
    table = [pow(params.gamma, e, P) for e in range(m)]
    minv = pow(m, -1, P)
    successes = 0
    for trial in range(trials):
        rng = trial_rng(seed, trial)
        x = [int(a) for a in rng.integers(0, P, size=k)]
        i = int(rng.integers(0, k))
        w = tuple(int(a) for a in rng.integers(0, m, size=n))
        pts = query_points(i, w, params)
        vals: dict[tuple[int, ...], int] = {}
        left_bad, left_all = K, N
        for z in pts:
            if z in vals:
                continue
            y = value_at(x, params, z, table)
            if left_bad and rng.random() * left_all < left_bad:
                y = (y + int(rng.integers(1, P))) % P
                left_bad -= 1
            left_all -= 1
            vals[z] = y
        total = sum(vals[z] for z in pts) % P
        e = dot(params.family.U[i], w, m)
        got = total * minv * table[(m - e) % m] % P
        successes += got == x[i]
    floor = 1 - m * float(Fraction(str(delta)))
    p = min(max(floor, 0.0), 1.0)
    sigma = math.sqrt(p * (1 - p) / trials)
    return DecodeTrialReport(
        float(delta), trials, successes, successes / trials, floor, sigma,
        k, N, m, n, P, params.gamma, seed, K, N / k**2 if k else math.inf, mode,
    )
