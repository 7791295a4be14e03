"""Arithmetic in Z_m and Z_m^n.

Vectors are kept as tuples of canonical residues in [0, m).  The hot paths
(search, decoding) work on bare tuples through :func:`dot`; :class:`ZmVector`
is the checked, modulus-carrying wrapper used at API boundaries.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence


def factorize(m: int) -> tuple[tuple[int, int], ...]:
    """Prime factorization of ``m`` as ``((p, e), ...)`` with p ascending."""
    if m < 1:
        raise ValueError(f"cannot factor {m}")
    out = []
    p = 2
    while p * p <= m:
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            out.append((p, e))
        p += 1 if p == 2 else 2
    if m > 1:
        out.append((m, 1))
    return tuple(out)


def is_prime(p: int) -> bool:
    return p >= 2 and factorize(p) == ((p, 1),)


def divisors(m: int) -> tuple[int, ...]:
    ds = [1]
    for p, e in factorize(m):
        ds = [d * p**k for d in ds for k in range(e + 1)]
    return tuple(sorted(ds))


@dataclass(frozen=True)
class Modulus:
    m: int
    prime_power_factorization: tuple[tuple[int, int], ...] = field(init=False)
    divisors: tuple[int, ...] = field(init=False)

    def __post_init__(self):
        if self.m < 2:
            raise ValueError(f"modulus must be >= 2, got {self.m}")
        object.__setattr__(self, "prime_power_factorization", factorize(self.m))
        object.__setattr__(self, "divisors", divisors(self.m))

    @property
    def prime_powers(self) -> tuple[int, ...]:
        return tuple(p**e for p, e in self.prime_power_factorization)

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.prime_power_factorization)

    def proper_divisors(self) -> tuple[int, ...]:
        """Divisors s with 1 < s < m, ascending."""
        return tuple(d for d in self.divisors if 1 < d < self.m)

    def nontrivial_divisors(self) -> tuple[int, ...]:
        """Divisors s with s >= 2 (m included), ascending."""
        return tuple(d for d in self.divisors if d >= 2)


@lru_cache(maxsize=None)
def modulus(m: int) -> Modulus:
    return Modulus(m)


@dataclass(frozen=True)
class ZmVector:
    m: int
    entries: tuple[int, ...]

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"bad modulus {self.m}")
        for e in self.entries:
            if not 0 <= e < self.m:
                raise ValueError(f"entry {e} not a canonical residue mod {self.m}")

    @classmethod
    def of(cls, entries: Iterable[int], m: int) -> "ZmVector":
        return cls(m, tuple(int(e) % m for e in entries))

    @property
    def n(self) -> int:
        return len(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __add__(self, other: "ZmVector") -> "ZmVector":
        _check_compatible(self, other)
        return ZmVector(self.m, tuple((a + b) % self.m for a, b in zip(self.entries, other.entries)))

    def __sub__(self, other: "ZmVector") -> "ZmVector":
        _check_compatible(self, other)
        return ZmVector(self.m, tuple((a - b) % self.m for a, b in zip(self.entries, other.entries)))

    def scale(self, c: int) -> "ZmVector":
        return ZmVector(self.m, tuple((c * a) % self.m for a in self.entries))


def _check_compatible(u: ZmVector, v: ZmVector) -> None:
    if u.m != v.m:
        raise ValueError(f"modulus mismatch: {u.m} vs {v.m}")
    if len(u.entries) != len(v.entries):
        raise ValueError(f"dimension mismatch: {len(u.entries)} vs {len(v.entries)}")


def dot(u: Sequence[int], v: Sequence[int], m: int) -> int:
    """Inner product of two residue tuples, reduced mod m (unchecked)."""
    return sum(a * b for a, b in zip(u, v)) % m


def inner_product(u: ZmVector, v: ZmVector) -> int:
    _check_compatible(u, v)
    return dot(u.entries, v.entries, u.m)


def reduce_mod(u: ZmVector, r: int) -> ZmVector:
    """Entrywise reduction to Z_r.  ``r = 1`` gives the all-zero vector."""
    if r < 1 or u.m % r != 0:
        raise ValueError(f"{r} does not divide {u.m}")
    return ZmVector(r, tuple(a % r for a in u.entries))


def reduce_tuple(u: Sequence[int], r: int) -> tuple[int, ...]:
    return tuple(a % r for a in u)


def element_order(x: int, N: int) -> int:
    """Additive order of x in Z_N."""
    if N < 1:
        raise ValueError(f"bad modulus {N}")
    return N // math.gcd(N, x % N)


@dataclass(frozen=True)
class LowOrderCount:
    N: int
    S: float
    count: int
    bound: float

    @property
    def holds(self) -> bool:
        return self.count <= self.bound + 1e-9


def low_order_count(N: int, S: float) -> LowOrderCount:
    """Count residues of order below N/S and the bound (N/S)(log2 S)^r.

    r is the number of distinct primes of N.  The caller decides what to do
    with ``holds``; the bound is known to fail for some small inputs.
    """
    if N < 2:
        raise ValueError("N must be >= 2")
    if S <= 1:
        raise ValueError("S must exceed 1")
    threshold = N / S
    count = sum(1 for x in range(N) if element_order(x, N) < threshold)
    r = len(factorize(N))
    return LowOrderCount(N, S, count, threshold * math.log2(S) ** r)


@dataclass(frozen=True)
class CharacterValue:
    """The root of unity omega^j with omega = exp(2 pi i / m)."""

    j: int
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise ValueError(f"bad modulus {self.m}")
        object.__setattr__(self, "j", self.j % self.m)

    @property
    def order(self) -> int:
        return self.m // math.gcd(self.m, self.j)

    @property
    def is_primitive(self) -> bool:
        return self.order == self.m

    def power(self, x: int) -> complex:
        return cmath.exp(2j * math.pi * ((self.j * x) % self.m) / self.m)

    def table(self) -> list[complex]:
        """Values omega^(j x) for x in 0..m-1."""
        return [self.power(x) for x in range(self.m)]


def character_sum(counts: Sequence[int], j: int, m: int) -> complex:
    """sum_x counts[x] * omega^(j x) / sum(counts) with omega = exp(2 pi i/m)."""
    total = sum(counts)
    if total == 0:
        raise ValueError("empty count vector")
    acc = 0j
    for x, c in enumerate(counts):
        if c:
            acc += c * cmath.exp(2j * math.pi * ((j * x) % m) / m)
    return acc / total


def crt_pair(a1: int, m1: int, a2: int, m2: int) -> int:
    """x mod m1*m2 with x = a1 (mod m1), x = a2 (mod m2); coprime moduli."""
    inv = pow(m1, -1, m2)
    return (a1 + m1 * (((a2 - a1) * inv) % m2)) % (m1 * m2)


def crt(residues: Sequence[int], moduli: Sequence[int]) -> int:
    x, M = 0, 1
    for a, mi in zip(residues, moduli):
        x = crt_pair(x, M, a % mi, mi)
        M *= mi
    return x


def unit_part(a: int, m: int) -> int:
    """A unit u mod m with a = gcd(a, m) * u (mod m)."""
    a %= m
    g = math.gcd(a, m)
    if a == 0:
        return 1
    base, step = a // g, m // g
    for k in range(g):
        u = base + k * step
        if math.gcd(u, m) == 1:
            return u % m
    raise ArithmeticError(f"no unit factor for {a} mod {m}")  # unreachable
