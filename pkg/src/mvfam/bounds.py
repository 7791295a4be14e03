"""Closed-form upper bounds on family sizes and the numeric checks behind them.

All logarithms are base 2.  Huge values are carried as base-2 logarithms in
mpmath at 128-bit precision, with an exact integer alongside whenever the
exponents are integral and the number is not absurdly long.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable

import mpmath
import numpy as np

from .family import MvFamily, q_restriction
from .zm import is_prime, modulus

PREC_BITS = 128
EXACT_BITS_CAP = 10**6
CONJECTURAL_NOTE = "conditional on the polynomial Freiman-Ruzsa conjecture"


def _mp():
    ctx = mpmath.mp.clone()
    ctx.prec = PREC_BITS
    return ctx


@dataclass(frozen=True)
class BigReal:
    """A positive real known through log2 (and exactly, when integral)."""

    log2: mpmath.mpf
    exact: int | None = None

    @classmethod
    def from_int(cls, x: int) -> "BigReal":
        if x <= 0:
            raise ValueError("BigReal holds positive values only")
        ctx = _mp()
        return cls(ctx.log(ctx.mpf(x), 2), x)

    def __ge__(self, other: int) -> bool:
        if self.exact is not None:
            return self.exact >= other
        if other <= 0:
            return True
        ctx = _mp()
        return self.log2 >= ctx.log(ctx.mpf(other), 2)

    def bounds(self, size: int) -> bool:
        """size <= self, exact when possible."""
        return self >= size

    def to_str(self, digits: int = 12) -> str:
        if self.exact is not None and self.exact < 10**30:
            return str(self.exact)
        ctx = _mp()
        lg10 = self.log2 * ctx.log10(2)
        e = int(ctx.floor(lg10))
        mant = ctx.power(10, lg10 - e)
        return f"{ctx.nstr(mant, digits)}e+{e}"

    def __str__(self) -> str:
        return self.to_str()


def _pow2_int(k: Fraction) -> int | None:
    if k.denominator == 1 and 0 <= k.numerator <= EXACT_BITS_CAP:
        return 1 << k.numerator
    return None


def _log2_exact(x: int) -> Fraction | None:
    """log2 x as a Fraction when x is a power of two."""
    if x > 0 and x & (x - 1) == 0:
        return Fraction(x.bit_length() - 1)
    return None


def _int_root_power(m: int, num: int, den: int) -> int | None:
    """m^(num/den) when it is an integer (den in {1, 2})."""
    if den == 1:
        return m**num
    r = math.isqrt(m)
    if r * r == m:
        return r**num
    return None


def theorem1_bound(m: int, n: int, q: int) -> BigReal:
    """12 q * q^(24 (1 + log q^(10 q))) * m^(n/2)."""
    if m < 2 or n < 1 or not 2 <= q <= m:
        raise ValueError(f"need m >= 2, n >= 1, 2 <= q <= m; got m={m}, n={n}, q={q}")
    ctx = _mp()
    lq = ctx.log(q, 2)
    expo = 24 * (1 + 10 * q * lq)
    lg = ctx.log(12 * q, 2) + expo * lq + ctx.mpf(n) / 2 * ctx.log(m, 2)
    exact = None
    k = _log2_exact(q)
    if k is not None:
        e = 24 * (1 + 10 * q * k)
        if e.denominator == 1 and e * k <= EXACT_BITS_CAP:
            mp = m ** (n // 2) if n % 2 == 0 else _int_root_power(m, n, 2)
            if mp is not None:
                exact = 12 * q * q ** int(e) * mp
    return BigReal(lg, exact)


def dgy_prime_bound(p: int, n: int) -> int:
    """1 + binom(n + p - 2, p - 1) for prime p."""
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")
    if n < 1:
        raise ValueError("n must be >= 1")
    return 1 + math.comb(n + p - 2, p - 1)


# ---------------------------------------------------------------------------
# the d-function system


CFun = Callable[[float], float]


def _as_cfun(c: float | CFun) -> CFun:
    if callable(c):
        return c
    return lambda m, _c=float(c): _c


@dataclass
class DFunctionSystem:
    """d(m) = 1200 c(m) m^(6 log m), d1 = 2 c, d2 = 602 c m log m, d3 = 600 c m log m, d4 = 300."""

    c: float | CFun = 1.0
    d4: float = 300.0

    def _c(self, m: float) -> float:
        return _as_cfun(self.c)(m)

    def d(self, m: float) -> float:
        return 1200 * self._c(m) * m ** (6 * math.log2(m))

    def d1(self, m: float) -> float:
        return 2 * self._c(m)

    def d2(self, m: float) -> float:
        return 602 * self._c(m) * m * math.log2(m)

    def d3(self, m: float) -> float:
        return 600 * self._c(m) * m * math.log2(m)

    def conditions(self, m: int, n: int, rel: float = 1e-12) -> dict[int, bool]:
        """Truth of the eleven requirements at (m, n); exponential ones in log2 form."""
        lm, ln = math.log2(m), math.log2(n)
        d, d1, d2, d3 = self.d(m), self.d1(m), self.d2(m), self.d3(m)
        half = self.d(m / 2)

        def ge(a, b):
            return a >= b - rel * max(abs(a), abs(b), 1.0)

        fs = (self.d, self.d1, self.d2, self.d3)
        return {
            1: all(f(m) <= f(m + 1) for f in fs),
            2: ge(d * n / ln, m * math.log2(2 * n)),
            3: ge(d * n / ln, m * math.log2(2 * m)),
            4: ge(d, half * 4 * m * lm),
            5: -d2 + d / 2 > half * lm,
            6: ge(0.5 * d * n / ln, math.log2(3 * m) + d2 * n / ln),
            7: ge(d2 * n / ln, 2 * lm + d3 * n / ln),
            8: ge(d3, d1 * self.d4 * m * lm),
            9: self.d4 >= 300,
            10: ge(d1, 2 * self._c(m)),
            11: ge(d2, d3 + 1),
        }

    def audit(self, ms: Iterable[int] = range(2, 17), ns: Iterable[int] = range(2, 65)) -> dict[int, list[tuple[int, int]]]:
        """Failures per condition over the grid (empty lists when all hold)."""
        fails: dict[int, list[tuple[int, int]]] = {k: [] for k in range(1, 12)}
        ns = list(ns)
        for m in ms:
            for n in ns:
                for k, ok in self.conditions(m, n).items():
                    if not ok:
                        fails[k].append((m, n))
        return fails


@dataclass(frozen=True)
class ConditionalBound:
    value: BigReal
    c_of_m: float
    conjectural: bool = True
    note: str = CONJECTURAL_NOTE


def theorem2_bound(m: int, n: int, c_of_m: float = 1.0) -> ConditionalBound:
    """2^(d(m) n / log n); always flagged as conjectural."""
    if m < 2 or n < 2:
        raise ValueError("need m, n >= 2")
    if c_of_m < 1:
        raise ValueError("c(m) must be >= 1")
    ctx = _mp()
    d = 1200 * ctx.mpf(c_of_m) * ctx.power(m, 6 * ctx.log(m, 2))
    lg = d * n / ctx.log(n, 2)
    exact = None
    km, kn = _log2_exact(m), _log2_exact(n)
    cf = Fraction(c_of_m).limit_denominator(10**6)
    if km is not None and kn is not None and cf == Fraction(c_of_m):
        e = 1200 * cf * Fraction(m) ** int(6 * km) * n / kn
        exact = _pow2_int(e)
    return ConditionalBound(BigReal(lg, exact), float(c_of_m))


# ---------------------------------------------------------------------------
# the partial-sum calculation


def appendix_f(b: float) -> float:
    """f(b) = 10 b/(b-1) + 10/log b + 16 e/log^2 b."""
    if b <= 1:
        raise ValueError("b must exceed 1")
    lb = math.log2(b)
    return 10 * b / (b - 1) + 10 / lb + 16 * math.e / lb**2


def _as_fraction(b: Fraction | float | int) -> Fraction:
    # floats such as 4/3 are snapped to the nearby small-denominator rational
    return b if isinstance(b, Fraction) else Fraction(b).limit_denominator(10**6)


def partial_sum(n: int, b: Fraction | float) -> float:
    """sum_{i=1}^{floor(log_b n)} 1 / (b^(i-1) log(n / b^(i-1)))."""
    b = _as_fraction(b)
    total, i = 0.0, 1
    while b**i <= n:
        x = float(b ** (i - 1))
        total += 1 / (x * math.log2(n / x))
        i += 1
    return total


@dataclass
class PartialSumSweep:
    b: float
    n_max: int
    f_value: float
    violations: list[int]
    sup_scaled: float         # max over n of sum * log n
    argsup: int

    @property
    def holds(self) -> bool:
        return not self.violations


def partial_sum_sweep(b: Fraction | float = Fraction(4, 3), n_max: int = 10**6) -> PartialSumSweep:
    """Check sum(n) <= f(b)/log n for every n in [2, n_max] by direct summation."""
    b = _as_fraction(b)
    if b <= 1:
        raise ValueError("b must exceed 1")
    ns = np.arange(2, n_max + 1, dtype=np.int64)
    nf = ns.astype(np.float64)
    total = np.zeros_like(nf)
    i = 1
    while b**i <= n_max:
        # term i is present exactly when n >= b^i
        thr = math.ceil(b**i)
        x = float(b ** (i - 1))
        mask = ns >= thr
        total[mask] += 1.0 / (x * np.log2(nf[mask] / x))
        i += 1
    f = appendix_f(float(b))
    scaled = total * np.log2(nf)
    bad = ns[scaled > f * (1 + 1e-12)]
    k = int(np.argmax(scaled))
    return PartialSumSweep(float(b), n_max, f, bad.tolist(), float(scaled[k]), int(ns[k]))


# ---------------------------------------------------------------------------
# shrinking the modulus


def prime_factor_reduction(values: Iterable[int], m: int) -> int:
    """Product of one prime power p^e || m per value v, chosen with v != 0 mod p^e.

    The smallest qualifying prime is taken for each value.
    """
    pps = modulus(m).prime_powers
    chosen: set[int] = set()
    for v in values:
        if v % m == 0:
            raise ValueError(f"value {v} is 0 mod {m}")
        chosen.add(next(pp for pp in pps if v % pp))
    return math.prod(chosen) if chosen else m


def reduce_family(F: MvFamily) -> MvFamily:
    """Read the family modulo the reduced modulus (revalidated)."""
    vals = q_restriction(F).value_set - {0}
    if not vals:
        return F
    m2 = prime_factor_reduction(vals, F.m)
    return F if m2 == F.m else F.reduce(m2)


# ---------------------------------------------------------------------------
# reports


CSV_FIELDS = ("m", "n", "q", "family_size", "theorem1_bound", "dgy_bound", "theorem2_bound", "flags")


@dataclass
class BoundReport:
    m: int
    n: int
    q: int
    theorem1_bound: BigReal
    dgy_prime_bound: int | None
    theorem2_bound: ConditionalBound | None
    family_size: int | None = None
    flags: list[str] = field(default_factory=list)

    def comparisons(self) -> dict:
        if self.family_size is None:
            return {}
        out = {"theorem1": self.theorem1_bound.bounds(self.family_size)}
        if self.dgy_prime_bound is not None:
            out["dgy"] = self.family_size <= self.dgy_prime_bound
        return out

    def to_json(self) -> dict:
        t2 = self.theorem2_bound
        return {
            "m": self.m,
            "n": self.n,
            "q": self.q,
            "family_size": self.family_size,
            "theorem1_bound": self.theorem1_bound.to_str(),
            "theorem1_log2": float(self.theorem1_bound.log2),
            "dgy_bound": self.dgy_prime_bound,
            "theorem2_bound": None if t2 is None else t2.value.to_str(),
            "theorem2_log2": None if t2 is None else float(t2.value.log2),
            "theorem2_conjectural": True,
            "theorem2_note": CONJECTURAL_NOTE,
            "comparisons": self.comparisons(),
            "flags": self.flags,
        }

    def csv_row(self) -> list[str]:
        t2 = self.theorem2_bound
        return [
            str(self.m),
            str(self.n),
            str(self.q),
            "" if self.family_size is None else str(self.family_size),
            self.theorem1_bound.to_str(),
            "" if self.dgy_prime_bound is None else str(self.dgy_prime_bound),
            "" if t2 is None else t2.value.to_str(),
            ";".join(self.flags),
        ]


def bound_report(m: int, n: int, q: int | None = None, c_of_m: float = 1.0, family_size: int | None = None) -> BoundReport:
    q = m if q is None else q
    flags = ["theorem2:" + CONJECTURAL_NOTE.replace(" ", "-")]
    dgy = dgy_prime_bound(m, n) if is_prime(m) else None
    if dgy is None:
        flags.append("dgy:not-prime")
    t2 = theorem2_bound(m, n, c_of_m) if n >= 2 else None
    if t2 is None:
        flags.append("theorem2:needs-n>=2")
    rep = BoundReport(m, n, q, theorem1_bound(m, n, q), dgy, t2, family_size, flags)
    for k, ok in rep.comparisons().items():
        if not ok:
            rep.flags.append(f"{k}:violated")
    return rep


__all__ = [
    "BigReal",
    "BoundReport",
    "ConditionalBound",
    "DFunctionSystem",
    "PartialSumSweep",
    "appendix_f",
    "bound_report",
    "dgy_prime_bound",
    "partial_sum",
    "partial_sum_sweep",
    "prime_factor_reduction",
    "reduce_family",
    "theorem1_bound",
    "theorem2_bound",
]
