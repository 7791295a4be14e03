import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from mvfam import bounds, constructions, family
from mvfam.bounds import BigReal


def test_theorem1_exact_power_of_two():
    # 12 q q^(24 (1 + 10 q log q)) m^(n/2) at q = m = n = 2
    assert bounds.theorem1_bound(2, 2, 2).exact == 3 * 2**508


@given(st.integers(2, 12), st.integers(1, 40), st.data())
def test_theorem1_log2(m, n, data):
    q = data.draw(st.integers(2, m))
    lq = math.log2(q)
    expect = math.log2(12 * q) + 24 * (1 + 10 * q * lq) * lq + n / 2 * math.log2(m)
    b = bounds.theorem1_bound(m, n, q)
    assert float(b.log2) == pytest.approx(expect, rel=1e-12)
    if b.exact is not None:
        assert math.log2(b.exact) == pytest.approx(expect, rel=1e-12)


def test_theorem1_rejects_bad_q():
    with pytest.raises(ValueError):
        bounds.theorem1_bound(3, 2, 5)


def test_dgy_bound_values():
    assert bounds.dgy_prime_bound(2, 3) == 4
    assert bounds.dgy_prime_bound(3, 2) == 4
    assert bounds.dgy_prime_bound(5, 3) == 1 + math.comb(6, 4)
    with pytest.raises(ValueError):
        bounds.dgy_prime_bound(6, 2)


def test_bigreal_compare():
    b = BigReal.from_int(1000)
    assert b >= 1000 and not b >= 1001
    assert b.bounds(999)


def test_d_function_audit_clean():
    fails = bounds.DFunctionSystem().audit()
    assert set(fails) == set(range(1, 12))
    assert not any(fails.values())


def test_d_function_d4_condition():
    assert not bounds.DFunctionSystem(d4=200).conditions(4, 8)[9]


def test_theorem2_is_conditional():
    t2 = bounds.theorem2_bound(2, 4)
    assert t2.conjectural and "Freiman-Ruzsa" in t2.note
    assert t2.value.exact is not None
    with pytest.raises(ValueError):
        bounds.theorem2_bound(2, 4, c_of_m=0.5)


def test_appendix_f_value():
    lb = math.log2(4 / 3)
    expect = 10 * (4 / 3) / (1 / 3) + 10 / lb + 16 * math.e / lb**2
    assert bounds.appendix_f(4 / 3) == pytest.approx(expect)
    assert bounds.appendix_f(4 / 3) == pytest.approx(316.58, abs=0.01)


def _direct_sum(n, b):
    total, i = 0.0, 1
    while b**i <= n:
        x = b ** (i - 1)
        total += 1 / (float(x) * math.log2(n / float(x)))
        i += 1
    return total


@given(st.integers(2, 5000))
def test_partial_sum_direct(n):
    assert bounds.partial_sum(n, Fraction(4, 3)) == pytest.approx(_direct_sum(n, Fraction(4, 3)))


def test_sweep_matches_pointwise():
    sw = bounds.partial_sum_sweep(Fraction(4, 3), 3000)
    assert sw.holds and sw.argsup == 10
    assert sw.sup_scaled == pytest.approx(bounds.partial_sum(10, Fraction(4, 3)) * math.log2(10))
    # a float b snaps to the same rational
    assert bounds.partial_sum(100, 4 / 3) == bounds.partial_sum(100, Fraction(4, 3))


@given(st.sampled_from([6, 10, 12, 30, 60]), st.data())
def test_prime_factor_reduction(m, data):
    vals = data.draw(st.lists(st.integers(1, m - 1), min_size=1, max_size=5))
    r = bounds.prime_factor_reduction(vals, m)
    assert m % r == 0
    assert all(v % r for v in vals)


def test_reduce_family():
    F = constructions.standard_family(6, 4)   # values {0, 1}
    G = bounds.reduce_family(F)
    assert G.m == 2
    assert family.verify(G.U, G.V, G.m) == G


def test_bound_report():
    rep = bounds.bound_report(3, 2, family_size=4)
    j = rep.to_json()
    assert j["dgy_bound"] == 4 and j["comparisons"] == {"theorem1": True, "dgy": True}
    assert j["theorem2_conjectural"]
    assert len(rep.csv_row()) == len(bounds.CSV_FIELDS)
    assert "dgy:violated" in bounds.bound_report(3, 2, family_size=5).flags
    assert "dgy:not-prime" in bounds.bound_report(6, 2).flags
