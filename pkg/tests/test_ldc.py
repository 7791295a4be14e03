import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mvfam import constructions, ldc


def test_field_choice():
    assert [ldc.smallest_prime_1_mod(m) for m in (2, 3, 4, 6, 12)] == [3, 7, 5, 7, 13]
    p = ldc.code_params(constructions.uniform_subsets_family(6, 7))
    assert (p.P, p.gamma, p.N) == (7, 3, 279936)
    assert ldc.multiplicative_order(p.gamma, p.P) == 6


def test_bad_params():
    F = constructions.small_m2_family()
    with pytest.raises(ValueError):
        ldc.CodeParams(F, 5, 2)       # 2 has order 4 mod 5
    with pytest.raises(ValueError):
        ldc.encode([1], ldc.code_params(F))


def test_encode_example():
    p = ldc.code_params(constructions.small_m2_family())
    assert (p.P, p.gamma) == (3, 2)
    assert ldc.encode([1, 0], p).values == (1, 2, 2, 1)


def test_positions_roundtrip():
    p = ldc.code_params(constructions.standard_family(3, 3))
    for idx in range(p.N):
        assert p.index(p.position(idx)) == idx


@given(st.sampled_from([(2, 4), (3, 3), (4, 2), (6, 2)]), st.integers(0, 10**6))
@settings(max_examples=30)
def test_encode_matches_pointwise(mt, seed):
    m, t = mt
    rng = random.Random(seed)
    p = ldc.code_params(constructions.standard_family(m, t))
    x = [rng.randrange(p.P) for _ in range(p.k)]
    c = ldc.encode(x, p)
    for idx in rng.sample(range(p.N), min(10, p.N)):
        assert c.values[idx] == ldc.value_at(x, p, p.position(idx))


@given(st.sampled_from([(2, 3), (3, 3), (6, 2)]), st.integers(0, 10**6))
@settings(max_examples=20)
def test_zero_noise_decoding(mt, seed):
    m, t = mt
    rng = random.Random(seed)
    p = ldc.code_params(constructions.standard_family(m, t))
    x = [rng.randrange(p.P) for _ in range(p.k)]
    c = ldc.encode(x, p)
    for i in range(p.k):
        for w in itertools.product(range(m), repeat=p.n):
            assert ldc.local_decode(i, c.values.__getitem__, p, w) == x[i]


def test_query_line():
    p = ldc.code_params(constructions.standard_family(3, 3))
    pts = ldc.query_points(0, (0, 0, 0), p)
    assert pts == [(0, 0, 0), (0, 1, 1), (0, 2, 2)]


def test_corrupt_exact_count():
    p = ldc.code_params(constructions.standard_family(3, 4))
    c = ldc.encode([1, 2, 3, 4], p)
    rng = np.random.default_rng(0)
    word, mask = ldc.corrupt(c, 0.1, rng)
    K = ldc.corruption_budget(0.1, p.N)
    assert K == 8 and len(mask) == K
    assert [i for i in range(p.N) if word[i] != c.values[i]] == list(mask)
    word, mask = ldc.corrupt(c, 0.1, rng, mode="adversarial", target=0)
    assert len(mask) == K
    # adversarial errors hit K distinct decoding lines for index 0
    lines = {tuple(sorted(ldc.query_positions(0, p.position(i), p))) for i in mask}
    assert len(lines) == K
    with pytest.raises(ValueError):
        ldc.corrupt(c, 0.1, rng, mode="bogus")


def test_single_error_decoding_rate():
    # one corrupted symbol spoils exactly the lines through it
    p = ldc.code_params(constructions.standard_family(3, 3))
    x = [1, 2, 3]
    c = ldc.encode(x, p)
    word = list(c.values)
    word[5] = (word[5] + 1) % p.P
    for i in range(p.k):
        bad = sum(ldc.local_decode(i, word.__getitem__, p, w) != x[i]
                  for w in itertools.product(range(3), repeat=3))
        assert bad == 3     # one bad start per point of the line through position 5


def test_rate_experiment_reproducible():
    p = ldc.code_params(constructions.standard_family(2, 8))
    a = ldc.rate_experiment(p, 0.05, 2000, 9)
    b = ldc.rate_experiment(p, 0.05, 2000, 9)
    assert a.dumps() == b.dumps()
    assert a.rate >= a.floor - 3 * a.sigma
    assert ldc.rate_experiment(p, 0.05, 2000, 10).dumps() != a.dumps()
    assert ldc.rate_experiment(p, 0.0, 200, 1).rate == 1.0


def test_trial_rng_independent_of_order():
    a = ldc.trial_rng(3, 7).integers(0, 10**9, size=4)
    ldc.trial_rng(3, 6).integers(0, 10**9, size=4)
    assert (ldc.trial_rng(3, 7).integers(0, 10**9, size=4) == a).all()
