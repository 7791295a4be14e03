import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from mvfam import linalg
from mvfam.linalg import ZmMatrix

from oracles import brute_rank, colspan_size as oracle_colspan


@st.composite
def matrices(draw, ms=(2, 3, 4, 6, 12), max_dim=4):
    m = draw(st.sampled_from(ms))
    t = draw(st.integers(1, max_dim))
    s = draw(st.integers(1, max_dim))
    rows = [[draw(st.integers(0, m - 1)) for _ in range(s)] for _ in range(t)]
    return ZmMatrix.of(rows, m, s)


def test_rank_examples():
    M = ZmMatrix.of([[4, 0], [0, 3]], 6)
    sf = linalg.smith_form(M)
    assert sf.D == (1, 0)
    assert linalg.colspan_size(M) == 6
    assert linalg.rank(M) == 1
    assert linalg.colspan_size(ZmMatrix.of([[2], [0]], 6)) == 3
    assert linalg.colrank(ZmMatrix.of([[2], [0]], 6)) == pytest.approx(math.log(3, 6))


def test_rank_over_prime_power_components():
    # diag(2, 3) over Z_6: rank 1 in both components
    assert linalg.rank(ZmMatrix.of([[2, 0], [0, 3]], 6)) == 1
    assert linalg.rank(ZmMatrix.of([[1, 0], [0, 2]], 4)) == 2
    assert linalg.rank(ZmMatrix.zeros(3, 3, 6)) == 0
    assert linalg.rank(ZmMatrix.identity(3, 12)) == 3


def test_block_triangular_example():
    M = ZmMatrix.of([[4, 0], [1, 3]], 12)
    assert linalg.block_colrank_check(M)


def test_spanning_columns():
    M = ZmMatrix.of([[1, 2, 3], [0, 0, 0]], 6)
    idx = linalg.spanning_columns(M)
    sub = M.submatrix([0, 1], idx)
    assert linalg.colspan_size(sub) == linalg.colspan_size(M)
    # minimal: dropping any chosen column shrinks the span
    for k in idx:
        rest = [c for c in idx if c != k]
        assert not rest or linalg.colspan_size(M.submatrix([0, 1], rest)) < linalg.colspan_size(M)
    assert len(idx) <= linalg.rank(M) * math.log2(M.m)


def test_find_zero_principal_outer_product():
    # P = u u^T mod 2 with u alternating: rows in the same class share the
    # pattern, and the zero-pattern indices form an all-zero block
    u = [1, 0, 1, 0, 0, 1]
    P = ZmMatrix.of([[a * b for b in u] for a in u], 6)
    P = ZmMatrix.of([[0 if i == j else P.entries[i][j] for j in range(6)] for i in range(6)], 6)
    idx = linalg.find_zero_principal_submatrix(P, 2)
    assert len(idx) >= 6 / 36
    assert all(P.entries[i][j] % 2 == 0 for i in idx for j in idx)


def test_json_roundtrip():
    M = ZmMatrix.of([[1, 2], [3, 4]], 5)
    assert ZmMatrix.from_json(M.to_json()) == M


def test_bad_entries_rejected():
    with pytest.raises(ValueError):
        ZmMatrix.of([[1, 2], [3]], 5)


@given(matrices())
@settings(max_examples=200)
def test_smith_form_identity(M):
    sf = linalg.smith_form(M)
    t, s = M.shape
    assert sf.U_left @ M @ sf.V_right == sf.diagonal(t, s)
    assert sf.U_left @ sf.U_inv == ZmMatrix.identity(t, M.m)
    assert sf.V_right @ sf.V_inv == ZmMatrix.identity(s, M.m)
    D = [d for d in sf.D if d]
    assert all(b % a == 0 for a, b in zip(D, D[1:]))
    assert all(M.m % d == 0 for d in D)


@given(matrices())
@settings(max_examples=200)
def test_rank_factorization_witness(M):
    A, B = linalg.rank_factorization(M)
    r = linalg.rank(M)
    assert A.shape == (M.shape[0], r) and B.shape == (r, M.shape[1])
    assert linalg.matmul(A, B) == M


@given(matrices(ms=(2, 3, 4, 6), max_dim=3))
@settings(max_examples=150)
def test_against_brute_force(M):
    assert linalg.rank(M) == brute_rank(M.entries, M.m)
    assert linalg.colspan_size(M) == oracle_colspan(M.entries, M.m)


@given(matrices())
def test_sandwich_and_transpose(M):
    rep = linalg.rank_report(M)
    assert rep.sandwich_holds()
    assert linalg.rank(M.transpose()) == rep.rank
    assert linalg.colspan_size(M.transpose()) == rep.colspan_size


@given(matrices(ms=(4, 6, 12), max_dim=3), st.data())
def test_subadditivity(M, data):
    t, s = M.shape
    B = ZmMatrix.of([[data.draw(st.integers(0, M.m - 1)) for _ in range(s)] for _ in range(t)], M.m, s)
    assert linalg.colspan_size(M + B) <= linalg.colspan_size(M) * linalg.colspan_size(B)


@given(matrices(ms=(4, 6, 12)), st.data())
def test_reduction_never_raises_rank(M, data):
    s = data.draw(st.sampled_from([d for d in range(2, M.m + 1) if M.m % d == 0]))
    assert linalg.rank(M.reduce(s)) <= linalg.rank(M)


def test_colrank_leq():
    M = ZmMatrix.identity(3, 6)
    assert linalg.colrank_leq(M, 3) and not linalg.colrank_leq(M, 2)


def test_random_large_smith():
    rng = random.Random(1)
    for m in (30, 36, 210):
        M = ZmMatrix.of([[rng.randrange(m) for _ in range(7)] for _ in range(6)], m, 7)
        sf = linalg.smith_form(M)
        assert sf.U_left @ M @ sf.V_right == sf.diagonal(6, 7)
        assert math.prod(sf.orders()) == linalg.colspan_size(M)
