import math
from fractions import Fraction

import numpy as np
import pytest

from treetast.algebra import GoldenParams, golden_generator, principal_power
from treetast.encoder import (ORIGINAL, TREE, code_rate, encode,
                              encode_constituent, encode_original,
                              encode_tail_cut, encode_tree_tast,
                              equivalent_matrix, make_code_params,
                              symbol_schedule)
from treetast.errors import EncodeError, InvalidInput

GP = GoldenParams()
A, SA, TH, STH = GP.alpha, GP.sigma_alpha, GP.theta, GP.sigma_theta
S5 = math.sqrt(5)
SPHI = principal_power(1j, 0.5)
RNG = np.random.default_rng(42)


def cvec(S):
    return S.flatten(order="F")


def rand_u(K):
    return RNG.normal(size=K) + 1j * RNG.normal(size=K)


def test_shapes_and_sizes():
    for M in (1, 2, 3, 4):
        for L in (0, 1, 3):
            p = make_code_params(M, L)
            assert p.K == M * (M + L)
            assert p.T == 2 * M + L - 1
            pc = make_code_params(M, L, tail_cut=True)
            assert pc.K == p.K and pc.T == M + L
            po = make_code_params(M, L, family=ORIGINAL)
            assert po.K == M * (M + L) and po.T == M + L


def test_rate_fractions_exact():
    assert code_rate(make_code_params(2, 0)) == Fraction(4, 3)
    assert code_rate(make_code_params(2, 1)) == Fraction(3, 2)
    assert code_rate(make_code_params(3, 1)) == Fraction(2, 1)
    assert code_rate(make_code_params(2, 0, tail_cut=True)) == Fraction(2, 1)


def test_golden_2x2_codeword_entries():
    """(M=2, L=0) tree codeword against its printed closed form."""
    p = make_code_params(2, 0)
    u = rand_u(4)
    u1, u2, u3, u4 = u
    expected = np.array([
        [A * u1,        SPHI * SA * (u2 + STH * u3), A * TH * u4],
        [SPHI * A * u2, SA * (u1 + STH * u4),        SPHI * A * TH * u3],
    ]) / S5
    got = encode_tree_tast(p, u).entries
    np.testing.assert_allclose(got, expected, atol=1e-14)


def test_golden_2x2_equivalent_matrix_entries():
    """(M=2, L=0) equivalent matrix against its printed 6x4 form (with the
    thread scale present on every thread-2 entry)."""
    p = make_code_params(2, 0)
    E = equivalent_matrix(p)
    expected = np.array([
        [A,    0,          0,                  0],
        [0,    SPHI * A,   0,                  0],
        [0,    SPHI * SA,  SPHI * SA * STH,    0],
        [SA,   0,          0,                  SA * STH],
        [0,    0,          0,                  A * TH],
        [0,    0,          SPHI * A * TH,      0],
    ]) / S5
    np.testing.assert_allclose(E.G, expected, atol=1e-12)
    np.testing.assert_array_equal(E.structure, expected != 0)
    # zeros are structural, not small
    assert np.all(E.G[~E.structure] == 0)


def test_golden_2x4_codeword_entries():
    """(M=2, L=1) tree codeword: middle columns mix adjacent window symbols."""
    p = make_code_params(2, 1)
    u = rand_u(6)
    v1, v2, v3, v4, v5, v6 = u
    expected = np.array([
        [A * v1,        SPHI * SA * (v2 + STH * v3), A * (v4 + TH * v5),        SPHI * SA * STH * v6],
        [SPHI * A * v2, SA * (v1 + STH * v4),        SPHI * A * (v3 + TH * v6), SA * STH * v5],
    ]) / S5
    got = encode_tree_tast(p, u).entries
    np.testing.assert_allclose(got, expected, atol=1e-14)


def test_generic_3x6_codeword_entries():
    """(M=3, L=1): every thread is the symbol stream convolved with
    (1, theta, theta^2), threads separated by phi^((j-1)/3)."""
    p = make_code_params(3, 1)
    t3 = p.theta
    f13 = principal_power(p.phi, 1 / 3)
    f23 = principal_power(p.phi, 2 / 3)
    w = rand_u(12)
    (w1, w2, w3, w4, w5, w6, w7, w8, w9, w10, w11, w12) = w
    expected = np.array([
        [w1,         f23 * (w4 + t3 * w3),  f13 * (w7 + t3 * w6 + t3 ** 2 * w2), w10 + t3 * w9 + t3 ** 2 * w5,         f23 * (t3 * w12 + t3 ** 2 * w8), f13 * t3 ** 2 * w11],
        [f13 * w2,   w5 + t3 * w1,          f23 * (w8 + t3 * w4 + t3 ** 2 * w3), f13 * (w11 + t3 * w7 + t3 ** 2 * w6), t3 * w10 + t3 ** 2 * w9,         f23 * t3 ** 2 * w12],
        [f23 * w3,   f13 * (w6 + t3 * w2),  w9 + t3 * w5 + t3 ** 2 * w1,         f23 * (w12 + t3 * w8 + t3 ** 2 * w4), f13 * (t3 * w11 + t3 ** 2 * w7), t3 ** 2 * w10],
    ])
    got = encode_tree_tast(p, w).entries
    np.testing.assert_allclose(got, expected, atol=1e-13)


def test_constituent_golden_single_symbol():
    p = make_code_params(2, 0)
    got = encode_constituent(p, [1, 0, 0, 0]).entries
    np.testing.assert_allclose(got, np.array([[A, 0], [0, SA]]) / S5, atol=1e-14)


def test_constituent_matches_golden_generator():
    p = make_code_params(2, 0)
    G4 = golden_generator()
    for _ in range(5):
        u = rand_u(4)
        np.testing.assert_allclose(G4 @ u, cvec(encode_constituent(p, u).entries),
                                   atol=1e-13)


def test_constituent_generic_full_columns():
    # circulant mixing: every thread-j cell carries all M of its slots
    p = make_code_params(3, 0)
    word = encode_constituent(p, np.ones(9)).entries
    assert np.all(word != 0)
    gen_sum = 1 + p.theta + p.theta ** 2
    assert word[0, 0] == pytest.approx(gen_sum)


def test_m1_equivalent_matrix_is_identity():
    p = make_code_params(1, 4)
    E = equivalent_matrix(p)
    np.testing.assert_allclose(E.G, np.eye(5), atol=1e-15)


def test_equivalent_matrix_consistency_grid():
    """direct encoding and G @ u agree for every family, size, tail flag."""
    for fam in (TREE, ORIGINAL):
        for M in (1, 2, 3, 4):
            for L in (0, 1, 2, 3):
                for tc in ((False, True) if fam == TREE else (False,)):
                    p = make_code_params(M, L, family=fam, tail_cut=tc)
                    E = equivalent_matrix(p)
                    u = rand_u(p.K)
                    S = encode(p, u).entries
                    assert S.shape == (M, p.T)
                    np.testing.assert_allclose(E.G @ u, cvec(S), atol=1e-12)
                    assert np.all(E.G[~E.structure] == 0)
                    assert np.all(E.G[E.structure] != 0)


def test_tree_leading_rows_echelon():
    for M in (1, 2, 3, 4):
        for L in (0, 2, 5):
            E = equivalent_matrix(make_code_params(M, L))
            np.testing.assert_array_equal(E.leading_rows(), np.arange(M * (M + L)))


def test_tree_column_support_counts():
    # every symbol appears exactly M times in the terminated tree code
    for M, L in ((2, 3), (3, 1), (4, 0)):
        E = equivalent_matrix(make_code_params(M, L))
        np.testing.assert_array_equal(E.structure.sum(axis=0), np.full(M * (M + L), M))


def test_tail_cut_truncates_terminated_codeword():
    for M, L in ((2, 1), (3, 2)):
        full = make_code_params(M, L)
        cut = make_code_params(M, L, tail_cut=True)
        u = rand_u(full.K)
        S_full = encode_tree_tast(full, u).entries
        S_cut = encode_tail_cut(cut, u).entries
        np.testing.assert_allclose(S_cut, S_full[:, :M + L], atol=1e-14)
        E_full = equivalent_matrix(full)
        E_cut = equivalent_matrix(cut)
        np.testing.assert_allclose(E_cut.G, E_full.G[:M * (M + L), :], atol=1e-15)


def test_same_thread_column_norms_generic():
    # with a unimodular generator every symbol of a thread carries equal energy
    for M, L in ((3, 0), (3, 2), (4, 1)):
        p = make_code_params(M, L)
        E = equivalent_matrix(p)
        sched = symbol_schedule(p)
        norms = np.linalg.norm(E.G, axis=0)
        for j in range(1, M + 1):
            cols = [k for k in range(p.K) if sched.thread[k] == j]
            np.testing.assert_allclose(norms[cols], norms[cols[0]], atol=1e-12)


def test_same_thread_column_norms_golden_l0():
    E = equivalent_matrix(make_code_params(2, 0))
    norms = np.linalg.norm(E.G, axis=0)
    np.testing.assert_allclose(norms, norms[0], atol=1e-12)


def test_linearity():
    p = make_code_params(2, 2)
    u, v = rand_u(p.K), rand_u(p.K)
    a, b = 0.7 - 0.2j, -1.1 + 0.4j
    S = encode(p, a * u + b * v).entries
    np.testing.assert_allclose(
        S, a * encode(p, u).entries + b * encode(p, v).entries, atol=1e-12)


def test_original_unit_column_norms():
    E = equivalent_matrix(make_code_params(2, 4, family=ORIGINAL))
    np.testing.assert_allclose(np.linalg.norm(E.G, axis=0), 1.0, atol=1e-12)


def test_original_reduces_to_constituent_at_l0():
    p = make_code_params(3, 0, family=ORIGINAL)
    assert p.T == 3 and p.K == 9
    word = encode_original(p, rand_u(9)).entries
    assert word.shape == (3, 3)
    assert np.all(word != 0)


def test_schedule_entry_columns_canonical():
    # canonical numbering introduces M fresh symbols per entry column
    for M, L in ((2, 1), (3, 2)):
        p = make_code_params(M, L)
        sched = symbol_schedule(p)
        for k in range(1, p.K + 1):
            assert sched.entry_column(k) == (k - 1) // M
            assert len(sched.appearances[k - 1]) == M


def test_input_validation():
    p = make_code_params(2, 0)
    with pytest.raises(EncodeError):
        encode(p, [1, 2, 3])
    with pytest.raises(InvalidInput):
        make_code_params(0, 1)
    with pytest.raises(InvalidInput):
        make_code_params(2, -1)
    with pytest.raises(InvalidInput):
        make_code_params(2, 1, family="nonesuch")
    with pytest.raises(InvalidInput):
        make_code_params(2, 1, family=ORIGINAL, tail_cut=True)
    with pytest.raises(InvalidInput):
        encode_tail_cut(make_code_params(2, 1), rand_u(6))
