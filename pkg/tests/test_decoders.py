import itertools
import math

import numpy as np
import pytest

from treetast.algebra import make_constellation
from treetast.channel import (composite_matrix, composite_structure,
                              sample_channel, snr_to_noise_var, transmit,
                              trial_rng)
from treetast.decoders import (DetectionProblem, babai_decode, fano_decode,
                               ml_exhaustive, sphere_decode)
from treetast.encoder import equivalent_matrix, make_code_params
from treetast.errors import InvalidInput, Refused, ShapeError
from treetast.qr import givens_qr

RNG = np.random.default_rng(101)


def brute_oracle(problem):
    """independent ML: nested loops, scalar arithmetic, same tie-break"""
    pts = problem.constellation.points_array()
    best, best_m = None, math.inf
    for combo in itertools.product(range(pts.size), repeat=problem.K):
        u = np.array([pts[c] for c in combo])
        m = float(np.sum(np.abs(problem.z - problem.R @ u) ** 2))
        if m < best_m:
            best_m, best = m, u
    return best, best_m


def random_problem(K, const_name, noise_scale, rng=RNG):
    R = np.triu(rng.normal(size=(K, K)) + 1j * rng.normal(size=(K, K)))
    for i in range(K):
        R[i, i] = abs(R[i, i]) + 0.3
    const = make_constellation(const_name)
    pts = const.points_array()
    u = pts[rng.integers(0, pts.size, K)]
    z = R @ u + noise_scale * (rng.normal(size=K) + 1j * rng.normal(size=K))
    return DetectionProblem(R=R, z=z, constellation=const)


def pipeline_problem(params, snr_db, trial, seed=77):
    E = equivalent_matrix(params)
    H = sample_channel(trial_rng(seed, trial, 0), params.N, params.M).H
    comp = composite_matrix(H, E.G)
    cs = composite_structure(E.structure, params.M, params.N)
    pts = params.constellation.points_array()
    u = pts[trial_rng(seed, trial, 2).integers(0, pts.size, params.K)]
    nv = snr_to_noise_var(params, snr_db)
    rb = transmit(params, H, u, nv, trial_rng(seed, trial, 1))
    res = givens_qr(comp, cs, rb.y)
    return DetectionProblem(res.R, res.Q_applied_y[:params.K],
                            params.constellation), u, nv


def test_ml_matches_independent_oracle():
    for const_name, K in (("bpsk", 5), ("qam4", 3)):
        for t in range(10):
            prob = random_problem(K, const_name, 0.8)
            rep = ml_exhaustive(prob)
            u_ref, m_ref = brute_oracle(prob)
            np.testing.assert_array_equal(rep.u_hat, u_ref)
            assert rep.metric == pytest.approx(m_ref, abs=1e-9)
            assert rep.is_ml
            assert rep.nodes_visited == prob.constellation.order ** K


def test_sphere_equals_ml():
    for const_name, K in (("bpsk", 6), ("qam4", 4), ("qam16", 3)):
        A = make_constellation(const_name).order
        for t in range(30):
            prob = random_problem(K, const_name, 0.7)
            ml = ml_exhaustive(prob)
            sp = sphere_decode(prob)
            np.testing.assert_array_equal(sp.u_hat, ml.u_hat)
            assert sp.metric == pytest.approx(ml.metric, abs=1e-9)
            assert sp.is_ml
            assert 0 < sp.nodes_visited <= sum(A ** k for k in range(1, K + 1))


def test_sphere_cheaper_at_high_snr():
    p = make_code_params(2, 2, constellation="bpsk")
    nodes_hi, nodes_lo = [], []
    for t in range(50):
        hi, _, _ = pipeline_problem(p, 20.0, t)
        lo, _, _ = pipeline_problem(p, 0.0, t)
        nodes_hi.append(sphere_decode(hi).nodes_visited)
        nodes_lo.append(sphere_decode(lo).nodes_visited)
    assert np.mean(nodes_hi) < np.mean(nodes_lo)
    assert np.mean(nodes_hi) < 2 ** p.K


def test_ml_tie_break_lexicographic():
    const = make_constellation("bpsk")
    prob = DetectionProblem(np.eye(3, dtype=complex), np.zeros(3), const)
    rep = ml_exhaustive(prob)
    np.testing.assert_array_equal(rep.u_hat, np.full(3, const.points_array()[0]))


def test_ml_guard_refuses_large_spaces():
    prob = random_problem(8, "qam16", 0.5)      # 16^8 = 2^32
    with pytest.raises(Refused):
        ml_exhaustive(prob)


def test_noiseless_recovery_all_decoders():
    for const_name in ("bpsk", "qam4"):
        p = make_code_params(2, 1, constellation=const_name)
        for t in range(10):
            E = equivalent_matrix(p)
            H = sample_channel(trial_rng(5, t, 0), 2, 2).H
            comp = composite_matrix(H, E.G)
            cs = composite_structure(E.structure, 2, 2)
            pts = p.constellation.points_array()
            u = pts[trial_rng(5, t, 2).integers(0, pts.size, p.K)]
            rb = transmit(p, H, u, 0.0, trial_rng(5, t, 1))
            res = givens_qr(comp, cs, rb.y)
            prob = DetectionProblem(res.R, res.Q_applied_y[:p.K], p.constellation)
            np.testing.assert_array_equal(sphere_decode(prob).u_hat, u)
            np.testing.assert_array_equal(babai_decode(prob).u_hat, u)
            np.testing.assert_array_equal(
                fano_decode(prob, bias=0.1, step_delta=0.5).u_hat, u)


def test_babai_metric_at_least_ml():
    for t in range(40):
        prob = random_problem(5, "bpsk", 1.0)
        bab = babai_decode(prob)
        ml = ml_exhaustive(prob)
        assert bab.metric >= ml.metric - 1e-12
        assert bab.nodes_visited == prob.K
        assert not bab.is_ml


def test_fano_high_snr_agreement():
    p = make_code_params(2, 0, constellation="bpsk")
    agree = 0
    n = 400
    for t in range(n):
        prob, _, nv = pipeline_problem(p, 14.0, t)
        fa = fano_decode(prob, bias=nv, step_delta=nv)
        ml = ml_exhaustive(prob)
        assert not fa.is_ml
        assert fa.metric == pytest.approx(
            float(np.linalg.norm(prob.z - prob.R @ fa.u_hat) ** 2), rel=1e-9)
        if np.array_equal(fa.u_hat, ml.u_hat):
            agree += 1
    assert agree >= 0.95 * n


def test_fano_parameter_validation():
    prob = random_problem(3, "bpsk", 0.5)
    with pytest.raises(InvalidInput):
        fano_decode(prob, bias=0.0, step_delta=1.0)
    with pytest.raises(InvalidInput):
        fano_decode(prob, bias=1.0, step_delta=-1.0)


def test_detection_problem_validation():
    const = make_constellation("bpsk")
    with pytest.raises(ShapeError):
        DetectionProblem(np.ones((3, 2)), np.ones(3), const)
    with pytest.raises(ShapeError):
        DetectionProblem(np.eye(3), np.ones(2), const)


def test_reports_carry_metric_consistent_with_u_hat():
    prob = random_problem(4, "qam4", 0.6)
    for rep in (ml_exhaustive(prob), sphere_decode(prob), babai_decode(prob)):
        direct = float(np.linalg.norm(prob.z - prob.R @ rep.u_hat) ** 2)
        assert rep.metric == pytest.approx(direct, rel=1e-9)
