"""Tests for moment reports, uncertainty relations, and free evolution."""

import json

import numpy as np
import pytest

from qdesk.moments import (
    FreeMoments,
    MomentReport,
    covariance_sign_change_time,
    entropy,
    expectation,
    free_moment_evolution,
    gibbs_state,
    luders_collapse,
    moments,
    purification_roundtrip,
    purify,
)
from qdesk.operators import DensityOperator, HermitianOperator


def random_density(dim, rng):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    m = g @ g.conj().T
    m /= np.trace(m).real
    return DensityOperator(HermitianOperator((m + m.conj().T) / 2))


def random_hermitian(dim, rng):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return HermitianOperator((g + g.conj().T) / 2)


class TestExpectation:
    def test_expectation_of_identity(self):
        rng = np.random.default_rng(1)
        w = random_density(4, rng)
        assert abs(expectation(w, HermitianOperator(np.eye(4))) - 1.0) < 1e-12

    def test_expectation_linear(self):
        rng = np.random.default_rng(2)
        w = random_density(3, rng)
        a, b = random_hermitian(3, rng), random_hermitian(3, rng)
        lhs = expectation(w, HermitianOperator(a.matrix + b.matrix))
        assert abs(lhs - expectation(w, a) - expectation(w, b)) < 1e-12


class TestRobertsonSchroedinger:
    def test_fuzz_inequality_holds(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            dim = int(rng.integers(2, 7))
            w = random_density(dim, rng)
            a, b = random_hermitian(dim, rng), random_hermitian(dim, rng)
            rep = moments(w, a, b)
            assert rep.inin_lhs >= rep.inin_rhs - 1e-9

    def test_pure_gaussian_like_qubit_saturation(self):
        # spin coherent state saturates the relation for Sx, Sy
        v = np.array([1.0, 0.0])
        w = DensityOperator(HermitianOperator(np.outer(v, v)))
        sx = HermitianOperator(np.array([[0, 1], [1, 0]], dtype=complex) / 2)
        sy = HermitianOperator(np.array([[0, -1j], [1j, 0]], dtype=complex) / 2)
        rep = moments(w, sx, sy)
        assert abs(rep.inin_lhs - rep.inin_rhs) < 1e-12

    def test_report_json_fields(self):
        rng = np.random.default_rng(6)
        w = random_density(3, rng)
        rep = moments(w, random_hermitian(3, rng), random_hermitian(3, rng))
        d = json.loads(rep.to_json())
        for key in ("mean_a", "mean_b", "var_a", "var_b", "covariance",
                    "correlation", "commutator_expectation",
                    "inin_lhs", "inin_rhs"):
            assert key in d

    def test_report_rejects_violation(self):
        with pytest.raises(ValueError):
            MomentReport(mean_a=0.0, mean_b=0.0, var_a=0.1, var_b=0.1,
                         covariance=0.0, correlation=0.0,
                         commutator_expectation=1.0,
                         inin_lhs=0.01, inin_rhs=0.25)


class TestEntropyAndGibbs:
    def test_entropy_of_pure_state_zero(self):
        v = np.array([1.0, 1j]) / np.sqrt(2)
        w = DensityOperator(HermitianOperator(np.outer(v, v.conj())))
        assert abs(entropy(w)) < 1e-12

    def test_entropy_of_maximally_mixed(self):
        w = DensityOperator(HermitianOperator(np.eye(4) / 4))
        assert abs(entropy(w) - np.log(4)) < 1e-12

    def test_gibbs_state_two_level(self):
        h = HermitianOperator(np.diag([0.0, 1.0]))
        beta = 1.3
        w = gibbs_state(h, beta)
        z = 1 + np.exp(-beta)
        assert abs(w.matrix[0, 0].real - 1 / z) < 1e-12
        assert abs(w.matrix[1, 1].real - np.exp(-beta) / z) < 1e-12


class TestCollapse:
    def test_luders_on_diagonal_state(self):
        w = DensityOperator(HermitianOperator(np.diag([0.25, 0.75])))
        e = np.diag([1.0, 0.0]).astype(complex)
        post = luders_collapse(w, e)
        assert np.max(np.abs(post.matrix - np.diag([1.0, 0.0]))) < 1e-12

    def test_luders_impossible_outcome_raises(self):
        v = np.array([1.0, 0.0])
        w = DensityOperator(HermitianOperator(np.outer(v, v)))
        e = np.diag([0.0, 1.0]).astype(complex)
        with pytest.raises(ValueError):
            luders_collapse(w, e)


class TestPurification:
    def test_roundtrip_fuzz(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            dim = int(rng.integers(2, 6))
            w = random_density(dim, rng)
            assert purification_roundtrip(w) < 1e-10

    def test_purified_vector_is_normalized(self):
        rng = np.random.default_rng(10)
        w = random_density(3, rng)
        psi = purify(w)
        assert abs(np.vdot(psi, psi).real - 1.0) < 1e-12


class TestFreeEvolution:
    def test_kennard_invariant_enforced(self):
        with pytest.raises(ValueError):
            FreeMoments(var_q=0.1, var_p=0.1, cov_pq=0.0, mass=1.0, hbar=1.0)

    def test_moment_evolution_closed_form(self):
        m0 = FreeMoments(var_q=0.5, var_p=0.7, cov_pq=-0.2, mass=2.0, hbar=1.0)
        t = 1.7
        mt = free_moment_evolution(m0, t)
        assert abs(mt.var_p - m0.var_p) < 1e-14
        assert abs(mt.cov_pq - (m0.cov_pq + t * m0.var_p / m0.mass)) < 1e-14
        expected_q = m0.var_q + 2 * t * m0.cov_pq / m0.mass + t * t * m0.var_p / m0.mass ** 2
        assert abs(mt.var_q - expected_q) < 1e-14

    def test_sign_change_time(self):
        m0 = FreeMoments(var_q=1.0, var_p=0.5, cov_pq=-0.3, mass=1.5, hbar=1.0)
        tc = covariance_sign_change_time(m0)
        assert abs(tc - 1.5 * 0.3 / 0.5) < 1e-14
        assert abs(free_moment_evolution(m0, tc).cov_pq) < 1e-14
