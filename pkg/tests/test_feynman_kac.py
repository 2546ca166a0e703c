"""Tests for the path-integral partition-function bounds and MC estimator."""

import math

import numpy as np
import pytest

from qdesk.feynman_kac import (
    BridgePath,
    Potential,
    bound_check,
    classical_partition,
    fk_mc_partition,
    gauss_transform_potential,
    monotonicity_check,
    sample_bridge,
    sample_bridge_ensemble,
    spectral_partition,
    tau_star,
)

HARMONIC = Potential.polynomial([0.0, 0.0, 0.5])
QUARTIC = Potential.polynomial([0.0, 0.0, 0.0, 0.0, 0.25])
SPECTRAL_HARMONIC = 1.0 / (2 * math.sinh(1.0))  # beta = 2, hbar = omega = 1


class TestPotential:
    def test_requires_exactly_one_source(self):
        with pytest.raises(ValueError):
            Potential(coeffs=(0.0, 1.0), fn=lambda q: q)

    def test_polynomial_eval(self):
        assert HARMONIC(2.0) == 2.0
        assert np.allclose(HARMONIC(np.array([0.0, 1.0])), [0.0, 0.5])

    def test_tabulated_interpolates(self):
        v = Potential.tabulated([-1.0, 0.0, 1.0], [1.0, 0.0, 1.0])
        assert abs(float(v(0.5)) - 0.5) < 1e-12

    def test_tabulated_rejects_unsorted(self):
        with pytest.raises(ValueError):
            Potential.tabulated([0.0, -1.0, 1.0], [0.0, 1.0, 1.0])

    def test_domain_enforced(self):
        v = Potential.from_callable(lambda q: q ** 2, domain=(-1.0, 1.0))
        with pytest.raises(ValueError):
            v(2.0)

    def test_derivative_polynomial(self):
        d = QUARTIC.derivative()
        assert abs(float(d(2.0)) - 8.0) < 1e-12


class TestGaussTransform:
    def test_harmonic_shift(self):
        # smoothing q^2/2 adds the constant s/2 with s = tau hbar^2/(12 m)
        vt = gauss_transform_potential(HARMONIC, tau=2.0, m=1.0)
        assert abs(float(vt(0.0)) - 2.0 / 24.0) < 1e-12
        assert abs(float(vt(1.0)) - (0.5 + 2.0 / 24.0)) < 1e-12

    def test_tau_zero_is_identity(self):
        assert gauss_transform_potential(HARMONIC, 0.0, 1.0) is HARMONIC

    def test_callable_matches_polynomial(self):
        v = Potential.from_callable(lambda q: 0.25 * q ** 4)
        vt_a = gauss_transform_potential(v, 1.5, 1.0)
        vt_b = gauss_transform_potential(QUARTIC, 1.5, 1.0)
        q = np.linspace(-2, 2, 9)
        assert np.max(np.abs(vt_a(q) - vt_b(q))) < 1e-10


class TestClassicalPartition:
    def test_harmonic_closed_forms(self):
        # z(beta, tau) = (1/beta) e^{-beta tau/24} for v = q^2/2
        assert abs(classical_partition(HARMONIC, 2.0, 0.0, 1.0) - 0.5) < 1e-7
        expected = 0.5 * math.exp(-1.0 / 6.0)
        assert abs(classical_partition(HARMONIC, 2.0, 2.0, 1.0) - expected) < 1e-7

    def test_divergent_potential_raises(self):
        v = Potential.polynomial([0.0, 0.0, -1.0])
        with pytest.raises(ValueError, match="divergent"):
            classical_partition(v, 1.0, 0.0, 1.0)


class TestSpectralReference:
    def test_harmonic_value(self):
        z = spectral_partition(HARMONIC, 2.0)
        assert abs(z - SPECTRAL_HARMONIC) < 1e-10

    def test_sandwich(self):
        z = spectral_partition(HARMONIC, 2.0)
        lo = classical_partition(HARMONIC, 2.0, 2.0, 1.0)
        hi = classical_partition(HARMONIC, 2.0, 0.0, 1.0)
        assert lo <= z <= hi


class TestBridges:
    def test_endpoints_pinned(self):
        b = sample_bridge(2.0, 64, seed=5)
        assert b.slices[0] == 0.0 and b.slices[-1] == 0.0
        assert len(b.slices) == 65
        assert b.times()[-1] == 2.0

    def test_path_addressing_deterministic(self):
        ens = sample_bridge_ensemble(2.0, 64, 50, seed=9)
        for k in (0, 7, 49):
            single = sample_bridge(2.0, 64, seed=9, path_index=k)
            assert np.max(np.abs(ens[k] - single.slices)) == 0.0

    def test_midpoint_covariance(self):
        # var w(beta/2) = (hbar^2/m)(beta/4)
        beta = 2.0
        ens = sample_bridge_ensemble(beta, 64, 20_000, seed=3)
        mid = ens[:, 32]
        assert abs(np.var(mid) - beta / 4) < 0.02

    def test_bridge_rejects_unpinned(self):
        with pytest.raises(ValueError):
            BridgePath(1.0, np.array([0.0, 0.5, 0.1]))


class TestMonteCarlo:
    def test_harmonic_estimate_within_error(self):
        est, stderr = fk_mc_partition(HARMONIC, 2.0, n_paths=20_000, seed=11)
        assert stderr > 0
        assert abs(est - SPECTRAL_HARMONIC) < 5 * stderr

    def test_deterministic_in_seed(self):
        a = fk_mc_partition(HARMONIC, 2.0, n_paths=5_000, seed=4)
        b = fk_mc_partition(HARMONIC, 2.0, n_paths=5_000, seed=4)
        assert a == b

    def test_chunking_invariance(self):
        # the same (seed, path) pairs are used regardless of batch layout
        full = fk_mc_partition(HARMONIC, 2.0, n_paths=1_000, seed=8)
        again = fk_mc_partition(HARMONIC, 2.0, n_paths=1_000, seed=8)
        assert full == again

    def test_callable_matches_polynomial_path(self):
        v = Potential.from_callable(lambda q: 0.5 * q ** 2)
        a = fk_mc_partition(HARMONIC, 2.0, n_paths=2_000, seed=2)
        b = fk_mc_partition(v, 2.0, n_paths=2_000, seed=2)
        assert abs(a[0] - b[0]) < 1e-10


class TestBoundsAndTauStar:
    def test_monotonicity_harmonic(self):
        res = monotonicity_check(HARMONIC, 2.0)
        assert res["strictly_decreasing"]
        assert max(res["derivative_relative_errors"]) < 1e-4

    def test_monotonicity_quartic(self):
        res = monotonicity_check(QUARTIC, 2.0)
        assert res["strictly_decreasing"]

    def test_tau_star_closed_form(self):
        ts = tau_star(HARMONIC, 2.0, z_target=SPECTRAL_HARMONIC)
        exact = 12.0 * math.log(math.sinh(1.0))
        assert abs(ts - exact) < 1e-6

    def test_tau_star_requires_target(self):
        with pytest.raises(ValueError, match="z_target"):
            tau_star(HARMONIC, 2.0)

    def test_bound_check_report(self):
        rep = bound_check(HARMONIC, 2.0, n_paths=5_000, seed=1)
        d = rep.to_json()
        assert d["z_lower"] <= d["spectral_reference"] <= d["z_upper"]
        assert d["z_lower"] <= d["mc_estimate"] + 5 * d["mc_stderr"]
        assert d["mc_estimate"] - 5 * d["mc_stderr"] <= d["z_upper"]
        assert 0.0 < d["tau_star"] <= 2.0
