"""Spin-1/2 algebra on C^2: Pauli triple, Bloch decompositions, the
projection family, sphere-measure probability assignments, and the
Bell-1966 hidden-variable model.

The spin components here are the dimensionless Pauli matrices (the hbar/2
factor is stripped off), matching their use in the Bell/contextuality
modules.  sgn(0) := 1 throughout; the boundary branch is test-pinned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .operators import HermitianOperator

__all__ = [
    "SX", "SY", "SZ", "PAULI",
    "SpinObservable", "BlochState", "SphereMeasureFn",
    "spin_matrix", "spin_decompose", "pauli_product", "projection_e",
    "measure_eval", "hv_value", "hv_expectation", "hv_consistency",
    "sample_sphere", "linear_fit_residual",
]

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]], dtype=complex)
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SX, SY, SZ)
_ID2 = np.eye(2, dtype=complex)


def _sgn(x: float) -> float:
    """Sign with the convention sgn(0) = 1."""
    return 1.0 if x >= 0 else -1.0


@dataclass(frozen=True)
class SpinObservable:
    """A = a0*I + a.S, the general 2x2 Hermitian observable."""

    a0: float
    a_vec: tuple[float, float, float]

    def __post_init__(self):
        object.__setattr__(self, "a_vec", tuple(float(x) for x in self.a_vec))

    @property
    def radius(self) -> float:
        return float(np.linalg.norm(self.a_vec))

    def eigenvalues(self) -> tuple[float, float]:
        return (self.a0 - self.radius, self.a0 + self.radius)


@dataclass(frozen=True)
class BlochState:
    """W = (I + p.S)/2 with |p| <= 1; |p| = 1 exactly for pure states."""

    p_vec: tuple[float, float, float]

    def __post_init__(self):
        p = tuple(float(x) for x in self.p_vec)
        object.__setattr__(self, "p_vec", p)
        if np.linalg.norm(p) > 1 + 1e-12:
            raise ValueError(f"Bloch vector has |p| = {np.linalg.norm(p)} > 1")

    def matrix(self) -> np.ndarray:
        p = self.p_vec
        return 0.5 * (_ID2 + p[0] * SX + p[1] * SY + p[2] * SZ)

    @property
    def is_pure(self) -> bool:
        return abs(np.linalg.norm(self.p_vec) - 1.0) <= 1e-10


@dataclass(frozen=True)
class SphereMeasureFn:
    """Probability measure mu(E) = (1 + m(e))/2 on the C^2 projection lattice.

    ``m`` maps unit 3-vectors into [-1,1] and must be antisymmetric,
    m(-e) = -m(e), so that mu(E) + mu(E_perp) = 1.
    """

    m: object  # callable unit 3-vector -> float
    antisymmetry_tol: float = 1e-10

    def __call__(self, e) -> float:
        val = float(self.m(np.asarray(e, dtype=float)))
        if not -1.0 - 1e-12 <= val <= 1.0 + 1e-12:
            raise ValueError(f"m(e) = {val} outside [-1, 1]")
        return val


def spin_matrix(obs: SpinObservable) -> HermitianOperator:
    a = obs.a_vec
    m = obs.a0 * _ID2 + a[0] * SX + a[1] * SY + a[2] * SZ
    return HermitianOperator(m)


def spin_decompose(a) -> SpinObservable:
    m = np.asarray(getattr(a, "matrix", a), dtype=complex)
    if m.shape != (2, 2):
        raise ValueError("spin_decompose expects a 2x2 matrix")
    if np.max(np.abs(m - m.conj().T)) > 1e-10:
        raise ValueError("spin_decompose expects a Hermitian matrix")
    a0 = 0.5 * np.trace(m).real
    a_vec = tuple(0.5 * np.trace(m @ s).real for s in PAULI)
    return SpinObservable(a0=float(a0), a_vec=a_vec)


def pauli_product(a_vec, b_vec) -> tuple[float, np.ndarray]:
    """(a.S)(b.S) = (a.b) I + i (a x b).S; returns (a.b, a x b)."""
    a = np.asarray(a_vec, dtype=float)
    b = np.asarray(b_vec, dtype=float)
    return float(a @ b), np.cross(a, b)


def projection_e(e_vec) -> HermitianOperator:
    """Rank-1 projection E = (I + e.S)/2 for a unit vector e."""
    e = np.asarray(e_vec, dtype=float)
    if abs(np.linalg.norm(e) - 1.0) > 1e-10:
        raise ValueError(f"|e| = {np.linalg.norm(e)} is not 1")
    m = 0.5 * (_ID2 + e[0] * SX + e[1] * SY + e[2] * SZ)
    return HermitianOperator(m)


def measure_eval(mfn: SphereMeasureFn, e_vec) -> float:
    """mu(E) = (1 + m(e))/2 for the projection direction e."""
    e = np.asarray(e_vec, dtype=float)
    if abs(np.linalg.norm(e) - 1.0) > 1e-10:
        raise ValueError("measure_eval requires a unit vector")
    anti = abs(mfn(e) + mfn(-e))
    if anti > mfn.antisymmetry_tol:
        raise ValueError(f"m is not antisymmetric at e (residual {anti:.3e})")
    return 0.5 * (1.0 + mfn(e))


def linear_fit_residual(mfn: SphereMeasureFn, n_dirs: int = 200, seed: int = 0) -> float:
    """Best rms misfit of m(e) against any linear form p.e over sampled e.

    A state-induced measure fits exactly; the sgn-type measures do not.
    """
    dirs = sample_sphere(n_dirs, seed)
    vals = np.array([mfn(d) for d in dirs])
    p, *_ = np.linalg.lstsq(dirs, vals, rcond=None)
    return float(np.sqrt(np.mean((dirs @ p - vals) ** 2)))


def hv_value(obs: SpinObservable, state: BlochState, omega) -> float:
    """Hidden-variable value a0 + |a| sgn((p + omega) . a); always one of
    the two eigenvalues a0 +- |a|."""
    om = np.asarray(omega, dtype=float)
    if abs(np.linalg.norm(om) - 1.0) > 1e-10:
        raise ValueError("omega must be a unit vector")
    a = np.asarray(obs.a_vec, dtype=float)
    p = np.asarray(state.p_vec, dtype=float)
    return obs.a0 + obs.radius * _sgn(float((p + om) @ a))


def sample_sphere(n: int, seed: int) -> np.ndarray:
    """n uniform unit 3-vectors; normalized Gaussians, counter-based RNG."""
    rng = np.random.Generator(np.random.Philox(key=seed))
    v = rng.standard_normal((n, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def hv_analytic_expectation(obs: SpinObservable, state: BlochState) -> float:
    """Closed-form sphere average of the hidden-variable value.

    Reduces to a 1D integral over u = cos(theta) relative to the a
    direction: the sgn average equals the clipped projection of p on a.
    """
    a = np.asarray(obs.a_vec, dtype=float)
    r = obs.radius
    if r == 0.0:
        return obs.a0
    c = float(np.asarray(state.p_vec) @ a) / r  # component of p along a-hat
    # (1/2) * integral_{-1}^{1} sgn(c + u) du, done piecewise
    if c >= 1.0:
        avg = 1.0
    elif c <= -1.0:
        avg = -1.0
    else:
        avg = c
    return obs.a0 + r * avg


def hv_expectation(obs: SpinObservable, state: BlochState,
                   n_samples: int, seed: int) -> dict:
    """Monte Carlo sphere average of the hidden-variable value, with the
    closed-form value alongside."""
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    om = sample_sphere(n_samples, seed)
    a = np.asarray(obs.a_vec, dtype=float)
    p = np.asarray(state.p_vec, dtype=float)
    proj = (om + p) @ a
    vals = obs.a0 + obs.radius * np.where(proj >= 0, 1.0, -1.0)
    est = float(np.mean(vals))
    stderr = float(np.std(vals, ddof=1) / math.sqrt(n_samples)) if n_samples > 1 else 0.0
    return {
        "estimate": est,
        "stderr": stderr,
        "analytic": hv_analytic_expectation(obs, state),
        "n_samples": n_samples,
        "seed": seed,
    }


def hv_consistency(obs_a: SpinObservable, obs_b: SpinObservable,
                   state: BlochState, omega) -> dict:
    """Additive/multiplicative consistency of the value assignment.

    Exact whenever the two direction vectors are collinear ([A,B] = 0);
    otherwise the violations are expected and their magnitudes reported.
    """
    a = np.asarray(obs_a.a_vec, dtype=float)
    b = np.asarray(obs_b.a_vec, dtype=float)
    collinear = bool(np.linalg.norm(np.cross(a, b)) <= 1e-12 * max(1.0, a @ a, b @ b))
    va = hv_value(obs_a, state, omega)
    vb = hv_value(obs_b, state, omega)

    # sum observable C = A + B
    obs_c = SpinObservable(obs_a.a0 + obs_b.a0, tuple(a + b))
    vc = hv_value(obs_c, state, omega)
    add_violation = abs(vc - (va + vb))

    mul_violation = None
    if collinear:
        # product AB = (a0 b0 + a.b) I + (a0 b + b0 a).S is Hermitian here
        dot, _cross = pauli_product(a, b)
        obs_d = SpinObservable(obs_a.a0 * obs_b.a0 + dot,
                               tuple(obs_a.a0 * b + obs_b.a0 * a))
        vd = hv_value(obs_d, state, omega)
        mul_violation = abs(vd - va * vb)

    return {
        "collinear": collinear,
        "value_a": va,
        "value_b": vb,
        "value_sum": vc,
        "additive_violation": add_violation,
        "multiplicative_violation": mul_violation,
    }
