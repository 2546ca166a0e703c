"""Statistical layer: expectations, variances, covariances, the
Robertson-Schroedinger inequality, entropies, Gibbs states, collapse,
purification, and free-particle moment evolution.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, asdict

import numpy as np

from .operators import (
    DensityOperator,
    HermitianOperator,
    eigh,
    partial_trace,
    standardized_commutator,
)

__all__ = [
    "MomentReport",
    "FreeMoments",
    "expectation",
    "moments",
    "entropy",
    "gibbs_state",
    "luders_collapse",
    "purify",
    "free_moment_evolution",
]


def _mat(a) -> np.ndarray:
    return np.asarray(getattr(a, "matrix", a), dtype=complex)


@dataclass(frozen=True)
class MomentReport:
    mean_a: float
    mean_b: float
    var_a: float
    var_b: float
    covariance: float
    correlation: float | None  # None when sigma_a * sigma_b == 0
    commutator_expectation: float
    inin_lhs: float
    inin_rhs: float

    def __post_init__(self):
        if self.var_a < -1e-12 or self.var_b < -1e-12:
            raise ValueError("negative variance beyond numerical floor")
        if self.inin_lhs < self.inin_rhs - 1e-9:
            raise ValueError(
                f"indeterminacy inequality violated: "
                f"{self.inin_lhs} < {self.inin_rhs} - 1e-9"
            )

    def to_json(self) -> str:
        return json.dumps(asdict(self))


@dataclass(frozen=True)
class FreeMoments:
    """Second moments (and units) of a free particle state."""

    var_q: float
    var_p: float
    cov_pq: float
    mass: float
    hbar: float

    def __post_init__(self):
        if self.mass <= 0 or self.hbar <= 0:
            raise ValueError("mass and hbar must be positive")
        if self.var_q * self.var_p < self.cov_pq ** 2 + self.hbar ** 2 / 4 - 1e-9:
            raise ValueError("moment triple violates the Kennard-Schroedinger bound")


def expectation(w: DensityOperator, a) -> float:
    """tr(WA), with a guard on the imaginary rounding residue."""
    wm, am = _mat(w), _mat(a)
    if wm.shape != am.shape:
        raise ValueError("dimension mismatch between state and observable")
    val = complex(np.trace(wm @ am))
    if abs(val.imag) > 1e-10 * max(1.0, abs(val.real)):
        raise ValueError(f"expectation has imaginary residue {val.imag:.3e}")
    return val.real


def moments(w: DensityOperator, a, b, hbar: float = 1.0) -> MomentReport:
    """Means, variances, covariance, correlation and both sides of the
    variance indeterminacy inequality for a pair of observables."""
    if hbar <= 0:
        raise ValueError("hbar must be positive")
    am, bm = _mat(a), _mat(b)
    mean_a = expectation(w, am)
    mean_b = expectation(w, bm)
    var_a = expectation(w, am @ am) - mean_a ** 2
    var_b = expectation(w, bm @ bm) - mean_b ** 2
    cov = 0.5 * expectation(w, am @ bm + bm @ am) - mean_a * mean_b
    cexp = expectation(w, standardized_commutator(am, bm, hbar))
    var_a = max(var_a, 0.0) if var_a > -1e-12 else var_a
    var_b = max(var_b, 0.0) if var_b > -1e-12 else var_b
    sig = math.sqrt(max(var_a, 0.0) * max(var_b, 0.0))
    corr = None if sig == 0.0 else float(np.clip(cov / sig, -1.0, 1.0))
    return MomentReport(
        mean_a=mean_a,
        mean_b=mean_b,
        var_a=var_a,
        var_b=var_b,
        covariance=cov,
        correlation=corr,
        commutator_expectation=cexp,
        inin_lhs=var_a * var_b,
        inin_rhs=cov ** 2 + hbar ** 2 / 4 * cexp ** 2,
    )


def entropy(w: DensityOperator) -> float:
    """von Neumann entropy -tr(W ln W) with the 0 ln 0 := 0 convention."""
    evs = np.linalg.eigvalsh(w.matrix)
    evs = np.clip(evs, 0.0, None)
    pos = evs[evs > 0]
    return float(-np.sum(pos * np.log(pos)))


def gibbs_state(h, beta: float) -> DensityOperator:
    """exp(-beta H) / tr exp(-beta H), overflow-guarded by an energy shift."""
    if beta <= 0:
        raise ValueError("beta must be positive")
    res = eigh(h)
    shifted = -beta * (res.eigenvalues - res.eigenvalues.min())
    pops = np.exp(shifted)
    pops /= pops.sum()
    m = (res.eigenvectors * pops) @ res.eigenvectors.conj().T
    m = 0.5 * (m + m.conj().T)
    return DensityOperator(HermitianOperator(m, hermiticity_tol=1e-10))


def luders_collapse(w: DensityOperator, e, collapse_tol: float = 1e-12) -> DensityOperator:
    """State update W -> EWE / tr(WE) after observing the event E."""
    em = _mat(e)
    prob = float(np.trace(w.matrix @ em).real)
    if prob <= collapse_tol:
        raise ValueError(f"impossible outcome: tr(WE) = {prob:.3e} <= {collapse_tol:.0e}")
    m = em @ w.matrix @ em / prob
    m = 0.5 * (m + m.conj().T)
    return DensityOperator(HermitianOperator(m, hermiticity_tol=1e-9), trace_tol=1e-8)


def purify(w: DensityOperator) -> np.ndarray:
    """Pure vector on the doubled space whose first reduction is W."""
    res = eigh(w.op)
    d = w.dim
    phi = np.zeros(d * d, dtype=complex)
    for lam, vec in zip(res.eigenvalues, res.eigenvectors.T):
        if lam > 0:
            phi += math.sqrt(lam) * np.kron(vec, vec)
    phi /= np.linalg.norm(phi)
    return phi


def purification_roundtrip(w: DensityOperator) -> float:
    """Max-entry error of tr_2 |Phi><Phi| against W (test oracle helper)."""
    phi = purify(w)
    proj = np.outer(phi, phi.conj())
    red = partial_trace(proj, (w.dim, w.dim), keep=1)
    return float(np.max(np.abs(red - w.matrix)))


def free_moment_evolution(m0: FreeMoments, t: float) -> FreeMoments:
    """Heisenberg-picture second moments of a free particle at time t.

    var_q(t) = var_q + (2t/m) cov + (t/m)^2 var_p; cov(t) = cov + (t/m) var_p;
    var_p is conserved.
    """
    s = t / m0.mass
    return FreeMoments(
        var_q=m0.var_q + 2 * s * m0.cov_pq + s ** 2 * m0.var_p,
        var_p=m0.var_p,
        cov_pq=m0.cov_pq + s * m0.var_p,
        mass=m0.mass,
        hbar=m0.hbar,
    )


def covariance_sign_change_time(m0: FreeMoments) -> float:
    """Time m|c|/var_p at which a negative covariance crosses zero."""
    if m0.var_p <= 0:
        raise ValueError("var_p must be positive")
    return m0.mass * abs(m0.cov_pq) / m0.var_p
