"""Dense complex linear algebra on finite Hilbert spaces.

Operators are plain square complex numpy arrays wrapped in thin validating
containers.  Everything here is a pure function; no value is mutated after
construction, so instances can be shared freely between workers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "HermitianOperator",
    "DensityOperator",
    "SpectralResolution",
    "eigh",
    "func_of",
    "tensor",
    "partial_trace",
    "commutator",
    "anticommutator",
    "lattice_meet",
    "gleason_additivity_check",
    "matrix_to_json",
    "matrix_from_json",
]


def _as_matrix(a) -> np.ndarray:
    m = np.asarray(getattr(a, "matrix", a), dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m.view(float))):
        raise ValueError("matrix contains NaN/Inf entries")
    return m


@dataclass(frozen=True)
class HermitianOperator:
    """Square complex matrix certified self-adjoint up to ``hermiticity_tol``."""

    matrix: np.ndarray
    hermiticity_tol: float = 1e-12

    def __post_init__(self):
        m = _as_matrix(self.matrix)
        object.__setattr__(self, "matrix", m)
        asym = float(np.max(np.abs(m - m.conj().T))) if m.size else 0.0
        if asym > self.hermiticity_tol:
            raise ValueError(
                f"matrix is not Hermitian: max asymmetry {asym:.3e} "
                f"> tol {self.hermiticity_tol:.3e}"
            )

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class DensityOperator:
    """Positive unit-trace Hermitian operator."""

    op: HermitianOperator
    trace_tol: float = 1e-10
    psd_tol: float = -1e-10

    def __post_init__(self):
        if not isinstance(self.op, HermitianOperator):
            object.__setattr__(self, "op", HermitianOperator(self.op))
        tr = float(np.trace(self.matrix).real)
        if abs(tr - 1.0) > self.trace_tol:
            raise ValueError(f"trace {tr!r} deviates from 1 beyond tol {self.trace_tol}")
        lam_min = float(np.linalg.eigvalsh(self.matrix)[0])
        if lam_min < self.psd_tol:
            raise ValueError(
                f"smallest eigenvalue {lam_min:.3e} below psd tolerance {self.psd_tol:.3e}"
            )

    @property
    def matrix(self) -> np.ndarray:
        return self.op.matrix

    @property
    def dim(self) -> int:
        return self.op.dim


@dataclass(frozen=True)
class SpectralResolution:
    """Ascending real eigenvalues with an orthonormal set of column eigenvectors."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    ortho_tol: float = 1e-10

    def __post_init__(self):
        w = np.asarray(self.eigenvalues, dtype=float)
        v = np.asarray(self.eigenvectors, dtype=complex)
        object.__setattr__(self, "eigenvalues", w)
        object.__setattr__(self, "eigenvectors", v)
        if np.any(np.diff(w) < 0):
            raise ValueError("eigenvalues must be sorted ascending")
        gram = v.conj().T @ v
        err = float(np.max(np.abs(gram - np.eye(v.shape[1]))))
        if err > self.ortho_tol:
            raise ValueError(f"eigenvectors not orthonormal: residual {err:.3e}")

    def reconstruct(self) -> np.ndarray:
        return (self.eigenvectors * self.eigenvalues) @ self.eigenvectors.conj().T


def eigh(a) -> SpectralResolution:
    """Hermitian eigendecomposition, rejecting visibly non-Hermitian input."""
    m = _as_matrix(a)
    tol = getattr(a, "hermiticity_tol", 1e-12)
    asym = float(np.max(np.abs(m - m.conj().T)))
    if asym > max(tol, 1e-12):
        raise ValueError(f"eigh requires a Hermitian matrix (asymmetry {asym:.3e})")
    w, v = np.linalg.eigh(m)
    return SpectralResolution(eigenvalues=w, eigenvectors=v)

def func_of(a, f) -> HermitianOperator:
    """Apply a real function to a Hermitian operator through its spectrum.

    ``f`` must be defined at every eigenvalue; a domain failure is reported
    with the offending eigenvalue.
    """
    res = eigh(a)
    vals = []
    for lam in res.eigenvalues:
        try:
            y = f(float(lam))
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            raise ValueError(f"function undefined at eigenvalue {lam!r}: {exc}") from exc
        if not np.isfinite(y):
            raise ValueError(f"function undefined at eigenvalue {lam!r} (got {y!r})")
        vals.append(y)
    m = (res.eigenvectors * np.asarray(vals)) @ res.eigenvectors.conj().T
    m = 0.5 * (m + m.conj().T)  # kill rounding asymmetry
    return HermitianOperator(m, hermiticity_tol=1e-9)


def tensor(a, b) -> np.ndarray:
    """Kronecker product; subsystem 1 is the slow (left) index."""
    return np.kron(np.asarray(getattr(a, "matrix", a), dtype=complex),
                   np.asarray(getattr(b, "matrix", b), dtype=complex))


def partial_trace(a, dims: tuple[int, int], keep: int) -> np.ndarray:
    """Trace out one factor of a bipartite operator.

    ``dims = (d1, d2)`` with subsystem 1 on the slow Kronecker index;
    ``keep`` is 1 or 2 and names the subsystem that survives.
    """
    m = _as_matrix(a)
    d1, d2 = dims
    if m.shape[0] != d1 * d2:
        raise ValueError(f"matrix dim {m.shape[0]} != d1*d2 = {d1 * d2}")
    if keep not in (1, 2):
        raise ValueError("keep must be 1 or 2")
    t = m.reshape(d1, d2, d1, d2)
    if keep == 1:
        return np.trace(t, axis1=1, axis2=3)
    return np.trace(t, axis1=0, axis2=2)


def commutator(a, b) -> np.ndarray:
    """[A,B] = AB - BA (no i/hbar factor)."""
    ma, mb = _as_matrix(a), _as_matrix(b)
    if ma.shape != mb.shape:
        raise ValueError("dimension mismatch in commutator")
    return ma @ mb - mb @ ma


def anticommutator(a, b) -> np.ndarray:
    """{A,B} = AB + BA."""
    ma, mb = _as_matrix(a), _as_matrix(b)
    if ma.shape != mb.shape:
        raise ValueError("dimension mismatch in anticommutator")
    return ma @ mb + mb @ ma


def standardized_commutator(a, b, hbar: float) -> np.ndarray:
    """Hermitian form (i/hbar)[A,B] of the commutator of two Hermitian operators."""
    return 1j / hbar * commutator(a, b)


def _check_projection(e: np.ndarray, tol: float, name: str):
    if np.max(np.abs(e - e.conj().T)) > tol:
        raise ValueError(f"{name} is not Hermitian within {tol}")
    if np.max(np.abs(e @ e - e)) > max(tol, 1e-9):
        raise ValueError(f"{name} is not idempotent within {tol}")


def lattice_meet(e, f, max_iter: int = 10_000, tol: float = 1e-10) -> np.ndarray:
    """Projection onto the intersection of two ranges via E(FE)^n.

    Convergence is geometric with ratio cos^2 of the principal angle between
    the ranges; non-convergence within ``max_iter`` raises with the residual.
    """
    me, mf = _as_matrix(e), _as_matrix(f)
    _check_projection(me, tol, "E")
    _check_projection(mf, tol, "F")
    x = me.copy()
    for _ in range(max_iter):
        x_next = me @ (mf @ x)
        if np.max(np.abs(x_next - x)) <= tol:
            # symmetrize the numerical limit: it is a projection in theory
            g = 0.5 * (x_next + x_next.conj().T)
            return g
        x = x_next
    resid = float(np.max(np.abs(me @ (mf @ x) - x)))
    raise RuntimeError(f"lattice_meet did not converge in {max_iter} steps "
                       f"(residual {resid:.3e})")


def gleason_additivity_check(w: DensityOperator, projections, tol: float = 1e-10) -> dict:
    """Additivity of mu(E) = tr(WE) over a pairwise-orthogonal family."""
    ps = [_as_matrix(p) for p in projections]
    for i, p in enumerate(ps):
        _check_projection(p, tol, f"E_{i}")
    for i in range(len(ps)):
        for j in range(i + 1, len(ps)):
            if np.max(np.abs(ps[i] @ ps[j])) > max(tol, 1e-9):
                raise ValueError(f"projections {i} and {j} are not orthogonal")
    wm = w.matrix
    mus = [float(np.trace(wm @ p).real) for p in ps]
    total = sum(ps)
    mu_sum_op = float(np.trace(wm @ total).real)
    for i, mu in enumerate(mus):
        if not -tol <= mu <= 1 + tol:
            raise ValueError(f"mu(E_{i}) = {mu} outside [0,1]")
    return {
        "mu_of_sum": mu_sum_op,
        "sum_of_mu": float(sum(mus)),
        "residual": abs(mu_sum_op - sum(mus)),
        "mu_values": mus,
    }


def matrix_to_json(m) -> str:
    a = _as_matrix(m)
    return json.dumps({
        "rows": a.shape[0],
        "cols": a.shape[1],
        "re": a.real.ravel().tolist(),
        "im": a.imag.ravel().tolist(),
    })


def matrix_from_json(s: str) -> np.ndarray:
    d = json.loads(s)
    re = np.asarray(d["re"], dtype=float).reshape(d["rows"], d["cols"])
    im = np.asarray(d["im"], dtype=float).reshape(d["rows"], d["cols"])
    return re + 1j * im
