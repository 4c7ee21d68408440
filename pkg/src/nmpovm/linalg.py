"""Dense complex linear algebra primitives.

Matrices are plain ``numpy.ndarray`` objects of dtype ``complex128`` (or
float for real correlation matrices). Eigen- and singular value problems are
delegated to LAPACK through numpy; only the contracts live here.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ._config import DEFAULT_TOLERANCES, ContractError


class Spectrum(NamedTuple):
    """Eigen-decomposition of a Hermitian matrix, eigenvalues ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def as_matrix(a, name="matrix") -> np.ndarray:
    a = np.asarray(a)
    if a.ndim != 2:
        raise ContractError(f"{name} must be 2-dimensional, got shape {a.shape}")
    return a


def hermiticity_defect(a) -> float:
    """Elementwise max |A - A^H|."""
    a = np.asarray(a)
    return float(np.max(np.abs(a - np.swapaxes(a, -1, -2).conj()), initial=0.0))


def check_hermitian(a, tol=None, name="matrix") -> np.ndarray:
    tol = DEFAULT_TOLERANCES.hermitian if tol is None else tol
    a = as_matrix(a, name)
    if a.shape[0] != a.shape[1]:
        raise ContractError(f"{name} must be square, got shape {a.shape}")
    defect = hermiticity_defect(a)
    if defect > tol:
        raise ContractError(
            f"{name} is not Hermitian: max|A - A^H| = {defect:.3e} exceeds {tol:.1e}"
        )
    return a


def herm_eig(a, tol=None) -> Spectrum:
    """Full spectrum of a Hermitian matrix.

    Parameters
    ----------
    a : array_like, shape (n, n)
        Hermitian within ``tol`` (elementwise max of ``|A - A^H|``).
    tol : float, optional
        Hermiticity tolerance, default 1e-10.

    Returns
    -------
    Spectrum
        Ascending eigenvalues and orthonormal eigenvectors stored as columns.
    """
    a = check_hermitian(a, tol)
    # symmetrize so that the defect allowed by tol does not leak into eigh
    vals, vecs = np.linalg.eigh(0.5 * (a + a.conj().T))
    return Spectrum(vals, vecs)


def eigvalsh_stack(ops) -> np.ndarray:
    """Eigenvalues of a stack of Hermitian matrices, shape (..., n)."""
    ops = np.asarray(ops)
    return np.linalg.eigvalsh(0.5 * (ops + np.swapaxes(ops, -1, -2).conj()))


def trace_norm(p) -> float:
    """Sum of singular values of a rectangular matrix."""
    p = as_matrix(p, "correlation matrix")
    if p.size == 0:
        return 0.0
    return float(np.sum(np.linalg.svd(p, compute_uv=False)))


def hs_inner(a, b) -> complex:
    """Hilbert-Schmidt inner product Tr(a^H b)."""
    a = as_matrix(a, "a")
    b = as_matrix(b, "b")
    if a.shape != b.shape:
        raise ContractError(f"dimension mismatch: {a.shape} vs {b.shape}")
    return complex(np.vdot(a, b))


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a, "a"), as_matrix(b, "b"))


def gram_matrix(ops) -> np.ndarray:
    """Matrix of pairwise Hilbert-Schmidt products for a stack of operators."""
    flat = np.asarray(ops).reshape(len(ops), -1)
    return flat.conj() @ flat.T


def numerical_rank(a, rtol=None) -> int:
    """Number of singular values above ``rtol`` times the largest one."""
    rtol = DEFAULT_TOLERANCES.rank if rtol is None else rtol
    s = np.linalg.svd(np.asarray(a), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def purity(rho) -> float:
    rho = np.asarray(rho)
    h = 0.5 * (rho + rho.conj().T)
    return float(np.real(np.vdot(h, h)))


def random_density(d: int, rank: int | None = None, seed=None) -> np.ndarray:
    """Random density matrix of the given rank from a Ginibre matrix.

    ``rho = G G^H / Tr(G G^H)`` with ``G`` a ``d x rank`` complex Gaussian
    matrix. ``seed`` may be an int or a ``numpy.random.Generator``.
    """
    if d < 1:
        raise ContractError(f"dimension must be positive, got {d}")
    rank = d if rank is None else rank
    if not 1 <= rank <= d:
        raise ContractError(f"rank must lie in [1, {d}], got {rank}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, rank)) + 1j * rng.standard_normal((d, rank))
    rho = g @ g.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def check_density(rho, d=None, tol=None, name="state") -> np.ndarray:
    """Validate a unit-trace positive semidefinite matrix."""
    tol = DEFAULT_TOLERANCES.positivity if tol is None else tol
    rho = check_hermitian(rho, tol, name)
    if d is not None and rho.shape[0] != d:
        raise ContractError(f"{name} has dimension {rho.shape[0]}, expected {d}")
    tr = np.trace(rho)
    if abs(tr - 1) > 1e-8:
        raise ContractError(f"{name} has trace {tr.real:.12g}, expected 1")
    lo = float(eigvalsh_stack(rho)[0])
    if lo < -max(tol, 1e-9):
        raise ContractError(f"{name} is not positive semidefinite: min eigenvalue {lo:.3e}")
    return rho
