"""scikit-learn style tomography transformer.

``fit`` builds an (N, M)-POVM, ``transform`` maps density matrices to their
flattened outcome tables and ``inverse_transform`` reconstructs states from
tables through the dual frame.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._config import ContractError
from .bases import HermitianBasis, basis_by_name, group, load_basis
from .linalg import eigvalsh_stack, hermiticity_defect
from .measurements import (
    admissible_pairs,
    assemble,
    dual_frame,
    ic_check,
    probabilities_batch,
    reconstruct,
)


def check_states(X, d, tol=1e-10) -> np.ndarray:
    """Coerce ``X`` to a stack of ``d x d`` density matrices.

    Accepts shape ``(n, d, d)``, ``(d, d)`` or flattened ``(n, d*d)``.
    """
    X = np.asarray(X)
    if not np.issubdtype(X.dtype, np.number):
        raise ContractError(f"states must be numeric, got dtype {X.dtype}")
    X = X.astype(complex)
    if X.ndim == 2 and X.shape == (d, d):
        X = X[None]
    elif X.ndim == 2 and X.shape[1] == d * d:
        X = X.reshape(-1, d, d)
    if X.ndim != 3 or X.shape[1:] != (d, d):
        raise ContractError(f"expected states of shape (n, {d}, {d}), got {X.shape}")
    if not np.all(np.isfinite(X)):
        raise ContractError("states contain NaN or inf")
    herm = hermiticity_defect(X)
    if herm > tol:
        raise ContractError(f"states are not Hermitian: max|A - A^H| = {herm:.3e}")
    traces = np.trace(X, axis1=1, axis2=2)
    if np.max(np.abs(traces - 1)) > 1e-8:
        raise ContractError("states must have unit trace")
    if eigvalsh_stack(X)[:, 0].min() < -tol:
        raise ContractError("states must be positive semidefinite")
    return X


class SymmetricPOVMTomography(TransformerMixin, BaseEstimator):
    """State tomography with an informationally complete (N, M)-POVM.

    Parameters
    ----------
    dim : int
        Hilbert space dimension d.
    n_outcomes : int or None
        Elements per POVM (M). ``None`` picks the M = d family (MUMs).
    basis : str or HermitianBasis
        ``"gellmann"``, ``"pauli"``, a JSON file path or a basis object.
    t : float or {"max", "min"}
        Construction parameter; the endpoints of the admissible range by name.
    permutation : sequence of int or None
        Assignment of basis operators to (alpha, k) slots.

    Attributes
    ----------
    measurement_ : SymmetricMeasurement
    dual_frame_ : ndarray of shape (N, M, d, d)
    n_povms_ : int
    """

    def __init__(self, dim=2, n_outcomes=None, basis="gellmann", t="max", permutation=None):
        self.dim = dim
        self.n_outcomes = n_outcomes
        self.basis = basis
        self.t = t
        self.permutation = permutation

    def _resolve_basis(self):
        if isinstance(self.basis, HermitianBasis):
            return self.basis
        if self.basis in ("gellmann", "pauli"):
            return basis_by_name(self.basis, self.dim)
        return load_basis(self.basis)

    def fit(self, X=None, y=None):
        """Build the measurement. ``X`` is only validated, never used."""
        d = int(self.dim)
        M = d if self.n_outcomes is None else int(self.n_outcomes)
        pairs = {p.M: p.N for p in admissible_pairs(d)}
        if M not in pairs:
            raise ContractError(f"M = {M} is not admissible in dimension {d}; choose from {sorted(pairs)}")
        if X is not None:
            check_states(X, d)
        N = pairs[M]
        g = group(self._resolve_basis(), N, M - 1, self.permutation)
        self.measurement_ = assemble(g, self.t)
        if not ic_check(self.measurement_).complete:
            raise ContractError("t yields a measurement that is not informationally complete")
        self.dual_frame_ = dual_frame(self.measurement_)
        self.n_povms_ = N
        self.n_features_out_ = N * M
        return self

    def transform(self, X):
        """Outcome tables, flattened to shape ``(n, N*M)``."""
        check_is_fitted(self, "measurement_")
        X = check_states(X, self.measurement_.d)
        p = probabilities_batch(self.measurement_, X)
        return p.reshape(len(X), -1)

    def inverse_transform(self, P):
        """States reconstructed from flattened outcome tables, shape ``(n, d, d)``."""
        check_is_fitted(self, "measurement_")
        m = self.measurement_
        P = np.asarray(P, dtype=float)
        if P.ndim == 1:
            P = P[None]
        if P.ndim != 2 or P.shape[1] != m.N * m.M:
            raise ContractError(f"expected tables of shape (n, {m.N * m.M}), got {P.shape}")
        return reconstruct(m, P.reshape(-1, m.N, m.M), frame=self.dual_frame_)

    def score(self, X, y=None):
        """Negative mean max-abs reconstruction error; 0 is perfect."""
        X = check_states(X, self.measurement_.d)
        err = np.abs(self.inverse_transform(self.transform(X)) - X).max(axis=(1, 2))
        return -float(err.mean())
