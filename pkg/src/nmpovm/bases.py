"""Orthonormal Hermitian operator bases and their (alpha, k) grouping.

A basis is stored without its identity element ``I/sqrt(d)``; only the
``d**2 - 1`` traceless operators are kept.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from functools import reduce

import numpy as np

from ._config import DEFAULT_TOLERANCES, ArityError, ContractError
from .linalg import gram_matrix, hermiticity_defect
from .serialization import decode_matrix, encode_matrix

_SQRT1_2 = 1 / np.sqrt(2)

PAULIS = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
) * _SQRT1_2


@dataclass(frozen=True, eq=False)
class HermitianBasis:
    """Traceless part of an orthonormal Hermitian operator basis.

    ``ops`` has shape ``(d**2 - 1, d, d)``.
    """

    dim: int
    ops: np.ndarray
    name: str = "custom"

    def __post_init__(self):
        ops = np.asarray(self.ops, dtype=complex)
        if ops.shape != (self.dim**2 - 1, self.dim, self.dim):
            raise ContractError(
                f"a basis in dimension {self.dim} needs {self.dim**2 - 1} operators "
                f"of shape ({self.dim}, {self.dim}), got array of shape {ops.shape}"
            )
        ops.setflags(write=False)
        object.__setattr__(self, "ops", ops)

    def __len__(self):
        return len(self.ops)


@dataclass(frozen=True)
class BasisReport:
    hermiticity_defect: float
    trace_defect: float
    gram_defect: float
    tol: float
    gram: np.ndarray = field(repr=False)

    @property
    def passed(self) -> bool:
        return max(self.hermiticity_defect, self.trace_defect, self.gram_defect) <= self.tol

    def as_dict(self) -> dict:
        return {
            "hermiticity_defect": self.hermiticity_defect,
            "trace_defect": self.trace_defect,
            "gram_defect": self.gram_defect,
            "tol": self.tol,
            "passed": self.passed,
        }


@dataclass(frozen=True, eq=False)
class GroupedBasis:
    """Basis operators arranged as ``ops[alpha, k]``, shape ``(N, M - 1, d, d)``.

    ``permutation[j]`` is the index in the source basis of the operator stored
    at flat position ``j = alpha * (M - 1) + k``.
    """

    dim: int
    n_groups: int
    group_size: int
    ops: np.ndarray
    permutation: tuple
    basis_id: str = "custom"

    def __post_init__(self):
        ops = np.asarray(self.ops, dtype=complex)
        shape = (self.n_groups, self.group_size, self.dim, self.dim)
        if ops.shape != shape:
            raise ContractError(f"grouped ops must have shape {shape}, got {ops.shape}")
        if self.n_groups * self.group_size != self.dim**2 - 1:
            raise ArityError(
                f"N(M-1) = {self.n_groups}*{self.group_size} != d^2-1 = {self.dim**2 - 1}"
            )
        ops.setflags(write=False)
        object.__setattr__(self, "ops", ops)
        object.__setattr__(self, "permutation", tuple(int(i) for i in self.permutation))

    @property
    def n_outcomes(self) -> int:
        return self.group_size + 1

    def flatten(self) -> np.ndarray:
        return self.ops.reshape(-1, self.dim, self.dim)


def gell_mann_basis(d: int) -> HermitianBasis:
    """Generalized Gell-Mann matrices normalized to ``Tr(G_a G_b) = delta_ab``.

    Order: symmetric block, antisymmetric block, diagonal block; the first
    two are lexicographic in ``(j, k)`` with ``j < k``, the last by size of
    the leading identity block.
    """
    if d < 2:
        raise ContractError(f"Gell-Mann basis needs d >= 2, got {d}")
    pairs = list(itertools.combinations(range(d), 2))
    sym, asym = [], []
    for j, k in pairs:
        s = np.zeros((d, d), dtype=complex)
        s[j, k] = s[k, j] = _SQRT1_2
        sym.append(s)
        a = np.zeros((d, d), dtype=complex)
        a[j, k] = -1j * _SQRT1_2
        a[k, j] = 1j * _SQRT1_2
        asym.append(a)
    diag = []
    for l in range(1, d):
        entries = np.zeros(d)
        entries[:l] = 1.0
        entries[l] = -l
        diag.append(np.diag(entries / np.sqrt(l * (l + 1))).astype(complex))
    return HermitianBasis(d, np.array(sym + asym + diag), name=f"gellmann{d}")


def pauli_tensor_basis(n_qubits: int) -> HermitianBasis:
    """All non-identity ``n``-fold tensor products of normalized Paulis.

    Operator ``i`` (0-based) is indexed by the base-4 digits of ``i + 1``,
    most significant factor first.
    """
    if n_qubits < 1:
        raise ContractError(f"need at least one qubit, got {n_qubits}")
    ops = [
        reduce(np.kron, (PAULIS[i] for i in digits))
        for digits in itertools.product(range(4), repeat=n_qubits)
    ][1:]
    return HermitianBasis(2**n_qubits, np.array(ops), name=f"pauli{n_qubits}")


def basis_by_name(name: str, d: int) -> HermitianBasis:
    if name == "gellmann":
        return gell_mann_basis(d)
    if name == "pauli":
        n = int(round(np.log2(d)))
        if 2**n != d:
            raise ContractError(f"Pauli tensor basis requires d = 2^n, got {d}")
        return pauli_tensor_basis(n)
    raise ContractError(f"unknown basis {name!r}; use 'gellmann', 'pauli' or a file path")


def validate_basis(b: HermitianBasis, tol=None) -> BasisReport:
    """Hermiticity, trace and orthonormality defects of a basis."""
    tol = DEFAULT_TOLERANCES.validation if tol is None else tol
    ops = np.asarray(b.ops)
    gram = gram_matrix(ops)
    herm = hermiticity_defect(ops) if len(ops) else 0.0
    traces = np.trace(ops, axis1=1, axis2=2)
    return BasisReport(
        hermiticity_defect=herm,
        trace_defect=float(np.max(np.abs(traces), initial=0.0)),
        gram_defect=float(np.max(np.abs(gram - np.eye(len(ops))), initial=0.0)),
        tol=tol,
        gram=gram,
    )


def _check_permutation(permutation, n):
    perm = np.asarray(permutation)
    if perm.shape != (n,) or not np.array_equal(np.sort(perm), np.arange(n)):
        raise ContractError(f"permutation must be a bijection on {n} indices")
    return perm


def group(b: HermitianBasis, n_groups: int, group_size: int, permutation=None) -> GroupedBasis:
    """Arrange basis operators into ``n_groups`` groups of ``group_size``.

    ``ops[alpha][k] = b.ops[permutation[alpha * group_size + k]]``.
    """
    if n_groups < 1 or group_size < 1 or n_groups * group_size != b.dim**2 - 1:
        raise ArityError(
            f"cannot split {b.dim**2 - 1} operators into {n_groups} groups of {group_size}"
        )
    n = len(b.ops)
    perm = np.arange(n) if permutation is None else _check_permutation(permutation, n)
    ops = b.ops[perm].reshape(n_groups, group_size, b.dim, b.dim)
    return GroupedBasis(b.dim, n_groups, group_size, ops, tuple(perm), basis_id=b.name)


def dual_regroup(g: GroupedBasis) -> GroupedBasis:
    """Swap the roles of group index and in-group index.

    A grouping for ``(N, M)`` becomes one for ``(M - 1, N + 1)``. Applying it
    twice returns the original grouping.
    """
    ops = np.swapaxes(g.ops, 0, 1)
    perm = np.asarray(g.permutation).reshape(g.n_groups, g.group_size).T.ravel()
    return GroupedBasis(g.dim, g.group_size, g.n_groups, ops, tuple(perm), basis_id=g.basis_id)


def basis_to_dict(b: HermitianBasis) -> dict:
    return {"dim": b.dim, "ops": [encode_matrix(op) for op in b.ops]}


def basis_from_dict(data: dict, name="custom", tol=None) -> HermitianBasis:
    try:
        d = int(data["dim"])
        ops = np.array([decode_matrix(op, d) for op in data["ops"]])
    except (KeyError, TypeError) as exc:
        raise ContractError(f"malformed basis document: {exc}") from None
    basis = HermitianBasis(d, ops, name=name)
    report = validate_basis(basis, tol)
    if not report.passed:
        raise ContractError(f"loaded basis failed validation: {report.as_dict()}")
    return basis


def save_basis(b: HermitianBasis, path) -> None:
    with open(path, "w") as fh:
        json.dump(basis_to_dict(b), fh)


def load_basis(path, tol=None) -> HermitianBasis:
    with open(path) as fh:
        data = json.load(fh)
    return basis_from_dict(data, name=f"file:{path}", tol=tol)
