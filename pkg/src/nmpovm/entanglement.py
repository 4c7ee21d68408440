"""Separability tests built on correlation matrices of local (N, M)-POVMs.

For a bipartite state on ``H_A (x) H_B`` (A is the leading tensor factor) the
correlation matrix is ``P[(a,k),(b,l)] = Tr[rho (E^A[a,k] (x) E^B[b,l])]``.
Separable states obey

* ``||P||_tr <= sqrt(Cbound_A * Cbound_B)``, and
* ``Tr P <= Cbound`` when both sides use the same dimension, (N, M) and x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._config import DEFAULT_TOLERANCES, ContractError
from .info import coincidence_bound
from .linalg import check_density, random_density, trace_norm
from .measurements import SymmetricMeasurement

CONSISTENT = "consistent-with-separable"
ENTANGLED = "entangled"
NOT_APPLICABLE = "not-applicable"

SCAN_COLUMNS = ("p", "value_18", "bound_18", "value_19", "bound_19")


def correlation_matrix(rho_ab, m_a: SymmetricMeasurement, m_b: SymmetricMeasurement, check=True):
    """Real matrix of shape ``(N_A M_A, N_B M_B)``; rows flatten (a, k), columns (b, l)."""
    da, db = m_a.d, m_b.d
    rho_ab = np.asarray(rho_ab)
    if rho_ab.shape[-2:] != (da * db, da * db):
        raise ContractError(
            f"state of shape {rho_ab.shape[-2:]} does not match d_A*d_B = {da}*{db}"
        )
    if check:
        check_density(rho_ab)
    r = rho_ab.reshape(rho_ab.shape[:-2] + (da, db, da, db))
    return np.real(
        np.einsum("...ijkl,aki,blj->...ab", r, m_a.flat_elements(), m_b.flat_elements())
    )


def _verdict(value, bound, slack):
    return ENTANGLED if value > bound + slack else CONSISTENT


@dataclass(frozen=True)
class CriterionResult:
    value: float
    bound: float
    verdict: str

    @property
    def entangled(self) -> bool:
        return self.verdict == ENTANGLED


def criterion_trace_norm(p, c_bound_a: float, c_bound_b: float, slack=None) -> CriterionResult:
    """Trace norm of the correlation matrix against ``sqrt(Cbound_A Cbound_B)``."""
    slack = DEFAULT_TOLERANCES.boundary if slack is None else slack
    value = trace_norm(p)
    bound = math.sqrt(c_bound_a * c_bound_b)
    return CriterionResult(value, bound, _verdict(value, bound, slack))


def criterion_trace(p, c_bound: float, slack=None) -> CriterionResult:
    """Trace of a square correlation matrix against ``Cbound``."""
    slack = DEFAULT_TOLERANCES.boundary if slack is None else slack
    p = np.asarray(p)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise ContractError(f"trace criterion needs a square correlation matrix, got {p.shape}")
    value = float(np.trace(p))
    if value > trace_norm(p) + 1e-10:
        raise AssertionError("Tr P exceeds ||P||_tr; correlation matrix is corrupted")
    return CriterionResult(value, c_bound, _verdict(value, c_bound, slack))


def same_family(m_a: SymmetricMeasurement, m_b: SymmetricMeasurement, tol=None) -> bool:
    tol = DEFAULT_TOLERANCES.classify if tol is None else tol
    return (m_a.d, m_a.N, m_a.M) == (m_b.d, m_b.N, m_b.M) and abs(m_a.x - m_b.x) <= tol


def check_same_family(m_a, m_b):
    if not same_family(m_a, m_b):
        raise ContractError(
            "the trace criterion requires equal d, (N, M) and x on both sides; got "
            f"d={m_a.d},{m_b.d} (N,M)=({m_a.N},{m_a.M}),({m_b.N},{m_b.M}) x={m_a.x},{m_b.x}"
        )


@dataclass(frozen=True)
class DetectionReport:
    trace_norm_value: float
    trace_norm_bound: float
    trace_value: float | None
    trace_bound: float | None
    verdict_eq18: str
    verdict_eq19: str

    @property
    def entangled(self) -> bool:
        return ENTANGLED in (self.verdict_eq18, self.verdict_eq19)

    def as_dict(self) -> dict:
        return {
            "trace_norm": self.trace_norm_value,
            "tn_bound": self.trace_norm_bound,
            "trace": self.trace_value,
            "tr_bound": self.trace_bound,
            "verdicts": {"eq18": self.verdict_eq18, "eq19": self.verdict_eq19},
        }


def detect(rho_ab, m_a: SymmetricMeasurement, m_b: SymmetricMeasurement) -> DetectionReport:
    """Evaluate both criteria; the trace criterion only for matching families."""
    p = correlation_matrix(rho_ab, m_a, m_b)
    cb_a = coincidence_bound(m_a.d, m_a.M, m_a.x)
    cb_b = coincidence_bound(m_b.d, m_b.M, m_b.x)
    tn = criterion_trace_norm(p, cb_a, cb_b)
    if same_family(m_a, m_b):
        tr = criterion_trace(p, cb_a)
        tr_value, tr_bound, tr_verdict = tr.value, tr.bound, tr.verdict
    else:
        tr_value = tr_bound = None
        tr_verdict = NOT_APPLICABLE
    return DetectionReport(tn.value, tn.bound, tr_value, tr_bound, tn.verdict, tr_verdict)


# ---------------------------------------------------------------- states


def bell_state(d: int) -> np.ndarray:
    """Density matrix of ``(1/sqrt d) sum_i |ii>``."""
    if d < 2:
        raise ContractError(f"dimension must be at least 2, got {d}")
    psi = np.zeros(d * d, dtype=complex)
    psi[:: d + 1] = 1 / math.sqrt(d)
    return np.outer(psi, psi.conj())


def isotropic(d: int, p: float) -> np.ndarray:
    """``p |Phi+><Phi+| + (1 - p) I / d^2``."""
    if not 0 <= p <= 1:
        raise ContractError(f"mixing weight must lie in [0, 1], got {p}")
    return p * bell_state(d) + (1 - p) * np.eye(d * d) / d**2


def product(rho_a, rho_b) -> np.ndarray:
    return np.kron(rho_a, rho_b)


def random_product(d_a: int, d_b: int, seed=None) -> np.ndarray:
    rng = np.random.default_rng(seed)
    ra = random_density(d_a, int(rng.integers(1, d_a + 1)), rng)
    rb = random_density(d_b, int(rng.integers(1, d_b + 1)), rng)
    return product(ra, rb)


def random_separable(d_a: int, d_b: int, seed=None, max_terms: int = 10) -> np.ndarray:
    """Convex mixture of 1..max_terms random product states with Dirichlet weights."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, max_terms + 1))
    weights = rng.dirichlet(np.ones(n))
    return sum(q * random_product(d_a, d_b, rng) for q in weights)


# ---------------------------------------------------------------- scans


def _criterion_values(rho, m_a, m_b):
    p = correlation_matrix(rho, m_a, m_b, check=False)
    cb_a = coincidence_bound(m_a.d, m_a.M, m_a.x)
    cb_b = coincidence_bound(m_b.d, m_b.M, m_b.x)
    row = {"value_18": trace_norm(p), "bound_18": math.sqrt(cb_a * cb_b)}
    if same_family(m_a, m_b):
        row.update(value_19=float(np.trace(p)), bound_19=cb_a)
    else:
        row.update(value_19=None, bound_19=None)
    return row


@dataclass(frozen=True)
class ScanResult:
    p_star: float | None
    criterion: str
    rows: list


def threshold_scan(d, m_a, m_b, criterion="trace", resolution=101, xtol=1e-6) -> ScanResult:
    """Smallest isotropic weight p flagged by a criterion, refined by bisection.

    ``criterion`` is ``"trace"`` or ``"trace-norm"``. ``p_star`` is None when
    no grid point is flagged.
    """
    if criterion not in ("trace", "trace-norm"):
        raise ContractError(f"unknown criterion {criterion!r}")
    if m_a.d * m_b.d != d * d:
        raise ContractError("measurement dimensions do not match the isotropic state")
    if criterion == "trace":
        check_same_family(m_a, m_b)
    value_key, bound_key = ("value_19", "bound_19") if criterion == "trace" else ("value_18", "bound_18")
    slack = DEFAULT_TOLERANCES.boundary

    def flagged(row):
        return row[value_key] > row[bound_key] + slack

    grid = np.linspace(0.0, 1.0, resolution)
    rows = []
    for p in grid:
        row = {"p": float(p)}
        row.update(_criterion_values(isotropic(d, float(p)), m_a, m_b))
        rows.append(row)

    first = next((i for i, r in enumerate(rows) if flagged(r)), None)
    if first is None:
        return ScanResult(None, criterion, rows)
    if first == 0:
        return ScanResult(0.0, criterion, rows)
    lo, hi = float(grid[first - 1]), float(grid[first])
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        if flagged(_criterion_values(isotropic(d, mid), m_a, m_b)):
            hi = mid
        else:
            lo = mid
    return ScanResult(hi, criterion, rows)
