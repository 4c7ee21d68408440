"""Index of coincidence and entropic uncertainty relations.

All logarithms are natural; ``0 ln 0`` is taken as 0.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from ._config import ContractError
from .linalg import check_density, purity
from .measurements import SymmetricMeasurement, probabilities, x_window

CSV_COLUMNS = (
    "class", "d", "N", "M", "x", "purity", "C", "C_closed", "C_bound", "avgH", "bound", "ok",
)


def index_of_coincidence(p) -> float:
    """Sum of squared outcome probabilities over the whole table (or a stack of tables)."""
    p = np.asarray(p, dtype=float)
    c = np.sum(p * p, axis=(-2, -1))
    return float(c) if c.ndim == 0 else c


def _check_window(d, M, x, margin=1e-12):
    lo, hi = x_window(d, M)
    if not lo - margin <= x <= hi + margin:
        raise ContractError(f"x = {x} lies outside the admissible window ({lo}, {hi}]")


def coincidence_closed_form(d, M, x, purity) -> float:
    """Exact index of coincidence of a state with the given purity ``Tr(rho^2)``."""
    _check_window(d, M, x)
    if not 1 / d - 1e-12 <= purity <= 1 + 1e-12:
        raise ContractError(f"purity {purity} outside [1/d, 1] for d = {d}")
    return (d * (M * M * x - d) * purity + d**3 - M * M * x) / (d * M * (M - 1))


def coincidence_bound(d, M, x) -> float:
    """Upper bound ``(d-1)/d * (d^2 + M^2 x) / (M (M-1))`` on the index of coincidence."""
    _check_window(d, M, x)
    return (d - 1) / d * (d * d + M * M * x) / (M * (M - 1))


def _xlogx(p):
    p = np.asarray(p, dtype=float)
    out = np.zeros_like(p)
    pos = p > 0
    out[pos] = p[pos] * np.log(p[pos])
    return out


def shannon_entropies(p) -> tuple[np.ndarray, float]:
    """Per-row Shannon entropies and their average."""
    h = -_xlogx(p).sum(axis=-1)
    return h, float(np.mean(h))


def to_bits(h):
    """Convert nats to bits."""
    return np.asarray(h) / math.log(2)


@dataclass(frozen=True)
class CoincidenceReport:
    C: float
    C_closed: float
    C_bound: float
    purity: float

    @property
    def within_bound(self) -> bool:
        return self.C <= self.C_bound + 1e-10


def coincidence_report(m: SymmetricMeasurement, rho) -> CoincidenceReport:
    p = probabilities(m, rho)
    pur = min(max(purity(rho), 1 / m.d), 1.0)
    return CoincidenceReport(
        C=index_of_coincidence(p),
        C_closed=coincidence_closed_form(m.d, m.M, m.x, pur),
        C_bound=coincidence_bound(m.d, m.M, m.x),
        purity=purity(rho),
    )


@dataclass(frozen=True)
class EntropyCheck:
    average_entropy: float
    bound_ln_N_over_C: float
    satisfied: bool


def entropy_bound_check(m: SymmetricMeasurement, rho, slack=1e-10) -> EntropyCheck:
    """Compare the average Shannon entropy with ``ln(N/C)`` for one state."""
    p = probabilities(m, rho)
    _, avg = shannon_entropies(p)
    bound = math.log(m.N / index_of_coincidence(p))
    return EntropyCheck(avg, bound, avg >= bound - slack)


def analysis_rows(m: SymmetricMeasurement, states, class_name=None):
    """One dict per state with the CSV_COLUMNS fields."""
    label = class_name or f"({m.N},{m.M})"
    c_bound = coincidence_bound(m.d, m.M, m.x)
    for rho in states:
        rho = check_density(rho, m.d)
        p = probabilities(m, rho, check=False)
        pur = purity(rho)
        C = index_of_coincidence(p)
        C_closed = coincidence_closed_form(m.d, m.M, m.x, min(max(pur, 1 / m.d), 1.0))
        _, avg = shannon_entropies(p)
        bound = math.log(m.N / C)
        ok = (
            C <= c_bound + 1e-10
            and abs(C - C_closed) <= 1e-10
            and avg >= bound - 1e-10
        )
        yield {
            "class": label, "d": m.d, "N": m.N, "M": m.M, "x": m.x, "purity": pur,
            "C": C, "C_closed": C_closed, "C_bound": c_bound, "avgH": avg,
            "bound": bound, "ok": ok,
        }


def write_csv(rows, fh=None, columns=CSV_COLUMNS) -> str | None:
    """Write dict rows as CSV; returns the text when ``fh`` is None."""
    buf = io.StringIO() if fh is None else fh
    writer = csv.DictWriter(buf, fieldnames=list(columns), lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: (repr(v) if isinstance(v, float) else v) for k, v in row.items()})
    return buf.getvalue() if fh is None else None
