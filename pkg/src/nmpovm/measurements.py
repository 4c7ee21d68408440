"""Informationally complete symmetric measurements, i.e. (N, M)-POVMs.

An (N, M)-POVM is a family of ``N`` POVMs with ``M`` elements each whose
pairwise Hilbert-Schmidt products take only four values::

    Tr E[a,k]          = w = d / M
    Tr E[a,k]^2        = x
    Tr E[a,k] E[a,l]   = y = (d - M x) / (M (M - 1))     (l != k)
    Tr E[a,k] E[b,l]   = z = d / M^2                     (b != a)

Informational completeness forces ``N (M - 1) = d^2 - 1``. Elements are built
from a grouped traceless orthonormal basis ``G[a,k]`` as
``E[a,k] = I/M + t H[a,k]``, and ``x`` follows from ``t`` in closed form.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._config import (
    DEFAULT_TOLERANCES,
    ArityError,
    ContractError,
    DegenerateBasisError,
    PositivityError,
    SingularFrameError,
)
from .bases import GroupedBasis, HermitianBasis, basis_by_name, group
from .linalg import (
    check_density,
    eigvalsh_stack,
    gram_matrix,
    numerical_rank,
)
from .serialization import decode_matrix, encode_matrix

CLASS_LABELS = {
    "i": "general SIC POVM",
    "ii": "MUMs",
    "iii": "M=2",
    "iv": "M=d+2",
}


# ---------------------------------------------------------------- parameters


def _check_arity(d, N, M):
    if d < 2:
        raise ContractError(f"dimension must be at least 2, got {d}")
    if N < 1 or M < 2 or N * (M - 1) != d * d - 1:
        raise ArityError(f"(N, M) = ({N}, {M}) violates N(M-1) = d^2-1 = {d * d - 1}")


def x_window(d: int, M: int) -> tuple[float, float]:
    """Open-closed window ``(d/M^2, min(d^2/M^2, d/M)]`` for the purity parameter x."""
    return d / M**2, min(d**2 / M**2, d / M)


def x_from_t(d: int, M: int, t: float) -> float:
    return d / M**2 + t**2 * (M - 1) * (math.sqrt(M) + 1) ** 2


@dataclass(frozen=True)
class MeasurementParams:
    """The scalars (d, N, M, w, x, y, z, t) of an (N, M)-POVM.

    ``x`` is always derived from ``t``; it is never read off the elements.
    """

    d: int
    N: int
    M: int
    t: float
    w: float
    x: float
    y: float
    z: float

    @classmethod
    def from_t(cls, d: int, N: int, M: int, t: float) -> "MeasurementParams":
        _check_arity(d, N, M)
        x = x_from_t(d, M, t)
        return cls(
            d=d, N=N, M=M, t=float(t),
            w=d / M,
            x=x,
            y=(d - M * x) / (M * (M - 1)),
            z=d / M**2,
        )

    def in_window(self, margin=None) -> bool:
        margin = DEFAULT_TOLERANCES.window if margin is None else margin
        lo, hi = x_window(self.d, self.M)
        return lo + margin < self.x <= hi + margin

    @property
    def is_degenerate(self) -> bool:
        return abs(self.x - self.d / self.M**2) <= DEFAULT_TOLERANCES.window


@dataclass(frozen=True, eq=False)
class SymmetricMeasurement:
    """An assembled (N, M)-POVM; ``elements`` has shape ``(N, M, d, d)``."""

    params: MeasurementParams
    elements: np.ndarray
    basis_id: str = "custom"
    permutation: tuple = ()

    def __post_init__(self):
        p = self.params
        el = np.asarray(self.elements, dtype=complex)
        if el.shape != (p.N, p.M, p.d, p.d):
            raise ContractError(
                f"elements must have shape {(p.N, p.M, p.d, p.d)}, got {el.shape}"
            )
        el.setflags(write=False)
        object.__setattr__(self, "elements", el)
        object.__setattr__(self, "permutation", tuple(int(i) for i in self.permutation))

    @property
    def d(self) -> int:
        return self.params.d

    @property
    def N(self) -> int:
        return self.params.N

    @property
    def M(self) -> int:
        return self.params.M

    @property
    def x(self) -> float:
        return self.params.x

    @property
    def t(self) -> float:
        return self.params.t

    def flat_elements(self) -> np.ndarray:
        return self.elements.reshape(-1, self.d, self.d)

    def transposed(self) -> "SymmetricMeasurement":
        """Elementwise transpose of every element; preserves all four trace relations."""
        return SymmetricMeasurement(
            self.params,
            np.swapaxes(self.elements, -1, -2).copy(),
            basis_id=self.basis_id + "^T",
            permutation=self.permutation,
        )


# ---------------------------------------------------------------- enumeration


class AdmissiblePair(NamedTuple):
    N: int
    M: int
    classes: tuple
    projective_possible: bool

    @property
    def class_name(self):
        return self.classes[0] if self.classes else None


def prop1_classes(d: int, N: int, M: int) -> tuple:
    """Labels (i)-(iv) of the four families present in every dimension.

    For d = 2 the families coincide pairwise, so a pair may carry two labels.
    """
    found = []
    if (N, M) == (1, d * d):
        found.append("i")
    if (N, M) == (d + 1, d):
        found.append("ii")
    if (N, M) == (d * d - 1, 2):
        found.append("iii")
    if (N, M) == (d - 1, d + 2):
        found.append("iv")
    return tuple(found)


def admissible_pairs(d: int) -> list[AdmissiblePair]:
    """All (N, M) with ``N (M - 1) = d^2 - 1``, sorted by M.

    Every divisor of ``d^2 - 1`` is listed. For d = 5 this gives eight pairs,
    among them (8, 4) and (3, 9) but also (12, 3) and (2, 13).
    """
    if d < 2:
        raise ContractError(f"dimension must be at least 2, got {d}")
    n = d * d - 1
    pairs = []
    for m1 in range(1, n + 1):
        if n % m1 == 0:
            N, M = n // m1, m1 + 1
            pairs.append(AdmissiblePair(N, M, prop1_classes(d, N, M), M >= d))
    return pairs


# ---------------------------------------------------------------- construction


def build_h_operators(g: GroupedBasis) -> np.ndarray:
    """H operators of shape ``(N, M, d, d)``.

    ``H[a,k] = G_a - sqrt(M)(sqrt(M)+1) G[a,k]`` for ``k < M-1`` and
    ``H[a,M-1] = (sqrt(M)+1) G_a`` with ``G_a`` the group sum.
    """
    M = g.n_outcomes
    s = math.sqrt(M)
    g_sum = g.ops.sum(axis=1)
    h = np.empty((g.n_groups, M, g.dim, g.dim), dtype=complex)
    h[:, :-1] = g_sum[:, None] - s * (s + 1) * g.ops
    h[:, -1] = (s + 1) * g_sum
    return h


def t_range(h) -> tuple[float, float]:
    """Interval ``[t_neg, t_pos]`` of t for which ``I/M + t H`` is positive.

    ``t_neg = -1/(M lambda_max)`` and ``t_pos = 1/(M |lambda_min|)`` where the
    extremes are taken over all H operators.
    """
    h = np.asarray(h)
    M = h.shape[1]
    ev = eigvalsh_stack(h)
    lam_min, lam_max = float(ev.min()), float(ev.max())
    scale = max(abs(lam_min), abs(lam_max))
    if scale == 0 or lam_max <= 0 or lam_min >= 0:
        raise DegenerateBasisError("H operators vanish; admissible t range is undefined")
    return -1 / (M * lam_max), 1 / (M * abs(lam_min))


def resolve_t(t, g: GroupedBasis) -> float:
    """Turn ``'max'``/``'min'`` or a number into a concrete t."""
    if isinstance(t, str):
        key = t.strip().lower()
        if key in ("max", "pos", "t_pos"):
            return t_range(build_h_operators(g))[1]
        if key in ("min", "neg", "t_neg"):
            return t_range(build_h_operators(g))[0]
        return float(key)
    return float(t)


def assemble(g: GroupedBasis, t="max", tol=None) -> SymmetricMeasurement:
    """Elements ``E[a,k] = I/M + t H[a,k]`` for a grouped basis.

    Raises
    ------
    PositivityError
        If some element has an eigenvalue below ``-tol``, i.e. t lies outside
        :func:`t_range`.
    """
    tol = DEFAULT_TOLERANCES.positivity if tol is None else tol
    t = resolve_t(t, g)
    d, N, M = g.dim, g.n_groups, g.n_outcomes
    h = build_h_operators(g)
    elements = np.eye(d) / M + t * h
    mins = eigvalsh_stack(elements)[..., 0]
    worst = np.unravel_index(np.argmin(mins), mins.shape)
    if mins[worst] < -tol:
        a, k = (int(i) for i in worst)
        raise PositivityError(
            f"t = {t:.12g} is outside the admissible range {t_range(h)}: "
            f"element ({a}, {k}) has eigenvalue {mins[worst]:.3e}",
            alpha=a, k=k, eigenvalue=float(mins[worst]),
        )
    params = MeasurementParams.from_t(d, N, M, t)
    if params.is_degenerate:
        warnings.warn(
            "t = 0: every element equals I/M and the measurement is not informationally complete",
            stacklevel=2,
        )
    return SymmetricMeasurement(params, elements, basis_id=g.basis_id, permutation=g.permutation)


def build(d, N, M, basis="gellmann", t="max", permutation=None, tol=None) -> SymmetricMeasurement:
    """Convenience pipeline: basis -> grouping -> assembly."""
    _check_arity(d, N, M)
    if not isinstance(basis, HermitianBasis):
        basis = basis_by_name(basis, d)
    if basis.dim != d:
        raise ContractError(f"basis has dimension {basis.dim}, expected {d}")
    return assemble(group(basis, N, M - 1, permutation), t, tol)


# ---------------------------------------------------------------- validation


@dataclass(frozen=True)
class SymmetryReport:
    """Maximum deviations of every defining relation, each with its location."""

    deviations: dict
    locations: dict
    measured_x: float
    predicted_x: float
    min_eigenvalue: float
    y_nonnegative: bool
    x_in_window: bool
    tol: float

    @property
    def passed(self) -> bool:
        return (
            all(v <= self.tol for v in self.deviations.values())
            and self.min_eigenvalue >= -self.tol
            and self.y_nonnegative
            and self.x_in_window
        )

    def as_dict(self) -> dict:
        return {
            "deviations": dict(self.deviations),
            "locations": {k: list(v) for k, v in self.locations.items()},
            "measured_x": self.measured_x,
            "predicted_x": self.predicted_x,
            "min_eigenvalue": self.min_eigenvalue,
            "y_nonnegative": self.y_nonnegative,
            "x_in_window": self.x_in_window,
            "tol": self.tol,
            "passed": self.passed,
        }


def _masked_max(dev, mask):
    if not mask.any():
        return 0.0, ()
    masked = np.where(mask, dev, -np.inf)
    loc = np.unravel_index(np.argmax(masked), masked.shape)
    return float(masked[loc]), tuple(int(i) for i in loc)


def validate_symmetry(m: SymmetricMeasurement, tol=None) -> SymmetryReport:
    """Measure every trace relation of an (N, M)-POVM against its parameters."""
    tol = DEFAULT_TOLERANCES.validation if tol is None else tol
    p = m.params
    N, M, d = p.N, p.M, p.d
    el = m.elements
    gram = gram_matrix(m.flat_elements()).reshape(N, M, N, M)
    a = np.arange(N)[:, None, None, None]
    k = np.arange(M)[None, :, None, None]
    b = np.arange(N)[None, None, :, None]
    l = np.arange(M)[None, None, None, :]
    same_group = np.broadcast_to(a == b, gram.shape)
    same_elem = same_group & np.broadcast_to(k == l, gram.shape)

    target = np.where(same_elem, p.x, np.where(same_group, p.y, p.z))
    dev = np.abs(gram - target)
    deviations, locations = {}, {}
    for name, mask in (
        ("x", same_elem),
        ("y", same_group & ~same_elem),
        ("z", ~same_group),
    ):
        deviations[name], locations[name] = _masked_max(dev, mask)

    tr_dev = np.abs(np.trace(el, axis1=-2, axis2=-1) - p.w)
    loc = np.unravel_index(np.argmax(tr_dev), tr_dev.shape)
    deviations["w"], locations["w"] = float(tr_dev[loc]), tuple(int(i) for i in loc)

    comp = np.abs(el.sum(axis=1) - np.eye(d)).reshape(N, -1).max(axis=1)
    deviations["completeness"] = float(comp.max())
    locations["completeness"] = (int(np.argmax(comp)),)

    herm = np.abs(el - np.swapaxes(el, -1, -2).conj()).reshape(N, M, -1).max(axis=-1)
    loc = np.unravel_index(np.argmax(herm), herm.shape)
    deviations["hermiticity"], locations["hermiticity"] = float(herm[loc]), tuple(int(i) for i in loc)

    mins = eigvalsh_stack(el)[..., 0]
    loc = np.unravel_index(np.argmin(mins), mins.shape)
    locations["min_eigenvalue"] = tuple(int(i) for i in loc)

    measured_x = float(np.mean(np.real(np.diagonal(gram.reshape(N * M, N * M)))))
    return SymmetryReport(
        deviations=deviations,
        locations=locations,
        measured_x=measured_x,
        predicted_x=p.x,
        min_eigenvalue=float(mins[loc]),
        y_nonnegative=p.y >= -tol,
        x_in_window=p.in_window(),
        tol=tol,
    )


class ICResult(NamedTuple):
    complete: bool
    rank: int


def ic_check(m: SymmetricMeasurement, tol=None) -> ICResult:
    """Rank of the Gram matrix of all N*M elements; complete iff it equals d^2."""
    rank = numerical_rank(gram_matrix(m.flat_elements()), tol)
    return ICResult(rank == m.d**2, rank)


# ---------------------------------------------------------------- reconstruction


def dual_frame(m: SymmetricMeasurement) -> np.ndarray:
    """Operators ``F[a,k]`` with ``rho = sum p[a,k] F[a,k]``.

    ``F = (E - A I) / (x - y)`` with ``A = ((N-1) z + y) / (N w)``.
    """
    p = m.params
    if p.is_degenerate:
        raise SingularFrameError(
            f"x = {p.x:.15g} equals d/M^2; the measurement has no dual frame"
        )
    shift = ((p.N - 1) * p.z + p.y) / (p.N * p.w)
    return (m.elements - shift * np.eye(p.d)) / (p.x - p.y)


def probabilities(m: SymmetricMeasurement, rho, check=True) -> np.ndarray:
    """Outcome table ``p[a,k] = Re Tr(E[a,k] rho)``, shape ``(N, M)``.

    Values in ``[-1e-12, 0)`` are clamped to zero.
    """
    if check:
        rho = check_density(rho, m.d)
    p = np.real(np.einsum("akij,ji->ak", m.elements, np.asarray(rho)))
    return np.where((p < 0) & (p >= -1e-12), 0.0, p)


def probabilities_batch(m: SymmetricMeasurement, states) -> np.ndarray:
    """Outcome tables for a stack of states, shape ``(n, N, M)``; no validation."""
    return np.real(np.einsum("akij,nji->nak", m.elements, np.asarray(states)))


def reconstruct(m: SymmetricMeasurement, p, frame=None) -> np.ndarray:
    """State estimate ``sum_{a,k} p[a,k] F[a,k]`` from an outcome table.

    ``p`` may also be a stack of tables of shape ``(n, N, M)``.
    """
    p = np.asarray(p, dtype=float)
    if p.shape[-2:] != (m.N, m.M):
        raise ContractError(f"probability table must have shape ({m.N}, {m.M}), got {p.shape}")
    _check_arity(m.d, m.N, m.M)
    frame = dual_frame(m) if frame is None else frame
    return np.einsum("...ak,akij->...ij", p, frame)


def recover_basis(m: SymmetricMeasurement) -> GroupedBasis:
    """Invert the construction, returning the grouped basis the elements came from."""
    p = m.params
    if p.t == 0:
        raise ContractError("t = 0: the basis cannot be recovered from I/M elements")
    s = math.sqrt(p.M)
    el = m.elements
    num = np.eye(p.d) + s * el[:, -1:] - s * (s + 1) * el[:, :-1]
    ops = num / (p.t * p.M * (s + 1) ** 2)
    perm = m.permutation or tuple(range(p.d**2 - 1))
    return GroupedBasis(p.d, p.N, p.M - 1, ops, perm, basis_id=m.basis_id)


# ---------------------------------------------------------------- classification


@dataclass(frozen=True)
class Classification:
    projective: bool
    optimal: bool
    classes: tuple
    x: float
    x_max: float

    @property
    def class_name(self):
        return self.classes[0] if self.classes else None

    def as_dict(self) -> dict:
        return {
            "projective": self.projective,
            "optimal": self.optimal,
            "class": self.class_name,
            "classes": list(self.classes),
            "x": self.x,
            "x_max": self.x_max,
        }


def classify(m: SymmetricMeasurement, tol=None) -> Classification:
    """Projective / optimal flags and the family label of a measurement."""
    tol = DEFAULT_TOLERANCES.classify if tol is None else tol
    p = m.params
    x_max = x_window(p.d, p.M)[1]
    return Classification(
        projective=abs(p.x - p.d**2 / p.M**2) <= tol,
        optimal=abs(p.x - x_max) <= tol,
        classes=prop1_classes(p.d, p.N, p.M),
        x=p.x,
        x_max=x_max,
    )


# ---------------------------------------------------------------- files


def measurement_to_dict(m: SymmetricMeasurement) -> dict:
    p = m.params
    return {
        "d": p.d,
        "N": p.N,
        "M": p.M,
        "t": p.t,
        "x": p.x,
        "elements": [[encode_matrix(e) for e in row] for row in m.elements],
        "basis_id": m.basis_id,
        "permutation": list(m.permutation),
    }


def measurement_from_dict(data: dict) -> SymmetricMeasurement:
    try:
        d, N, M, t = int(data["d"]), int(data["N"]), int(data["M"]), float(data["t"])
        elements = np.array(
            [[decode_matrix(e, d) for e in row] for row in data["elements"]], dtype=complex
        ).reshape(N, M, d, d)
    except (KeyError, TypeError, ValueError) as exc:
        raise ContractError(f"malformed measurement document: {exc}") from None
    params = MeasurementParams.from_t(d, N, M, t)
    if "x" in data and abs(float(data["x"]) - params.x) > 1e-12:
        raise ContractError(f"stored x = {data['x']} disagrees with x(t) = {params.x}")
    return SymmetricMeasurement(
        params,
        elements,
        basis_id=data.get("basis_id", "custom"),
        permutation=data.get("permutation", ()),
    )


def save_measurement(m: SymmetricMeasurement, path, extra=None) -> None:
    doc = measurement_to_dict(m)
    if extra:
        doc.update(extra)
    with open(path, "w") as fh:
        json.dump(doc, fh, indent=1)
        fh.write("\n")


def load_measurement(path) -> SymmetricMeasurement:
    with open(path) as fh:
        return measurement_from_dict(json.load(fh))
