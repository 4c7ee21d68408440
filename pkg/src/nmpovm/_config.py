"""Numerical tolerances and the exception hierarchy shared by every module."""

from __future__ import annotations

import os
from dataclasses import dataclass, replace

TOL_ENV_VAR = "NMPOVM_TOL"


@dataclass(frozen=True)
class Tolerances:
    """Central tolerance record.

    ``hermitian`` and ``positivity`` gate input contracts, ``validation`` is the
    default pass threshold of the report-style validators, ``rank`` is relative
    to the largest singular value, ``classify`` is used for x comparisons,
    ``window`` is the margin on the open lower end of the x window and
    ``boundary`` the slack granted before a separability criterion flags.
    """

    hermitian: float = 1e-10
    positivity: float = 1e-10
    validation: float = 1e-10
    rank: float = 1e-8
    classify: float = 1e-8
    window: float = 1e-12
    boundary: float = 1e-10

    def with_validation(self, tol: float) -> "Tolerances":
        return replace(self, hermitian=tol, positivity=tol, validation=tol)


DEFAULT_TOLERANCES = Tolerances()


def tolerances_from_env(env=None) -> Tolerances:
    """Default tolerances, with the validation tolerance overridable by ``NMPOVM_TOL``."""
    env = os.environ if env is None else env
    raw = env.get(TOL_ENV_VAR)
    if not raw:
        return DEFAULT_TOLERANCES
    try:
        tol = float(raw)
    except ValueError:
        raise ValueError(f"{TOL_ENV_VAR}={raw!r} is not a number") from None
    if not tol > 0:
        raise ValueError(f"{TOL_ENV_VAR} must be positive, got {tol}")
    return DEFAULT_TOLERANCES.with_validation(tol)


class NMPOVMError(Exception):
    """Base class for all errors raised by this package."""


class ContractError(NMPOVMError, ValueError):
    """An input violates a documented precondition."""


class ArityError(ContractError):
    """(N, M) does not satisfy N(M-1) = d^2 - 1."""


class PositivityError(NMPOVMError, ValueError):
    """A constructed element is not positive semidefinite."""

    def __init__(self, message, alpha=None, k=None, eigenvalue=None):
        super().__init__(message)
        self.alpha = alpha
        self.k = k
        self.eigenvalue = eigenvalue


class SingularFrameError(NMPOVMError, ValueError):
    """The dual frame does not exist (x = d/M^2, i.e. x = y = z)."""


class DegenerateBasisError(NMPOVMError, ValueError):
    """All H operators vanish, so no admissible range for t exists."""
