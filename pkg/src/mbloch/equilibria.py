"""Equilibrium families of the controlled system and their stability.

Every equilibrium lies on one of two lines: (M, 0, 0) on the x-axis or
(0, 0, M) on the z-axis.  The x-axis family is unstable for M != 0.  On
the z-axis the linearization has eigenvalues {0, +sqrt(kM), -sqrt(kM)}:
a real positive eigenvalue for M < 0 (instability), a pure imaginary
pair for M > 0, where nonlinear stability follows from the energy-Casimir
method: F = H - kM C has a critical point at (0, 0, M) and its second
variation restricted to ker dC is diag(-kM, 1), positive definite exactly
when M > 0.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import List, Optional, Tuple

from .core import State3, SystemParams
from .errors import InvalidParameterError

__all__ = [
    "Family",
    "Verdict",
    "Equilibrium",
    "StabilityVerdict",
    "eigenvalues_at",
    "arnold_test",
    "classify_equilibrium",
]


class Family(enum.Enum):
    E1 = "E1"  # (M, 0, 0)
    E2 = "E2"  # (0, 0, M)


class Verdict(enum.Enum):
    UNSTABLE = "Unstable"
    NONLINEAR_STABLE = "NonlinearStable"
    DEGENERATE_ORIGIN = "DegenerateOrigin"


@dataclass(frozen=True)
class Equilibrium:
    point: State3
    family: Family
    parameter_M: float

    def __post_init__(self):
        M = float(self.parameter_M)
        if not math.isfinite(M):
            raise InvalidParameterError(f"M must be finite, got {M!r}")
        template = (M, 0.0, 0.0) if self.family is Family.E1 else (0.0, 0.0, M)
        actual = (self.point.x, self.point.y, self.point.z)
        if actual != template:
            raise InvalidParameterError(
                f"point {actual} does not match family {self.family.value} "
                f"template {template}"
            )

    @classmethod
    def e1(cls, M: float) -> "Equilibrium":
        return cls(State3(M, 0.0, 0.0), Family.E1, float(M))

    @classmethod
    def e2(cls, M: float) -> "Equilibrium":
        return cls(State3(0.0, 0.0, M), Family.E2, float(M))


@dataclass(frozen=True)
class StabilityVerdict:
    verdict: Verdict
    eigenvalues: Tuple[complex, complex, complex]
    arnold_multiplier: Optional[float] = None
    arnold_form_diagonal: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        if not any(ev == 0 for ev in self.eigenvalues):
            raise ValueError("the linearization on these families always has "
                             "a zero eigenvalue")
        if self.verdict is Verdict.NONLINEAR_STABLE:
            d = self.arnold_form_diagonal
            if d is None or not (d[0] > 0 and d[1] > 0):
                raise ValueError("NonlinearStable requires a positive definite "
                                 "restricted second variation")


def eigenvalues_at(params: SystemParams, e: Equilibrium) -> List[complex]:
    """Closed-form spectrum of the linearization at an equilibrium.

    Family (0,0,M): {0, +sqrt(kM), -sqrt(kM)} (real for M < 0, pure
    imaginary for M > 0).  Family (M,0,0): {0, +sqrt(-k)|M|, -sqrt(-k)|M|}.
    """
    k = params.k
    M = e.parameter_M
    if e.family is Family.E2:
        lam = cmath.sqrt(complex(k * M, 0.0))
    else:
        lam = complex(math.sqrt(-k) * abs(M), 0.0)
    return [complex(0.0), lam, -lam]


def arnold_test(
    params: SystemParams, M: float
) -> Tuple[float, Tuple[float, float], bool]:
    """Energy-Casimir stability certificate at the z-axis point (0, 0, M).

    Returns (multiplier, diagonal, positive_definite): the unique
    multiplier lam = kM for which H - lam*C is critical at (0, 0, M), the
    diagonal (-kM, 1) of its second variation restricted to the kernel of
    dC there (spanned by the x and y directions), and whether that form
    is positive definite (equivalent to M > 0).
    """
    lam = params.k * M
    diagonal = (-params.k * M, 1.0)
    return lam, diagonal, diagonal[0] > 0.0


def classify_equilibrium(params: SystemParams, e: Equilibrium) -> StabilityVerdict:
    """Stability verdict for an equilibrium of either family.

    The origin M = 0 (common to both families) is reported as
    ``DEGENERATE_ORIGIN``: the linearization is nilpotent there and none
    of the closed-form certificates applies.
    """
    eigs = tuple(eigenvalues_at(params, e))
    M = e.parameter_M
    if M == 0.0:
        return StabilityVerdict(Verdict.DEGENERATE_ORIGIN, eigs)
    if e.family is Family.E1:
        return StabilityVerdict(Verdict.UNSTABLE, eigs)
    lam, diagonal, posdef = arnold_test(params, M)
    if M < 0.0:
        return StabilityVerdict(Verdict.UNSTABLE, eigs, lam, diagonal)
    return StabilityVerdict(Verdict.NONLINEAR_STABLE, eigs, lam, diagonal)
