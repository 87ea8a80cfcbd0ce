"""Canonical four-dimensional realization of the controlled system.

The canonical system on R^4 with symplectic form dp1 ^ dq1 + dp2 ^ dq2 and
Hamiltonian

    Ht = (p1^2 + k p2^2 - k p2 q1^2 + (k/4) q1^4) / 2

projects onto the three-dimensional flow through the surjective submersion

    phi(q1, q2, p1, p2) = (q1, p1, p2 - q1^2 / 2).

The momentum p2 is a second first integral in involution with Ht, and the
differentials of the pair (Ht, p2) are independent away from the set
{p1 = 0, q1^3 - 2 q1 p2 = 0}, which is what ``in_omega`` tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import State3, SystemParams
from .errors import InvalidParameterError, InvalidStateError

__all__ = [
    "State4",
    "vector_field4",
    "realization_map",
    "realization_jacobian",
    "hamiltonian4",
    "grad_hamiltonian4",
    "momentum_integral",
    "canonical_bracket",
    "in_omega",
]


@dataclass(frozen=True)
class State4:
    """Canonical coordinates (q1, q2, p1, p2)."""

    q1: float
    q2: float
    p1: float
    p2: float

    def __post_init__(self):
        for name in ("q1", "q2", "p1", "p2"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise InvalidStateError(f"coordinate {name} must be finite, got {v!r}")
            object.__setattr__(self, name, v)

    def to_array(self) -> np.ndarray:
        return np.array([self.q1, self.q2, self.p1, self.p2])

    @classmethod
    def from_array(cls, a) -> "State4":
        return cls(float(a[0]), float(a[1]), float(a[2]), float(a[3]))


def vector_field4(params: SystemParams, s4: State4) -> State4:
    """Hamilton's equations of Ht:
    (p1, k p2 - (k/2) q1^2, k p2 q1 - (k/2) q1^3, 0)."""
    k = params.k
    q1 = s4.q1
    return State4(
        s4.p1,
        k * s4.p2 - 0.5 * k * q1 * q1,
        k * s4.p2 * q1 - 0.5 * k * q1 * q1 * q1,
        0.0,
    )


def realization_map(s4: State4) -> State3:
    """Projection phi(q1, q2, p1, p2) = (q1, p1, p2 - q1^2 / 2)."""
    return State3(s4.q1, s4.p1, s4.p2 - 0.5 * s4.q1 * s4.q1)


def realization_jacobian(s4: State4) -> np.ndarray:
    """Derivative of the projection, rows
    ((1,0,0,0), (0,0,1,0), (-q1,0,0,1))."""
    return np.array(
        [
            [1.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0],
            [-s4.q1, 0.0, 0.0, 1.0],
        ]
    )


def hamiltonian4(params: SystemParams, s4: State4) -> float:
    """Canonical Hamiltonian
    Ht = (p1^2 + k p2^2 - k p2 q1^2 + (k/4) q1^4) / 2."""
    k = params.k
    q1sq = s4.q1 * s4.q1
    return 0.5 * (
        s4.p1 * s4.p1
        + k * s4.p2 * s4.p2
        - k * s4.p2 * q1sq
        + 0.25 * k * q1sq * q1sq
    )


def grad_hamiltonian4(params: SystemParams, s4: State4) -> np.ndarray:
    """Gradient of Ht in the coordinate order (q1, q2, p1, p2)."""
    k = params.k
    q1 = s4.q1
    return np.array(
        [
            -k * s4.p2 * q1 + 0.5 * k * q1 * q1 * q1,
            0.0,
            s4.p1,
            k * s4.p2 - 0.5 * k * q1 * q1,
        ]
    )


def momentum_integral(s4: State4) -> float:
    """The second first integral: the momentum p2."""
    return s4.p2


def canonical_bracket(df: np.ndarray, dg: np.ndarray) -> float:
    """Canonical bracket of two gradients in the order (q1, q2, p1, p2):
    sum_i (dF/dq_i dG/dp_i - dF/dp_i dG/dq_i)."""
    df = np.asarray(df, dtype=float)
    dg = np.asarray(dg, dtype=float)
    return float(df[0] * dg[2] - df[2] * dg[0] + df[1] * dg[3] - df[3] * dg[1])


def in_omega(s4: State4, tol: float) -> bool:
    """Whether the differentials of (Ht, p2) are independent at s4.

    Returns ``False`` exactly when both |p1| <= tol and
    |q1^3 - 2 q1 p2| <= tol; the excluded set is where the Jacobian of
    the pair of integrals drops below rank two.
    """
    if tol < 0:
        raise InvalidParameterError(f"tol must be >= 0, got {tol!r}")
    degenerate = abs(s4.p1) <= tol and abs(s4.q1 ** 3 - 2.0 * s4.q1 * s4.p2) <= tol
    return not degenerate
