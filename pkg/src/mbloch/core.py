"""Phase space, vector field, conserved quantities and Poisson structure
of the real-valued Maxwell-Bloch system with quadratic state feedback.

The controlled system on R^3 is

    dx/dt = y
    dy/dt = k x z
    dz/dt = -x y

with a tuning parameter k < 0.  The flow is Hamiltonian with respect to
the Poisson matrix

    Pi(x, y, z) = [[ 0,  1, 0],
                   [-1,  0, x],
                   [ 0, -x, 0]]

with Hamiltonian H(x, y, z) = (y^2 + k z^2)/2, while C(x, y, z) = x^2/2 + z
is a Casimir of the structure.  The identities X = Pi grad H and
Pi grad C = 0 hold in closed form and are enforced by the test suite.

All types are immutable values and all operations are pure functions, so
everything here is safe to share between threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidParameterError, InvalidStateError

__all__ = [
    "SystemParams",
    "State3",
    "ECValue",
    "vector_field",
    "jacobian",
    "hamiltonian",
    "casimir",
    "energy_casimir",
    "poisson_matrix",
    "poisson_bracket",
    "grad_hamiltonian",
    "grad_casimir",
]

GradientFn = Callable[["State3"], np.ndarray]


@dataclass(frozen=True)
class SystemParams:
    """Tuning parameter of the quadratic feedback u = (k - 1) x z.

    The library covers the strongly controlled regime only: construction
    with k >= 0 is rejected outright rather than silently producing a
    system whose stability and level-set classification would be
    different.
    """

    k: float

    def __post_init__(self):
        k = float(self.k)
        if not math.isfinite(k):
            raise InvalidParameterError(f"k must be finite, got {self.k!r}")
        if k >= 0.0:
            raise InvalidParameterError(
                f"k must be strictly negative, got {k!r} (the k >= 0 regime "
                "is not supported)"
            )
        object.__setattr__(self, "k", k)


@dataclass(frozen=True)
class State3:
    """A point (x, y, z) of the three-dimensional phase space."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        for name in ("x", "y", "z"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise InvalidStateError(f"coordinate {name} must be finite, got {v!r}")
            object.__setattr__(self, name, v)

    def to_array(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z])

    @classmethod
    def from_array(cls, a) -> "State3":
        return cls(float(a[0]), float(a[1]), float(a[2]))

    def distance_to(self, other: "State3") -> float:
        return math.sqrt(
            (self.x - other.x) ** 2
            + (self.y - other.y) ** 2
            + (self.z - other.z) ** 2
        )


@dataclass(frozen=True)
class ECValue:
    """A point (h, c) in the plane of joint (Hamiltonian, Casimir) levels."""

    h: float
    c: float

    def __post_init__(self):
        for name in ("h", "c"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise InvalidStateError(f"level {name} must be finite, got {v!r}")
            object.__setattr__(self, name, v)


def vector_field(params: SystemParams, s: State3) -> State3:
    """Right-hand side (y, k x z, -x y) of the controlled system."""
    return State3(s.y, params.k * s.x * s.z, -s.x * s.y)


def jacobian(params: SystemParams, s: State3) -> np.ndarray:
    """Derivative matrix of the vector field, rows
    ((0, 1, 0), (k z, 0, k x), (-y, -x, 0))."""
    k = params.k
    return np.array(
        [
            [0.0, 1.0, 0.0],
            [k * s.z, 0.0, k * s.x],
            [-s.y, -s.x, 0.0],
        ]
    )


def hamiltonian(params: SystemParams, s: State3) -> float:
    """Conserved energy H = (y^2 + k z^2) / 2."""
    return 0.5 * (s.y * s.y + params.k * s.z * s.z)


def casimir(s: State3) -> float:
    """Casimir function C = x^2 / 2 + z."""
    return 0.5 * s.x * s.x + s.z


def energy_casimir(params: SystemParams, s: State3) -> ECValue:
    """The pair (H(s), C(s)); its fibers contain all trajectories."""
    return ECValue(hamiltonian(params, s), casimir(s))


def grad_hamiltonian(params: SystemParams, s: State3) -> np.ndarray:
    """Closed-form gradient (0, y, k z) of the Hamiltonian."""
    return np.array([0.0, s.y, params.k * s.z])


def grad_casimir(s: State3) -> np.ndarray:
    """Closed-form gradient (x, 0, 1) of the Casimir."""
    return np.array([s.x, 0.0, 1.0])


def poisson_matrix(s: State3) -> np.ndarray:
    """The Poisson matrix Pi at s; antisymmetric, with Pi[1, 2] = x."""
    return np.array(
        [
            [0.0, 1.0, 0.0],
            [-1.0, 0.0, s.x],
            [0.0, -s.x, 0.0],
        ]
    )


def poisson_bracket(f_grad: GradientFn, g_grad: GradientFn, s: State3) -> float:
    """Bracket {f, g}(s) = grad_f(s)^T Pi(s) grad_g(s).

    ``f_grad`` and ``g_grad`` are callbacks returning the 3-vector
    gradients of the two scalar fields at a state.
    """
    df = np.asarray(f_grad(s), dtype=float)
    dg = np.asarray(g_grad(s), dtype=float)
    if df.shape != (3,) or dg.shape != (3,):
        raise InvalidStateError("gradient callbacks must return 3-vectors")
    if not (np.all(np.isfinite(df)) and np.all(np.isfinite(dg))):
        raise InvalidStateError("gradient callbacks returned non-finite values")
    return float(df @ poisson_matrix(s) @ dg)
