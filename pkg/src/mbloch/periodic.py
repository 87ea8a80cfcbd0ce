"""Periodic orbits around the stable z-axis equilibria.

Every integral surface

    I(x, y, z) = -k M x^2 + y^2 + k (z - M)^2 = eps^2          (M > 0)

close enough to the equilibrium (0, 0, M) carries a periodic orbit whose
period approaches 2 pi / sqrt(-kM) as eps -> 0.  ``find_periodic`` seeds
exactly on the surface at (eps / sqrt(-kM), 0, M), integrates, and reads
the period off the first same-direction return to the half-plane section
{y = 0, x > 0}.  Because the flow is integrable, the trajectory closes by
itself up to integrator error; a one-dimensional correction of the seed
along the surface exists as a fallback but is not normally exercised.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

from .core import State3, SystemParams
from .errors import InvalidParameterError, NoReturnError, SeedOffSurfaceError
from .integrate import Trajectory, find_section_crossings, integrate

__all__ = [
    "PeriodicOrbit",
    "lyapunov_integral",
    "linearized_period",
    "find_periodic",
    "closed_orbit_through",
]

CLOSURE_TOL = 1e-7


@dataclass(frozen=True)
class PeriodicOrbit:
    initial_state: State3
    period: float
    closure_error: float
    surface_eps: float

    def __post_init__(self):
        if not self.period > 0:
            raise ValueError(f"period must be positive, got {self.period!r}")
        if self.closure_error > CLOSURE_TOL:
            raise ValueError(
                f"closure error {self.closure_error!r} exceeds {CLOSURE_TOL}"
            )


def lyapunov_integral(params: SystemParams, M: float, s: State3) -> float:
    """The quadratic constant of motion -k M x^2 + y^2 + k (z - M)^2,
    critical and positive definite (in x, y) at the equilibrium (0, 0, M)."""
    if M <= 0:
        raise InvalidParameterError(f"M must be positive, got {M!r}")
    k = params.k
    dz = s.z - M
    return -k * M * s.x * s.x + s.y * s.y + k * dz * dz


def linearized_period(params: SystemParams, M: float) -> float:
    """Period 2 pi / sqrt(-kM) of the linearized oscillation around
    (0, 0, M)."""
    if M <= 0:
        raise InvalidParameterError(f"M must be positive, got {M!r}")
    return 2.0 * math.pi / math.sqrt(-params.k * M)


def closed_orbit_through(
    params: SystemParams,
    seed: State3,
    tol: float = 1e-11,
    t_max: Optional[float] = None,
    section: Optional[Callable[[State3], float]] = None,
    direction: str = "+",
    accept: Optional[Callable[[State3], bool]] = None,
) -> Tuple[float, float, Trajectory]:
    """Close a trajectory from a seed known to lie on a bounded fiber
    component.

    Returns (period, closure_error, trajectory).  The default section is
    the plane through the seed's first coordinate that the seed leaves
    transversally: {x = seed.x} for a seed with y != 0, {y = seed.y}
    otherwise.
    """
    if section is None:
        if seed.y != 0.0:
            section = lambda s: s.x - seed.x  # noqa: E731
        else:
            section = lambda s: s.y - seed.y  # noqa: E731
    if t_max is None:
        t_max = 200.0 / math.sqrt(-params.k)
    # grow the window geometrically so short periods are not charged for
    # the full search horizon
    window = t_max / 8.0
    while True:
        traj = integrate(params, seed, (0.0, window), tol)
        crossings = find_section_crossings(traj, section, direction)
        if accept is not None:
            crossings = [(t, s) for t, s in crossings if accept(s)]
        if crossings:
            break
        if window >= t_max:
            raise NoReturnError(
                f"no section return within t={t_max!r} from seed {seed!r}"
            )
        window = min(2.0 * window, t_max)
    period, state = crossings[0]
    closure = state.distance_to(seed)
    return period, closure, traj


def find_periodic(
    params: SystemParams, M: float, eps: float, tol: float = 1e-10
) -> PeriodicOrbit:
    """The periodic orbit on the integral surface I = eps^2 around
    (0, 0, M).

    Seeds at (eps / sqrt(-kM), 0, M), which satisfies the surface
    equation exactly, and measures the period as the first return to
    {y = 0, x > 0} crossed in the same direction as at the start.  If the
    trajectory fails to close to 1e-7 (it does close, up to integrator
    error, since trajectories are fiber components), a one-dimensional
    secant correction of the seed within the surface is attempted.
    """
    if M <= 0:
        raise InvalidParameterError(f"M must be positive, got {M!r}")
    omega = math.sqrt(-params.k * M)
    if not (0.0 < eps <= 0.2 * omega * M):
        raise InvalidParameterError(
            f"eps must lie in (0, {0.2 * omega * M!r}] for M={M!r}, got {eps!r}"
        )
    t_lin = linearized_period(params, M)

    def run(x0: float) -> Tuple[float, float, State3]:
        arg = (eps * eps + params.k * M * x0 * x0) / params.k
        if arg < -1e-10 * max(1.0, eps * eps):
            raise SeedOffSurfaceError(
                f"no surface point with x={x0!r} at eps={eps!r}"
            )
        s0 = State3(x0, 0.0, M + math.sqrt(max(arg, 0.0)))
        if abs(lyapunov_integral(params, M, s0) - eps * eps) > 1e-10 * max(
            1.0, eps * eps
        ):
            raise SeedOffSurfaceError(f"seed {s0!r} violates the surface equation")
        period, closure, _traj = closed_orbit_through(
            params,
            s0,
            tol=tol,
            t_max=20.0 * t_lin,
            section=lambda s: s.y,
            direction="-",
            accept=lambda s: s.x > 0.0,
        )
        return period, closure, s0

    x_seed = eps / omega
    period, closure, s0 = run(x_seed)
    if closure > CLOSURE_TOL:
        # secant sweep over nearby on-surface seeds; keeps the best
        best = (closure, period, s0)
        x_a, x_b = x_seed, x_seed * (1.0 + 1e-4)
        c_a = closure
        for _ in range(8):
            p_b, c_b, s_b = run(x_b)
            if c_b < best[0]:
                best = (c_b, p_b, s_b)
            if best[0] <= CLOSURE_TOL or c_b == c_a:
                break
            x_a, x_b, c_a = x_b, x_b - c_b * (x_b - x_a) / (c_b - c_a), c_b
        closure, period, s0 = best
    return PeriodicOrbit(
        initial_state=s0,
        period=period,
        closure_error=closure,
        surface_eps=eps,
    )
