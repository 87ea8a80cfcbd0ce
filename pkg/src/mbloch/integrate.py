"""Adaptive explicit integration of the 3D and 4D flows.

The stepper is the Dormand-Prince embedded 5(4) pair with a
proportional-integral step-size controller.  Each accepted step stores a
quintic Hermite interpolant (values and derivatives at both endpoints
plus at the midpoint, the midpoint being produced by the classical
fourth-order dense-output polynomial of the pair followed by one extra
right-hand-side evaluation), which is what event refinement and
trajectory resampling evaluate.

Solutions of this system may genuinely escape to infinity in finite time
(the secant-type level-set curves do), so a trajectory carries a status:
``COMPLETED`` for a full span, ``BLOW_UP`` once the state norm exceeds
1e12, ``MAX_STEPS`` if the step budget is exhausted.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, List, Tuple, Union

import numpy as np

from . import core
from .core import State3, SystemParams
from .errors import InvalidSpanError, ToleranceOutOfRangeError
from .symplectic import State4

__all__ = [
    "Status",
    "Trajectory",
    "DriftReport",
    "integrate",
    "integrate4",
    "find_section_crossings",
    "drift_report",
]

BLOWUP_NORM = 1e12
MAX_STEPS = 10_000_000
SECTION_REFINE_TOL = 1e-11

# Dormand-Prince 5(4) tableau.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
    np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84]),
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)
# Shampine's dense-output coefficients for the pair (interpolant in the
# powers theta^1..theta^4); used only to seed the quintic Hermite midpoint.
_P = np.array(
    [
        [
            1.0,
            -8048581381 / 2820520608,
            8663915743 / 2820520608,
            -12715105075 / 11282082432,
        ],
        [0.0, 0.0, 0.0, 0.0],
        [
            0.0,
            131558114200 / 32700410799,
            -68118460800 / 10900136933,
            87487479700 / 32700410799,
        ],
        [
            0.0,
            -1754552775 / 470086768,
            14199869525 / 1410260304,
            -10690763975 / 1880347072,
        ],
        [
            0.0,
            127303824393 / 49829197408,
            -318862633887 / 49829197408,
            701980252875 / 199316789632,
        ],
        [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0
# PI controller exponents for a 5th-order propagating method.
_ALPHA = 0.7 / 5.0
_BETA = 0.4 / 5.0


class Status(enum.Enum):
    COMPLETED = "Completed"
    BLOW_UP = "BlowUp"
    MAX_STEPS = "MaxSteps"


# Hermite nodes in local coordinates theta in [0, 1], each doubled
# because a value and a first derivative are prescribed there.
_HNODES = np.array([0.0, 0.0, 0.5, 0.5, 1.0, 1.0])


def _hermite_coefficients(y0, d0, ym, dm, y1, d1):
    """Newton divided-difference coefficients of the quintic through
    (value, derivative) data at theta = 0, 1/2, 1.  Derivatives are with
    respect to theta."""
    n = 6
    f = [y0, y0, ym, ym, y1, y1]
    derivs = [d0, dm, d1]
    table = [list(f)]
    for order in range(1, n):
        prev = table[-1]
        row = []
        for i in range(n - order):
            lo, hi = _HNODES[i], _HNODES[i + order]
            if hi == lo:
                # repeated node: first-order difference is the derivative
                row.append(derivs[i // 2])
            else:
                row.append((prev[i + 1] - prev[i]) / (hi - lo))
        table.append(row)
    return [table[order][0] for order in range(n)]


@dataclass(frozen=True)
class _Segment:
    t0: float
    h: float
    coeffs: tuple  # 6 Newton coefficients, each an ndarray

    def eval(self, t: float) -> np.ndarray:
        theta = (t - self.t0) / self.h
        c = self.coeffs
        acc = c[5]
        for j in (4, 3, 2, 1, 0):
            acc = acc * (theta - _HNODES[j]) + c[j]
        return acc


@dataclass(frozen=True)
class DriftReport:
    """Maximum deviation of the two conserved quantities from their
    initial values along a stored trajectory."""

    max_abs_dH: float
    max_abs_dC: float

    def __post_init__(self):
        if self.max_abs_dH < 0 or self.max_abs_dC < 0:
            raise ValueError("drift maxima must be non-negative")


@dataclass(frozen=True)
class Trajectory:
    """Result of an adaptive integration.

    ``times``/``states`` hold the accepted step endpoints; ``at`` evaluates
    the stored dense output anywhere inside the integrated span.
    """

    times: np.ndarray
    states: np.ndarray
    tol: float
    status: Status
    segments: Tuple[_Segment, ...] = field(repr=False, default=())

    @property
    def dim(self) -> int:
        return self.states.shape[1]

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    @property
    def samples(self) -> List[Tuple[float, Union[State3, State4]]]:
        wrap = State3.from_array if self.dim == 3 else State4.from_array
        return [(float(t), wrap(s)) for t, s in zip(self.times, self.states)]

    def at(self, t: float) -> np.ndarray:
        """Dense-output state at time t (t within the integrated span)."""
        t0, t1 = float(self.times[0]), float(self.times[-1])
        if not (t0 <= t <= t1):
            raise InvalidSpanError(f"t={t!r} outside integrated span [{t0}, {t1}]")
        if not self.segments:
            return self.states[0].copy()
        idx = int(np.searchsorted(self.times, t, side="right")) - 1
        idx = min(max(idx, 0), len(self.segments) - 1)
        return self.segments[idx].eval(t)

    def wrap_state(self, y: np.ndarray) -> Union[State3, State4]:
        return State3.from_array(y) if self.dim == 3 else State4.from_array(y)


def _initial_step(f, t0, y0, f0, tol):
    """Starting step-size heuristic based on the first two derivatives."""
    scale = tol + tol * np.abs(y0)
    d0 = float(np.sqrt(np.mean((y0 / scale) ** 2)))
    d1 = float(np.sqrt(np.mean((f0 / scale) ** 2)))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + h0 * f0
    f1 = f(t0 + h0, y1)
    d2 = float(np.sqrt(np.mean(((f1 - f0) / scale) ** 2))) / h0
    if d1 <= 1e-15 and d2 <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1)


def _integrate_array(f, t0, t1, y0, tol, project=None):
    """Core stepper over raw arrays.  Returns (times, states, segments,
    status)."""
    y = np.asarray(y0, dtype=float)
    n = y.size
    t = float(t0)
    k = np.empty((7, n))
    k[0] = f(t, y)
    h = min(_initial_step(f, t, y, k[0], tol), t1 - t0)

    times = [t]
    states = [y.copy()]
    segments: list[_Segment] = []
    status = Status.COMPLETED
    err_prev = 1e-4
    nsteps = 0
    h_min_floor = 10.0 * np.finfo(float).eps

    while t < t1:
        if nsteps >= MAX_STEPS:
            status = Status.MAX_STEPS
            break
        nsteps += 1
        floor = h_min_floor * max(abs(t), 1.0)
        if t1 - t <= floor:
            break  # span exhausted to machine resolution
        if h <= floor:
            # controller drove the step to underflow: a pole is being
            # approached faster than the norm guard can fire
            status = (
                Status.BLOW_UP
                if float(np.max(np.abs(y))) > 1e6
                else Status.MAX_STEPS
            )
            break
        h_step = min(h, t1 - t)

        for i in range(1, 7):
            k[i] = f(t + _C[i] * h_step, y + h_step * (_A[i] @ k[:i]))
        y_new = y + h_step * (_B @ k)
        if not np.all(np.isfinite(y_new)):
            # treat as a failed step; shrink hard
            h = 0.1 * h_step
            continue
        err_vec = h_step * (_E @ k)
        scale = tol + tol * np.maximum(np.abs(y), np.abs(y_new))
        err = float(np.sqrt(np.mean((err_vec / scale) ** 2)))

        if err <= 1.0:
            # accept; k[6] = f(t+h, y_new) was the last stage (FSAL)
            theta_mid = 0.5
            powers = np.array(
                [theta_mid, theta_mid**2, theta_mid**3, theta_mid**4]
            )
            y_mid = y + h_step * ((_P @ powers) @ k)
            f_mid = f(t + 0.5 * h_step, y_mid)
            f_end = k[6]
            if project is not None:
                y_new = project(y_new)
                f_end = f(t + h_step, y_new)
            coeffs = _hermite_coefficients(
                y.copy(),
                h_step * k[0],
                y_mid,
                h_step * f_mid,
                y_new.copy(),
                h_step * f_end,
            )
            segments.append(_Segment(t, h_step, tuple(coeffs)))
            t = t + h_step
            y = y_new
            times.append(t)
            states.append(y.copy())
            k[0] = f_end if project is not None else k[6]

            if float(np.max(np.abs(y))) > BLOWUP_NORM:
                status = Status.BLOW_UP
                break
            err = max(err, 1e-10)
            factor = _SAFETY * err ** (-_ALPHA) * err_prev ** (_BETA)
            h = h_step * min(_MAX_FACTOR, max(_MIN_FACTOR, factor))
            err_prev = err
        else:
            h = h_step * max(_MIN_FACTOR, _SAFETY * err ** (-0.2))

    return np.array(times), np.array(states), tuple(segments), status


def _check_span_tol(t_span, tol):
    t0, t1 = float(t_span[0]), float(t_span[1])
    if not (math.isfinite(t0) and math.isfinite(t1)) or t1 <= t0:
        raise InvalidSpanError(f"need finite t1 > t0, got {t_span!r}")
    if not (1e-14 <= tol <= 1e-2):
        raise ToleranceOutOfRangeError(f"tol must lie in [1e-14, 1e-2], got {tol!r}")
    return t0, t1


def _level_set_projector(params: SystemParams, s0: State3):
    """One Gauss-Newton projection step onto the joint level set of the
    two conserved quantities through s0."""
    h0 = core.hamiltonian(params, s0)
    c0 = core.casimir(s0)
    k = params.k

    def project(y: np.ndarray) -> np.ndarray:
        for _ in range(2):
            s = State3.from_array(y)
            r = np.array([core.hamiltonian(params, s) - h0, core.casimir(s) - c0])
            J = np.array([[0.0, s.y, k * s.z], [s.x, 0.0, 1.0]])
            JJt = J @ J.T
            try:
                lam = np.linalg.solve(JJt, r)
            except np.linalg.LinAlgError:
                return y
            y = y - J.T @ lam
        return y

    return project


def integrate(
    params: SystemParams,
    s0: State3,
    t_span: Tuple[float, float],
    tol: float = 1e-10,
    project: bool = False,
) -> Trajectory:
    """Integrate the 3D flow from s0 over t_span at local tolerance tol.

    ``project=True`` re-projects each accepted step onto the joint level
    set of the conserved quantities (off by default; conservation is
    normally monitored, not imposed).
    """
    t0, t1 = _check_span_tol(t_span, tol)
    kpar = params.k

    def f(t, y):
        return np.array([y[1], kpar * y[0] * y[2], -y[0] * y[1]])

    projector = _level_set_projector(params, s0) if project else None
    times, states, segments, status = _integrate_array(
        f, t0, t1, s0.to_array(), tol, projector
    )
    return Trajectory(times, states, tol, status, segments)


def integrate4(
    params: SystemParams,
    s0: State4,
    t_span: Tuple[float, float],
    tol: float = 1e-10,
) -> Trajectory:
    """Integrate the canonical 4D flow from s0 over t_span."""
    t0, t1 = _check_span_tol(t_span, tol)
    kpar = params.k

    def f(t, y):
        q1 = y[0]
        return np.array(
            [
                y[2],
                kpar * y[3] - 0.5 * kpar * q1 * q1,
                kpar * y[3] * q1 - 0.5 * kpar * q1 * q1 * q1,
                0.0,
            ]
        )

    times, states, segments, status = _integrate_array(f, t0, t1, s0.to_array(), tol)
    return Trajectory(times, states, tol, status, segments)


def _refine_crossing(traj, section, t_lo, t_hi, g_lo, g_hi):
    """Bisection followed by a few secant iterations on dense output."""
    for _ in range(200):
        t_mid = 0.5 * (t_lo + t_hi)
        if t_mid == t_lo or t_mid == t_hi:
            break
        g_mid = section(traj.wrap_state(traj.at(t_mid)))
        if g_mid == 0.0:
            return t_mid
        if (g_lo < 0) == (g_mid < 0):
            t_lo, g_lo = t_mid, g_mid
        else:
            t_hi, g_hi = t_mid, g_mid
    t = t_lo if abs(g_lo) <= abs(g_hi) else t_hi
    g = g_lo if t == t_lo else g_hi
    # secant polish in case the value is still above the refinement target
    t_prev, g_prev = (t_hi, g_hi) if t == t_lo else (t_lo, g_lo)
    for _ in range(10):
        if abs(g) <= SECTION_REFINE_TOL or g == g_prev:
            break
        t_next = t - g * (t - t_prev) / (g - g_prev)
        t_next = min(max(t_next, traj.times[0]), traj.t_end)
        t_prev, g_prev = t, g
        t, g = t_next, section(traj.wrap_state(traj.at(t_next)))
    return t


def find_section_crossings(
    traj: Trajectory,
    section: Callable[[Union[State3, State4]], float],
    direction: str = "both",
    subsamples: int = 8,
) -> List[Tuple[float, Union[State3, State4]]]:
    """Times and states at which ``section`` crosses zero along the
    trajectory.

    ``direction`` is "+" (negative-to-positive), "-" or "both".  Each
    crossing is refined on the dense output until |section| <= 1e-11.
    A start exactly on the section is not reported.
    """
    if direction not in ("+", "-", "both"):
        raise ValueError(f"direction must be '+', '-' or 'both', got {direction!r}")
    if len(traj.times) < 2:
        return []

    ts: list[float] = [float(traj.times[0])]
    for seg in traj.segments:
        for j in range(1, subsamples + 1):
            ts.append(seg.t0 + seg.h * j / subsamples)
    gs = [section(traj.wrap_state(traj.at(t))) for t in ts]

    crossings: list[Tuple[float, Union[State3, State4]]] = []
    t_start = ts[0]
    for i in range(len(ts) - 1):
        g0, g1 = gs[i], gs[i + 1]
        if g0 == 0.0:
            continue  # counted (or excluded, at t0) by the previous interval
        if g1 == 0.0:
            # landing exactly on the section: look ahead for the sign
            j = i + 2
            while j < len(ts) and gs[j] == 0.0:
                j += 1
            g1_eff = gs[j] if j < len(ts) else 0.0
            if g1_eff == 0.0 or (g1_eff < 0) == (g0 < 0):
                continue
            t_c = ts[i + 1]
        elif (g0 < 0) != (g1 < 0):
            t_c = _refine_crossing(traj, section, ts[i], ts[i + 1], g0, g1)
        else:
            continue
        going_up = g0 < 0
        if direction == "+" and not going_up:
            continue
        if direction == "-" and going_up:
            continue
        if t_c <= t_start:
            continue
        crossings.append((t_c, traj.wrap_state(traj.at(t_c))))
    return crossings


def drift_report(params: SystemParams, traj: Trajectory) -> DriftReport:
    """Maximum |H - H(s0)| and |C - C(s0)| over the stored samples of a
    3D trajectory."""
    if traj.dim != 3:
        raise ValueError("drift_report expects a 3D trajectory")
    x, y, z = traj.states[:, 0], traj.states[:, 1], traj.states[:, 2]
    hvals = 0.5 * (y * y + params.k * z * z)
    cvals = 0.5 * x * x + z
    return DriftReport(
        float(np.max(np.abs(hvals - hvals[0]))),
        float(np.max(np.abs(cvals - cvals[0]))),
    )
