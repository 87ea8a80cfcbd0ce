"""Level-set fibers of the (H, C) pair, with explicit parametrizations.

The preimage of a plane point (h, c) is assembled stratum by stratum:

  * on the stable parabola branch: the equilibrium (0, 0, c) and two
    secant-type curves that escape in finite time;
  * on the unstable branch: four exponential curves asymptotic to the
    equilibrium (0, 0, c);
  * on the half-line {h = 0, c > 0}: a pair of heteroclinic connections
    between (-M, 0, 0) and (M, 0, 0) with M = sqrt(2c);
  * over the open strata: four curves whose z-coordinate rides the
    Weierstrass function, z(t) = (2/k) P(t) + c/3 with invariants
    g2 = (k^2/3) c^2 + 2 k h and g3 = (k^3/27) c^3 - (2 k^2/3) h c,
    and x = +-sqrt(2(c - z)), y = +-sqrt(2h - k z^2);
  * over region II additionally one periodic orbit, found numerically by
    closing a trajectory seeded at (0, sqrt(2h - k c^2), c).

Closed-form components reproduce their levels to ~1e-12 on the sampling
windows suggested by ``suggested_span``; the curve-based ones to ~1e-8.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .core import ECValue, State3, SystemParams
from .errors import (
    DomainExceededError,
    InvalidParameterError,
    PoleProximityError,
)
from .strata import Stratum, classify_ec_point
from .weierstrass import WeierstrassInvariants, real_period, weierstrass_p

__all__ = [
    "Kind",
    "FiberComponent",
    "Fiber",
    "invariants_from_ec",
    "param_case_i",
    "param_case_ii",
    "heteroclinic",
    "param_case_iv",
    "case_iv_time_limit",
    "build_fiber",
]

# Largest squared coordinate admitted inside a suggested sampling window;
# keeps level residuals of closed forms near 1e-13 in double precision.
_SPAN_BUDGET = 500.0


class Kind(enum.Enum):
    EQUILIBRIUM_POINT = "EquilibriumPoint"
    UNBOUNDED_CURVE = "UnboundedCurve"
    HETEROCLINIC_ORBIT = "HeteroclinicOrbit"
    PERIODIC_ORBIT = "PeriodicOrbit"


@dataclass(frozen=True)
class FiberComponent:
    """One connected piece of a fiber, with an explicit time
    parametrization.

    ``domain`` is the full (open, possibly unbounded) time domain;
    ``suggested_span`` is a finite window inside it on which samples stay
    at moderate magnitude, which is what plotting and residual checks
    use.
    """

    kind: Kind
    sign_variant: str
    parametrize: Callable[[float], State3]
    domain: Tuple[float, float]
    suggested_span: Tuple[float, float]

    def sample(self, n: int) -> Tuple[np.ndarray, np.ndarray]:
        """n states at equally spaced times across the suggested span."""
        lo, hi = self.suggested_span
        ts = np.linspace(lo, hi, n)
        states = np.empty((n, 3))
        for i, t in enumerate(ts):
            s = self.parametrize(float(t))
            states[i] = (s.x, s.y, s.z)
        return ts, states


@dataclass(frozen=True)
class Fiber:
    value: ECValue
    stratum: Stratum
    components: Tuple[FiberComponent, ...]
    note: Optional[str] = None


def invariants_from_ec(params: SystemParams, v: ECValue) -> WeierstrassInvariants:
    """Invariants of the Weierstrass function attached to the level pair:
    g2 = (k^2/3) c^2 + 2 k h, g3 = (k^3/27) c^3 - (2 k^2/3) h c."""
    k = params.k
    g2 = (k * k / 3.0) * v.c * v.c + 2.0 * k * v.h
    g3 = (k**3 / 27.0) * v.c**3 - (2.0 * k * k / 3.0) * v.h * v.c
    return WeierstrassInvariants(g2, g3)


def param_case_i(params: SystemParams, M: float, t: float) -> State3:
    """Secant-type curve at levels ((k/2) M^2, M), M > 0:
    (2 sqrt(M) sec(wt), 2 M sqrt(-k) sec(wt) tan(wt), -M (1 + 2 tan(wt)^2))
    with w = sqrt(-kM), on the open interval |t| < pi / (2w)."""
    if M <= 0:
        raise InvalidParameterError(f"this curve family needs M > 0, got {M!r}")
    k = params.k
    om = math.sqrt(-k * M)
    half = math.pi / (2.0 * om)
    if not (-half < t < half):
        raise DomainExceededError(
            f"t={t!r} outside the open domain (-{half!r}, {half!r})"
        )
    sec = 1.0 / math.cos(om * t)
    tan = math.tan(om * t)
    return State3(
        2.0 * math.sqrt(M) * sec,
        2.0 * M * math.sqrt(-k) * sec * tan,
        -M * (1.0 + 2.0 * tan * tan),
    )


def param_case_ii(params: SystemParams, M: float, t: float) -> State3:
    """Exponential curve at levels ((k/2) M^2, M), M < 0, with a pole at
    t = 0 splitting the domain into (-inf, 0) and (0, inf).

    In terms of p(t) = -exp(2 sqrt(kM) t) the curve is
    (4 sqrt(Mp)/(p+1), 4 M sqrt(kp)(p-1)/(p+1)^2, M (p^2-6p+1)/(p+1)^2);
    the evaluation below uses p or 1/p, whichever lies in (-1, 0), so it
    is exact for arbitrarily large |t|.
    """
    if M >= 0:
        raise InvalidParameterError(f"this curve family needs M < 0, got {M!r}")
    k = params.k
    rate = 2.0 * math.sqrt(k * M)
    if abs(rate * t) <= 1e-12:
        raise PoleProximityError(f"t={t!r} is too close to the pole at t = 0")
    w = -math.exp(-abs(rate * t))
    wp1 = w + 1.0
    fx = 4.0 * math.sqrt(M * w) / wp1
    fy = 4.0 * M * math.sqrt(k * w) * (w - 1.0) / (wp1 * wp1)
    fz = M * (w * w - 6.0 * w + 1.0) / (wp1 * wp1)
    if t > 0:
        return State3(-fx, fy, fz)
    return State3(fx, fy, fz)


def heteroclinic(
    params: SystemParams, M: float, alpha: float, sign: str, t: float
) -> State3:
    """Heteroclinic connection between (-M, 0, 0) and (M, 0, 0) at levels
    (0, M^2/2).

    With p(t) = exp(M sqrt(-k) (t + alpha)), the "+" variant is
    (M (p-1)/(p+1), 2 M^2 sqrt(-k) p/(p+1)^2, 2 M^2 p/(p+1)^2), written
    below through tanh/sech of the half-argument so it is overflow-free;
    the "-" variant flips the signs of x and y.
    """
    if M == 0.0:
        raise InvalidParameterError("M must be nonzero")
    if sign not in ("+", "-"):
        raise InvalidParameterError(f"sign must be '+' or '-', got {sign!r}")
    k = params.k
    half_arg = 0.5 * M * math.sqrt(-k) * (t + alpha)
    e = math.exp(-abs(half_arg))  # sech without cosh overflow
    sech = 2.0 * e / (1.0 + e * e)
    x = M * math.tanh(half_arg)
    z = 0.5 * M * M * sech * sech
    y = math.sqrt(-k) * z
    if sign == "-":
        return State3(-x, -y, z)
    return State3(x, y, z)


def _case_iv_z(params: SystemParams, v: ECValue, inv: WeierstrassInvariants, t: float):
    p, pp = weierstrass_p(inv, t)
    z = (2.0 / params.k) * p + v.c / 3.0
    zdot = (2.0 / params.k) * pp
    return z, zdot


def case_iv_time_limit(
    params: SystemParams, v: ECValue, samples: int = 4096
) -> float:
    """First t > 0 at which one of the reality constraints c - z >= 0,
    2h - k z^2 >= 0 of the curve parametrization fails (by dense sampling
    and bisection), or +inf if no strict violation occurs.

    On the open strata the constraint boundaries are roots of the cubic
    that z(t) oscillates over, so the constraints are touched but not
    crossed and the returned value is +inf; the limit is kept explicit
    for off-stratum inputs.
    """
    inv = invariants_from_ec(params, v)
    period = real_period(inv)
    horizon = period if math.isfinite(period) else 100.0 / math.sqrt(-params.k)
    h, c = v.h, v.c
    k = params.k

    def gap(t: float) -> float:
        z, _ = _case_iv_z(params, v, inv, t)
        scale = max(1.0, abs(c) + abs(z), abs(2.0 * h) + abs(k) * z * z)
        return min(c - z, 2.0 * h - k * z * z) / scale

    t_prev = None
    for i in range(1, samples + 1):
        t = horizon * i / (samples + 1)
        try:
            g = gap(t)
        except PoleProximityError:
            continue
        if g < -1e-9:
            if t_prev is None:
                return t
            lo, hi = t_prev, t
            for _ in range(80):
                mid = 0.5 * (lo + hi)
                if gap(mid) < -1e-9:
                    hi = mid
                else:
                    lo = mid
                if hi - lo < 1e-10:
                    break
            return hi
        t_prev = t
    return math.inf


def param_case_iv(
    params: SystemParams,
    v: ECValue,
    branch: Tuple[int, int],
    t: float,
    t_f: Optional[float] = None,
) -> State3:
    """Curve over an open stratum: z = (2/k) P(t) + c/3 and
    x = sx sqrt(2(c-z)), y = sy sqrt(2h - k z^2) for the sign pair
    branch = (sx, sy); defined for t in (0, t_f).

    ``t_f`` may be passed in to avoid recomputing the constraint limit on
    every call.
    """
    sx, sy = branch
    if sx not in (-1, 1) or sy not in (-1, 1):
        raise InvalidParameterError(f"branch must be a pair of +-1, got {branch!r}")
    if t_f is None:
        t_f = case_iv_time_limit(params, v)
    if not (0.0 < t < t_f):
        raise DomainExceededError(f"t={t!r} outside the open domain (0, {t_f!r})")
    inv = invariants_from_ec(params, v)
    z, _ = _case_iv_z(params, v, inv, t)
    h, c, k = v.h, v.c, params.k
    xsq = 2.0 * (c - z)
    ysq = 2.0 * h - k * z * z
    # the constraint boundaries are touched tangentially; forgive rounding
    tol_x = 1e-10 * max(1.0, abs(c) + abs(z))
    tol_y = 1e-10 * max(1.0, abs(2 * h) + abs(k) * z * z)
    if xsq < -tol_x or ysq < -tol_y:
        raise DomainExceededError(
            f"reality constraint violated at t={t!r} (xsq={xsq!r}, ysq={ysq!r})"
        )
    return State3(
        sx * math.sqrt(max(xsq, 0.0)),
        sy * math.sqrt(max(ysq, 0.0)),
        z,
    )


def _bisect_increasing(f, lo, hi, target, iters=60):
    """First point in [lo, hi] where the increasing function f exceeds
    target (assumes f(lo) <= target <= f(hi))."""
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if f(mid) > target:
            hi = mid
        else:
            lo = mid
    return hi


def _span_case_i(params: SystemParams, M: float) -> Tuple[float, float]:
    k = params.k
    om = math.sqrt(-k * M)
    half = math.pi / (2.0 * om)

    def magnitude(t: float) -> float:
        s = param_case_i(params, M, t)
        return max(s.x * s.x, s.y * s.y, abs(k) * s.z * s.z)

    if magnitude(half * 0.999999) <= _SPAN_BUDGET:
        edge = half * 0.999999
    else:
        edge = _bisect_increasing(magnitude, 0.0, half * 0.999999, _SPAN_BUDGET)
    return -edge, edge


def _span_case_ii(params: SystemParams, M: float, positive: bool):
    k = params.k
    rate = 2.0 * math.sqrt(k * M)

    def magnitude(t: float) -> float:
        s = param_case_ii(params, M, t)
        return max(s.x * s.x, s.y * s.y, abs(k) * s.z * s.z)

    # magnitude decreases away from the pole at t = 0
    t_lo = _bisect_increasing(
        lambda t: -magnitude(t), 1e-10 / rate, 20.0 / rate, -_SPAN_BUDGET
    )
    t_hi = max(8.0 / rate, 4.0 * t_lo)
    if positive:
        return t_lo, t_hi
    return -t_hi, -t_lo


def _span_heteroclinic(params: SystemParams, M: float, alpha: float):
    rate = abs(M) * math.sqrt(-params.k)
    return -alpha - 12.0 / rate, -alpha + 12.0 / rate


def _span_case_iv(params: SystemParams, v: ECValue, t_f: float):
    inv = invariants_from_ec(params, v)
    period = real_period(inv)
    budget = _SPAN_BUDGET * 4e3  # curve residual target is 1e-8, not 1e-12

    def magnitude(t: float) -> float:
        z, _ = _case_iv_z(params, v, inv, t)
        return abs(params.k) * z * z

    if math.isfinite(period):
        mid = 0.5 * period
        t_lo = _bisect_increasing(lambda t: -magnitude(t), 1.1e-8, mid, -budget)
        hi = min(period - t_lo, 0.999 * t_f)
        return t_lo, hi
    t_lo = _bisect_increasing(
        lambda t: -magnitude(t), 1.1e-8, 100.0 / math.sqrt(-params.k), -budget
    )
    hi = 50.0 * t_lo
    if math.isfinite(t_f):
        hi = min(hi, 0.999 * t_f)
    return t_lo, hi


def _constant_component(point: State3, label: str) -> FiberComponent:
    return FiberComponent(
        kind=Kind.EQUILIBRIUM_POINT,
        sign_variant=label,
        parametrize=lambda t, _p=point: _p,
        domain=(-math.inf, math.inf),
        suggested_span=(0.0, 1.0),
    )


def _case_iv_components(params: SystemParams, v: ECValue) -> list:
    t_f = case_iv_time_limit(params, v)
    span = _span_case_iv(params, v, t_f)
    comps = []
    for sx, sy in ((1, 1), (-1, 1), (1, -1), (-1, -1)):
        label = f"({'+' if sx > 0 else '-'}x,{'+' if sy > 0 else '-'}y)"
        comps.append(
            FiberComponent(
                kind=Kind.UNBOUNDED_CURVE,
                sign_variant=label,
                parametrize=lambda t, b=(sx, sy): param_case_iv(
                    params, v, b, t, t_f=t_f
                ),
                domain=(0.0, t_f),
                suggested_span=span,
            )
        )
    return comps


def _periodic_component(params: SystemParams, v: ECValue) -> FiberComponent:
    from .periodic import closed_orbit_through  # local import: avoids a cycle

    h, c = v.h, v.c
    y0 = math.sqrt(2.0 * h - params.k * c * c)
    seed = State3(0.0, y0, c)
    period, _closure, traj = closed_orbit_through(params, seed)
    return FiberComponent(
        kind=Kind.PERIODIC_ORBIT,
        sign_variant="closed",
        parametrize=lambda t: State3.from_array(traj.at(t)),
        domain=(0.0, period),
        suggested_span=(0.0, period),
    )


def build_fiber(params: SystemParams, v: ECValue, tol: float = 1e-9) -> Fiber:
    """The full fiber over (h, c), dispatched on its stratum.

    Component counts: 3 on the stable parabola branch, 4 on the unstable
    branch, 2 on the half-line, 4 over regions I and III, 5 over region
    II, and 1 + 4 at the origin.
    """
    stratum = classify_ec_point(params, v, tol)
    note = None
    if stratum is Stratum.SIGMA_2S:
        M = v.c
        half = math.pi / (2.0 * math.sqrt(-params.k * M))
        span = _span_case_i(params, M)
        comps = [_constant_component(State3(0.0, 0.0, v.c), "equilibrium")]
        for sgn, label in ((1.0, "(+x,+y)"), (-1.0, "(-x,-y)")):
            comps.append(
                FiberComponent(
                    kind=Kind.UNBOUNDED_CURVE,
                    sign_variant=label,
                    parametrize=lambda t, s=sgn: _reflect(
                        param_case_i(params, M, t), s
                    ),
                    domain=(-half, half),
                    suggested_span=span,
                )
            )
    elif stratum is Stratum.SIGMA_2U:
        M = v.c
        comps = []
        for sgn, slabel in ((1.0, "+"), (-1.0, "-")):
            for positive, dlabel in ((True, "t>0"), (False, "t<0")):
                span = _span_case_ii(params, M, positive)
                domain = (0.0, math.inf) if positive else (-math.inf, 0.0)
                comps.append(
                    FiberComponent(
                        kind=Kind.UNBOUNDED_CURVE,
                        sign_variant=f"({slabel},{dlabel})",
                        parametrize=lambda t, s=sgn: _reflect(
                            param_case_ii(params, M, t), s
                        ),
                        domain=domain,
                        suggested_span=span,
                    )
                )
    elif stratum is Stratum.SIGMA_1U:
        M = math.sqrt(2.0 * v.c)
        span = _span_heteroclinic(params, M, 0.0)
        comps = [
            FiberComponent(
                kind=Kind.HETEROCLINIC_ORBIT,
                sign_variant=sign,
                parametrize=lambda t, s=sign: heteroclinic(params, M, 0.0, s, t),
                domain=(-math.inf, math.inf),
                suggested_span=span,
            )
            for sign in ("+", "-")
        ]
    elif stratum is Stratum.ORIGIN:
        comps = [_constant_component(State3(0.0, 0.0, 0.0), "equilibrium")]
        comps.extend(_case_iv_components(params, v))
        note = (
            "origin fiber: reported as the degenerate equilibrium plus the "
            "four arcs of its stable/unstable set, via the curve "
            "parametrization at levels (0, 0)"
        )
    elif stratum is Stratum.PRINCIPAL_II:
        comps = _case_iv_components(params, v)
        comps.append(_periodic_component(params, v))
    else:  # PRINCIPAL_I or PRINCIPAL_III
        comps = _case_iv_components(params, v)
    return Fiber(value=v, stratum=stratum, components=tuple(comps), note=note)


def _reflect(s: State3, sgn: float) -> State3:
    if sgn > 0:
        return s
    return State3(-s.x, -s.y, s.z)
