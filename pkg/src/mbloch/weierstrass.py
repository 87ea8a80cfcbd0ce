"""Real-axis Weierstrass elliptic function for real invariants.

``weierstrass_p`` evaluates the function P solving P'^2 = 4P^3 - g2 P - g3
(and its derivative) for real t and real invariants (g2, g3), which is
all the level-set parametrizations need.  The evaluation strategy:

  * find the real roots of 4 s^3 - g2 s - g3;
  * discriminant > 0 (three real roots e1 > e2 > e3): reduce to the
    Jacobi function sn through
        P(t) = e3 + (e1 - e3) / sn(t sqrt(e1 - e3) | m)^2,
        m = (e2 - e3) / (e1 - e3);
  * discriminant < 0 (one real root e): the analogous cn-based reduction
        P(t) = e + H (1 + cn(w | m)) / (1 - cn(w | m)),
        w = 2 sqrt(H) t,  H = sqrt(3 e^2 - g2 / 4),  m = 1/2 - 3e/(4H);
  * discriminant = 0: the trigonometric / hyperbolic closed forms of the
    repeated-root cases;
  * near the pole at t = 0 (after reduction by the real period): the
    Laurent series 1/t^2 + (g2/20) t^2 + (g3/28) t^4 + ...

Jacobi sn, cn, dn are computed with the descending Landen (arithmetic-
geometric mean) transformation.  Inputs whose discriminant is nonzero
but smaller than roughly 1e-12 times its natural scale are treated as
degenerate; in that sliver the repeated-root closed forms are an
approximation.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field
from typing import Tuple

from .errors import InvalidParameterError, PoleProximityError

__all__ = ["WeierstrassInvariants", "weierstrass_p", "real_period"]

POLE_GUARD = 1e-8


@dataclass(frozen=True)
class WeierstrassInvariants:
    """Invariant pair (g2, g3) with its discriminant g2^3 - 27 g3^2."""

    g2: float
    g3: float
    discriminant: float = field(init=False)

    def __post_init__(self):
        for name in ("g2", "g3"):
            v = float(getattr(self, name))
            if not math.isfinite(v):
                raise InvalidParameterError(f"{name} must be finite, got {v!r}")
            object.__setattr__(self, name, v)
        object.__setattr__(
            self, "discriminant", self.g2**3 - 27.0 * self.g3**2
        )


def _agm(a: float, b: float) -> float:
    for _ in range(80):
        if abs(a - b) <= 1e-16 * abs(a):
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return 0.5 * (a + b)


def _complete_k(m: float) -> float:
    """Complete elliptic integral K(m), parameter convention m = k^2."""
    if m >= 1.0:
        return math.inf
    return math.pi / (2.0 * _agm(1.0, math.sqrt(1.0 - m)))


def _jacobi_sn_cn_dn(u: float, m: float) -> Tuple[float, float, float]:
    """Jacobi sn, cn, dn by the descending Landen/AGM transformation."""
    if m < 1e-14:
        s = math.sin(u)
        return s, math.cos(u), 1.0 - 0.5 * m * s * s
    if 1.0 - m < 1e-14:
        sech = 1.0 / math.cosh(u)
        return math.tanh(u), sech, sech

    a = [1.0]
    b = math.sqrt(1.0 - m)
    c = [math.sqrt(m)]
    n = 0
    while abs(c[-1]) > 1e-17 and n < 40:
        a.append(0.5 * (a[n] + b))
        c.append(0.5 * (a[n] - b))
        b = math.sqrt(a[n] * b)
        n += 1

    phi = (2.0**n) * a[n] * u
    phi1 = phi
    for j in range(n, 0, -1):
        arg = c[j] / a[j] * math.sin(phi)
        arg = max(-1.0, min(1.0, arg))
        phi_prev = phi
        phi = 0.5 * (phi + math.asin(arg))
        if j == 1:
            phi1 = phi_prev
    sn = math.sin(phi)
    cn = math.cos(phi)
    denom = math.cos(phi1 - phi)
    dn = cn / denom if abs(denom) > 1e-300 else math.sqrt(max(1.0 - m * sn * sn, 0.0))
    return sn, cn, dn


def _cubic_real_roots_all(g2: float, g3: float):
    """All three (real) roots of 4 s^3 - g2 s - g3 = 0, descending.
    Valid for positive discriminant."""
    p = -g2 / 4.0
    q = -g3 / 4.0
    rp = math.sqrt(-p / 3.0)
    arg = 3.0 * q / (2.0 * p) * math.sqrt(-3.0 / p)
    arg = max(-1.0, min(1.0, arg))
    phi = math.acos(arg)
    roots = sorted(
        (2.0 * rp * math.cos(phi / 3.0 - 2.0 * math.pi * j / 3.0) for j in range(3)),
        reverse=True,
    )
    return [_polish_root(r, g2, g3) for r in roots]


def _cubic_real_root_single(g2: float, g3: float) -> float:
    """The unique real root of 4 s^3 - g2 s - g3 = 0 (negative
    discriminant), by cancellation-safe Cardano."""
    p = -g2 / 4.0
    q = -g3 / 4.0
    if p == 0.0:
        return _polish_root(math.copysign(abs(q) ** (1.0 / 3.0), -q), g2, g3)
    d = (q / 2.0) ** 2 + (p / 3.0) ** 3
    sq = math.sqrt(d)
    if q >= 0.0:
        v = -q / 2.0 - sq
        b = math.copysign(abs(v) ** (1.0 / 3.0), v)
        a = -p / (3.0 * b)
    else:
        v = -q / 2.0 + sq
        a = math.copysign(abs(v) ** (1.0 / 3.0), v)
        b = -p / (3.0 * a)
    return _polish_root(a + b, g2, g3)


def _polish_root(r: float, g2: float, g3: float) -> float:
    for _ in range(2):
        deriv = 12.0 * r * r - g2
        if deriv == 0.0:
            break
        r -= (4.0 * r**3 - g2 * r - g3) / deriv
    return r


@functools.lru_cache(maxsize=256)
def _reduction(g2: float, g3: float):
    """Per-invariant branch data: (kind, parameters, real period,
    Laurent cutoff)."""
    disc = g2**3 - 27.0 * g3 * g3
    disc_scale = max(1e-2, abs(g2) ** 3, 27.0 * g3 * g3)

    # Laurent cutoff: keep the first omitted series term below 1e-18/t^2.
    c2 = g2 / 20.0
    c3 = g3 / 28.0
    c4 = c2 * c2 / 3.0
    c5 = 3.0 * c2 * c3 / 11.0
    c6 = (2.0 * c2 * c4 + c3 * c3) / 13.0
    t_laurent = (1e-18 / max(abs(c6), 1e-60)) ** (1.0 / 12.0)

    if abs(disc) <= 1e-12 * disc_scale:
        if max(abs(g2), abs(g3) ** (2.0 / 3.0)) < 1e-10:
            return ("triple", (), math.inf, min(t_laurent, 0.5))
        cd = -3.0 * g3 / (2.0 * g2)  # repeated root
        if cd > 0.0:
            return ("sinh", (cd,), math.inf, min(t_laurent, 0.5))
        axis = -cd
        period = math.pi / math.sqrt(3.0 * axis)
        return ("sin", (axis,), period, min(t_laurent, 0.2 * period))
    if disc > 0.0:
        e1, e2, e3 = _cubic_real_roots_all(g2, g3)
        lam2 = e1 - e3
        lam = math.sqrt(lam2)
        m = (e2 - e3) / lam2
        kk = _complete_k(m)
        period = 2.0 * kk / lam
        return ("sn", (e3, lam2, lam, m), period, min(t_laurent, 0.2 * period))
    er = _cubic_real_root_single(g2, g3)
    hh = math.sqrt(3.0 * er * er - 0.25 * g2)
    m = 0.5 - 3.0 * er / (4.0 * hh)
    kk = _complete_k(m)
    period = 2.0 * kk / math.sqrt(hh)
    return ("cn", (er, hh, m), period, min(t_laurent, 0.2 * period))


def real_period(inv: WeierstrassInvariants) -> float:
    """Distance between consecutive real-axis poles (inf when the real
    axis carries a single pole at 0)."""
    return _reduction(inv.g2, inv.g3)[2]


def _laurent(g2: float, g3: float, t: float) -> Tuple[float, float]:
    c2 = g2 / 20.0
    c3 = g3 / 28.0
    c4 = c2 * c2 / 3.0
    c5 = 3.0 * c2 * c3 / 11.0
    t2 = t * t
    p = 1.0 / t2 + t2 * (c2 + t2 * (c3 + t2 * (c4 + t2 * c5)))
    pp = -2.0 / (t2 * t) + t * (
        2.0 * c2 + t2 * (4.0 * c3 + t2 * (6.0 * c4 + t2 * 8.0 * c5))
    )
    return p, pp


def weierstrass_p(inv: WeierstrassInvariants, t: float) -> Tuple[float, float]:
    """Value and derivative (P(t), P'(t)) on the real axis.

    Raises ``PoleProximityError`` when t lies within 1e-8 of a real
    pole (0 or an integer multiple of the real period).
    """
    if not math.isfinite(t):
        raise InvalidParameterError(f"t must be finite, got {t!r}")
    kind, data, period, t_laurent = _reduction(inv.g2, inv.g3)

    if math.isfinite(period):
        t_red = t - period * round(t / period)
    else:
        t_red = t
    if abs(t_red) <= POLE_GUARD:
        raise PoleProximityError(
            f"t={t!r} is within {POLE_GUARD} of a pole of the function"
        )

    u = abs(t_red)
    sign = 1.0 if t_red > 0 else -1.0

    if u < t_laurent:
        p, pp = _laurent(inv.g2, inv.g3, u)
        return p, sign * pp

    if kind == "triple":
        return 1.0 / (u * u), sign * (-2.0 / (u * u * u))
    if kind == "sinh":
        # written through q = exp(-2w): exact and overflow-free for all w
        (cd,) = data
        w = math.sqrt(3.0 * cd) * u
        q = math.exp(-2.0 * w)
        one_m_q = -math.expm1(-2.0 * w)
        p = cd + 12.0 * cd * q / (one_m_q * one_m_q)
        pp = -24.0 * cd * math.sqrt(3.0 * cd) * q * (1.0 + q) / one_m_q**3
        return p, sign * pp
    if kind == "sin":
        (axis,) = data
        w = math.sqrt(3.0 * axis) * u
        si = math.sin(w)
        p = -axis + 3.0 * axis / (si * si)
        pp = -6.0 * axis * math.sqrt(3.0 * axis) * math.cos(w) / si**3
        return p, sign * pp
    if kind == "sn":
        e3, lam2, lam, m = data
        sn, cn, dn = _jacobi_sn_cn_dn(lam * u, m)
        p = e3 + lam2 / (sn * sn)
        pp = -2.0 * lam2 * lam * cn * dn / sn**3
        return p, sign * pp
    # kind == "cn"
    er, hh, m = data
    w = 2.0 * math.sqrt(hh) * u
    sn, cn, dn = _jacobi_sn_cn_dn(w, m)
    one_m_cn = 1.0 - cn
    p = er + hh * (1.0 + cn) / one_m_cn
    pp = -4.0 * hh * math.sqrt(hh) * sn * dn / (one_m_cn * one_m_cn)
    return p, sign * pp
