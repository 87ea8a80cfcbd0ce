import math

import numpy as np
import pytest

from mbloch import PoleProximityError, real_period, weierstrass_p
from mbloch.weierstrass import WeierstrassInvariants, _jacobi_sn_cn_dn


def _residual(g2, g3, p, pp):
    return abs(pp * pp - (4.0 * p**3 - g2 * p - g3)) / max(1.0, abs(p) ** 3)


def test_triple_root_case():
    inv = WeierstrassInvariants(0.0, 0.0)
    p, pp = weierstrass_p(inv, 0.5)
    assert p == 4.0 and pp == -16.0
    assert math.isinf(real_period(inv))


def test_double_root_hyperbolic_case():
    # e1 = e2 = 1, e3 = -2: P(t) = 1 + 3 / sinh(sqrt(3) t)^2
    inv = WeierstrassInvariants(12.0, -8.0)
    assert inv.discriminant == 0.0
    for t in np.linspace(0.1, 3.0, 40):
        p, pp = weierstrass_p(inv, float(t))
        exact = 1.0 + 3.0 / math.sinh(math.sqrt(3.0) * t) ** 2
        assert abs(p - exact) <= 1e-10 * max(1.0, abs(exact))
        assert _residual(12.0, -8.0, p, pp) <= 1e-10


def test_double_root_hyperbolic_far_from_pole():
    # the aperiodic branch must stay finite arbitrarily far out
    inv = WeierstrassInvariants(12.0, -8.0)
    for t in (500.0, 5e4, 1e300):
        p, pp = weierstrass_p(inv, t)
        assert math.isfinite(p) and math.isfinite(pp)
    p, _ = weierstrass_p(inv, 500.0)
    assert p == 1.0  # the repeated root is the limit value


def test_double_root_trigonometric_case():
    # repeated root below the simple one: trigonometric form, periodic
    inv = WeierstrassInvariants(12.0, 8.0)
    assert inv.discriminant == 0.0
    T = real_period(inv)
    assert math.isfinite(T)
    for t in np.linspace(0.05, 2.9, 40):
        p, pp = weierstrass_p(inv, float(t))
        assert _residual(12.0, 8.0, p, pp) <= 1e-10


def test_differential_identity_all_discriminant_signs(rng):
    draws = []
    while len(draws) < 50:
        g2 = float(rng.uniform(-10, 10))
        g3 = float(rng.uniform(-10, 10))
        if abs(g2**3 - 27 * g3 * g3) > 1e-6:
            draws.append((g2, g3))
    signs = set()
    for g2, g3 in draws:
        inv = WeierstrassInvariants(g2, g3)
        signs.add(np.sign(inv.discriminant))
        for t in np.linspace(0.05, 3.0, 60):
            try:
                p, pp = weierstrass_p(inv, float(t))
            except PoleProximityError:
                continue
            assert _residual(g2, g3, p, pp) <= 1e-9, (g2, g3, t)
    assert signs == {-1.0, 1.0}


def test_pole_errors():
    inv = WeierstrassInvariants(5.0, 1.0)
    with pytest.raises(PoleProximityError):
        weierstrass_p(inv, 0.0)
    with pytest.raises(PoleProximityError):
        weierstrass_p(inv, 1e-9)
    T = real_period(inv)
    with pytest.raises(PoleProximityError):
        weierstrass_p(inv, 2.0 * T + 1e-10)


def test_symmetry_and_periodicity():
    inv = WeierstrassInvariants(5.0, 1.0)
    T = real_period(inv)
    for t in (0.3, 0.9, 1.1):
        p1, pp1 = weierstrass_p(inv, t)
        p2, pp2 = weierstrass_p(inv, -t)
        assert p1 == p2 and pp1 == -pp2
        p3, pp3 = weierstrass_p(inv, t + 4 * T)
        assert abs(p3 - p1) <= 1e-12 * max(1.0, abs(p1))
        assert abs(pp3 - pp1) <= 1e-12 * max(1.0, abs(pp1))


def test_laurent_window_consistency():
    # series evaluation hands over smoothly to the reduction branches
    for g2, g3 in ((3.0, 0.7), (-4.0, 1.3), (8.0, -2.0)):
        inv = WeierstrassInvariants(g2, g3)
        for t in np.geomspace(2e-8, 0.2, 50):
            p, pp = weierstrass_p(inv, float(t))
            assert _residual(g2, g3, p, pp) <= 1e-9
            if t <= 0.05:
                assert abs(p - 1.0 / t**2) <= 1e-4 / t**2


def test_against_inverse_integral_oracle():
    # independent oracle: t(P) = integral_P^inf ds / sqrt(4 s^3 - g2 s - g3)
    mp = pytest.importorskip("mpmath")
    mp.mp.dps = 30
    for g2, g3 in ((5.0, 1.0), (-3.0, 2.0), (1.0, -4.0), (7.0, 0.5)):
        inv = WeierstrassInvariants(g2, g3)
        T = real_period(inv)
        tmax = min(0.45 * T, 1.2) if math.isfinite(T) else 1.2
        for t in np.linspace(0.1, tmax, 4):
            p, pp = weierstrass_p(inv, float(t))

            def integrand(s):
                return 1.0 / mp.sqrt(4.0 * s**3 - g2 * s - g3)

            t_back = float(mp.quad(integrand, [mp.mpf(p), mp.inf]))
            assert abs(t_back - t) <= 5e-8 * max(1.0, t), (g2, g3, t)


def test_jacobi_functions_basic_identities(rng):
    for _ in range(40):
        m = float(rng.uniform(0.0, 1.0))
        u = float(rng.uniform(0.0, 3.0))
        sn, cn, dn = _jacobi_sn_cn_dn(u, m)
        assert abs(sn * sn + cn * cn - 1.0) <= 1e-12
        assert abs(dn * dn - (1.0 - m * sn * sn)) <= 1e-10
    sn, cn, dn = _jacobi_sn_cn_dn(0.7, 0.0)
    assert abs(sn - math.sin(0.7)) < 1e-15 and abs(dn - 1.0) < 1e-15
    sn, cn, dn = _jacobi_sn_cn_dn(0.7, 1.0)
    assert abs(sn - math.tanh(0.7)) < 1e-12
