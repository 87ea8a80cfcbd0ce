"""Acceptance suite: one test per release criterion, each printing a
PASS line with the measured figure once its assertions hold.

Run with ``pytest tests/test_acceptance.py -v -s`` to see the lines.
"""

import math
import os

import numpy as np

import mbloch.core
import mbloch.periodic
from mbloch import (
    ECValue,
    Equilibrium,
    Family,
    Kind,
    PoleProximityError,
    State3,
    State4,
    Stratum,
    SystemParams,
    Verdict,
    arnold_test,
    build_fiber,
    canonical_bracket,
    casimir,
    classify_ec_point,
    classify_equilibrium,
    drift_report,
    eigenvalues_at,
    equilibrium_image,
    find_periodic,
    grad_casimir,
    grad_hamiltonian,
    grad_hamiltonian4,
    hamiltonian,
    hamiltonian4,
    heteroclinic,
    integrate,
    jacobian,
    momentum_integral,
    poisson_matrix,
    realization_jacobian,
    realization_map,
    stratum_of_equilibrium,
    vector_field,
    vector_field4,
    weierstrass_p,
)
from mbloch.cli import main
from mbloch.verify import fiber_threshold
from mbloch.weierstrass import WeierstrassInvariants


def _report(number, text):
    print(f"\n[criterion {number:2d}] PASS - {text}")


def _rel(diff, *terms):
    return abs(diff) / max(1.0, *(abs(t) for t in terms))


def test_criterion_01_structure_identities():
    rng = np.random.default_rng(1)
    ks = rng.uniform(-5.0, -0.1, 20)
    worst = 0.0
    for i in range(1000):
        p = SystemParams(float(ks[i % 20]))
        s = State3(*rng.uniform(-2, 2, 3))
        X = vector_field(p, s).to_array()
        Pi = poisson_matrix(s)
        gH = grad_hamiltonian(p, s)
        gC = grad_casimir(s)
        worst = max(worst, *(_rel(d, *X) for d in Pi @ gH - X))
        assert np.array_equal(Pi @ gC, np.zeros(3))
        worst = max(worst, _rel(float(gH @ X), *(gH * X)))
        worst = max(worst, _rel(float(gC @ X), *(gC * X)))
    assert worst <= 1e-14
    _report(1, f"structure identities exact; worst scaled residual {worst:.2e}")


def test_criterion_02_realization_identities():
    rng = np.random.default_rng(2)
    grad_i = np.array([0.0, 0.0, 0.0, 1.0])
    worst = 0.0
    for _ in range(1000):
        p = SystemParams(float(rng.uniform(-5.0, -0.1)))
        s4 = State4(*rng.uniform(-2, 2, 4))
        s3 = realization_map(s4)
        terms = (
            s4.p1**2,
            p.k * s4.p2**2,
            p.k * s4.p2 * s4.q1**2,
            0.25 * p.k * s4.q1**4,
        )
        worst = max(worst, _rel(hamiltonian4(p, s4) - hamiltonian(p, s3), *terms))
        worst = max(
            worst,
            _rel(
                casimir(s3) - momentum_integral(s4), s4.p2, 0.5 * s4.q1**2
            ),
        )
        assert canonical_bracket(grad_hamiltonian4(p, s4), grad_i) == 0.0
        X4 = vector_field4(p, s4).to_array()
        X3 = vector_field(p, s3).to_array()
        push = realization_jacobian(s4) @ X4
        worst = max(worst, *(_rel(d, *X3, *X4) for d in push - X3))
    assert worst <= 1e-14
    _report(2, f"realization identities exact; worst scaled residual {worst:.2e}")


def test_criterion_03_spectra():
    p = SystemParams(-1.0)
    down = classify_equilibrium(p, Equilibrium.e2(-1.0))
    assert down.verdict is Verdict.UNSTABLE
    assert sorted((ev.real, ev.imag) for ev in down.eigenvalues) == [
        (-1.0, 0.0), (0.0, 0.0), (1.0, 0.0)
    ]
    up = classify_equilibrium(p, Equilibrium.e2(1.0))
    assert up.verdict is Verdict.NONLINEAR_STABLE
    assert sorted((ev.real, ev.imag) for ev in up.eigenvalues) == [
        (0.0, -1.0), (0.0, 0.0), (0.0, 1.0)
    ]
    _lam, diag, posdef = arnold_test(p, 1.0)
    assert diag == (1.0, 1.0) and posdef
    side = classify_equilibrium(p, Equilibrium.e1(2.0))
    assert side.verdict is Verdict.UNSTABLE
    assert sorted((ev.real, ev.imag) for ev in side.eigenvalues) == [
        (-2.0, 0.0), (0.0, 0.0), (2.0, 0.0)
    ]
    worst = 0.0
    for eq in (Equilibrium.e2(-1.0), Equilibrium.e2(1.0), Equilibrium.e1(2.0)):
        closed = np.sort_complex(np.array(eigenvalues_at(p, eq)))
        numeric = np.sort_complex(np.linalg.eigvals(jacobian(p, eq.point)))
        worst = max(worst, float(np.max(np.abs(closed - numeric))))
    assert worst <= 1e-10
    _report(3, f"spectra and verdicts match; closed vs numeric {worst:.2e}")


def _oracle_stratum(k, h, c, tol):
    """Direct evaluation of the three region definitions: region I is
    c^2 <= 2h/k, region II is c^2 >= 2h/k and h <= 0 and c >= 0, region
    III the complement of the interiors, with boundary strata read off
    the defining equalities (same tolerance semantics as the library)."""
    ratio = 2.0 * h / k
    on_parabola = abs(c * c - ratio) * abs(k) <= 2.0 * tol
    in_region_i = c * c < ratio
    if on_parabola:
        if c > tol:
            return "Sigma2s"
        if c < -tol:
            return "Sigma2u"
        return "Origin"
    if in_region_i:
        return "PrincipalI"
    # strictly above the parabola from here on
    if abs(h) <= tol:
        if c > tol:
            return "Sigma1u"
        if abs(c) <= tol:
            return "Origin"
        return "PrincipalIII"
    in_region_ii_interior = h < -tol and c > tol
    return "PrincipalII" if in_region_ii_interior else "PrincipalIII"


def test_criterion_04_stratification():
    p = SystemParams(-1.0)
    tol = 1e-9
    grid = np.linspace(-5.0, 5.0, 401)
    seen = set()
    for h in grid:
        for c in grid:
            got = classify_ec_point(p, ECValue(float(h), float(c)), tol)
            want = _oracle_stratum(p.k, float(h), float(c), tol)
            assert got.value == want, (h, c, got.value, want)
            seen.add(got.value)
    assert seen == {
        "PrincipalI", "PrincipalII", "PrincipalIII",
        "Sigma2s", "Sigma2u", "Sigma1u", "Origin",
    }
    rng = np.random.default_rng(4)
    for _ in range(50):
        for fam in Family:
            M = float(rng.uniform(0.05, 4.0) * rng.choice([-1.0, 1.0]))
            v = equilibrium_image(p, fam, M)
            assert classify_ec_point(p, v, 1e-12) is stratum_of_equilibrium(
                p, fam, M
            )
    _report(4, "401x401 grid agrees with region inequalities; images on "
               "named strata")


def test_criterion_05_fiber_residuals():
    p = SystemParams(-1.0)
    expected = {
        Stratum.SIGMA_2S: 3,
        Stratum.SIGMA_2U: 4,
        Stratum.SIGMA_1U: 2,
        Stratum.ORIGIN: 5,
        Stratum.PRINCIPAL_I: 4,
        Stratum.PRINCIPAL_II: 5,
        Stratum.PRINCIPAL_III: 4,
    }
    levels = [
        (-2.0, 2.0), (-2.0, -2.0), (0.0, 0.5), (0.0, 0.0),
        (-3.0, 1.0), (-1.0, 2.0), (1.0, -3.0),
    ]
    worst_closed = worst_curve = 0.0
    for h, c in levels:
        fib = build_fiber(p, ECValue(h, c))
        assert len(fib.components) == expected[fib.stratum], fib.stratum
        for comp in fib.components:
            _ts, states = comp.sample(200)
            hs = 0.5 * (states[:, 1] ** 2 + p.k * states[:, 2] ** 2)
            cs = 0.5 * states[:, 0] ** 2 + states[:, 2]
            res = max(float(np.max(np.abs(hs - h))), float(np.max(np.abs(cs - c))))
            budget = fiber_threshold(fib, comp)
            assert res <= budget, (h, c, comp.sign_variant, res)
            if budget == 1e-12:
                worst_closed = max(worst_closed, res)
            else:
                worst_curve = max(worst_curve, res)
    _report(5, f"fiber counts 3/4/2/4/5 and residuals: closed {worst_closed:.2e}"
               f" <= 1e-12, curves {worst_curve:.2e} <= 1e-8")


def test_criterion_06_parametrizations_solve_the_flow():
    p = SystemParams(-1.0)
    step = 1e-6
    worst = 0.0
    fibs = [
        build_fiber(p, ECValue(-2.0, 2.0)),
        build_fiber(p, ECValue(-2.0, -2.0)),
        build_fiber(p, ECValue(0.0, 0.5)),
    ]
    n_curves = 0
    for fib in fibs:
        for comp in fib.components:
            if comp.kind is Kind.EQUILIBRIUM_POINT:
                continue
            n_curves += 1
            lo, hi = comp.suggested_span
            for t in np.linspace(lo + 1e-3, hi - 1e-3, 60):
                t = float(t)
                fd = (
                    comp.parametrize(t + step).to_array()
                    - comp.parametrize(t - step).to_array()
                ) / (2.0 * step)
                field = vector_field(p, comp.parametrize(t)).to_array()
                worst = max(worst, float(np.max(np.abs(fd - field))))
    assert worst <= 1e-6
    _report(6, f"{n_curves} closed-form curves solve the flow; worst "
               f"derivative gap {worst:.2e}")


def test_criterion_07_heteroclinic_limits():
    p = SystemParams(-1.0)
    plus = heteroclinic(p, 1.0, 0.0, "+", 40.0)
    minus = heteroclinic(p, 1.0, 0.0, "+", -40.0)
    assert plus.distance_to(State3(1, 0, 0)) <= 1e-6
    assert minus.distance_to(State3(-1, 0, 0)) <= 1e-6
    worst = 0.0
    for t in np.linspace(-40.0, 40.0, 401):
        s = heteroclinic(p, 1.0, 0.0, "+", float(t))
        worst = max(worst, abs(hamiltonian(p, s)), abs(casimir(s) - 0.5))
    assert worst <= 1e-12
    _report(7, f"heteroclinic limits reached; levels pinned to {worst:.2e}")


def test_criterion_08_weierstrass():
    rng = np.random.default_rng(8)
    draws = []
    while len(draws) < 50:
        g2, g3 = rng.uniform(-10, 10), rng.uniform(-10, 10)
        if abs(g2**3 - 27 * g3 * g3) > 1e-6:
            draws.append((float(g2), float(g3)))
    signs = set()
    worst = 0.0
    for g2, g3 in draws:
        inv = WeierstrassInvariants(g2, g3)
        signs.add(float(np.sign(inv.discriminant)))
        for t in np.linspace(0.05, 3.0, 60):
            try:
                pv, pd = weierstrass_p(inv, float(t))
            except PoleProximityError:
                continue
            res = abs(pd * pd - (4 * pv**3 - g2 * pv - g3))
            worst = max(worst, res / max(1.0, abs(pv) ** 3))
    assert signs == {-1.0, 1.0} and worst <= 1e-9

    worst_deg = 0.0
    triple = WeierstrassInvariants(0.0, 0.0)
    double = WeierstrassInvariants(12.0, -8.0)
    signs.add(0.0)
    for t in np.linspace(0.1, 2.5, 49):
        pv, _ = weierstrass_p(triple, float(t))
        worst_deg = max(worst_deg, abs(pv - 1.0 / t**2))
        pv, _ = weierstrass_p(double, float(t))
        exact = 1.0 + 3.0 / math.sinh(math.sqrt(3.0) * t) ** 2
        worst_deg = max(worst_deg, abs(pv - exact))
    assert worst_deg <= 1e-10
    _report(8, f"elliptic identity {worst:.2e} over all discriminant signs; "
               f"degenerate forms {worst_deg:.2e}")


def test_criterion_09_periodic_orbits():
    p = SystemParams(-1.0)
    orb = find_periodic(p, 1.0, 0.05)
    gap = abs(orb.period - 2 * math.pi) / (2 * math.pi)
    assert gap < 0.01 and orb.closure_error <= 1e-7
    gaps = []
    for eps in (0.1, 0.05, 0.025):
        o = find_periodic(p, 1.0, eps)
        gaps.append(abs(o.period - 2 * math.pi))
    assert gaps[0] > gaps[1] > gaps[2]
    p4 = SystemParams(-4.0)
    orb4 = find_periodic(p4, 1.0, 0.05)
    gap4 = abs(orb4.period - math.pi) / math.pi
    assert gap4 < 0.01 and orb4.closure_error <= 1e-7
    _report(9, f"periods within 1% (gaps {gap:.1e}, {gap4:.1e}); eps-sequence "
               "converges monotonically")


def test_criterion_10_conservation_drift():
    p = SystemParams(-1.0)
    rng = np.random.default_rng(10)
    worst = 0.0
    for _ in range(20):
        M = float(rng.uniform(0.5, 2.0))
        d = rng.normal(size=3)
        d *= float(rng.uniform(0.02, 0.1)) * M / np.linalg.norm(d)
        s0 = State3(d[0], d[1], M + d[2])
        traj = integrate(p, s0, (0.0, 100.0), 1e-10)
        rep = drift_report(p, traj)
        worst = max(worst, rep.max_abs_dH, rep.max_abs_dC)
    assert worst <= 1e-7
    _report(10, f"20 bounded runs over t in [0,100]: worst drift {worst:.2e}")


def test_criterion_11_cli_contract(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("MBLOCH_OUT_DIR", str(tmp_path))

    # the three fiber examples: counts and kinds
    assert main(["fiber", "--k=-1", "--ec=-2,2", "--n=120", "--out", "f1"]) == 0
    names = sorted(os.listdir(tmp_path / "f1"))
    assert [n.split("_", 2)[2] for n in names] == [
        "EquilibriumPoint.csv", "UnboundedCurve.csv", "UnboundedCurve.csv"
    ]
    assert main(["fiber", "--k=-1", "--ec=0,0.5", "--n=120", "--out", "f2"]) == 0
    names = sorted(os.listdir(tmp_path / "f2"))
    assert [n.split("_", 2)[2] for n in names] == [
        "HeteroclinicOrbit.csv", "HeteroclinicOrbit.csv"
    ]
    assert main(["fiber", "--k=-1", "--ec=-1,2", "--n=120", "--out", "f3"]) == 0
    names = sorted(os.listdir(tmp_path / "f3"))
    assert [n.split("_", 2)[2] for n in names] == [
        "UnboundedCurve.csv", "UnboundedCurve.csv", "UnboundedCurve.csv",
        "UnboundedCurve.csv", "PeriodicOrbit.csv",
    ]

    # exit-code table: 0 ok, 1 usage, 2 blow-up, 3 residual, 4 no-return,
    # 5 verify failure
    assert main(
        ["simulate", "--k=-1", "--x0=0,0.5,0.5", "--t=0,1", "--out", "ok.csv"]
    ) == 0
    assert main(["simulate", "--k=1", "--x0=0,0,1", "--t=0,1", "--out", "x.csv"]) == 1
    assert main(
        ["simulate", "--k=-1", "--x0=2,0,-1", "--t=0,2", "--out", "b.csv"]
    ) == 2
    import mbloch.cli as cli_mod

    with monkeypatch.context() as mp:
        mp.setattr(cli_mod.verify_mod, "fiber_threshold", lambda f, c: 0.0)
        assert main(["fiber", "--k=-1", "--ec=-2,2", "--n=40", "--out", "f5"]) == 3
    with monkeypatch.context() as mp:
        from mbloch.errors import NoReturnError

        def no_return(*a, **kw):
            raise NoReturnError("no return")

        mp.setattr(mbloch.periodic, "closed_orbit_through", no_return)
        assert main(["periodic", "--k=-1", "--M=1", "--eps=0.05"]) == 4
    with monkeypatch.context() as mp:
        mp.setattr(
            mbloch.core,
            "vector_field",
            lambda params, s: State3(s.y, -params.k * s.x * s.z, -s.x * s.y),
        )
        assert main(["verify", "--k=-1", "--seed=3"]) == 5

    # CSV round-trip is bit-exact against the in-process trajectory
    assert main(
        [
            "simulate", "--k=-1", "--x0=0.2,0.1,1.0", "--t=0,5",
            "--tol=1e-10", "--out", "rt.csv",
        ]
    ) == 0
    from mbloch._io import read_csv

    _header, rows, _meta = read_csv(tmp_path / "rt.csv")
    traj = integrate(SystemParams(-1.0), State3(0.2, 0.1, 1.0), (0.0, 5.0), 1e-10)
    assert len(rows) == len(traj.times)
    for row, t, s in zip(rows, traj.times, traj.states):
        assert row[0] == t and tuple(row[1:]) == tuple(s)

    capsys.readouterr()  # swallow CLI chatter before reporting
    _report(11, "fiber component files, exit-code table and bit-exact CSV "
                "round-trip")
