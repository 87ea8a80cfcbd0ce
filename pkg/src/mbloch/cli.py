"""Command-line front end.

Subcommands: ``simulate`` (integrate the 3D or 4D flow), ``classify``
(equilibrium stability or stratum of a level pair), ``fiber`` (sample
every component of a fiber to per-component files), ``periodic`` (locate
the guaranteed periodic orbit), ``verify`` (run the invariant suite).

Exit codes: 0 ok, 1 usage or validation error, 2 finite-time blow-up
(partial trajectory retained), 3 fiber residual failure, 4 no section
return, 5 verify failure.

Relative output paths resolve against $MBLOCH_OUT_DIR when it is set.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import verify as verify_mod
from ._io import format_float, resolve_out, write_csv, write_json
from .core import ECValue, State3, SystemParams
from .equilibria import Equilibrium, Family, classify_equilibrium
from .errors import MaxwellBlochError, NoReturnError
from .fibers import Fiber, FiberComponent, build_fiber
from .integrate import Status, drift_report, integrate, integrate4
from .periodic import find_periodic, linearized_period
from .strata import classify_ec_point, recover_equilibrium_parameter
from .symplectic import State4

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_BLOWUP = 2
EXIT_RESIDUAL = 3
EXIT_NO_RETURN = 4
EXIT_VERIFY = 5


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with code 2
        raise _UsageError(message)


def _parse_floats(text: str, expected=None):
    parts = [p for p in text.split(",") if p != ""]
    vals = [float(p) for p in parts]
    if expected is not None and len(vals) not in expected:
        raise _UsageError(
            f"expected {' or '.join(map(str, expected))} comma-separated "
            f"values, got {text!r}"
        )
    return vals


def _finite_or_none(v: float):
    return float(v) if math.isfinite(v) else None


def build_parser() -> _Parser:
    parser = _Parser(prog="mbloch", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--k", type=float, required=True, help="tuning parameter, k < 0")
        p.add_argument(
            "--format",
            choices=("csv", "json"),
            default="csv",
            help="output file format",
        )

    p = sub.add_parser("simulate", help="integrate the flow and write samples")
    add_common(p)
    p.add_argument("--x0", required=True, help="initial state, 3 or 4 comma values")
    p.add_argument("--t", required=True, help="time span t0,t1")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--out", required=True)
    p.add_argument(
        "--drift",
        action="store_true",
        help="append drift columns dH,dC (3D runs only)",
    )

    p = sub.add_parser("classify", help="equilibrium verdict or stratum of (h,c)")
    add_common(p)
    p.add_argument("--equilibrium", choices=("E1", "E2"))
    p.add_argument("--M", type=float)
    p.add_argument("--ec", help="level pair h,c")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out", help="optional JSON/CSV output path")

    p = sub.add_parser("fiber", help="sample all components of a fiber")
    add_common(p)
    p.add_argument("--ec", required=True, help="level pair h,c")
    p.add_argument("--n", type=int, default=500, help="samples per component")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--tol", type=float, default=1e-9, help="stratum tolerance")
    p.add_argument(
        "--svg",
        action="store_true",
        help="also write a 2-panel (x,z)/(y,z) projection plot",
    )

    p = sub.add_parser("periodic", help="locate a periodic orbit on I = eps^2")
    add_common(p)
    p.add_argument("--M", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--out", help="optional one-cycle sample file")

    p = sub.add_parser("verify", help="run the invariant suite")
    add_common(p)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", help="optional report file (JSON)")

    return parser


def _cmd_simulate(args) -> int:
    params = SystemParams(args.k)
    x0 = _parse_floats(args.x0, expected=(3, 4))
    t0, t1 = _parse_floats(args.t, expected=(2,))
    if len(x0) == 3:
        traj = integrate(params, State3(*x0), (t0, t1), args.tol)
        columns = ["t", "x", "y", "z"]
    else:
        traj = integrate4(params, State4(*x0), (t0, t1), args.tol)
        columns = ["t", "q1", "q2", "p1", "p2"]
    rows = np.column_stack([traj.times, traj.states])
    drift = None
    if args.drift and traj.dim == 3:
        x, y, z = traj.states[:, 0], traj.states[:, 1], traj.states[:, 2]
        hvals = 0.5 * (y * y + params.k * z * z)
        cvals = 0.5 * x * x + z
        rows = np.column_stack([rows, hvals - hvals[0], cvals - cvals[0]])
        columns += ["dH", "dC"]
        drift = drift_report(params, traj)

    out = resolve_out(args.out)
    if args.format == "json":
        doc = {
            "type": "trajectory",
            "k": params.k,
            "tol": args.tol,
            "status": traj.status.value,
            "columns": columns,
            "samples": [[float(v) for v in row] for row in rows],
        }
        if drift is not None:
            doc["drift"] = {
                "max_abs_dH": drift.max_abs_dH,
                "max_abs_dC": drift.max_abs_dC,
            }
        write_json(out, doc)
    else:
        write_csv(out, columns, rows)
    print(f"{traj.status.value}: {len(traj.times)} samples -> {out}")
    return EXIT_BLOWUP if traj.status is Status.BLOW_UP else EXIT_OK


def _fmt_eigs(eigs) -> str:
    lam = eigs[1]
    if abs(lam.imag) > 1e-300 and abs(lam.real) < 1e-300:
        mag = abs(lam.imag)
        body = "i" if mag == 1.0 else f"{mag:g}i"
    else:
        body = f"{abs(lam.real):g}"
    return f"0, ±{body}"


def _cmd_classify(args) -> int:
    params = SystemParams(args.k)
    if (args.equilibrium is None) == (args.ec is None):
        raise _UsageError("pass exactly one of --equilibrium (with --M) or --ec")
    if args.equilibrium is not None:
        if args.M is None:
            raise _UsageError("--equilibrium needs --M")
        fam = Family(args.equilibrium)
        eq = Equilibrium.e1(args.M) if fam is Family.E1 else Equilibrium.e2(args.M)
        verdict = classify_equilibrium(params, eq)
        text = (
            f"{fam.value} M={args.M:g}: {verdict.verdict.value}, "
            f"eigenvalues {_fmt_eigs(verdict.eigenvalues)}"
        )
        doc = {
            "type": "classification",
            "k": params.k,
            "family": fam.value,
            "M": args.M,
            "verdict": verdict.verdict.value,
            "eigenvalues": [[ev.real, ev.imag] for ev in verdict.eigenvalues],
            "arnold_multiplier": verdict.arnold_multiplier,
            "arnold_diagonal": list(verdict.arnold_form_diagonal)
            if verdict.arnold_form_diagonal
            else None,
        }
    else:
        h, c = _parse_floats(args.ec, expected=(2,))
        v = ECValue(h, c)
        stratum = classify_ec_point(params, v, args.tol)
        doc = {
            "type": "classification",
            "k": params.k,
            "h": h,
            "c": c,
            "stratum": stratum.value,
        }
        text = stratum.value
        if stratum.is_boundary:
            m_rec = recover_equilibrium_parameter(v, stratum)
            doc["M"] = m_rec
            text = f"{stratum.value}, M={m_rec:g}"
    if args.format == "json" and not args.out:
        print(json.dumps(doc, indent=2))
    else:
        print(text)
    if args.out:
        write_json(resolve_out(args.out), doc)
    return EXIT_OK


def _component_rows(comp: FiberComponent, n: int):
    ts, states = comp.sample(n)
    return np.column_stack([ts, states])


def _write_fiber_svg(fib: Fiber, sampled, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, (ax_xz, ax_yz) = plt.subplots(1, 2, figsize=(9, 4))
    for comp, rows in sampled:
        if comp.kind.value == "EquilibriumPoint":
            ax_xz.plot(rows[0, 1], rows[0, 3], "ko", ms=5)
            ax_yz.plot(rows[0, 2], rows[0, 3], "ko", ms=5)
        else:
            ax_xz.plot(rows[:, 1], rows[:, 3], lw=1, label=comp.sign_variant)
            ax_yz.plot(rows[:, 2], rows[:, 3], lw=1)
    ax_xz.set_xlabel("x")
    ax_xz.set_ylabel("z")
    ax_yz.set_xlabel("y")
    ax_yz.set_ylabel("z")
    fig.suptitle(
        f"fiber over (h, c) = ({fib.value.h:g}, {fib.value.c:g}) "
        f"[{fib.stratum.value}]"
    )
    ax_xz.legend(fontsize=7, loc="best")
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)


def _cmd_fiber(args) -> int:
    params = SystemParams(args.k)
    h, c = _parse_floats(args.ec, expected=(2,))
    v = ECValue(h, c)
    fib = build_fiber(params, v, args.tol)
    out_dir = resolve_out(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    residual_failed = False
    sampled = []
    for idx, comp in enumerate(fib.components):
        rows = _component_rows(comp, args.n)
        sampled.append((comp, rows))
        hs = 0.5 * (rows[:, 2] ** 2 + params.k * rows[:, 3] ** 2)
        cs = 0.5 * rows[:, 1] ** 2 + rows[:, 3]
        res = max(float(np.max(np.abs(hs - h))), float(np.max(np.abs(cs - c))))
        budget = verify_mod.fiber_threshold(fib, comp)
        if res > budget:
            residual_failed = True
            print(
                f"residual failure on component {idx} ({comp.kind.value}): "
                f"{res:.3e} > {budget:.1e}",
                file=sys.stderr,
            )
        stem = f"component_{idx:02d}_{comp.kind.value}"
        if args.format == "json":
            doc = {
                "type": "fiber_component",
                "k": params.k,
                "h": h,
                "c": c,
                "stratum": fib.stratum.value,
                "kind": comp.kind.value,
                "sign_variant": comp.sign_variant,
                "domain": [
                    _finite_or_none(comp.domain[0]),
                    _finite_or_none(comp.domain[1]),
                ],
                "samples": [[float(x) for x in row] for row in rows],
                "note": fib.note,
            }
            write_json(out_dir / f"{stem}.json", doc)
        else:
            write_csv(
                out_dir / f"{stem}.csv",
                ["t", "x", "y", "z"],
                rows,
                metadata={
                    "kind": comp.kind.value,
                    "sign_variant": comp.sign_variant,
                    "stratum": fib.stratum.value,
                    "h": format_float(h),
                    "c": format_float(c),
                },
            )
    if args.svg:
        _write_fiber_svg(fib, sampled, out_dir / "fiber.svg")
    print(
        f"{fib.stratum.value}: {len(fib.components)} components "
        f"({', '.join(cmp.kind.value for cmp in fib.components)}) -> {out_dir}"
    )
    if fib.note:
        print(f"note: {fib.note}")
    return EXIT_RESIDUAL if residual_failed else EXIT_OK


def _cmd_periodic(args) -> int:
    params = SystemParams(args.k)
    orb = find_periodic(params, args.M, args.eps, args.tol)
    t_lin = linearized_period(params, args.M)
    gap = abs(orb.period - t_lin) / t_lin
    print(
        f"period {orb.period:.10g}, linearized {t_lin:.10g}, "
        f"relative gap {gap:.3e}, closure error {orb.closure_error:.3e}"
    )
    if args.out:
        out = resolve_out(args.out)
        traj = integrate(params, orb.initial_state, (0.0, orb.period), args.tol)
        if args.format == "json":
            write_json(
                out,
                {
                    "type": "periodic_orbit",
                    "k": params.k,
                    "M": args.M,
                    "eps": args.eps,
                    "period": orb.period,
                    "linearized_period": t_lin,
                    "relative_gap": gap,
                    "closure_error": orb.closure_error,
                    "initial_state": [
                        orb.initial_state.x,
                        orb.initial_state.y,
                        orb.initial_state.z,
                    ],
                },
            )
        else:
            write_csv(
                out,
                ["t", "x", "y", "z"],
                np.column_stack([traj.times, traj.states]),
            )
    return EXIT_OK


def _cmd_verify(args) -> int:
    results = verify_mod.run_all(args.k, args.seed)
    name_w = max(len(r.name) for r in results)
    print(f"{'check'.ljust(name_w)}  {'residual':>12}  {'threshold':>10}  status")
    failed = []
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        print(
            f"{r.name.ljust(name_w)}  {r.residual:12.3e}  {r.threshold:10.1e}  "
            f"{status}"
        )
        if not r.passed:
            failed.append(r.name)
    if args.out:
        write_json(
            resolve_out(args.out),
            {
                "type": "verify_report",
                "k": args.k,
                "seed": args.seed,
                "passed": not failed,
                "checks": [
                    {
                        "name": r.name,
                        "residual": r.residual,
                        "threshold": r.threshold,
                        "passed": r.passed,
                    }
                    for r in results
                ],
            },
        )
    if failed:
        print(f"FAILED: {', '.join(failed)}", file=sys.stderr)
        return EXIT_VERIFY
    print(f"all {len(results)} checks passed")
    return EXIT_OK


_COMMANDS = {
    "simulate": _cmd_simulate,
    "classify": _cmd_classify,
    "fiber": _cmd_fiber,
    "periodic": _cmd_periodic,
    "verify": _cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NoReturnError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NO_RETURN
    except MaxwellBlochError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
