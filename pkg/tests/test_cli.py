import json
import math
import os
from importlib import resources

import numpy as np
import pytest

import mbloch.core
import mbloch.periodic
from mbloch import State3, SystemParams, integrate
from mbloch._io import read_csv
from mbloch.cli import main
from mbloch.errors import NoReturnError


@pytest.fixture
def out(tmp_path, monkeypatch):
    monkeypatch.setenv("MBLOCH_OUT_DIR", str(tmp_path))
    return tmp_path


def _load_schema():
    with resources.files("mbloch.schemas").joinpath("output.schema.json").open() as f:
        return json.load(f)


def _validate(doc):
    jsonschema = pytest.importorskip("jsonschema")
    jsonschema.validate(doc, _load_schema())


def test_simulate_heteroclinic(out):
    rc = main(
        [
            "simulate", "--k=-1", "--x0=0,0.5,0.5", "--t=0,40",
            "--tol=1e-10", "--out", "traj.csv",
        ]
    )
    assert rc == 0
    header, rows, _meta = read_csv(out / "traj.csv")
    assert header == ["t", "x", "y", "z"]
    terminal = np.array(rows[-1][1:])
    assert np.linalg.norm(terminal - np.array([1.0, 0.0, 0.0])) < 1e-6


def test_simulate_rejects_nonnegative_k(out, capsys):
    rc = main(["simulate", "--k=1", "--x0=0,0.5,0.5", "--t=0,40", "--out", "t.csv"])
    assert rc == 1
    assert "k must be" in capsys.readouterr().err


def test_simulate_blowup_exit_code(out):
    rc = main(["simulate", "--k=-1", "--x0=2,0,-1", "--t=0,2", "--out", "t.csv"])
    assert rc == 2
    header, rows, _meta = read_csv(out / "t.csv")  # partial output retained
    assert len(rows) > 10
    assert rows[-1][0] < math.pi / 2


def test_simulate_csv_roundtrip_bit_exact(out):
    rc = main(
        [
            "simulate", "--k=-1", "--x0=0.2,0.1,1.0", "--t=0,5",
            "--tol=1e-10", "--out", "rt.csv",
        ]
    )
    assert rc == 0
    _header, rows, _meta = read_csv(out / "rt.csv")
    params = SystemParams(-1.0)
    traj = integrate(params, State3(0.2, 0.1, 1.0), (0.0, 5.0), 1e-10)
    assert len(rows) == len(traj.times)
    for row, t, s in zip(rows, traj.times, traj.states):
        assert row[0] == t
        assert tuple(row[1:]) == tuple(s)


def test_simulate_json_schema(out):
    rc = main(
        [
            "simulate", "--k=-1", "--x0=0.2,0.1,1.0", "--t=0,2", "--drift",
            "--format=json", "--out", "rt.json",
        ]
    )
    assert rc == 0
    doc = json.loads((out / "rt.json").read_text())
    _validate(doc)
    assert doc["status"] == "Completed"
    assert doc["columns"] == ["t", "x", "y", "z", "dH", "dC"]


def test_simulate_4d(out):
    rc = main(
        ["simulate", "--k=-1", "--x0=0,0,0,1", "--t=0,5", "--out", "q.csv"]
    )
    assert rc == 0
    header, rows, _meta = read_csv(out / "q.csv")
    assert header == ["t", "q1", "q2", "p1", "p2"]
    assert abs(rows[-1][2] + 5.0) < 1e-9  # q2 = -t


def test_classify_equilibrium_output(out, capsys):
    rc = main(["classify", "--k=-1", "--equilibrium=E2", "--M=1"])
    assert rc == 0
    line = capsys.readouterr().out
    assert "NonlinearStable" in line and "0, ±i" in line

    rc = main(["classify", "--k=-1", "--equilibrium=E2", "--M=-1"])
    assert "Unstable" in capsys.readouterr().out
    assert rc == 0


def test_classify_ec_output(out, capsys):
    rc = main(["classify", "--k=-1", "--ec=-1,2"])
    assert rc == 0
    assert "PrincipalII" in capsys.readouterr().out

    rc = main(["classify", "--k=-1", "--ec=0,2", "--out", "cls.json"])
    assert rc == 0
    assert "Sigma1u, M=2" in capsys.readouterr().out
    doc = json.loads((out / "cls.json").read_text())
    _validate(doc)
    assert doc["stratum"] == "Sigma1u" and doc["M"] == 2.0


def test_classify_malformed_point(out, capsys):
    rc = main(["classify", "--k=-1", "--ec=1,2,3"])
    assert rc == 1
    rc = main(["classify", "--k=-1", "--ec=a,b"])
    assert rc == 1
    rc = main(["classify", "--k=-1"])
    assert rc == 1


def test_fiber_stable_branch(out):
    rc = main(["fiber", "--k=-1", "--ec=-2,2", "--n=200", "--out", "fib"])
    assert rc == 0
    files = sorted(os.listdir(out / "fib"))
    assert files == [
        "component_00_EquilibriumPoint.csv",
        "component_01_UnboundedCurve.csv",
        "component_02_UnboundedCurve.csv",
    ]
    header, rows, meta = read_csv(out / "fib" / files[1])
    assert header == ["t", "x", "y", "z"] and len(rows) == 200
    assert meta["kind"] == "UnboundedCurve"
    assert meta["sign_variant"] == "(+x,+y)"
    assert meta["stratum"] == "Sigma2s"


def test_fiber_heteroclinic_pair(out):
    rc = main(["fiber", "--k=-1", "--ec=0,0.5", "--n=100", "--out", "fib2"])
    assert rc == 0
    files = sorted(os.listdir(out / "fib2"))
    assert files == [
        "component_00_HeteroclinicOrbit.csv",
        "component_01_HeteroclinicOrbit.csv",
    ]


def test_fiber_region_ii_with_periodic(out):
    rc = main(
        [
            "fiber", "--k=-1", "--ec=-1,2", "--n=100", "--out", "fib3",
            "--format=json", "--svg",
        ]
    )
    assert rc == 0
    files = sorted(os.listdir(out / "fib3"))
    assert files == [
        "component_00_UnboundedCurve.json",
        "component_01_UnboundedCurve.json",
        "component_02_UnboundedCurve.json",
        "component_03_UnboundedCurve.json",
        "component_04_PeriodicOrbit.json",
        "fiber.svg",
    ]
    doc = json.loads((out / "fib3" / "component_04_PeriodicOrbit.json").read_text())
    _validate(doc)
    assert doc["kind"] == "PeriodicOrbit" and doc["stratum"] == "PrincipalII"
    svg = (out / "fib3" / "fiber.svg").read_text()
    assert svg.lstrip().startswith("<?xml")


def test_fiber_residual_failure_exit_code(out, monkeypatch):
    import mbloch.cli as cli_mod

    monkeypatch.setattr(cli_mod.verify_mod, "fiber_threshold", lambda f, c: 0.0)
    rc = main(["fiber", "--k=-1", "--ec=-2,2", "--n=50", "--out", "fib4"])
    assert rc == 3


def test_periodic_output(out, capsys):
    rc = main(["periodic", "--k=-1", "--M=1", "--eps=0.05"])
    assert rc == 0
    line = capsys.readouterr().out
    period = float(line.split("period")[1].split(",")[0])
    assert abs(period - 2 * math.pi) / (2 * math.pi) < 0.01

    rc = main(["periodic", "--k=-4", "--M=1", "--eps=0.05"])
    assert rc == 0
    assert "linearized 3.141592654" in capsys.readouterr().out


def test_periodic_validation_and_no_return(out, capsys, monkeypatch):
    rc = main(["periodic", "--k=-1", "--M=-1", "--eps=0.05"])
    assert rc == 1
    assert "M must be positive" in capsys.readouterr().err

    def no_return(*a, **kw):
        raise NoReturnError("no section return")

    monkeypatch.setattr(mbloch.periodic, "closed_orbit_through", no_return)
    rc = main(["periodic", "--k=-1", "--M=1", "--eps=0.05"])
    assert rc == 4


def test_periodic_json_schema(out):
    rc = main(
        [
            "periodic", "--k=-1", "--M=1", "--eps=0.05",
            "--format=json", "--out", "orbit.json",
        ]
    )
    assert rc == 0
    doc = json.loads((out / "orbit.json").read_text())
    _validate(doc)
    assert abs(doc["period"] - 2 * math.pi) < 0.1


def test_verify_passes_and_schema(out):
    rc = main(["verify", "--k=-1", "--seed=42", "--out", "report.json"])
    assert rc == 0
    doc = json.loads((out / "report.json").read_text())
    _validate(doc)
    assert doc["passed"] is True
    assert all(c["passed"] for c in doc["checks"])


def test_verify_different_parameters(out):
    rc = main(["verify", "--k=-0.5", "--seed=7"])
    assert rc == 0


def test_verify_detects_mutated_vector_field(out, capsys, monkeypatch):
    # corrupted build: sign flipped in the controlled term
    def mutated(params, s):
        return State3(s.y, -params.k * s.x * s.z, -s.x * s.y)

    monkeypatch.setattr(mbloch.core, "vector_field", mutated)
    rc = main(["verify", "--k=-1", "--seed=1"])
    assert rc == 5
    err = capsys.readouterr().err
    assert "Hamiltonian-form identity" in err


def test_usage_error_exit_code(capsys):
    assert main(["simulate", "--k=-1"]) == 1  # missing required args
    assert main(["nonsense"]) == 1
