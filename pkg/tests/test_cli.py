import json
import math

import pytest

from sranosov import cli, elliptic, pendulum


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_elliptic_at_zero(capsys):
    code, out, _ = run(capsys, "elliptic", "--t", "0", "--k", "0.5")
    rec = json.loads(out)
    assert code == 0 and (rec["sn"], rec["cn"], rec["dn"]) == (0.0, 1.0, 1.0)


@pytest.mark.parametrize("argv", [["--t", "K", "--k", "0.5", "--at-quarter-period"],
                                  ["--t", "K", "--k", "0.5"], ["--t", "1*K", "--k", "0.5"]])
def test_elliptic_at_quarter_period(capsys, argv):
    code, out, _ = run(capsys, "elliptic", *argv)
    rec = json.loads(out)
    assert code == 0 and abs(rec["cn"]) <= 1e-9


def test_elliptic_multiple_of_k(capsys):
    code, out, _ = run(capsys, "elliptic", "--t=-2K", "--k", "0.3")
    assert abs(json.loads(out)["t"] + 2 * elliptic.quarter_period(0.3)) < 1e-15


def test_elliptic_csv(capsys):
    code, out, _ = run(capsys, "elliptic", "--t", "0.7", "--k", "0.4", "--format", "csv")
    header, row = out.strip().split("\n")
    assert header == "t,k,sn,cn,dn,id1_residual,id2_residual"
    fields = dict(zip(header.split(","), row.split(",")))
    assert abs(float(fields["sn"]) - elliptic.jacobi_agm(0.7, 0.4)[0]) < 1e-12


def test_elliptic_domain_error(capsys):
    code, out, err = run(capsys, "elliptic", "--t", "0", "--k", "1.5", "--format", "csv")
    assert code == 2 and out == "" and "(0, 1)" in err


def test_elliptic_domain_error_json(capsys):
    code, out, _ = run(capsys, "elliptic", "--t", "0", "--k", "1.5", "--format", "json")
    rec = json.loads(out)
    assert code == 2 and rec["exit_code"] == 2 and "(0, 1)" in rec["message"]


def test_pendulum_separatrix(capsys):
    code, out, _ = run(capsys, "pendulum", "--omega", "1", "--theta0", "0", "--thetadot0", "2")
    rec = json.loads(out)
    assert code == 0 and rec["case"] == "SEPARATRIX" and rec["case_number"] == 3


def test_pendulum_lemma_report(capsys):
    omega = 1.4142135
    sol = pendulum.fit_solution(pendulum.PendulumParams(omega, 0, 4))
    ell = 4 * sol.quarter / math.sqrt(sol.I)
    code, out, _ = run(capsys, "pendulum", "--omega", str(omega), "--theta0", "0",
                       "--thetadot0", "4", "--length", repr(ell))
    lem = json.loads(out)["lemma_int"]
    assert code == 0 and lem["hypothesis_holds"]
    assert max(map(abs, lem["halfangle_integrals"])) <= 1e-8
    assert lem["period_multiple_defect"] <= 1e-8 and abs(lem["sin_integral"]) <= 1e-8


def test_pendulum_domain(capsys):
    code, out, err = run(capsys, "pendulum", "--omega", "0", "--format", "csv")
    assert code == 2 and out == ""


def test_heisenberg_full_turn(capsys):
    code, out, _ = run(capsys, "heisenberg", "--v0", "6.2831853", "--theta0", "0", "--length", "1")
    s = json.loads(out)["summary"]
    assert code == 0 and abs(s["defect"]) <= 1e-8 and s["vertical_defect"] <= 1e-8


def test_heisenberg_csv_with_summary(capsys):
    code, out, _ = run(capsys, "heisenberg", "--v0", "0", "--theta0", "0", "--length", "1",
                       "--format", "csv", "--samples", "5")
    lines = out.strip().split("\n")
    assert lines[0] == "t,x,y,z,w1,w2" and len(lines) == 7
    assert json.loads(lines[-1])["defect"] == 1


def test_heisenberg_half_turn(capsys):
    code, out, _ = run(capsys, "heisenberg", "--v0", "3.1415926", "--theta0", "0", "--length", "1")
    assert json.loads(out)["summary"]["vertical_defect"] > 0.1


def test_heisenberg_length_domain(capsys):
    code, _, _ = run(capsys, "heisenberg", "--v0", "1", "--length", "-1")
    assert code == 2


def test_sl2_range(capsys):
    code, out, _ = run(capsys, "sl2", "--tau", "0.5")
    assert code == 2 and json.loads(out)["exit_code"] == 2


def test_sl2_balanced_with_eqdiff_and_path(capsys, tmp_path):
    path = tmp_path / "geo.csv"
    code, out, _ = run(capsys, "sl2", "--tau", "0.05", "--eqdiff", "--path", str(path),
                       "--samples", "11")
    rec = json.loads(out)
    assert code == 0 and abs(rec["defect"]) <= 1e-6
    assert abs(rec["eqdiff_finite_difference"] - rec["eqdiff_formula"]) <= 1e-4
    for key in ("theta0", "P_X0", "length", "endpoint_residual", "E_s", "E_u",
                "closure_integrals", "lemma_int"):
        assert key in rec
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "t,m11,m12,m21,m22,theta,P_X" and len(lines) == 12


def test_sl2_base_point_conjugates(capsys):
    code, out, _ = run(capsys, "sl2", "--tau", "0.05", "--base", "2", "1", "1", "1")
    rec = json.loads(out)
    assert code == 0
    assert max(abs(a - b) for a, b in zip(rec["endpoint"], rec["target"])) <= 1e-8


def test_sl2_bad_base_point(capsys):
    code, _, _ = run(capsys, "sl2", "--tau", "0.05", "--base", "2", "0", "0", "2")
    assert code == 2


def test_sl2_nonconvergence_exit_code(capsys, monkeypatch):
    from sranosov import sl2flow
    from sranosov.errors import SearchFailure

    def fail(tau, config=None):
        raise SearchFailure("no start converged", [(0.0, 1.0, 0.3)])

    monkeypatch.setattr(sl2flow, "shoot", fail)
    code, out, err = run(capsys, "sl2", "--tau", "0.05", "--format", "csv")
    assert code == 3 and out == "" and "best residual" in err
    code, out, _ = run(capsys, "sl2", "--tau", "0.05")
    rec = json.loads(out)
    assert code == 3 and rec["best_residuals"] == [[0.0, 1.0, 0.3]]


def test_usage_error(capsys):
    code, out, _ = run(capsys, "elliptic", "--k")
    assert code == 2 and json.loads(out)["exit_code"] == 2
    code, out, _ = run(capsys, "elliptic", "--k", "0.5", "--t", "banana", "--format", "csv")
    assert code == 2 and out == ""


def test_runconfig_file(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"format": "csv", "tolerance": 1e-12}))
    monkeypatch.setenv("RUNCONFIG", str(cfg))
    code, out, _ = run(capsys, "elliptic", "--t", "0.2", "--k", "0.5")
    assert code == 0 and out.startswith("t,k,")
    code, out, _ = run(capsys, "elliptic", "--t", "0.2", "--k", "0.5", "--format", "json")
    assert json.loads(out)["k"] == 0.5


def test_runconfig_rejects_bad_tolerance(capsys, tmp_path, monkeypatch):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"tolerance": -1}))
    monkeypatch.setenv("RUNCONFIG", str(cfg))
    code, out, _ = run(capsys, "elliptic", "--t", "0.2", "--k", "0.5")
    assert code == 2


def test_output_file(capsys, tmp_path):
    target = tmp_path / "out.json"
    code, out, _ = run(capsys, "elliptic", "--t", "0.2", "--k", "0.5", "--output", str(target))
    assert code == 0 and out == "" and json.loads(target.read_text())["t"] == 0.2


def test_deterministic_output(capsys):
    argv = ["heisenberg", "--v0", "2.5", "--theta0", "0.3", "--length", "1.2", "--format", "csv"]
    _, first, _ = run(capsys, *argv)
    _, second, _ = run(capsys, *argv)
    assert first == second
