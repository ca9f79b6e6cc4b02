"""CLI surface: every subcommand runs and writes its documented outputs."""

import json

import pytest

from schwave.cli import main


def test_check_asymptotics(capsys):
    assert main(["check-asymptotics", "--mass", "1.0", "--p", "2.0"]) == 0
    out = capsys.readouterr().out
    assert "far" in out and "near" in out
    assert "inf" in out and "sup" in out


def test_phi_writes_table(tmp_path, capsys):
    out = tmp_path / "phi.csv"
    code = main(["phi", "--mass", "1.0", "--smin", "-40", "--smax", "40",
                 "--n", "801", "--out", str(out)])
    assert code == 0
    lines = out.read_text().strip().split("\n")
    assert lines[0] == "s,phi,dphi,residual,exp_minus_As_phi"
    assert len(lines) == 802
    vals = [float(tok) for tok in lines[400].split(",")]
    assert vals[1] > 0.0  # phi > 0


def test_riccati_prints_table(capsys):
    assert main(["riccati", "--p", "2.0", "--eps", "0.1"]) == 0
    out = capsys.readouterr().out
    assert "blow-up time T = 22025.465" in out


def test_solve_outputs(tmp_path, capsys):
    out = tmp_path / "run"
    code = main(["solve", "--p", "1.5", "--eps", "0.5", "--ds", "0.1",
                 "--tmax", "60", "--snapshots", "5", "--out", str(out)])
    assert code == 0
    record = json.loads((out / "lifespan.json").read_text())
    assert record["status"] == "blew_up"
    assert record["T_num"] > 0
    monitor = (out / "monitor.csv").read_text().strip().split("\n")
    assert monitor[0] == "t,L,J,G,F,Fprime,ratio_riccati,e_tM_G"
    assert len(monitor) > 100
    verification = json.loads((out / "verification.json").read_text())
    assert verification["passed"] is True
    snaps = list(out.glob("field_t*.csv"))
    assert len(snaps) == 1
    assert snaps[0].read_text().splitlines()[0] == "s,v,vt,u"


def test_sweep_and_fit(tmp_path, capsys):
    cfg = tmp_path / "cfg"
    outdir = tmp_path / "out"
    cfg.write_text(
        "mass = 1\np = 1.5\nradius = 1\nepsilons = 0.5,0.35,0.25\n"
        f"ds = 0.1\ntmax = 60\noutdir = {outdir}\n")
    assert main(["sweep", "--config", str(cfg)]) == 0
    assert (outdir / "sweep.csv").exists()
    fit = json.loads((outdir / "fit.json").read_text())
    assert fit["model"] == "power_law"
    assert fit["target_slope"] == pytest.approx(-1.0)
    assert fit["bound_check"]["passed"] is True
    assert (outdir / "plotdata_loglog.csv").exists()
    for eps in ("0.5", "0.35", "0.25"):
        assert (outdir / f"run_eps{eps}" / "monitor.csv").exists()
        assert (outdir / f"run_eps{eps}" / "verification.json").exists()

    # Refit from the emitted records only.
    assert main(["fit", "--csv", str(outdir / "sweep.csv"),
                 "--outdir", str(tmp_path / "refit")]) == 0
    refit = json.loads((tmp_path / "refit" / "fit.json").read_text())
    assert refit["slope"] == pytest.approx(fit["slope"], rel=1e-12)


def test_solve_exit_zero_on_verified_horizon_run(tmp_path, capsys):
    # A run that merely reaches tmax but verifies cleanly is not a failure.
    out = tmp_path / "run"
    code = main(["solve", "--p", "2.0", "--eps", "0.25", "--ds", "0.1",
                 "--tmax", "20", "--out", str(out)])
    assert code == 0
    record = json.loads((out / "lifespan.json").read_text())
    assert record["status"] == "reached_tmax"


def test_cli_override_beats_config(tmp_path):
    cfg = tmp_path / "cfg"
    outdir = tmp_path / "o1"
    cfg.write_text("mass = 1\np = 1.5\nradius = 1\nepsilons = 0.5,0.35,0.25\n"
                   f"ds = 0.1\ntmax = 60\noutdir = {outdir}\n")
    override_dir = tmp_path / "o2"
    assert main(["sweep", "--config", str(cfg), "--outdir", str(override_dir)]) == 0
    assert (override_dir / "sweep.csv").exists()
    assert not (outdir / "sweep.csv").exists()
