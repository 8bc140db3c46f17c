import json

import pytest

from kzising.cli import main


@pytest.fixture
def outdir(tmp_path, monkeypatch):
    monkeypatch.delenv("KZISING_OUTDIR", raising=False)
    return tmp_path


def run(*argv):
    return main([str(a) for a in argv])


def test_quench_writes_table_and_summary(outdir, capsys):
    assert run("quench", "--n", 400, "--tauq", 100, "--outdir", outdir, "--dump-modes") == 0
    table = (outdir / "quench_N400_tauQ100.csv").read_text().splitlines()
    assert table[0] == "k,k_sqrt_tauQ,p_k,P_k"
    assert len(table) == 201
    summary = json.loads((outdir / "quench_N400_tauQ100.json").read_text())
    assert 0 < summary["p_gs"] < 1 and summary["norm_drift"] < 1e-8
    assert (outdir / "quench_N400_tauQ100_modes.csv").exists()
    assert json.loads(capsys.readouterr().out)["N"] == 400


def test_quench_approx(outdir):
    assert run("quench", "--n", 400, "--tauq", 100, "--approx", "--outdir", outdir) == 0
    summary = json.loads((outdir / "quench_approx_N400_tauQ100.json").read_text())
    assert summary["C"] == pytest.approx(0.0339, abs=1e-4)


def test_evolve_and_peaks(outdir):
    assert run("evolve", "--n", 400, "--tauq", 100, "--tmax", 700, "--dt", 0.25, "--with-approx",
               "--power-one-over-n", "--peaks", "--outdir", outdir) == 0
    sz = (outdir / "sz_N400_tauQ100.csv").read_text().splitlines()
    assert "t,value,SzSeries,SzTrain" in sz
    echo = (outdir / "echo_N400_tauQ100.csv").read_text().splitlines()
    assert "t,value,logvalue,L_pow_1_over_N,EchoProduct,EchoRevivals" in echo
    report = json.loads((outdir / "peaks_N400_tauQ100.json").read_text())
    centers = [p["center"] for p in report["Sz"]["peaks"]]
    assert centers[0] == pytest.approx(100.0, abs=3.0)
    assert report["Sz"]["spacing_fit"]["slope"] == pytest.approx(100.0, abs=1.0)


def test_reruns_are_byte_identical(outdir):
    a, b = outdir / "a", outdir / "b"
    for d in (a, b):
        assert run("evolve", "--n", 200, "--tauq", 25, "--tmax", 300, "--outdir", d) == 0
        assert run("quench", "--n", 200, "--tauq", 25, "--outdir", d) == 0
    for name in ("sz_N200_tauQ25.csv", "echo_N200_tauQ25.csv", "quench_N200_tauQ25.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_scan_tauq(outdir):
    assert run("scan", "--vary", "tauq", "--n", 400, "--values", "25,50,100", "--obs", "sz0",
               "--outdir", outdir) == 0
    fits = json.loads((outdir / "scan_tauq_N400_fits.json").read_text())
    assert fits["sz0"]["slope"] == pytest.approx(-0.5, abs=0.05)
    assert (outdir / "scan_tauq_N400.csv").read_text().startswith("tau_Q,N,p_gs")


def test_scan_needs_fixed_parameter(outdir):
    assert run("scan", "--vary", "n", "--outdir", outdir) == 2


def test_oracle_pass_and_cap(outdir, capsys):
    assert run("oracle", "--n", 6, "--tauq", 10, "--outdir", outdir) == 0
    assert json.loads(capsys.readouterr().out)["status"] == "PASS"
    assert run("oracle", "--n", 12, "--outdir", outdir) == 2
    assert "4 <= N <= 10" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ("quench", "--n", 7), ("quench", "--tauq", -1), ("quench", "--g-start", 0.5),
    ("quench", "--tol", 1e-2)])
def test_validation_exit_code(outdir, argv):
    assert run(*argv, "--outdir", outdir) == 2


def test_numerical_failure_exit_code(outdir, monkeypatch):
    from kzising import analysis
    from kzising.driven import IntegrationError

    def boom(*a, **k):
        raise IntegrationError("step budget exhausted", 0.1)

    monkeypatch.setattr(analysis, "critical_state", boom)
    assert run("quench", "--n", 8, "--tauq", 1, "--outdir", outdir) == 3


def test_config_file_and_env_outdir(tmp_path, monkeypatch):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"n": 100, "tauq": 16, "approx": True}))
    target = tmp_path / "env"
    monkeypatch.setenv("KZISING_OUTDIR", str(target))
    assert run("quench", "--config", cfg, "--outdir", tmp_path / "ignored") == 0
    assert (target / "quench_approx_N100_tauQ16.json").exists()
    assert not (tmp_path / "ignored").exists()


def test_config_rejects_unknown_keys(tmp_path, outdir):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run("quench", "--config", cfg, "--outdir", outdir) == 2
