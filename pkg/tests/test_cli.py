import json

import pytest

from ilms.cli import (
    EXIT_DIVERGENCE, EXIT_INSTABILITY, EXIT_IO, EXIT_OK, EXIT_USAGE, main,
)


def write_config(path, **kw):
    doc = {"m": 4, "n": 5, "mu": 0.05, "snr_db": 20, "correlation": 0.0,
           "seed": 1, "iterations": 200, "replicas": 10} | kw
    path.write_text(json.dumps(doc))
    return path


def test_simulate_rows(tmp_path):
    cfg = write_config(tmp_path / "white.json")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_OK
    lines = (tmp_path / "o" / "simulation.csv").read_text().splitlines()
    assert lines[0] == "iteration,msd_linear,msd_db,emse_linear,emse_db"
    assert len(lines) == 1 + 201
    # 17 significant digits
    assert lines[0 + 1].split(",")[1] == format(1.0, ".17g")


def test_bad_correlation_is_usage_error(tmp_path):
    cfg = write_config(tmp_path / "bad.json", correlation=1.2)
    out = tmp_path / "o"
    assert main(["simulate", "--config", str(cfg), "--out", str(out)]) == EXIT_USAGE
    assert not out.exists()


def test_unknown_key_and_bad_set(tmp_path):
    cfg = write_config(tmp_path / "c.json", colour="red")
    assert main(["theory", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_USAGE
    cfg = write_config(tmp_path / "d.json")
    assert main(["theory", "--config", str(cfg), "--out", str(tmp_path), "--set", "mu"]) == EXIT_USAGE
    assert main(["theory", "--config", str(tmp_path / "missing.json"), "--out", str(tmp_path)]) == EXIT_IO


def test_malformed_json(tmp_path):
    cfg = tmp_path / "x.json"
    cfg.write_text("{not json")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path)]) == EXIT_USAGE


def test_theory_outputs(tmp_path):
    cfg = write_config(tmp_path / "t.json", iterations=400)
    out = tmp_path / "o"
    assert main(["theory", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    summary = json.loads((out / "steady_state.json").read_text())
    assert summary["stable"] is True and summary["spectral_radius"] < 1
    last = (out / "theory.csv").read_text().splitlines()[-1].split(",")
    assert float(last[1]) == pytest.approx(summary["msd_db"], abs=1e-9)
    assert float(last[2]) == pytest.approx(summary["emse_db"], abs=1e-9)


def test_theory_refuses_unstable(tmp_path):
    cfg = write_config(tmp_path / "u.json", mu=3.0)
    out = tmp_path / "o"
    assert main(["theory", "--config", str(cfg), "--out", str(out)]) == EXIT_INSTABILITY
    assert not (out / "theory.csv").exists()
    assert json.loads((out / "steady_state.json").read_text())["stable"] is False


def test_simulate_divergence_exit(tmp_path):
    cfg = write_config(tmp_path / "u.json", mu=2.5)
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == EXIT_DIVERGENCE


def test_overrides(tmp_path):
    cfg = write_config(tmp_path / "w.json")
    out = tmp_path / "o"
    assert main(["simulate", "--config", str(cfg), "--out", str(out),
                 "--iterations", "7", "--set", "n=3", "--seed", "5"]) == EXIT_OK
    assert len((out / "simulation.csv").read_text().splitlines()) == 9
    assert json.loads(cfg.read_text())["iterations"] == 200


def test_stability_command(tmp_path, capsys):
    cfg = write_config(tmp_path / "s.json", mu=0.1)
    assert main(["stability", "--config", str(cfg)]) == EXIT_OK
    text = capsys.readouterr().out
    assert text.count("pass") == 5 and "2 " in text
    cfg = write_config(tmp_path / "f.json", m=2, correlation=0.4, mu=1.5)
    assert main(["stability", "--config", str(cfg)]) == EXIT_INSTABILITY
    text = capsys.readouterr().out
    assert "FAIL" in text and "1.42857" in text


def test_compare_and_table1(tmp_path):
    cfg = write_config(tmp_path / "cmp.json")
    out = tmp_path / "o"
    assert main(["compare", "--config", str(cfg), "--out", str(out)]) == EXIT_OK
    assert (out / "cmp" / "comparison.csv").exists()
    summary = json.loads((out / "cmp" / "summary.json").read_text())
    assert summary["label"] == "cmp"
    assert main(["table1", "--out", str(out)]) == EXIT_OK
    assert len((out / "table1.csv").read_text().splitlines()) == 13
