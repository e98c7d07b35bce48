import json

import numpy as np
import pytest

from ilms.errors import DivergenceError, InstabilityError, ValidationError
from ilms.experiments import (
    ExperimentSpec, default_iterations, plateau_db, run_experiment, table1_suite,
    write_report, write_table1_csv,
)


def small_spec(**kw):
    args = dict(label="small", m=4, n=5, mu=0.05, snr_db=20, jitter=0,
                iterations=300, replicas=40, seed=3)
    return ExperimentSpec(**(args | kw))


def test_report_fields_and_consistency():
    rep = run_experiment(small_spec())
    assert len(rep.sim_msd_db) == 301 and len(rep.theory_msd_db) == 301
    assert rep.stable and not rep.degenerate and rep.common_eigenbasis
    assert abs(rep.closed_form_plateau_db - rep.steady_state_db) < 1e-6
    assert abs(rep.steady_delta_db) < 0.5
    assert rep.sim_msd_db[0] == rep.theory_msd_db[0] == pytest.approx(0.0, abs=1e-12)


def test_report_determinism(tmp_path):
    a = run_experiment(small_spec())
    b = run_experiment(small_spec())
    assert a.sim_msd_db.tobytes() == b.sim_msd_db.tobytes()
    assert a.summary() == b.summary()
    pa = write_report(a, tmp_path / "a")
    pb = write_report(b, tmp_path / "b")
    for name in ("comparison.csv", "summary.json"):
        assert (tmp_path / "a" / "small" / name).read_bytes() == \
            (tmp_path / "b" / "small" / name).read_bytes()
    assert json.loads((tmp_path / "a" / "small" / "summary.json").read_text())["stable"]


def test_degenerate_zero_step():
    rep = run_experiment(small_spec(mu=0.0, label="frozen"))
    assert rep.degenerate and not rep.stable
    np.testing.assert_allclose(rep.sim_msd_db, 0.0, atol=1e-12)
    np.testing.assert_allclose(rep.theory_msd_db, 0.0, atol=1e-12)
    assert np.isnan(rep.steady_state_db)


def test_errors_carry_label():
    with pytest.raises(InstabilityError, match=r"\[wild\]"):
        run_experiment(small_spec(mu=2.5, label="wild"))


def test_spec_validation():
    with pytest.raises(ValidationError):
        ExperimentSpec.from_dict({"m": 4, "n": 2, "mu": 0.1, "colour": "red"})
    with pytest.raises(ValidationError):
        ExperimentSpec.from_dict({"m": 4, "mu": 0.1})
    with pytest.raises(ValidationError):
        small_spec(replicas=0)
    assert default_iterations(5e-3) == 50_000
    assert default_iterations(0.01) == 5_000
    assert default_iterations([0.1, 0.005]) == 50_000


def test_plateau_estimator():
    curve = np.concatenate([np.ones(91), np.full(10, 0.01)])
    assert plateau_db(curve) == pytest.approx(-20.0)


def test_table1_structure(tmp_path):
    rows = table1_suite(seed=0)
    assert len(rows) == 12
    assert {(r.data_type, r.snr_db, r.step_size) for r in rows} == {
        (d, s, mu) for d in ("white", "correlated") for s in (10.0, 20.0, 30.0)
        for mu in (5e-3, 5e-2)
    }
    for r in rows:
        assert r.stable and np.isnan(r.sim_db)
        assert abs(r.closed_form_db - r.steady_state_db) < 1e-6
    path = tmp_path / "t.csv"
    write_table1_csv(path, rows)
    lines = path.read_text().splitlines()
    assert lines[0] == "data_type,snr_db,step_size,sim_db,eq19_db,eq22_db"
    assert len(lines) == 13


@pytest.mark.parametrize("jitter", [0.0, 0.5])
def test_table1_trends(jitter):
    rows = {(r.data_type, r.snr_db, r.step_size): r.steady_state_db
            for r in table1_suite(seed=4, jitter=jitter)}
    for d in ("white", "correlated"):
        for mu in (5e-3, 5e-2):
            vals = [rows[d, s, mu] for s in (10.0, 20.0, 30.0)]
            assert vals[0] > vals[1] > vals[2]
        for s in (10.0, 20.0, 30.0):
            assert rows[d, s, 5e-2] > rows[d, s, 5e-3]
    for s in (10.0, 20.0, 30.0):
        for mu in (5e-3, 5e-2):
            assert abs(rows["white", s, mu] - rows["correlated", s, mu]) < 0.5


def test_table1_with_simulation_column():
    rows = table1_suite(seed=1, replicas=5, iterations=300, jitter=0)
    fast = [r for r in rows if r.step_size == 5e-2]
    for r in fast:
        assert abs(r.sim_db - r.steady_state_db) < 0.5
