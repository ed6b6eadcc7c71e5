import json

import pytest

from ratedro.cli import main, resolve
from ratedro.harness import read_curve_csv


def test_flags_override_config_file(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"trials": 7, "radius": 0.3, "predictor": "entropy"}))
    command, resolved = resolve(["newsvendor", "--config", str(cfg), "--radius", "0.1"])
    assert command == "newsvendor"
    assert resolved["trials"] == 7 and resolved["radius"] == 0.1 and resolved["predictor"] == "entropy"


def test_unknown_flag_is_error():
    with pytest.raises(SystemExit):
        resolve(["newsvendor", "--bogus", "1"])


def test_unknown_config_key_is_error(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"nonsense": 1}))
    with pytest.raises(SystemExit):
        resolve(["newsvendor", "--config", str(cfg)])


def test_newsvendor_writes_csv_and_config(tmp_path, capsys):
    out = tmp_path / "curve.csv"
    rc = main(["newsvendor", "--predictor", "wasserstein", "--radius", "0.1", "--tgrid", "10,20",
               "--trials", "30", "--seed", "9", "--out", str(out)])
    assert rc == 0
    resolved = json.loads(capsys.readouterr().err)
    assert resolved["seed"] == 9 and resolved["tgrid"] == [10, 20]
    pts = read_curve_csv(out)
    assert [p.T for p in pts] == [10, 20] and all(p.spec == "wasserstein" for p in pts)


def test_frontier_to_stdout(capsys):
    rc = main(["frontier", "--predictors", "entropy", "--radii", "0,0.05", "--tgrid", "10,20,30",
               "--trials", "200"])
    out = capsys.readouterr().out.splitlines()
    assert rc == 0
    assert out[0] == "spec,radius,decay_rate,decay_r2,points_used,asymptotic_in_sample,se"
    assert len(out) == 3


def test_conjugate_check(capsys):
    assert main(["conjugate-check", "--family", "poisson", "--theta", "1.5"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert len(lines) == 21


def test_rate_eval(capsys):
    assert main(["rate-eval", "--kind", "relative_entropy", "--s", "0.5,0.5", "--theta", "0.25,0.75"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["rate"] == pytest.approx(0.1438410362, abs=1e-10)


def test_rate_eval_infinite(capsys):
    assert main(["rate-eval", "--kind", "ar_yw", "--s", "1.2", "--theta", "0.5"]) == 0
    assert json.loads(capsys.readouterr().out)["rate"] == "inf"


def test_library_error_exit_code(capsys):
    assert main(["rate-eval", "--kind", "relative_entropy", "--s", "0.5,0.6", "--theta", "0.5,0.5"]) == 2
    assert "error" in capsys.readouterr().err


def test_sanov_small(capsys):
    rc = main(["sanov-check", "--tgrid", "20,40,60", "--trials", "3000"])
    assert rc == 0
    out = json.loads(capsys.readouterr().out)
    assert out["predicted_rate"] == pytest.approx(0.0610605352, abs=1e-9)
