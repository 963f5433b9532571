import json
import subprocess
import sys

import pytest

from hierlag.cli import main
from hierlag.io import load_dataset


def test_simulate_fit_eval(tmp_path, capsys):
    data = tmp_path / "data.csv"
    assert main(["simulate", "--coeffs", "0.5", "-0.3", "--n", "400", "--M", "3",
                 "--seed", "1", "-o", str(data)]) == 0
    ds = load_dataset(data)
    assert ds.M == 3 and ds.lengths == [400] * 3

    fit = tmp_path / "fit.json"
    assert main(["fit", "--input", str(data), "--L", "5", "--mode", "identical",
                 "-o", str(fit)]) == 0
    result = json.loads(fit.read_text())
    assert result["L_input"] == 5 and result["mode"] == "identical"
    assert result["lambda_source"] == "noise"

    truth = tmp_path / "truth.json"
    truth.write_text(json.dumps({"coeffs": [0.5, -0.3]}))
    out = tmp_path / "eval.json"
    capsys.readouterr()
    assert main(["eval", "--fit", str(fit), "--truth", str(truth), "--input", str(data),
                 "-o", str(out)]) == 0
    scores = json.loads(out.read_text())
    assert json.loads(capsys.readouterr().out) == scores
    assert set(scores) == {"est_error", "false_discoveries", "true_lag_recovered", "stability",
                           "prediction_mse"}
    assert scores["stability"] == 1.0


def test_fit_lambda_options(tmp_path):
    data = tmp_path / "data.csv"
    main(["simulate", "--coeffs", "0.5", "--n", "150", "160", "-o", str(data)])
    fit = tmp_path / "fit.json"
    assert main(["fit", "--input", str(data), "--L", "3", "--lambda", "0.05", "-o", str(fit)]) == 0
    assert json.loads(fit.read_text())["lambda_used"] == 0.05
    assert main(["fit", "--input", str(data), "--L", "3", "--theory", "-o", str(fit)]) == 0
    assert json.loads(fit.read_text())["lambda_source"] == "theory"
    with pytest.raises(SystemExit):
        main(["fit", "--input", str(data), "--theory", "--cv", "-o", str(fit)])


def test_simulate_wide(tmp_path):
    out = tmp_path / "wide"
    assert main(["simulate", "--coeffs", "0.3", "--n", "20", "--M", "2", "--format", "wide",
                 "-o", str(out)]) == 0
    assert sorted(p.name for p in out.iterdir()) == ["s0.csv", "s1.csv"]


def test_fit_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("value\n1.0\noops\n")
    assert main(["fit", "--input", str(bad), "-o", str(tmp_path / "f.json")]) == 2
    assert ":3:" in capsys.readouterr().err
    data = tmp_path / "short.csv"
    main(["simulate", "--coeffs", "0.5", "--n", "100", "-o", str(data)])
    # the default lag-bound rule is infeasible at this size
    assert main(["fit", "--input", str(data), "-o", str(tmp_path / "f.json")]) == 2
    assert "override the lag constant" in capsys.readouterr().err
    assert main(["fit", "--input", str(tmp_path / "missing.csv"), "-o", "x.json"]) == 2


def write_config(path, **grid):
    cfg = {"command": "experiment", "seeds": [0, 1], "mode": "identical",
           "grid": {"M": [2], "coeffs": [[0.5, -0.3]], "n": [200], "L": 4, **grid}}
    path.write_text(json.dumps(cfg))
    return path


def test_experiment_command(tmp_path, capsys):
    cfg = write_config(tmp_path / "cfg.json")
    out = tmp_path / "report.csv"
    assert main(["experiment", "--config", str(cfg), "-o", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 1 + 2 + 1
    assert main(["experiment", "--config", str(cfg), "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out)["schema_version"] == 1


def test_experiment_errors_exit_1(tmp_path, capsys):
    cfg = write_config(tmp_path / "cfg.json", n=[3, 200])
    assert main(["experiment", "--config", str(cfg), "-o", str(tmp_path / "r.csv")]) == 1
    err = capsys.readouterr().err.splitlines()
    assert len(err) == 2
    assert all(line.startswith("row cell=0 seed=") for line in err)


def test_experiment_bad_config_exit_2(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"command": "experiment", "sedes": [0]}))
    assert main(["experiment", "--config", str(cfg)]) == 2
    cfg.write_text(json.dumps({"command": "fit"}))
    assert main(["experiment", "--config", str(cfg)]) == 2


def test_module_entry_point():
    out = subprocess.run([sys.executable, "-m", "hierlag", "--help"], capture_output=True,
                         text=True, check=True)
    for cmd in ("simulate", "fit", "eval", "experiment"):
        assert cmd in out.stdout
