import json

import pytest

from backend.cli import EXIT_CONFIG, EXIT_OK, EXIT_VIOLATIONS, main, parse_values, summarize_rows
from backend.reporting import read_rows, write_rows


@pytest.fixture
def config_file(tmp_path):
    path = tmp_path / "escenario.env"
    path.write_text("SAMPLES=2000\nTRIALS=1000\n", encoding="utf-8")
    return str(path)


def test_parse_values():
    assert parse_values("1, 2;4") == [1.0, 2.0, 4.0]
    assert parse_values("") == []


def test_allocate_then_verify(tmp_path, config_file):
    out = tmp_path / "a.csv"
    assert main(["allocate", "--config", config_file, "--seed", "3", "--out", str(out)]) == EXIT_OK
    assert main(["verify", str(out), "--config", config_file]) == EXIT_OK

    row = read_rows(out)[0]
    tampered = row.model_copy(update={"feasible": True, "upper_bounds": [0.5]})
    bad = write_rows([tampered], tmp_path / "bad.json", fmt="json")
    assert main(["verify", str(bad)]) == EXIT_VIOLATIONS


def test_allocate_prints_json(capsys, config_file):
    assert main(["allocate", "--config", config_file, "--seed", "3"]) == EXIT_OK
    data = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert "wall_time" not in data
    assert data["seed"] == 3


def test_configuration_errors(tmp_path):
    bad = tmp_path / "malo.env"
    bad.write_text("ANTENAS=4\n", encoding="utf-8")
    assert main(["allocate", "--config", str(bad)]) == EXIT_CONFIG
    assert main(["verify", str(tmp_path / "no_existe.csv")]) == EXIT_CONFIG


def test_sweep_rejects_unknown_axis():
    with pytest.raises(SystemExit):
        main(["sweep", "--axis", "bandwidth", "--values", "1"])


def test_summarize_rows_empty():
    assert summarize_rows([]) == {"n": 0}


def test_fig2_command_and_alias(tmp_path):
    assert main(["fig2", "--trials", "200", "--out", str(tmp_path / "f2")]) == EXIT_OK
    summary = json.loads((tmp_path / "f2" / "fixed_channel_summary.json").read_text(encoding="utf-8"))
    assert [(s["pilot_length"], s["power_dbm"]) for s in summary] == [(1, 23.0), (1, 26.0), (2, 23.0), (2, 26.0)]
    assert main(["fixed-channel", "--trials", "200", "--out", str(tmp_path / "alias")]) == EXIT_OK


def test_threshold_study_command(tmp_path):
    out = tmp_path / "umbral"
    args = ["threshold-study", "--samples", "50000", "--thresholds", "0,2", "--bins", "10", "--out", str(out)]
    assert main(args) == EXIT_OK
    summary = json.loads((out / "threshold_study_summary.json").read_text(encoding="utf-8"))
    assert [s["threshold"] for s in summary] == [0.0, 2.0]
    assert (out / "threshold_mu0.csv").exists()
    assert (out / "threshold_mu2.csv").exists()
