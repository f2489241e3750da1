import hashlib

import pytest

pytest.importorskip("mlflow")

from eval import mlflow_logger  # noqa: E402


def test_run_names():
    assert mlflow_logger.build_run_name("sweep", {"axis": "tau_e", "antennas": 4}) == "sweep_tau_e_mrt_M4"
    assert mlflow_logger.build_run_name("fixed_channel", {"trials": 10}) == "fixed_channel_trials10"
    assert mlflow_logger.build_run_name("acceptance", {"checks": "fixed_channel"}) == "acceptance_fixed_channel"
    assert mlflow_logger.build_run_name("allocate") == "allocate_run"


def test_sha256_file(tmp_path):
    path = tmp_path / "r.csv"
    path.write_bytes(b"axis,value\n")
    assert mlflow_logger.sha256_file(str(path)) == hashlib.sha256(b"axis,value\n").hexdigest()


def test_log_run_records_params_and_metrics(tmp_path, monkeypatch):
    calls = {"params": {}, "metrics": {}, "artifacts": []}

    class _Run:
        def __enter__(self):
            return self

        def __exit__(self, *exc):
            return False

    monkeypatch.setattr(mlflow_logger.mlflow, "set_experiment", lambda name: None)
    monkeypatch.setattr(mlflow_logger.mlflow, "start_run", lambda run_name: _Run())
    monkeypatch.setattr(mlflow_logger.mlflow, "log_param", lambda k, v: calls["params"].__setitem__(k, v))
    monkeypatch.setattr(mlflow_logger.mlflow, "log_metric", lambda k, v: calls["metrics"].__setitem__(k, v))
    monkeypatch.setattr(mlflow_logger.mlflow, "log_artifact", lambda p, artifact_path: calls["artifacts"].append(p))

    result = tmp_path / "r.csv"
    result.write_text("axis\n", encoding="utf-8")
    name = mlflow_logger.log_run_to_mlflow(
        experiment_name="t",
        command="benchmark",
        summary={"n": 3, "feasible_rate": 1.0, "ok": True},
        result_path=str(result),
        extra_params={"outage_targets": [1e-3]},
    )
    assert name == "benchmark_zeta[0.001]"
    assert calls["metrics"] == {"n": 3.0, "feasible_rate": 1.0}
    assert calls["params"]["command"] == "benchmark"
    assert "result_hash" in calls["params"]
    assert calls["artifacts"] == [str(result)]
