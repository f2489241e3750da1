import hashlib
import os
import subprocess
from typing import Dict, Any, Optional

import mlflow


def sha256_file(path: str) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(8192), b""):
            h.update(chunk)
    return h.hexdigest()


def git_commit_sha() -> Optional[str]:
    try:
        out = subprocess.check_output(
            ["git", "rev-parse", "HEAD"],
            stderr=subprocess.DEVNULL,
        )
        return out.decode().strip()
    except Exception:
        return None


def build_run_name(command: str, extra_params: Optional[Dict[str, Any]] = None) -> str:
    extra_params = extra_params or {}

    if command == "sweep":
        axis = extra_params.get("axis") or "axis"
        method = extra_params.get("method") or "mrt"
        return f"sweep_{axis}_{method}_M{extra_params.get('antennas', 'na')}"

    if command == "benchmark":
        zeta = extra_params.get("outage_targets") or "na"
        return f"benchmark_zeta{zeta}"

    if command == "fixed_channel":
        return f"fixed_channel_trials{extra_params.get('trials', 'na')}"

    if command == "acceptance":
        checks = extra_params.get("checks") or "all"
        return f"acceptance_{checks}"

    return f"{command}_run"


def log_run_to_mlflow(
    *,
    experiment_name: str,
    command: str,
    summary: Dict[str, Any],
    result_path: str,
    config_path: Optional[str] = None,
    extra_params: Optional[Dict[str, Any]] = None,
) -> str:
    """Registra parámetros, métricas numéricas del summary y el archivo de resultados."""
    mlflow.set_experiment(experiment_name)

    run_name = build_run_name(command, extra_params)

    with mlflow.start_run(run_name=run_name):
        mlflow.log_param("command", command)

        if config_path and os.path.exists(config_path):
            mlflow.log_param("config_path", config_path)
            mlflow.log_param("config_hash", sha256_file(config_path))

        commit = git_commit_sha()
        if commit:
            mlflow.log_param("git_commit", commit)

        if extra_params:
            for k, v in extra_params.items():
                if v is not None:
                    mlflow.log_param(k, str(v))

        for k, v in summary.items():
            if isinstance(v, (int, float)) and not isinstance(v, bool) and v is not None:
                mlflow.log_metric(k, float(v))

        if os.path.exists(result_path):
            mlflow.log_param("result_hash", sha256_file(result_path))
            mlflow.log_artifact(result_path, artifact_path="results")

    return run_name
