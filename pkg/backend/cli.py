"""
CLI del toolkit.

    python -m backend.cli allocate  --config escenario.env --seed 7 --out runs/a.csv
    python -m backend.cli sweep     --axis tau_e --values 1,2,4,8 --out runs/tau.csv
    python -m backend.cli fig2      --trials 1000000 --out runs/fixed_channel
    python -m backend.cli benchmark --scenarios 50 --out runs/bench.json --format json
    python -m backend.cli threshold-study --thresholds 0,2,4 --out runs/umbral
    python -m backend.cli verify    runs/tau.csv --config escenario.env

Exit: 0 éxito (incluye asignaciones infactibles), 2 error de config/IO,
1 si verify encuentra violaciones.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
from dotenv import load_dotenv

from backend.config import ScenarioConfig, load_config
from backend.errors import ConfigurationError, UrllcError
from backend.reporting import FORMATS, ResultRow, read_rows, verify_rows, write_rows
from backend.runner import (
    SWEEP_AXES,
    power_gaps_db,
    run_allocate,
    run_benchmark_compare,
    run_fixed_channel,
    run_sweep,
    run_threshold_study,
)
from backend.seeding import scenario_seeds

try:
    from eval.mlflow_logger import log_run_to_mlflow
except Exception:
    log_run_to_mlflow = None

logger = logging.getLogger("backend.cli")

EXIT_OK = 0
EXIT_VIOLATIONS = 1
EXIT_CONFIG = 2


# =========================
# Helpers
# =========================

def parse_values(raw: str) -> List[float]:
    return [float(v) for v in (raw or "").replace(";", ",").split(",") if v.strip()]


def _load(args: argparse.Namespace) -> ScenarioConfig:
    return load_config(
        args.config,
        seed=args.seed,
        trials=args.trials,
        scenarios=getattr(args, "scenarios", None),
    )


def _emit(rows: List[ResultRow], args: argparse.Namespace) -> Optional[Path]:
    if args.out:
        return write_rows(rows, args.out, fmt=args.format, include_timing=args.timing)
    for row in rows:
        data = row.model_dump()
        if not args.timing:
            data.pop("wall_time", None)
        print(json.dumps(data, ensure_ascii=False))
    return None


def summarize_rows(rows: List[ResultRow]) -> Dict[str, Any]:
    seed_rows = [r for r in rows if r.row_type == "seed"]
    n = len(seed_rows)
    if n == 0:
        return {"n": 0}

    feasible = [r for r in seed_rows if r.feasible]
    out: Dict[str, Any] = {
        "n": n,
        "feasible_rate": len(feasible) / n,
    }
    if feasible:
        out["total_power_dbm_median"] = float(np.median([r.total_power_dbm for r in feasible]))
        out["empirical_outage_max_median"] = float(np.median([max(r.empirical_outage) for r in feasible]))
        out["bound_violations"] = len(verify_rows(feasible))
    gaps = power_gaps_db(rows)
    if gaps:
        out["worst_case_gap_db_median"] = float(np.median(gaps))
    return out


def _maybe_mlflow(args, command: str, rows: List[ResultRow], path: Optional[Path], config: ScenarioConfig, **extra):
    if not getattr(args, "mlflow", False):
        return
    if log_run_to_mlflow is None:
        logger.warning("⚠️ MLflow no disponible; se omite el registro")
        return
    if path is None:
        logger.warning("⚠️ --mlflow necesita --out para adjuntar el archivo de resultados")
        return
    params = {**config.model_dump(), **extra}
    run_name = log_run_to_mlflow(
        experiment_name=os.getenv("MLFLOW_EXPERIMENT", "urllc_evt"),
        command=command,
        summary=summarize_rows(rows),
        result_path=str(path),
        config_path=args.config,
        extra_params=params,
    )
    logger.info("✅ MLflow run registrado | %s", run_name)


# =========================
# Comandos
# =========================

def cmd_allocate(args: argparse.Namespace) -> int:
    config = _load(args)
    row = run_allocate(config)
    _emit([row], args)
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    config = _load(args)
    values = parse_values(args.values)
    rows = run_sweep(config, args.axis, values, workers=args.workers, progress=args.progress)
    path = _emit(rows, args)
    _maybe_mlflow(args, "sweep", rows, path, config, axis=args.axis, values=args.values)
    return EXIT_OK


def cmd_benchmark(args: argparse.Namespace) -> int:
    config = _load(args)
    seeds = scenario_seeds(config.seed, config.scenarios) if config.scenarios > 1 else [config.seed]
    rows = run_benchmark_compare(config, seeds=seeds, radius=args.radius, workers=args.workers, progress=args.progress)
    path = _emit(rows, args)
    gaps = power_gaps_db(rows)
    if gaps:
        logger.info("📊 Brecha peor caso − EVT | mediana=%.3f dB | semillas=%s", float(np.median(gaps)), len(gaps))
    _maybe_mlflow(args, "benchmark", rows, path, config)
    return EXIT_OK


def cmd_fixed_channel(args: argparse.Namespace) -> int:
    config = _load(args)
    out_dir = Path(args.out) if args.out else None
    cases = run_fixed_channel(config, trials=args.trials, out_dir=str(out_dir) if out_dir else None)

    summary = [c.summary() for c in cases]
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "fixed_channel_summary.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    for s in summary:
        logger.info(
            "📊 τ_e=%s | p=%s dBm | fracción bajo objetivo=%.4e ± %.1e",
            s["pilot_length"], s["power_dbm"], s["fraction"], s["stderr"],
        )
    if not out_dir:
        print(json.dumps(summary, indent=2))
    return EXIT_OK


def cmd_threshold_study(args: argparse.Namespace) -> int:
    config = _load(args)
    out_dir = Path(args.out) if args.out else None
    thresholds = parse_values(args.thresholds)
    cases = run_threshold_study(
        config,
        samples=args.samples,
        thresholds=thresholds,
        bins=args.bins,
        out_dir=str(out_dir) if out_dir else None,
    )

    summary = [c.summary() for c in cases]
    if out_dir:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "threshold_study_summary.json").write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")
    else:
        print(json.dumps(summary, indent=2))
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    rows = read_rows(args.results)
    p_max_dbm = load_config(args.config).p_max_dbm if args.config else None
    problems = verify_rows(rows, p_max_dbm=p_max_dbm)

    checked = sum(1 for r in rows if r.row_type == "seed" and r.feasible and r.scheme == "evt")
    if problems:
        for p in problems:
            logger.error("❌ %s", p)
        logger.error("❌ Verificación fallida | filas revisadas=%s | violaciones=%s", checked, len(problems))
        return EXIT_VIOLATIONS

    logger.info("✅ Verificación OK | filas revisadas=%s", checked)
    return EXIT_OK


# =========================
# Parser
# =========================

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="Archivo KEY=value del escenario")
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--trials", type=int, default=None, help="Trials Monte Carlo")
    common.add_argument("--out", default=None)
    common.add_argument("--format", choices=FORMATS, default="csv")
    common.add_argument("--timing", action="store_true", help="Incluye wall_time en la salida")

    batch = argparse.ArgumentParser(add_help=False)
    batch.add_argument("--scenarios", type=int, default=None, help="Semillas de escenario")
    batch.add_argument("--workers", type=int, default=None, help="Procesos (default: SWEEP_WORKERS)")
    batch.add_argument("--progress", action="store_true")
    batch.add_argument("--mlflow", action="store_true")

    ap = argparse.ArgumentParser(prog="urllc-evt", description="Precoding de potencia mínima con cotas EVT")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("allocate", parents=[common], help="Un escenario de punta a punta")
    p.set_defaults(func=cmd_allocate)

    p = sub.add_parser("sweep", parents=[common, batch], help="Barrido sobre un eje")
    p.add_argument("--axis", required=True, choices=sorted(SWEEP_AXES))
    p.add_argument("--values", required=True, help="Valores separados por coma")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fig2", aliases=["fixed-channel"], parents=[common], help="Distribución de SINR con canal fijo y error de estimación")
    p.set_defaults(func=cmd_fixed_channel)

    p = sub.add_parser("benchmark", parents=[common, batch], help="EVT vs peor caso (un UE)")
    p.add_argument("--radius", type=float, default=None, help="Radio ε fijo (default: regla del cuantil)")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("threshold-study", parents=[common], help="Ajuste GPD sobre excesos de N(0,1) para varios umbrales μ")
    p.add_argument("--thresholds", default="0,2,4", help="Umbrales μ separados por coma")
    p.add_argument("--samples", type=int, default=None, help="Muestras normales (default 10^6)")
    p.add_argument("--bins", type=int, default=50)
    p.set_defaults(func=cmd_threshold_study)

    p = sub.add_parser("verify", help="Re-verifica O_UB <= ζ y el presupuesto en un archivo de resultados")
    p.add_argument("results")
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_verify)

    return ap


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    logging.basicConfig(
        level=os.getenv("LOG_LEVEL", "INFO").upper(),
        format="%(asctime)s %(levelname)s %(name)s | %(message)s",
    )

    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UrllcError, ConfigurationError, OSError) as e:
        logger.error("❌ %s: %s", type(e).__name__, e)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
