from __future__ import annotations

import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ValidationError

from backend.errors import ConfigurationError

logger = logging.getLogger(__name__)

ROW_TYPES = ("seed", "mean", "median", "q25", "q75")
LIST_SEPARATOR = ";"
FORMATS = ("csv", "json")

# tolerancia al comparar totales en dBm releídos de disco
_DBM_TOL = 1e-9


class ResultRow(BaseModel):
    """Una fila de resultados; el orden de los campos es el de las columnas del CSV."""

    axis: str = ""
    value: Optional[float] = None
    row_type: Literal["seed", "mean", "median", "q25", "q75"] = "seed"
    scheme: Literal["evt", "worst_case"] = "evt"
    seed: Optional[int] = None
    powers_dbm: List[float]
    total_power_dbm: float
    upper_bounds: List[float]
    lower_bounds: List[float]
    empirical_outage: List[float]
    outage_targets: List[float]
    feasible: bool
    iterations: Union[int, float]
    wall_time: Optional[float] = None


FIELDS = tuple(ResultRow.model_fields)
_LIST_FIELDS = {"powers_dbm", "upper_bounds", "lower_bounds", "empirical_outage", "outage_targets"}


def _record(row: ResultRow, include_timing: bool) -> Dict[str, Any]:
    data = row.model_dump()
    if not include_timing:
        data.pop("wall_time", None)
    return data


def _csv_cell(value: Any) -> str:
    if isinstance(value, list):
        return LIST_SEPARATOR.join(repr(float(v)) for v in value)
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def write_rows(rows: Iterable[ResultRow], path, fmt: str = "csv", include_timing: bool = False) -> Path:
    """
    CSV con columnas en el orden de ResultRow (listas por UE separadas por ';')
    o JSON con los mismos nombres. wall_time solo si include_timing.
    """
    fmt = (fmt or "csv").lower()
    if fmt not in FORMATS:
        raise ConfigurationError(f"Formato no soportado: {fmt}")

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    records = [_record(r, include_timing) for r in rows]
    fields = [f for f in FIELDS if include_timing or f != "wall_time"]

    if fmt == "json":
        path.write_text(json.dumps(records, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    else:
        with path.open("w", newline="", encoding="utf-8") as f:
            writer = csv.writer(f)
            writer.writerow(fields)
            for rec in records:
                writer.writerow([_csv_cell(rec[name]) for name in fields])

    logger.info("💾 Resultados guardados | filas=%s | formato=%s | archivo=%s", len(records), fmt, path)
    return path


def _parse_csv_record(raw: Dict[str, str]) -> Dict[str, Any]:
    out: Dict[str, Any] = {}
    for key, cell in raw.items():
        if key in _LIST_FIELDS:
            out[key] = [float(v) for v in cell.split(LIST_SEPARATOR)] if cell else []
        elif cell == "":
            out[key] = None
        elif key == "feasible":
            out[key] = cell.strip().lower() == "true"
        else:
            out[key] = cell
    return out


def read_rows(path) -> List[ResultRow]:
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"No existe el archivo de resultados: {path}")

    if path.suffix.lower() == ".json":
        records = json.loads(path.read_text(encoding="utf-8"))
    else:
        with path.open(newline="", encoding="utf-8") as f:
            records = [_parse_csv_record(r) for r in csv.DictReader(f)]

    try:
        return [ResultRow(**{k: v for k, v in r.items() if v is not None}) for r in records]
    except ValidationError as e:
        raise ConfigurationError(f"Archivo de resultados inválido {path.name}: {e}") from e


# ---------------------------
# Agregados entre semillas
# ---------------------------

def _stat(values: np.ndarray, row_type: str) -> np.ndarray:
    if row_type == "mean":
        return np.mean(values, axis=0)
    if row_type == "median":
        return np.median(values, axis=0)
    return np.percentile(values, 25 if row_type == "q25" else 75, axis=0)


def aggregate_rows(rows: List[ResultRow]) -> List[ResultRow]:
    """Media, mediana y cuartiles por campo numérico (por UE en los campos lista)."""
    if not rows:
        return []
    ref = rows[0]
    out: List[ResultRow] = []
    for row_type in ROW_TYPES[1:]:
        data: Dict[str, Any] = {
            "axis": ref.axis,
            "value": ref.value,
            "row_type": row_type,
            "scheme": ref.scheme,
            "seed": None,
            "outage_targets": list(ref.outage_targets),
            "feasible": all(r.feasible for r in rows),
        }
        for name in ("powers_dbm", "upper_bounds", "lower_bounds", "empirical_outage"):
            data[name] = _stat(np.array([getattr(r, name) for r in rows], dtype=float), row_type).tolist()
        for name in ("total_power_dbm", "iterations"):
            data[name] = float(_stat(np.array([getattr(r, name) for r in rows], dtype=float), row_type))
        out.append(ResultRow(**data))
    return out


def sort_key(row: ResultRow, value_index: Dict[Optional[float], int]):
    return (
        value_index.get(row.value, len(value_index)),
        row.scheme,
        ROW_TYPES.index(row.row_type),
        -1 if row.seed is None else row.seed,
    )


# ---------------------------
# Verificación
# ---------------------------

def verify_rows(rows: List[ResultRow], p_max_dbm: Optional[float] = None) -> List[str]:
    """Violaciones encontradas en filas factibles por semilla: O_UB,k > ζ_k o Σp_k > p_max."""
    problems: List[str] = []
    for i, row in enumerate(rows):
        if row.row_type != "seed" or not row.feasible or row.scheme != "evt":
            continue
        zetas = row.outage_targets * len(row.upper_bounds) if len(row.outage_targets) == 1 else row.outage_targets
        for k, (ub, zeta) in enumerate(zip(row.upper_bounds, zetas)):
            if ub > zeta:
                problems.append(f"fila {i} (seed={row.seed}, valor={row.value}): UE {k} O_UB={ub:.3e} > ζ={zeta:.3e}")
        if p_max_dbm is not None and row.total_power_dbm > p_max_dbm + _DBM_TOL:
            problems.append(
                f"fila {i} (seed={row.seed}, valor={row.value}): p_total={row.total_power_dbm:.4f} dBm > p_max={p_max_dbm} dBm"
            )
    return problems
