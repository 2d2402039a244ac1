"""
Escrita dos arquivos de resultado (CSV e JSON).

Todos os CSVs passam por _write_frame: colunas fixas, sem índice e floats
com 17 dígitos significativos, para que duas execuções com a mesma semente
gerem arquivos idênticos (exceto wall_ms).
"""
import json
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Sequence, Union

import numpy as np
import pandas as pd

from src.optimization.baseline import BaselineResult
from src.optimization.multistart import MultistartSummary
from src.optimization.sqp_solver import RunResult

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"

RUN_COLUMNS = ["run_id", "seed", "status", "R", "P", "iterations", "wall_ms", "n_dof"]
BASELINE_COLUMNS = ["run_id", "seed", "p", "F", "P", "status", "iterations"]
HISTORY_COLUMNS = ["iteration", "R", "P", "fidelity_residual", "norm_HN", "norm_HT",
                   "cg_iters", "n_dof", "eta", "tau", "merit"]
CURVE_COLUMNS = ["x", "P"]

PathLike = Union[str, Path]


def _write_frame(rows: Iterable[Dict], columns: Sequence[str], path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    frame = pd.DataFrame(list(rows), columns=list(columns))
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logger.info("%d linhas salvas em %s", len(frame), path)
    return path


def write_runs_csv(results: List[RunResult], path: PathLike) -> Path:
    return _write_frame((r.to_row() for r in results), RUN_COLUMNS, path)


def write_baseline_csv(results: List[BaselineResult], path: PathLike) -> Path:
    return _write_frame((r.to_row() for r in results), BASELINE_COLUMNS, path)


def write_history_csv(result: RunResult, path: PathLike) -> Path:
    return _write_frame(result.history, HISTORY_COLUMNS, path)


def write_curve_csv(x: np.ndarray, probability: np.ndarray, path: PathLike) -> Path:
    rows = ({"x": float(a), "P": float(b)} for a, b in zip(x, probability))
    return _write_frame(rows, CURVE_COLUMNS, path)


def write_summary_json(summary: MultistartSummary, path: PathLike) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        json.dump(summary.to_dict(), f, indent=2, default=float)
    logger.info("Resumo salvo em %s", path)
    return path


def read_results_csv(path: PathLike) -> pd.DataFrame:
    return pd.read_csv(path, float_precision="round_trip")


def read_summary_json(path: PathLike) -> Dict:
    with open(path) as f:
        return json.load(f)
