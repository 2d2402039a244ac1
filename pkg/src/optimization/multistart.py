"""
Reinícios múltiplos do otimizador a partir de pontos iniciais aleatórios.

Cada execução recebe a semente derivada de (seed, run_index), logo o
resultado não depende do número de workers. As execuções rodam em paralelo
via joblib e são ordenadas pelo índice ao final.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from tqdm import tqdm

from config.config import HERALD_THREADS, MULTISTART_DEFAULTS
from src.errors import InvalidArgumentError
from src.herald.heralding import HeraldingProblem
from src.optimization.sqp_solver import RUN_STATUSES, RunResult, SolverConfig, optimize

logger = logging.getLogger(__name__)


def derive_run_seed(seed: int, run_index: int) -> int:
    """Semente da execução run_index, estável entre plataformas e workers."""
    return int(np.random.SeedSequence([seed, run_index]).generate_state(1)[0])


def cluster_probabilities(values, resolution: float = MULTISTART_DEFAULTS["cluster_resolution"],
                          feasible=None) -> pd.DataFrame:
    """
    Agrupa valores de P ordenados: valores consecutivos a distância <= resolution
    ficam no mesmo nível.

    Returns:
        DataFrame com colunas P (média do nível), P_min, P_max, count, feasible
    """
    values = np.asarray(values, dtype=float)
    flags = np.ones(len(values), dtype=bool) if feasible is None else np.asarray(feasible, dtype=bool)
    columns = ["P", "P_min", "P_max", "count", "feasible"]
    if values.size == 0:
        return pd.DataFrame(columns=columns)

    order = np.argsort(values)
    sorted_values, sorted_flags = values[order], flags[order]
    breaks = np.flatnonzero(np.diff(sorted_values) > resolution) + 1
    rows = []
    for chunk, chunk_flags in zip(np.split(sorted_values, breaks), np.split(sorted_flags, breaks)):
        rows.append({
            "P": float(chunk.mean()),
            "P_min": float(chunk.min()),
            "P_max": float(chunk.max()),
            "count": int(chunk.size),
            "feasible": int(chunk_flags.sum()),
        })
    return pd.DataFrame(rows, columns=columns)


@dataclass
class MultistartSummary:
    """Resumo das execuções: contagem por status, níveis de P e melhor execução."""
    runs: int
    seed: int
    status_counts: Dict[str, int]
    clusters: pd.DataFrame = field(repr=False)
    best_feasible_P: Optional[float]
    best_run: Optional[int]

    @property
    def feasible_count(self) -> int:
        return self.status_counts.get("feasible-optimum", 0)

    def to_dict(self) -> Dict:
        return {
            "runs": self.runs,
            "seed": self.seed,
            "feasible": self.feasible_count,
            "status_counts": dict(self.status_counts),
            "best_feasible_P": self.best_feasible_P,
            "best_run": self.best_run,
            "clusters": self.clusters.to_dict(orient="records"),
        }


def summarize(results: List[RunResult], seed: int,
              resolution: float = MULTISTART_DEFAULTS["cluster_resolution"]) -> MultistartSummary:
    counts = {status: 0 for status in RUN_STATUSES}
    for result in results:
        counts[result.status] += 1

    feasible = [r for r in results if r.is_feasible]
    best = max(feasible, key=lambda r: r.P_final) if feasible else None
    clusters = cluster_probabilities([r.P_final for r in results], resolution,
                                     [r.is_feasible for r in results])
    return MultistartSummary(
        runs=len(results),
        seed=seed,
        status_counts=counts,
        clusters=clusters,
        best_feasible_P=best.P_final if best else None,
        best_run=best.run_index if best else None,
    )


def _single_run(prob: HeraldingProblem, cfg: SolverConfig, seed: int, run_index: int) -> RunResult:
    return optimize(prob, cfg, seed=derive_run_seed(seed, run_index), run_index=run_index)


def multistart(prob: HeraldingProblem, cfg: Optional[SolverConfig] = None,
               runs: int = MULTISTART_DEFAULTS["runs"],
               workers: int = MULTISTART_DEFAULTS["workers"],
               progress: bool = False) -> Tuple[List[RunResult], MultistartSummary]:
    """
    Executa `runs` otimizações independentes.

    Args:
        prob: Problema (somente leitura, compartilhado)
        cfg: Configuração do otimizador; cfg.seed é a semente raiz
        runs: Número de execuções (>= 1)
        workers: Processos paralelos, limitado por HERALD_THREADS
        progress: Barra de progresso tqdm

    Returns:
        (resultados ordenados por índice, resumo)
    """
    if runs < 1:
        raise InvalidArgumentError("Número de execuções deve ser >= 1")
    cfg = cfg or SolverConfig()
    n_jobs = max(1, min(workers, HERALD_THREADS, runs))
    logger.info("Multistart: %d execuções, %d workers, semente %d", runs, n_jobs, cfg.seed)

    tasks = (delayed(_single_run)(prob, cfg, cfg.seed, k) for k in range(runs))
    outputs = Parallel(n_jobs=n_jobs, return_as="generator")(tasks)
    results = list(tqdm(outputs, total=runs, desc="multistart", disable=not progress))
    results.sort(key=lambda r: r.run_index)

    summary = summarize(results, cfg.seed)
    logger.info("Multistart concluído: %d/%d realizáveis, melhor P = %s",
                summary.feasible_count, runs, summary.best_feasible_P)
    return results, summary
