"""
==============================================================================
TESTES UNITÁRIOS - REINÍCIOS MÚLTIPLOS
==============================================================================

COBERTURA DE TESTES:
--------------------
1. Sementes derivadas por execução
2. Agrupamento de valores de P em níveis
3. Resumo (contagem por status, melhor execução realizável)
4. Independência do resultado em relação ao número de workers

FRAMEWORK: unittest (executado via pytest)
==============================================================================
"""

import unittest
import sys
from pathlib import Path
sys.path.append(str(Path(__file__).parent.parent))

import numpy as np

from src.errors import InvalidArgumentError
from src.herald.heralding import HeraldingProblem
from src.optimization.multistart import (
    cluster_probabilities, derive_run_seed, multistart, summarize
)
from src.optimization.sqp_solver import (
    FEASIBLE_OPTIMUM, ITERATION_LIMIT, RUN_STATUSES, RunResult, SolverConfig
)


def toy_problem():
    return HeraldingProblem.build(4, 3, (1, 1, 1, 0), (1,), {(0, 1, 1): 1.0})


def fake_result(index, status, P):
    return RunResult(status=status, R_final=0.0, P_final=P, z_final=complex(np.sqrt(P)),
                     iterations=1, U_final=None, seed=index, run_index=index)


class TestRunSeeds(unittest.TestCase):

    def test_deterministic(self):
        self.assertEqual(derive_run_seed(42, 3), derive_run_seed(42, 3))

    def test_distinct_per_run(self):
        seeds = {derive_run_seed(42, k) for k in range(100)}
        self.assertEqual(len(seeds), 100)

    def test_depends_on_root_seed(self):
        self.assertNotEqual(derive_run_seed(1, 0), derive_run_seed(2, 0))


class TestClusterProbabilities(unittest.TestCase):

    def test_groups_nearby_values(self):
        frame = cluster_probabilities([1.0 / 3.0, 0.99995, 0.99999, 1.0 / 3.0 + 5e-5],
                                      resolution=1e-4, feasible=[True, True, False, True])
        self.assertEqual(len(frame), 2)
        self.assertEqual(list(frame["count"]), [2, 2])
        self.assertEqual(list(frame["feasible"]), [2, 1])
        self.assertAlmostEqual(frame["P_min"].iloc[0], 1.0 / 3.0, places=12)
        self.assertAlmostEqual(frame["P_max"].iloc[1], 0.99999, places=12)

    def test_separated_values(self):
        frame = cluster_probabilities([0.074074, 0.077842], resolution=1e-4)
        self.assertEqual(len(frame), 2)
        self.assertEqual(list(frame["feasible"]), [1, 1])

    def test_empty(self):
        frame = cluster_probabilities([])
        self.assertTrue(frame.empty)
        self.assertEqual(list(frame.columns), ["P", "P_min", "P_max", "count", "feasible"])


class TestSummarize(unittest.TestCase):

    def setUp(self):
        self.results = [
            fake_result(0, FEASIBLE_OPTIMUM, 1.0 / 3.0),
            fake_result(1, FEASIBLE_OPTIMUM, 0.9999),
            fake_result(2, ITERATION_LIMIT, 0.99995),
        ]

    def test_counts_and_best(self):
        summary = summarize(self.results, seed=42)
        self.assertEqual(summary.runs, 3)
        self.assertEqual(set(summary.status_counts), set(RUN_STATUSES))
        self.assertEqual(summary.feasible_count, 2)
        self.assertEqual(summary.status_counts[ITERATION_LIMIT], 1)
        self.assertEqual(summary.best_run, 1)
        self.assertAlmostEqual(summary.best_feasible_P, 0.9999, places=12)

    def test_no_feasible_run(self):
        summary = summarize([fake_result(0, ITERATION_LIMIT, 0.5)], seed=1)
        self.assertIsNone(summary.best_feasible_P)
        self.assertIsNone(summary.best_run)

    def test_dict_layout(self):
        data = summarize(self.results, seed=42).to_dict()
        self.assertEqual(data["feasible"], 2)
        self.assertEqual(data["seed"], 42)
        self.assertEqual(len(data["clusters"]), 2)


class TestMultistart(unittest.TestCase):

    def setUp(self):
        self.prob = toy_problem()
        self.cfg = SolverConfig(max_outer_iters=2, seed=5)

    def test_rejects_zero_runs(self):
        with self.assertRaises(InvalidArgumentError):
            multistart(self.prob, self.cfg, runs=0)

    def test_independent_of_worker_count(self):
        serial, summary = multistart(self.prob, self.cfg, runs=2, workers=1)
        parallel, _ = multistart(self.prob, self.cfg, runs=2, workers=2)
        self.assertEqual([r.run_index for r in serial], [0, 1])
        self.assertEqual([r.seed for r in serial], [derive_run_seed(5, 0), derive_run_seed(5, 1)])
        for a, b in zip(serial, parallel):
            self.assertEqual(a.status, b.status)
            self.assertAlmostEqual(a.P_final, b.P_final, delta=1e-12)
            self.assertAlmostEqual(a.R_final, b.R_final, delta=1e-12)
        self.assertEqual(summary.runs, 2)
        self.assertEqual(sum(summary.status_counts.values()), 2)


if __name__ == "__main__":
    unittest.main(verbosity=2)
