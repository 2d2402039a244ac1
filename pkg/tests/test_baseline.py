"""
==============================================================================
TESTES UNITÁRIOS - BASELINE P F^p
==============================================================================

COBERTURA DE TESTES:
--------------------
1. Validação de BaselineConfig
2. Amplitudes por permanente contra o levantamento U(S)
3. Gradiente de P F^p contra diferenças finitas
4. Subida de Cayley: objetivo não decrescente, S unitária, F e P em [0, 1]
5. Reinícios múltiplos com sementes derivadas
6. Refinamento de Gauss-Newton em F e convergência a F = 1 com p = 2

FRAMEWORK: unittest (executado via pytest)
==============================================================================
"""

import unittest
import sys
from pathlib import Path
sys.path.append(str(Path(__file__).parent.parent))

import numpy as np
from pydantic import ValidationError
from scipy.linalg import expm
from scipy.stats import unitary_group

from src.fock.fock_space import ScatteringMatrix, lift_unitary, unitarity_defect
from src.herald.heralding import HeraldingProblem, fidelity_diagnostic
from src.optimization.baseline import (
    CONVERGED, ITERATION_LIMIT, STAGNATED, BaselineConfig, _gradient, _objective, _outcomes,
    baseline_multistart, baseline_pfp, fidelity_and_probability, heralded_amplitudes, polish_fidelity
)
from src.optimization.multistart import derive_run_seed

BASELINE_STATUSES = (CONVERGED, STAGNATED, ITERATION_LIMIT)


def toy_problem():
    return HeraldingProblem.build(4, 3, (1, 1, 1, 0), (1,), {(0, 1, 1): 1.0})


def haar(n, seed):
    return unitary_group.rvs(n, random_state=np.random.default_rng(seed))


def toy_solution():
    """Permutação 0 -> 3 que anuncia |011> com P = 1."""
    S = np.zeros((4, 4), dtype=complex)
    S[3, 0] = S[1, 1] = S[2, 2] = S[0, 3] = 1.0
    return S


def random_hermitian(n, seed):
    rng = np.random.default_rng(seed)
    a = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return 0.5 * (a + a.conj().T)


class TestBaselineConfig(unittest.TestCase):

    def test_defaults(self):
        cfg = BaselineConfig()
        self.assertEqual(cfg.p, 2)
        self.assertEqual(cfg.seed, 42)

    def test_rejects_exponent_below_one(self):
        with self.assertRaises(ValidationError):
            BaselineConfig(p=0.5)

    def test_rejects_invalid_armijo_constant(self):
        with self.assertRaises(ValidationError):
            BaselineConfig(armijo_c1=1.5)


class TestHeraldedAmplitudes(unittest.TestCase):

    def setUp(self):
        self.prob = toy_problem()

    def test_matches_lifted_unitary(self):
        for seed in range(5):
            S = haar(4, seed)
            F, P = fidelity_and_probability(S, self.prob)
            F_lift, P_lift = fidelity_diagnostic(lift_unitary(ScatteringMatrix(S), self.prob.space), self.prob)
            self.assertAlmostEqual(F, F_lift, delta=1e-10)
            self.assertAlmostEqual(P, P_lift, delta=1e-10)

    def test_probability_bounded(self):
        outcomes = _outcomes(self.prob)
        self.assertEqual(len(outcomes), self.prob.output_dim)
        for seed in range(5):
            amps = heralded_amplitudes(haar(4, 20 + seed), outcomes)
            self.assertLessEqual(np.vdot(amps, amps).real, 1.0 + 1e-12)

    def test_objective_is_product(self):
        S = haar(4, 3)
        F, P = fidelity_and_probability(S, self.prob)
        amps = heralded_amplitudes(S, _outcomes(self.prob))
        for p in (1.0, 2.0, 6.0):
            self.assertAlmostEqual(_objective(amps, self.prob.target, p), P * F ** p, delta=1e-12)


class TestGradient(unittest.TestCase):

    def test_matches_finite_differences(self):
        prob = toy_problem()
        outcomes = _outcomes(prob)
        rng = np.random.default_rng(8)
        for p in (1.0, 2.0, 3.5):
            S = haar(4, 30)
            G = _gradient(S, heralded_amplitudes(S, outcomes), prob, outcomes, p)
            for _ in range(3):
                E = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
                E /= np.linalg.norm(E)
                eps = 1e-6
                plus = _objective(heralded_amplitudes(S + eps * E, outcomes), prob.target, p)
                minus = _objective(heralded_amplitudes(S - eps * E, outcomes), prob.target, p)
                numeric = (plus - minus) / (2.0 * eps)
                analytic = float(np.vdot(G, E).real)
                self.assertAlmostEqual(analytic, numeric, delta=1e-6 * max(1.0, abs(numeric)))


class TestBaselineAscent(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.prob = toy_problem()
        cls.initial = haar(4, 5)
        cls.cfg = BaselineConfig(p=2, max_iters=40)
        cls.result = baseline_pfp(cls.prob, cls.cfg, initial=cls.initial)

    def test_objective_does_not_decrease(self):
        start = _objective(heralded_amplitudes(self.initial, _outcomes(self.prob)), self.prob.target, 2)
        self.assertGreaterEqual(self.result.objective, start)

    def test_terminal_values(self):
        result = self.result
        self.assertIn(result.status, BASELINE_STATUSES)
        self.assertLessEqual(result.iterations, 40)
        self.assertTrue(0.0 <= result.F <= 1.0 + 1e-12)
        self.assertTrue(0.0 <= result.P <= 1.0 + 1e-12)
        self.assertLess(unitarity_defect(result.S.entries), 1e-12)
        self.assertAlmostEqual(result.objective, result.P * result.F ** 2, delta=1e-8)

    def test_row_layout(self):
        row = self.result.to_row()
        self.assertEqual(list(row), ["run_id", "seed", "p", "F", "P", "status", "iterations"])
        self.assertEqual(row["p"], 2)

    def test_seeded_start_is_reproducible(self):
        cfg = BaselineConfig(p=2, max_iters=5, seed=11)
        first = baseline_pfp(self.prob, cfg)
        second = baseline_pfp(self.prob, cfg)
        self.assertEqual(first.F, second.F)
        self.assertEqual(first.P, second.P)
        self.assertEqual(first.seed, 11)


class TestFidelityPolish(unittest.TestCase):

    def setUp(self):
        self.prob = toy_problem()
        self.cfg = BaselineConfig()

    def test_exact_point_is_left_alone(self):
        S = toy_solution()
        F, P = fidelity_and_probability(S, self.prob)
        self.assertAlmostEqual(F, 1.0, delta=1e-14)
        self.assertAlmostEqual(P, 1.0, delta=1e-14)
        polished, iters, converged = polish_fidelity(S, self.prob, self.cfg)
        self.assertTrue(converged)
        self.assertEqual(iters, 0)
        np.testing.assert_array_equal(polished, S)

    def test_restores_unit_fidelity_near_optimum(self):
        for seed in range(3):
            S = expm(2e-3j * random_hermitian(4, seed)) @ toy_solution()
            F0, P0 = fidelity_and_probability(S, self.prob)
            self.assertLess(F0, 1.0 - 1e-8)
            self.assertGreater(F0, 1.0 - self.cfg.polish_threshold)

            polished, iters, converged = polish_fidelity(S, self.prob, self.cfg)
            F, P = fidelity_and_probability(polished, self.prob)
            self.assertTrue(converged)
            self.assertGreater(iters, 0)
            self.assertGreaterEqual(F, 1.0 - 1e-12)
            self.assertAlmostEqual(P, P0, delta=1e-2)
            self.assertLess(unitarity_defect(polished), 1e-10)

    def test_zero_iterations_budget(self):
        S = expm(2e-3j * random_hermitian(4, 7)) @ toy_solution()
        polished, iters, converged = polish_fidelity(S, self.prob, BaselineConfig(polish_max_iters=0))
        self.assertFalse(converged)
        self.assertEqual(iters, 0)
        np.testing.assert_array_equal(polished, S)


class TestBaselineReachesUnitFidelity(unittest.TestCase):
    """p = 2 termina em F = 1 (subida + refinamento), nunca no limite de iterações."""

    def test_toy_problem_several_seeds(self):
        prob = toy_problem()
        for k in range(4):
            seed = derive_run_seed(42, k)
            result = baseline_pfp(prob, BaselineConfig(p=2), seed=seed)
            self.assertGreaterEqual(result.F, 1.0 - 1e-6, f"semente {seed}")
            self.assertNotEqual(result.status, ITERATION_LIMIT, f"semente {seed}")
            self.assertAlmostEqual(result.objective, result.P * result.F ** 2, delta=1e-10)


class TestBaselineMultistart(unittest.TestCase):

    def test_runs_are_ordered_and_seeded(self):
        cfg = BaselineConfig(p=2, max_iters=3, seed=9)
        results = baseline_multistart(toy_problem(), cfg, runs=3, workers=1)
        self.assertEqual([r.run_index for r in results], [0, 1, 2])
        self.assertEqual([r.seed for r in results], [derive_run_seed(9, k) for k in range(3)])


if __name__ == "__main__":
    unittest.main(verbosity=2)
