"""
==============================================================================
TESTES UNITÁRIOS - ESPAÇO DE FOCK, PERMANENTE E FORMATO DE MATRIZES
==============================================================================

COBERTURA DE TESTES:
--------------------
1. Enumeração da base (dimensão, estado fixado na posição 0)
2. Operadores a†_i a_j
3. Permanente (casos fechados e limite de tamanho)
4. Oráculo de amplitudes
5. Levantamento U(S): oráculo, homomorfismo e corte do logaritmo
6. Formato texto de matrizes

FRAMEWORK: unittest (executado via pytest)
==============================================================================
"""

import unittest
import sys
import tempfile
from math import comb
from pathlib import Path
sys.path.append(str(Path(__file__).parent.parent))

import numpy as np
from scipy.stats import unitary_group

from src.errors import InvalidArgumentError, MatrixFormatError, NonUnitaryError, PermanentSizeError
from src.fock.fock_space import (
    ScatteringMatrix, amplitude_oracle, enumerate_basis, ladder_generator, lift_unitary
)
from src.fock.matrix_io import format_matrix, parse_matrix, read_matrix, write_matrix
from src.fock.permanent import permanent, permanent_minors

SPLITTER = np.array([[1.0, 1.0], [1.0, -1.0]]) / np.sqrt(2.0)


def random_unitary(n, seed):
    return unitary_group.rvs(n, random_state=np.random.default_rng(seed))


class TestEnumerateBasis(unittest.TestCase):

    def test_four_modes_three_photons(self):
        space = enumerate_basis(4, 3, ordering_hint=(1, 1, 1, 0))
        self.assertEqual(space.dimension, 20)
        self.assertEqual(space.basis[0], (1, 1, 1, 0))

    def test_two_modes_one_photon(self):
        space = enumerate_basis(2, 1)
        self.assertEqual(space.basis, ((1, 0), (0, 1)))

    def test_six_modes_four_photons(self):
        space = enumerate_basis(6, 4, ordering_hint=(1, 1, 1, 1, 0, 0))
        self.assertEqual(space.dimension, 126)
        self.assertEqual(space.position((1, 1, 1, 1, 0, 0)), 0)

    def test_dimension_law(self):
        for modes in range(1, 7):
            for photons in range(0, 7):
                with self.subTest(modes=modes, photons=photons):
                    space = enumerate_basis(modes, photons)
                    self.assertEqual(space.dimension, comb(modes + photons - 1, photons))
                    self.assertEqual(len(set(space.basis)), space.dimension)

    def test_hint_with_wrong_photon_count(self):
        with self.assertRaises(InvalidArgumentError):
            enumerate_basis(4, 3, ordering_hint=(1, 1, 0, 0))

    def test_hint_with_wrong_mode_count(self):
        with self.assertRaises(InvalidArgumentError):
            enumerate_basis(4, 3, ordering_hint=(1, 1, 1))

    def test_deterministic_order(self):
        a = enumerate_basis(3, 3, ordering_hint=(1, 1, 1))
        b = enumerate_basis(3, 3, ordering_hint=(1, 1, 1))
        self.assertEqual(a.basis, b.basis)


class TestLadderGenerator(unittest.TestCase):

    def test_number_operator(self):
        space = enumerate_basis(2, 1)
        np.testing.assert_allclose(ladder_generator(space, 0, 0).toarray(), np.diag([1.0, 0.0]))

    def test_hopping(self):
        space = enumerate_basis(2, 1)
        matrix = ladder_generator(space, 0, 1).toarray()
        self.assertEqual(matrix[space.position((1, 0)), space.position((0, 1))], 1.0)
        self.assertEqual(np.count_nonzero(matrix), 1)

    def test_bosonic_factor(self):
        space = enumerate_basis(2, 2)
        matrix = ladder_generator(space, 0, 1).toarray()
        value = matrix[space.position((1, 1)), space.position((0, 2))]
        self.assertAlmostEqual(value, np.sqrt(2.0), places=14)

    def test_index_out_of_range(self):
        with self.assertRaises(InvalidArgumentError):
            ladder_generator(enumerate_basis(2, 1), 0, 2)


class TestPermanent(unittest.TestCase):

    def test_one_by_one(self):
        self.assertEqual(permanent(np.array([[2.5 - 1j]])), 2.5 - 1j)

    def test_two_by_two(self):
        a, b, c, d = 1 + 2j, -0.5, 3j, 2.0
        self.assertAlmostEqual(permanent(np.array([[a, b], [c, d]])), a * d + b * c, places=12)

    def test_all_ones(self):
        self.assertAlmostEqual(permanent(np.ones((3, 3))), 6.0, places=12)
        self.assertAlmostEqual(permanent(np.ones((5, 5))), 120.0, places=10)

    def test_empty_matrix(self):
        self.assertEqual(permanent(np.zeros((0, 0))), 1.0)

    def test_size_limit(self):
        with self.assertRaises(PermanentSizeError):
            permanent(np.ones((17, 17)))

    def test_minors_match_laplace_expansion(self):
        rng = np.random.default_rng(3)
        a = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
        minors = permanent_minors(a)
        # expansão pela primeira linha
        self.assertAlmostEqual(np.sum(a[0] * minors[0]), permanent(a), places=10)


class TestAmplitudeOracle(unittest.TestCase):

    def test_identity(self):
        self.assertAlmostEqual(amplitude_oracle(np.eye(3), (2, 1, 0), (2, 1, 0)), 1.0, places=14)

    def test_splitter_bunching(self):
        self.assertAlmostEqual(abs(amplitude_oracle(SPLITTER, (1, 1), (2, 0))), 1.0 / np.sqrt(2.0), places=14)
        self.assertAlmostEqual(abs(amplitude_oracle(SPLITTER, (1, 1), (1, 1))), 0.0, places=14)

    def test_photon_number_mismatch(self):
        with self.assertRaises(InvalidArgumentError):
            amplitude_oracle(np.eye(2), (1, 1), (1, 0))


class TestLiftUnitary(unittest.TestCase):

    def test_identity(self):
        space = enumerate_basis(3, 2)
        np.testing.assert_allclose(lift_unitary(ScatteringMatrix(np.eye(3)), space).entries,
                                   np.eye(space.dimension), atol=1e-12)

    def test_hong_ou_mandel(self):
        space = enumerate_basis(2, 2)
        U = lift_unitary(ScatteringMatrix(SPLITTER), space).entries
        position = space.position((1, 1))
        self.assertAlmostEqual(abs(U[position, position]), 0.0, places=10)

    def test_oracle_equivalence(self):
        rng = np.random.default_rng(11)
        for trial in range(20):
            modes = int(rng.integers(2, 5))
            photons = int(rng.integers(1, 4))
            S = random_unitary(modes, 100 + trial)
            space = enumerate_basis(modes, photons)
            U = lift_unitary(ScatteringMatrix(S), space)
            self.assertLess(U.unitarity_defect(), 1e-10)
            for col, state_in in enumerate(space.basis):
                for row, state_out in enumerate(space.basis):
                    expected = amplitude_oracle(S, state_in, state_out)
                    self.assertAlmostEqual(U.entries[row, col], expected, delta=1e-9)

    def test_homomorphism(self):
        for trial, (modes, photons) in enumerate([(3, 2), (4, 3), (3, 3)]):
            space = enumerate_basis(modes, photons)
            S1, S2 = random_unitary(modes, 2 * trial), random_unitary(modes, 2 * trial + 1)
            product = lift_unitary(ScatteringMatrix(S1 @ S2), space).entries
            composed = (lift_unitary(ScatteringMatrix(S1), space).entries
                        @ lift_unitary(ScatteringMatrix(S2), space).entries)
            overlap = np.vdot(product, composed)
            phase = overlap / abs(overlap)
            np.testing.assert_allclose(product * phase, composed, atol=1e-8)

    def test_branch_cut_eigenvalue(self):
        # autovalor -1 exato
        S = np.diag([1.0, -1.0, 1j])
        space = enumerate_basis(3, 2)
        U = lift_unitary(ScatteringMatrix(S), space)
        for col, state_in in enumerate(space.basis):
            for row, state_out in enumerate(space.basis):
                self.assertAlmostEqual(U.entries[row, col], amplitude_oracle(S, state_in, state_out), delta=1e-9)

    def test_non_unitary_scattering(self):
        with self.assertRaises(NonUnitaryError):
            ScatteringMatrix(np.array([[1.0, 0.1], [0.0, 1.0]]))


class TestMatrixFormat(unittest.TestCase):

    def test_exact_round_trip(self):
        matrix = random_unitary(4, 5)
        np.testing.assert_array_equal(parse_matrix(format_matrix(matrix)), matrix)

    def test_file_round_trip(self):
        matrix = random_unitary(3, 9)
        with tempfile.TemporaryDirectory() as tmp:
            path = write_matrix(Path(tmp) / "S.txt", matrix)
            np.testing.assert_array_equal(read_matrix(path), matrix)

    def test_bad_header(self):
        with self.assertRaises(MatrixFormatError):
            parse_matrix("2\n1,0 0,0\n0,0 1,0\n")

    def test_missing_entries(self):
        with self.assertRaises(MatrixFormatError):
            parse_matrix("2 2\n1,0 0,0\n0,0\n")

    def test_bad_entry(self):
        with self.assertRaises(MatrixFormatError):
            parse_matrix("1 1\n1;0\n")


if __name__ == "__main__":
    unittest.main(verbosity=2)
