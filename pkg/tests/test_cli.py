"""
==============================================================================
TESTES UNITÁRIOS - ARQUIVOS DE PROBLEMA, RESULTADOS E LINHA DE COMANDO
==============================================================================

COBERTURA DE TESTES:
--------------------
1. Leitura e validação de arquivos .cfg (erros com linha e campo)
2. Escrita de CSV/JSON de resultados
3. Subcomandos e códigos de saída (0 sucesso, 1 falha, 2 uso)
4. CSV do multistart idêntico com 1 ou 2 workers (fora wall_ms)

FRAMEWORK: unittest (executado via pytest)
==============================================================================
"""

import unittest
import sys
import tempfile
from contextlib import redirect_stderr, redirect_stdout
from io import StringIO
from pathlib import Path
sys.path.append(str(Path(__file__).parent.parent))

import numpy as np
from scipy.stats import unitary_group

from config.config import PROBLEMS_DIR
from src.circuits.bell_ansatz import BellAnsatz, optimal_x
from src.cli.main import EXIT_FAILURE, EXIT_OK, EXIT_USAGE, main
from src.cli.problem_config import load_problem_config, parse_complex, parse_occupation
from src.cli.results_io import (
    CURVE_COLUMNS, RUN_COLUMNS, read_results_csv, read_summary_json,
    write_curve_csv, write_runs_csv, write_summary_json
)
from src.errors import ConfigError
from src.fock.matrix_io import read_matrix, write_matrix
from src.optimization.multistart import summarize
from src.optimization.sqp_solver import FEASIBLE_OPTIMUM, RunResult

TOY_FAST = """\
[problem]
modes = 4
photons = 3
input = 1110
pattern = 1

[target]
011 = 1,0

[solver]
max_iters = 2
seed = 3

[baseline]
max_iters = 5
"""


def run_cli(*argv):
    out, err = StringIO(), StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = main([str(a) for a in argv])
    return code, out.getvalue(), err.getvalue()


class TestProblemConfig(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def write(self, text, name="problem.cfg"):
        path = self.dir / name
        path.write_text(text)
        return path

    def test_bundled_problems_load(self):
        for name in ("toy4", "bell5", "bell5_vacuum", "bell6", "identity2"):
            config = load_problem_config(PROBLEMS_DIR / f"{name}.cfg")
            self.assertEqual(config.name, name)
            prob = config.build_problem()
            self.assertEqual(prob.input_state, config.input_state)

    def test_bell6_fields(self):
        config = load_problem_config(PROBLEMS_DIR / "bell6.cfg")
        self.assertEqual((config.modes, config.photons), (6, 4))
        self.assertEqual(config.pattern_state, (1, 1))
        self.assertEqual(config.solver.eps_R, 1e-10)
        self.assertEqual(config.baseline.p, 2)
        target = config.target_map()
        self.assertAlmostEqual(target[(1, 1, 0, 0)], -1.0 / np.sqrt(2.0), places=15)
        self.assertEqual(config.solver_config().eps_R, 1e-10)
        self.assertEqual(config.solver_config(seed=5).seed, 5)

    def test_solver_overrides(self):
        config = load_problem_config(self.write(TOY_FAST))
        self.assertEqual(config.solver_config().max_outer_iters, 2)
        self.assertEqual(config.baseline_config().max_iters, 5)
        self.assertEqual(config.baseline_config().seed, 3)

    def test_helpers(self):
        self.assertEqual(parse_occupation("1102"), (1, 1, 0, 2))
        self.assertEqual(parse_complex("0.5,-1"), complex(0.5, -1.0))
        self.assertEqual(parse_complex("2"), complex(2.0, 0.0))
        with self.assertRaises(ValueError):
            parse_complex("1,2,3")

    def test_malformed_occupation_reports_line_and_field(self):
        path = self.write(TOY_FAST.replace("input = 1110", "input = 11a0"))
        with self.assertRaises(ConfigError) as ctx:
            load_problem_config(path)
        self.assertEqual(ctx.exception.line, 4)
        self.assertEqual(ctx.exception.field, "problem.input")
        self.assertIn("linha 4", str(ctx.exception))

    def test_photon_count_mismatch(self):
        path = self.write(TOY_FAST.replace("photons = 3", "photons = 4"))
        with self.assertRaises(ConfigError) as ctx:
            load_problem_config(path)
        self.assertEqual(ctx.exception.field, "problem.input")

    def test_target_with_wrong_length(self):
        path = self.write(TOY_FAST.replace("011 = 1,0", "0110 = 1,0"))
        with self.assertRaises(ConfigError) as ctx:
            load_problem_config(path)
        self.assertEqual(ctx.exception.field, "target.0110")
        self.assertEqual(ctx.exception.line, 8)

    def test_invalid_amplitude(self):
        path = self.write(TOY_FAST.replace("011 = 1,0", "011 = um"))
        with self.assertRaises(ConfigError) as ctx:
            load_problem_config(path)
        self.assertEqual(ctx.exception.field, "target.011")

    def test_missing_section(self):
        with self.assertRaises(ConfigError) as ctx:
            load_problem_config(self.write("[problem]\nmodes = 2\nphotons = 1\ninput = 10\n"))
        self.assertEqual(ctx.exception.field, "target")

    def test_line_outside_section(self):
        with self.assertRaises(ConfigError) as ctx:
            load_problem_config(self.write("modes = 2\n[problem]\n"))
        self.assertEqual(ctx.exception.line, 1)

    def test_invalid_solver_value(self):
        path = self.write(TOY_FAST.replace("seed = 3", "seed = -1"))
        with self.assertRaises(ConfigError) as ctx:
            load_problem_config(path)
        self.assertEqual(ctx.exception.field, "solver.seed")

    def test_missing_file(self):
        with self.assertRaises(ConfigError):
            load_problem_config(self.dir / "nao_existe.cfg")


class TestResultsIO(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)
        self.results = [
            RunResult(FEASIBLE_OPTIMUM, 1e-14, 1.0 / 3.0, complex(np.sqrt(1.0 / 3.0)), 12,
                      U_final=None, seed=10, run_index=0, tangent_dof=3),
            RunResult(FEASIBLE_OPTIMUM, 2e-13, 0.9999999, complex(1.0), 30,
                      U_final=None, seed=11, run_index=1),
        ]

    def tearDown(self):
        self.tmp.cleanup()

    def test_runs_csv(self):
        path = write_runs_csv(self.results, self.dir / "sub" / "runs.csv")
        frame = read_results_csv(path)
        self.assertEqual(list(frame.columns), RUN_COLUMNS)
        self.assertEqual(len(frame), 2)
        self.assertEqual(frame["P"].iloc[0], 1.0 / 3.0)
        self.assertEqual(frame["n_dof"].iloc[0], 3)

    def test_curve_csv(self):
        x = np.linspace(0.1, 0.9, 5)
        frame = read_results_csv(write_curve_csv(x, x ** 2, self.dir / "curve.csv"))
        self.assertEqual(list(frame.columns), CURVE_COLUMNS)
        np.testing.assert_array_equal(frame["P"].to_numpy(), x ** 2)

    def test_summary_json(self):
        path = write_summary_json(summarize(self.results, seed=42), self.dir / "summary.json")
        data = read_summary_json(path)
        self.assertEqual(data["runs"], 2)
        self.assertEqual(data["feasible"], 2)
        self.assertEqual(data["best_run"], 1)
        self.assertEqual(len(data["clusters"]), 2)


class TestCommandLine(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.dir = Path(self.tmp.name)
        self.bell = PROBLEMS_DIR / "bell6.cfg"
        self.ansatz = write_matrix(self.dir / "S_star.txt", BellAnsatz.from_x(optimal_x()).matrix())
        self.toy = self.dir / "toy_fast.cfg"
        self.toy.write_text(TOY_FAST)

    def tearDown(self):
        self.tmp.cleanup()

    def test_analytic_bell(self):
        out_path = self.dir / "curve.csv"
        code, out, _ = run_cli("analytic-bell", "--points", 10, "--out", out_path)
        self.assertEqual(code, EXIT_OK)
        self.assertIn("x*: 0.40231994", out)
        self.assertIn("P(x*): 0.07784190", out)
        self.assertIn("P(1/3): 2/27 = 0.07407407", out)
        self.assertEqual(len(read_results_csv(out_path)), 10)

    def test_log_file(self):
        log_path = self.dir / "logs" / "herald.log"
        code, _, _ = run_cli("--log-file", log_path, "analytic-bell", "--points", 3,
                             "--out", self.dir / "c.csv")
        self.assertEqual(code, EXIT_OK)
        self.assertTrue(log_path.exists())

    def test_verify_ansatz(self):
        code, out, _ = run_cli("verify", self.ansatz, self.bell)
        self.assertEqual(code, EXIT_OK)
        self.assertIn("F: 1.0000000000", out)
        self.assertIn("P: 0.07784190", out)
        self.assertIn("R(lift(S))", out)

    def test_verify_decomposed(self):
        code, out, _ = run_cli("verify", self.ansatz, self.bell, "--decomposed")
        self.assertEqual(code, EXIT_OK)
        self.assertIn("P (recomposta): 0.07784190", out)

    def test_verify_wrong_state_fails(self):
        path = write_matrix(self.dir / "haar.txt", unitary_group.rvs(6, random_state=np.random.default_rng(1)))
        code, _, _ = run_cli("verify", path, self.bell)
        self.assertEqual(code, EXIT_FAILURE)

    def test_verify_non_unitary(self):
        S = np.eye(6)
        S[0, 1] = 0.1
        path = write_matrix(self.dir / "bad.txt", S)
        code, out, _ = run_cli("verify", path, self.bell)
        self.assertEqual(code, EXIT_FAILURE)
        self.assertIn("unitarity_defect:", out)

    def test_verify_shape_mismatch(self):
        path = write_matrix(self.dir / "small.txt", np.eye(4))
        code, _, _ = run_cli("verify", path, self.bell)
        self.assertEqual(code, EXIT_USAGE)

    def test_decompose(self):
        mesh_path = self.dir / "mesh.txt"
        code, out, _ = run_cli("decompose", self.ansatz, "--out", mesh_path)
        self.assertEqual(code, EXIT_OK)
        self.assertIn("splitters:", out)
        splitters = int(out.split("splitters:")[1].split()[0])
        self.assertLessEqual(splitters, 15)
        self.assertTrue(mesh_path.read_text().startswith("# modes 6"))

    def test_run_writes_outputs(self):
        out_dir = self.dir / "run"
        code, out, _ = run_cli("run", self.toy, "--out-dir", out_dir, "--history")
        self.assertEqual(code, EXIT_OK)
        self.assertIn("status:", out)
        self.assertEqual(read_matrix(out_dir / "U.txt").shape, (20, 20))
        history = read_results_csv(out_dir / "history.csv")
        self.assertGreaterEqual(len(history), 1)

    def test_multistart(self):
        out_path = self.dir / "multi.csv"
        code, out, _ = run_cli("multistart", self.toy, "--runs", 2, "--workers", 1, "--out", out_path)
        self.assertEqual(code, EXIT_OK)
        self.assertEqual(list(read_results_csv(out_path)["run_id"]), [0, 1])
        self.assertEqual(read_summary_json(out_path.with_suffix(".json"))["runs"], 2)

    def test_multistart_csv_independent_of_workers(self):
        def lines_without_wall_time(workers):
            path = self.dir / f"multi_{workers}.csv"
            code, _, _ = run_cli("multistart", self.toy, "--runs", 3, "--workers", workers, "--out", path)
            self.assertEqual(code, EXIT_OK)
            lines = path.read_text().splitlines()
            column = lines[0].split(",").index("wall_ms")
            return [",".join(f for k, f in enumerate(line.split(",")) if k != column) for line in lines]

        serial = lines_without_wall_time(1)
        self.assertEqual(len(serial), 4)
        self.assertEqual(serial, lines_without_wall_time(2))

    def test_multistart_zero_runs(self):
        code, _, err = run_cli("multistart", self.toy, "--runs", 0)
        self.assertEqual(code, EXIT_USAGE)
        self.assertIn("runs", err)

    def test_baseline(self):
        out_path = self.dir / "baseline.csv"
        code, out, _ = run_cli("baseline", self.toy, "--p", "1,2", "--runs", 1, "--workers", 1,
                               "--out", out_path)
        self.assertEqual(code, EXIT_OK)
        frame = read_results_csv(out_path)
        self.assertEqual(sorted(frame["p"]), [1.0, 2.0])
        self.assertIn("p = 2:", out)

    def test_baseline_requires_exponent(self):
        code, _, _ = run_cli("baseline", self.toy)
        self.assertEqual(code, EXIT_USAGE)

    def test_malformed_config(self):
        bad = self.dir / "bad.cfg"
        bad.write_text(TOY_FAST.replace("input = 1110", "input = 11a0"))
        code, _, err = run_cli("run", bad)
        self.assertEqual(code, EXIT_USAGE)
        self.assertIn("linha 4", err)

    def test_unknown_command(self):
        code, _, _ = run_cli("optimize-everything")
        self.assertEqual(code, EXIT_USAGE)


if __name__ == "__main__":
    unittest.main(verbosity=2)
