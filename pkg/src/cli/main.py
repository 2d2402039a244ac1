"""
==============================================================================
HERALD - LINHA DE COMANDO
==============================================================================

Subcomandos:
    run            Uma otimização SQP a partir de um arquivo de problema
    multistart     Várias execuções com sementes derivadas; CSV + resumo JSON
    baseline       Maximização de P F^p para um ou mais expoentes p
    verify         F, P e R(lift(S)) de uma matriz de espalhamento
    decompose      Malha de divisores de feixe (Clements) de S
    analytic-bell  Curva P(x) do ansatz de Bell em 6 modos

Códigos de saída: 0 sucesso, 1 falha de execução ou verificação,
2 erro de uso ou de configuração.
==============================================================================
"""
import argparse
import logging
import sys
from fractions import Fraction
from pathlib import Path
from typing import List, Optional

import numpy as np

from config.config import (
    ANALYTIC_BELL_POINTS,
    APP_NAME,
    APP_VERSION,
    DEBUG,
    LOG_FORMAT,
    LOG_LEVEL,
    LOGS_DIR,
    MULTISTART_DEFAULTS,
    RESULTS_DIR,
)
from src.circuits.bell_ansatz import optimal_x, success_curve, success_curve_exact
from src.circuits.clements import clements_decompose, format_mesh
from src.circuits.verification import verify_heralded_state
from src.cli.problem_config import load_problem_config
from src.cli.results_io import (
    write_baseline_csv,
    write_curve_csv,
    write_history_csv,
    write_runs_csv,
    write_summary_json,
)
from src.errors import ConfigError, HeraldError, NonUnitaryError
from src.feasibility.gamma_basis import build_gamma, optical_residual
from src.fock.fock_space import ScatteringMatrix, lift_unitary, unitarity_defect
from src.fock.matrix_io import read_matrix, write_matrix
from src.herald.heralding import fidelity_diagnostic
from src.optimization.baseline import baseline_multistart
from src.optimization.multistart import multistart
from src.optimization.sqp_solver import HeraldSQPSolver

logger = logging.getLogger("herald")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

VERIFY_FIDELITY_TOLERANCE = 1e-6


def setup_logging(level: str = LOG_LEVEL, log_file: Optional[Path] = None):
    """Console sempre; arquivo quando pedido ou com DEBUG=true (logs/herald.log)."""
    handlers = [logging.StreamHandler()]
    if log_file is None and DEBUG:
        log_file = LOGS_DIR / "herald.log"
    if log_file is not None:
        Path(log_file).parent.mkdir(parents=True, exist_ok=True)
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(level=getattr(logging, level.upper(), logging.INFO),
                        format=LOG_FORMAT, handlers=handlers, force=True)


def _positive(value: str) -> int:
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError(f"esperado inteiro >= 1, recebido {value}")
    return number


def _p_list(value: str) -> List[float]:
    try:
        values = [float(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"lista de p inválida '{value}'")
    if not values or any(p < 1 for p in values):
        raise argparse.ArgumentTypeError("cada p deve ser >= 1")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="herald", description=f"{APP_NAME} v{APP_VERSION}")
    parser.add_argument("--log-level", default=LOG_LEVEL, help="DEBUG, INFO, WARNING, ERROR")
    parser.add_argument("--log-file", type=Path, default=None, help="Também grava o log neste arquivo")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="Uma otimização SQP")
    run.add_argument("config", type=Path)
    run.add_argument("--seed", type=int, default=None)
    run.add_argument("--max-iters", type=_positive, default=None)
    run.add_argument("--out-dir", type=Path, default=None)
    run.add_argument("--history", action="store_true", help="Salva history.csv")
    run.add_argument("--verbose", action="store_true")

    multi = commands.add_parser("multistart", help="Execuções independentes")
    multi.add_argument("config", type=Path)
    multi.add_argument("--runs", type=int, default=None)
    multi.add_argument("--workers", type=int, default=None)
    multi.add_argument("--seed", type=int, default=None)
    multi.add_argument("--out", type=Path, default=None, help="CSV por execução")
    multi.add_argument("--progress", action="store_true")

    base = commands.add_parser("baseline", help="Maximização de P F^p")
    base.add_argument("config", type=Path)
    base.add_argument("--p", type=_p_list, required=True, help="Ex.: 1,2,4")
    base.add_argument("--runs", type=_positive, default=None)
    base.add_argument("--workers", type=_positive, default=MULTISTART_DEFAULTS["workers"])
    base.add_argument("--seed", type=int, default=None)
    base.add_argument("--out", type=Path, default=None)

    verify = commands.add_parser("verify", help="Verifica o anúncio de S")
    verify.add_argument("matrix", type=Path)
    verify.add_argument("config", type=Path)
    verify.add_argument("--decomposed", action="store_true",
                        help="Também verifica a matriz recomposta da malha de Clements")

    decompose = commands.add_parser("decompose", help="Malha de Clements de S")
    decompose.add_argument("matrix", type=Path)
    decompose.add_argument("--out", type=Path, default=None)

    bell = commands.add_parser("analytic-bell", help="Curva P(x) do ansatz de Bell")
    bell.add_argument("--points", type=_positive, default=ANALYTIC_BELL_POINTS)
    bell.add_argument("--out", type=Path, default=None)
    return parser


def cmd_run(args) -> int:
    config = load_problem_config(args.config)
    prob = config.build_problem()
    overrides = {"max_outer_iters": args.max_iters, "seed": args.seed}
    cfg = config.solver_config(**{k: v for k, v in overrides.items() if v is not None})

    result = HeraldSQPSolver(prob, cfg).solve(verbose=args.verbose)
    fidelity, _ = fidelity_diagnostic(result.U_final, prob)

    out_dir = args.out_dir or RESULTS_DIR / f"{config.name}_seed{cfg.seed}"
    write_matrix(out_dir / "U.txt", result.U_final.entries)
    if result.S_extracted is not None:
        write_matrix(out_dir / "S.txt", result.S_extracted.entries)
    if args.history:
        write_history_csv(result, out_dir / "history.csv")

    print(f"status: {result.status}")
    print(f"R: {result.R_final:.6e}")
    print(f"P: {result.P_final:.10f}")
    print(f"F: {fidelity:.12f}")
    print(f"iterations: {result.iterations}")
    print(f"n_dof: {result.tangent_dof}")
    print(f"output: {out_dir}")
    return EXIT_OK


def cmd_multistart(args) -> int:
    config = load_problem_config(args.config)
    runs = args.runs if args.runs is not None else (config.solver.runs or MULTISTART_DEFAULTS["runs"])
    workers = args.workers if args.workers is not None else (config.solver.workers or MULTISTART_DEFAULTS["workers"])
    if runs < 1:
        raise ConfigError(f"--runs deve ser >= 1, recebido {runs}", field="runs")
    if workers < 1:
        raise ConfigError(f"--workers deve ser >= 1, recebido {workers}", field="workers")

    prob = config.build_problem()
    cfg = config.solver_config(**({"seed": args.seed} if args.seed is not None else {}))
    results, summary = multistart(prob, cfg, runs=runs, workers=workers, progress=args.progress)

    out = args.out or RESULTS_DIR / f"{config.name}_multistart.csv"
    write_runs_csv(results, out)
    write_summary_json(summary, out.with_suffix(".json"))

    print(f"runs: {summary.runs}")
    print(f"feasible: {summary.feasible_count}")
    print(f"best_feasible_P: {summary.best_feasible_P}")
    for row in summary.clusters.to_dict(orient="records"):
        print(f"  P = {row['P']:.8f}  count = {row['count']}  feasible = {row['feasible']}")
    print(f"output: {out}")
    return EXIT_OK


def cmd_baseline(args) -> int:
    config = load_problem_config(args.config)
    prob = config.build_problem()
    runs = args.runs or config.baseline.runs or 1

    results = []
    for p in args.p:
        overrides = {"p": p}
        if args.seed is not None:
            overrides["seed"] = args.seed
        results.extend(baseline_multistart(prob, config.baseline_config(**overrides),
                                           runs=runs, workers=args.workers))

    out = args.out or RESULTS_DIR / f"{config.name}_baseline.csv"
    write_baseline_csv(results, out)
    for p in args.p:
        subset = [r for r in results if r.p == p]
        best = max(subset, key=lambda r: r.objective)
        print(f"p = {p:g}: F = {best.F:.10f}  P = {best.P:.8f}  ({best.status})")
    print(f"output: {out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    config = load_problem_config(args.config)
    prob = config.build_problem()
    S = read_matrix(args.matrix)
    if S.shape != (prob.space.modes, prob.space.modes):
        raise ConfigError(f"S tem forma {S.shape}, problema tem {prob.space.modes} modos",
                          path=str(args.matrix))
    defect = unitarity_defect(S)
    if defect > 1e-10:
        raise NonUnitaryError("S não é unitária", defect)

    scattering = ScatteringMatrix(S, tolerance=1e-10)
    check = verify_heralded_state(scattering, prob)
    residual, _ = optical_residual(lift_unitary(scattering, prob.space), build_gamma(prob.space))

    print(f"F: {check.fidelity:.12f}")
    print(f"P: {check.probability:.10f}")
    print(f"R(lift(S)): {residual:.3e}")
    print(check.table.to_string(index=False, float_format=lambda v: f"{v:.8f}"))

    ok = check.fidelity >= 1.0 - VERIFY_FIDELITY_TOLERANCE
    if args.decomposed:
        mesh = clements_decompose(scattering)
        recomposed = verify_heralded_state(mesh.recompose(), prob)
        print(f"malha: {mesh.splitter_count} divisores, erro de recomposição {mesh.recomposition_error:.3e}")
        print(f"F (recomposta): {recomposed.fidelity:.12f}")
        print(f"P (recomposta): {recomposed.probability:.10f}")
        ok = ok and abs(recomposed.probability - check.probability) <= 1e-9

    if not ok:
        logger.error("Verificação falhou: F = %.12f", check.fidelity)
        return EXIT_FAILURE
    return EXIT_OK


def cmd_decompose(args) -> int:
    mesh = clements_decompose(read_matrix(args.matrix))
    print(format_mesh(mesh), end="")
    print(f"splitters: {mesh.splitter_count}")
    print(f"recomposition_error: {mesh.recomposition_error:.3e}")
    if args.out:
        args.out.parent.mkdir(parents=True, exist_ok=True)
        args.out.write_text(format_mesh(mesh, decimals=None))
        print(f"output: {args.out}")
    return EXIT_OK


def cmd_analytic_bell(args) -> int:
    x_star = optimal_x()
    print(f"x*: {x_star:.8f}")
    print(f"P(x*): {success_curve(x_star):.8f}")
    exact = success_curve_exact(Fraction(1, 3))
    print(f"P(1/3): {exact} = {float(exact):.8f}")

    x = np.linspace(0.0, 1.0, args.points + 2)[1:-1]
    out = args.out or RESULTS_DIR / "bell6_curve.csv"
    write_curve_csv(x, success_curve(x), out)
    print(f"output: {out}")
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "multistart": cmd_multistart,
    "baseline": cmd_baseline,
    "verify": cmd_verify,
    "decompose": cmd_decompose,
    "analytic-bell": cmd_analytic_bell,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE

    setup_logging(args.log_level, args.log_file)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"erro de configuração: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NonUnitaryError as exc:
        print(f"erro: {exc}", file=sys.stderr)
        print(f"unitarity_defect: {exc.defect:.3e}")
        return EXIT_FAILURE
    except HeraldError as exc:
        print(f"erro: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    except Exception:
        logger.exception("Falha inesperada")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
