"""
==============================================================================
OTIMIZADOR SQP NA VARIEDADE DE FIDELIDADE UNITÁRIA
==============================================================================

PROBLEMA:
---------
Encontrar U (unitário N_st x N_st) com:
    - fidelidade unitária do estado anunciado (restrição exata, mantida por
      construção pelas atualizações U -> U e^{iH} g);
    - realizabilidade por óptica linear, R(U) = 0;
maximizando a probabilidade de sucesso P = |z|^2.

ITERAÇÃO:
---------
1. Passo normal H_N: Gauss-Newton para R restrito à imagem de Pi,
       Pi (J†J) Pi X = -Pi J† R,
   resolvido por gradientes conjugados com precisão adaptativa min(0.1, sqrt(R)).
2. Passo tangente H_T = alpha_ij gamma_bar^{ij} (tangente ao conjunto realizável),
   com (1 - Pi) H_T = 0, escolhido para aumentar |z|^2; escala pela maximização
   analítica de |z(tau)|^2 em um argumento e limite de raio de confiança.
3. Função de mérito R - eta |z|^2: eta começa em 1 e é dividido por 2 até
   X = H_N + H_T ser direção de descida; abaixo de eta_min H_T é descartado.
4. Busca linear de Armijo em tau com U' = U e^{i tau X_t} diag(e^{i phi}, Omega).

TERMINAÇÃO:
-----------
    feasible-optimum       R <= eps_R e |H_T| <= eps_T
    infeasible-stationary  |H_N| < 1e-12 com R > eps_R por 5 iterações seguidas
    iteration-limit        max_outer_iters atingido
    line-search-failure    nenhum tau aceito em armijo_max_trials tentativas, ou
                           nenhuma direção de descida fora de estagnação
==============================================================================
"""
import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, NamedTuple, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field
from scipy.linalg import null_space

from config.config import NUMERICAL_TOLERANCES, SOLVER_DEFAULTS
from src.errors import ExtractionFailedError, InvalidArgumentError
from src.feasibility.extraction import extract_scattering
from src.feasibility.gamma_basis import (
    GammaBasis,
    RotatedFrame,
    build_gamma,
    gauss_newton_apply,
    half_gauss_newton_rhs,
    residual_gradient,
)
from src.fock.fock_space import FockUnitary, ScatteringMatrix, lift_unitary
from src.herald.heralding import (
    FidelityFrame,
    HeraldingProblem,
    build_frame,
    fidelity_residual,
    project_tangent,
    success_amplitude,
)
from src.herald.manifold import apply_update, initial_feasible_unitary, lanczos_low_rank

logger = logging.getLogger(__name__)

FEASIBLE_OPTIMUM = "feasible-optimum"
INFEASIBLE_STATIONARY = "infeasible-stationary"
ITERATION_LIMIT = "iteration-limit"
LINE_SEARCH_FAILURE = "line-search-failure"

RUN_STATUSES = (FEASIBLE_OPTIMUM, INFEASIBLE_STATIONARY, ITERATION_LIMIT, LINE_SEARCH_FAILURE)


class SolverConfig(BaseModel):
    """Parâmetros do otimizador (valores padrão em SOLVER_DEFAULTS)."""
    eps_R: float = Field(SOLVER_DEFAULTS["eps_R"], gt=0, description="Tolerância de realizabilidade")
    eps_T: float = Field(SOLVER_DEFAULTS["eps_T"], gt=0, description="Tolerância do passo tangente")
    eta_initial: float = Field(SOLVER_DEFAULTS["eta_initial"], gt=0, description="Peso inicial de |z|^2 no mérito")
    eta_min: float = Field(SOLVER_DEFAULTS["eta_min"], gt=0, description="Abaixo disso H_T é descartado")
    max_outer_iters: int = Field(SOLVER_DEFAULTS["max_outer_iters"], ge=1, description="Iterações externas")
    cg_max_iters: Optional[int] = Field(SOLVER_DEFAULTS["cg_max_iters"], ge=1, description="None => 10 N_st")
    cg_rtol_cap: float = Field(SOLVER_DEFAULTS["cg_rtol_cap"], gt=0, le=1)
    cg_rtol_floor: float = Field(SOLVER_DEFAULTS["cg_rtol_floor"], gt=0)
    lanczos_rank_initial: int = Field(SOLVER_DEFAULTS["lanczos_rank_initial"], ge=1)
    lanczos_threshold: int = Field(SOLVER_DEFAULTS["lanczos_threshold"], ge=1,
                                   description="Blocos Omega até este tamanho usam Cayley exato")
    lanczos_tolerance: float = Field(SOLVER_DEFAULTS["lanczos_tolerance"], gt=0)
    armijo_c1: float = Field(SOLVER_DEFAULTS["armijo_c1"], gt=0, lt=1)
    armijo_shrink: float = Field(SOLVER_DEFAULTS["armijo_shrink"], gt=0, lt=1)
    armijo_max_trials: int = Field(SOLVER_DEFAULTS["armijo_max_trials"], ge=1)
    tangent_max_residual: float = Field(SOLVER_DEFAULTS["tangent_max_residual"], gt=0)
    trust_radius: float = Field(SOLVER_DEFAULTS["trust_radius"], gt=0)
    stall_norm: float = Field(SOLVER_DEFAULTS["stall_norm"], gt=0)
    stall_iterations: int = Field(SOLVER_DEFAULTS["stall_iterations"], ge=1)
    seed: int = Field(SOLVER_DEFAULTS["seed"], ge=0, description="Semente do ponto inicial")

    def cg_tolerance(self, residual: float) -> float:
        """Tolerância relativa min(cap, sqrt(R)) com piso floor * R."""
        return max(min(self.cg_rtol_cap, float(np.sqrt(max(residual, 0.0)))),
                   self.cg_rtol_floor * residual)

    def cg_iteration_limit(self, dimension: int) -> int:
        return self.cg_max_iters if self.cg_max_iters is not None else 10 * dimension

    def check_dimension(self, dimension: int) -> None:
        if self.eps_T ** 2 < np.finfo(float).eps * dimension:
            raise InvalidArgumentError(
                f"eps_T = {self.eps_T:g} pequeno demais para N_st = {dimension} "
                f"(eps_T^2 >= eps * N_st)"
            )


class NormalStep(NamedTuple):
    H: np.ndarray
    cg_iterations: int
    breakdown: bool
    relative_residual: float


class TangentStep(NamedTuple):
    H: np.ndarray
    n_dof: int
    slope: float
    isolated: bool
    skipped: bool


@dataclass
class RunResult:
    """
    Resultado de uma execução do otimizador.

    Atributos:
        status: Um de RUN_STATUSES
        R_final, P_final, z_final: Resíduo óptico, probabilidade e amplitude finais
        iterations: Iterações externas executadas
        U_final: Unitário final
        S_extracted: Matriz de espalhamento (quando a extração foi possível)
        tangent_dof: N_DoF da última iteração
        history: Uma linha por iteração (R, P, normas dos passos, tau, eta, ...)
    """
    status: str
    R_final: float
    P_final: float
    z_final: complex
    iterations: int
    U_final: FockUnitary = field(repr=False)
    S_extracted: Optional[ScatteringMatrix] = field(default=None, repr=False)
    tangent_dof: int = 0
    history: List[Dict] = field(default_factory=list, repr=False)
    seed: Optional[int] = None
    run_index: int = 0
    metrics: Dict = field(default_factory=dict, repr=False)

    @property
    def is_feasible(self) -> bool:
        return self.status == FEASIBLE_OPTIMUM

    def history_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.history)

    def to_row(self) -> Dict:
        return {
            "run_id": self.run_index,
            "seed": self.seed,
            "status": self.status,
            "R": self.R_final,
            "P": self.P_final,
            "iterations": self.iterations,
            "wall_ms": 1000.0 * self.metrics.get("execution_time_seconds", 0.0),
            "n_dof": self.tangent_dof,
        }


def _inner(a: np.ndarray, b: np.ndarray) -> float:
    """Produto interno real Re Tr(a† b)."""
    return float(np.vdot(a, b).real)


def projected_conjugate_gradient(operator: Callable[[np.ndarray], np.ndarray],
                                 rhs: np.ndarray, rtol: float,
                                 max_iters: int) -> Tuple[np.ndarray, int, bool, float]:
    """
    Gradientes conjugados sem pré-condicionador para operador autoadjunto
    semidefinido positivo em matrizes Hermitianas.

    Returns:
        (x, iterações, breakdown, resíduo relativo). Em curvatura não positiva
        devolve o melhor iterado e marca breakdown.
    """
    x = np.zeros_like(rhs)
    rhs_norm = np.sqrt(_inner(rhs, rhs))
    if rhs_norm < 1e-300:
        return x, 0, False, 0.0

    r = rhs.copy()
    p = r.copy()
    rr = _inner(r, r)
    best_x, best_res = x.copy(), 1.0

    for k in range(max_iters):
        Ap = operator(p)
        curvature = _inner(p, Ap)
        if curvature <= 1e-14 * _inner(p, p) * max(1.0, rhs_norm):
            logger.warning("CG: curvatura não positiva na iteração %d (%.3e)", k, curvature)
            return best_x, k, True, best_res

        alpha = rr / curvature
        x = x + alpha * p
        r = r - alpha * Ap
        rr_new = _inner(r, r)
        relative = np.sqrt(rr_new) / rhs_norm
        if relative < best_res:
            best_x, best_res = x.copy(), relative
        if relative <= rtol:
            return x, k + 1, False, relative

        p = r + (rr_new / rr) * p
        rr = rr_new

    return best_x, max_iters, False, best_res


def hermitian_basis(modes: int) -> np.ndarray:
    """Base ortonormal (Re Tr) das Hermitianas N x N; coluna k = vec(B_k)."""
    vectors = []
    for i in range(modes):
        for j in range(i, modes):
            if i == j:
                b = np.zeros((modes, modes), dtype=complex)
                b[i, i] = 1.0
                vectors.append(b.ravel())
                continue
            sym = np.zeros((modes, modes), dtype=complex)
            sym[i, j] = sym[j, i] = 1.0 / np.sqrt(2.0)
            anti = np.zeros((modes, modes), dtype=complex)
            anti[i, j] = 1j / np.sqrt(2.0)
            anti[j, i] = -1j / np.sqrt(2.0)
            vectors.extend([sym.ravel(), anti.ravel()])
    return np.column_stack(vectors)


def success_slope(U: FockUnitary, prob: HeraldingProblem, z: complex, X: np.ndarray) -> float:
    """d|z|^2 ao longo de U e^{i eps X}."""
    column = U.entries[prob.mu, :] @ X[:, prob.input_index]
    return float(2.0 * (np.conj(z) * 1j * np.vdot(prob.target, column)).real)


def residual_slope(gradient: np.ndarray, X: np.ndarray) -> float:
    """dR ao longo de U e^{i eps X}: Re Tr(G X)."""
    return float(np.sum(gradient * X.T).real)


def normal_step(U: FockUnitary, prob: HeraldingProblem, gb: GammaBasis,
                frame: RotatedFrame, cfg: SolverConfig,
                fidelity: Optional[FidelityFrame] = None) -> NormalStep:
    """
    Passo de Gauss-Newton para R restrito à imagem de Pi.

    Resolve Pi (1/2 J†J) Pi X = -Pi (1/2 J† R) por CG, aplicando Pi antes e
    depois de cada aplicação do operador.

    Args:
        U: Ponto atual (frame calculado para U)
        prob: Problema
        gb: Base gamma
        frame: Base girada de U
        cfg: Configuração
        fidelity: Frame de fidelidade já calculado (opcional)

    Returns:
        NormalStep com H_N Hermitiana e Pi H_N = H_N
    """
    if fidelity is None:
        fidelity = build_frame(U, prob)

    def project(X):
        return project_tangent(U, prob, X, frame=fidelity)

    def operator(X):
        return project(gauss_newton_apply(frame, project(X)))

    rhs = -project(half_gauss_newton_rhs(frame))
    n_st = gb.space.dimension
    x, iters, breakdown, relative = projected_conjugate_gradient(
        operator, rhs, cfg.cg_tolerance(frame.residual), cfg.cg_iteration_limit(n_st)
    )
    H = project(x)
    H = 0.5 * (H + H.conj().T)
    return NormalStep(H, iters, breakdown, relative)


def tangent_step(U: FockUnitary, prob: HeraldingProblem, gb: GammaBasis,
                 frame: RotatedFrame, cfg: SolverConfig,
                 fidelity: Optional[FidelityFrame] = None) -> TangentStep:
    """
    Passo tangente H_T = sum alpha_ij gamma_bar^{ij} com alpha Hermitiana.

    alpha percorre o subespaço em que (1 - Pi) H_T = 0 (e traço nulo, direção
    trivial); N_DoF é a dimensão desse subespaço. A direção é o gradiente de
    |z|^2 projetado nele; o comprimento maximiza |z(tau)|^2 exatamente, pois
    a coluna de entrada gira no plano {c_0, U t/|t|}, limitado pela norma do
    gradiente reduzido (com |z| -> 0 o passo vai a zero junto). Gradiente
    reduzido <= eps_T devolve H_T = 0. Em seguida ||H_T|| <= trust_radius.
    """
    n_st = gb.space.dimension
    zero = np.zeros((n_st, n_st), dtype=complex)
    if frame.residual > cfg.tangent_max_residual:
        return TangentStep(zero, 0, 0.0, False, True)
    if fidelity is None:
        fidelity = build_frame(U, prob)

    modes = gb.modes
    basis = hermitian_basis(modes)
    rotated = frame.rotated
    column_part = rotated[:, 1:, prob.input_index].T @ basis  # t(p)

    q = fidelity.v_basis
    h_norm = np.linalg.norm(fidelity.h)
    w = q.conj().T @ (fidelity.h / h_norm) if h_norm > 1e-14 else np.zeros(q.shape[1], dtype=complex)
    projected = q.conj().T @ column_part
    constraint = projected - np.outer(w, w.conj() @ projected)

    diagonal = [i * modes + i for i in range(modes)]
    trace_row = basis[diagonal, :].sum(axis=0).real
    system = np.vstack([constraint.real, constraint.imag, trace_row[np.newaxis, :]])
    admissible = null_space(system, rcond=NUMERICAL_TOLERANCES["tangent_rank"])
    n_dof = admissible.shape[1]
    if n_dof == 0:
        logger.info("Ponto realizável isolado: N_DoF = 0")
        return TangentStep(zero, 0, 0.0, True, False)

    z = fidelity.z
    heralded = prob.target.conj() @ U.entries[prob.mu, :]
    gains = heralded @ (rotated[:, :, prob.input_index].T @ basis)
    gradient = -2.0 * (np.conj(z) * gains).imag

    reduced = admissible.T @ gradient
    # ganho de primeira ordem abaixo de eps_T: estacionário nas direções tangentes
    if np.linalg.norm(reduced) <= cfg.eps_T:
        return TangentStep(zero, n_dof, 0.0, False, False)
    direction = admissible @ (reduced / np.linalg.norm(reduced))

    H_dir = np.tensordot(basis @ direction, rotated, axes=1)
    H_dir = 0.5 * (H_dir + H_dir.conj().T)
    t_dir = H_dir[1:, prob.input_index]
    speed = np.linalg.norm(t_dir)
    if speed < 1e-14:
        return TangentStep(zero, n_dof, 0.0, False, False)

    w_dir = np.vdot(prob.target, U.entries[prob.mu, 1:] @ t_dir)
    a_coef = abs(z) ** 2
    c_coef = abs(w_dir) ** 2 / speed ** 2
    b_coef = (1j * np.conj(z) * w_dir).real / speed
    angle = 0.5 * np.arctan2(2.0 * b_coef, a_coef - c_coef)
    length = min(angle / speed, float(np.linalg.norm(reduced)))
    H = length * H_dir

    norm = np.linalg.norm(H)
    if norm > cfg.trust_radius:
        H *= cfg.trust_radius / norm

    return TangentStep(H, n_dof, success_slope(U, prob, z, H), False, False)


class HeraldSQPSolver:
    """
    Otimizador SQP de U com restrições de fidelidade e realizabilidade.

    Uma execução é sequencial e dona de todo o seu estado mutável.
    """

    def __init__(self, problem: HeraldingProblem, config: Optional[SolverConfig] = None,
                 gamma: Optional[GammaBasis] = None):
        self.problem = problem
        self.config = config or SolverConfig()
        self.gamma = gamma if gamma is not None else build_gamma(problem.space)
        if self.gamma.space != problem.space:
            raise InvalidArgumentError("Base gamma construída para outro espaço de Fock")

        self.n_st = problem.space.dimension
        self.config.check_dimension(self.n_st)

        # Métricas
        self.cg_iterations_total = 0
        self.cg_breakdowns = 0
        self.line_search_trials = 0
        self.eta_halvings = 0
        self.tangent_dropped = 0
        self.lanczos_growths = 0
        self.execution_time = 0.0

        self._lanczos_rank = min(self.config.lanczos_rank_initial, max(1, self.n_st - 1))
        self.history: List[Dict] = []

    def _frame(self, U: FockUnitary) -> RotatedFrame:
        frame = RotatedFrame.build(U, self.gamma)
        frame.materialize_commutators()
        return frame

    def _merit(self, frame: RotatedFrame, U: FockUnitary, eta: float) -> Tuple[float, float]:
        probability = success_amplitude(U, self.problem).probability
        return frame.residual - eta * probability, probability

    def apply_step(self, U: FockUnitary, X: np.ndarray, tau: float) -> FockUnitary:
        """U e^{i tau X_t} diag(e^{i tau phi}, Omega(tau omega)), com Omega por Cayley ou Lanczos."""
        H = tau * X
        first = np.zeros_like(H)
        first[1:, 0] = H[1:, 0]
        first[0, 1:] = H[0, 1:]
        phi = float(H[0, 0].real)
        omega = H[1:, 1:]

        if not np.any(omega):
            return apply_update(U, self.problem, first, phi=phi)
        if self.n_st - 1 <= self.config.lanczos_threshold:
            return apply_update(U, self.problem, first, omega=omega, phi=phi)

        base_drift = np.linalg.norm(fidelity_residual(U, self.problem))
        cap = self.n_st - 1
        while True:
            low_rank = lanczos_low_rank(omega, self._lanczos_rank, seed=self.config.seed)
            updated = apply_update(U, self.problem, first, omega=low_rank, phi=phi)
            drift = max(updated.unitarity_defect(),
                        np.linalg.norm(fidelity_residual(updated, self.problem)) - base_drift)
            accurate = (low_rank.relative_error <= self.config.lanczos_tolerance
                        and drift <= NUMERICAL_TOLERANCES["reunitarize_drift"])
            if accurate or self._lanczos_rank >= cap:
                return updated
            self._lanczos_rank = min(2 * self._lanczos_rank, cap)
            self.lanczos_growths += 1
            logger.info("Posto de Lanczos aumentado para %d", self._lanczos_rank)

    def solve(self, initial: Optional[FockUnitary] = None, seed: Optional[int] = None,
              run_index: int = 0, verbose: bool = False) -> RunResult:
        """
        Executa o laço SQP a partir de `initial` (ou de um ponto aleatório com
        fidelidade unitária gerado com `seed`).

        Returns:
            RunResult; estagnação numérica é reportada pelo status, nunca por exceção
        """
        start_time = time.time()
        cfg = self.config
        prob = self.problem
        seed = cfg.seed if seed is None else seed

        if verbose:
            print("=" * 70)
            print("INICIANDO OTIMIZAÇÃO SQP")
            print("=" * 70)
            print(f"Modos: {prob.space.modes} | Fótons: {prob.space.photons} | N_st: {self.n_st}")
            print(f"Padrão medido: {prob.pattern} | Estados anunciados: {prob.output_dim}")
            print(f"eps_R = {cfg.eps_R:g} | eps_T = {cfg.eps_T:g} | semente = {seed}")
            print("=" * 70)

        U = initial if initial is not None else initial_feasible_unitary(prob, seed)
        frame = self._frame(U)
        status = ITERATION_LIMIT
        stall = 0
        n_dof = 0
        iteration = 0

        for iteration in range(1, cfg.max_outer_iters + 1):
            fidelity = build_frame(U, prob)
            z = fidelity.z
            probability = abs(z) ** 2

            normal = normal_step(U, prob, self.gamma, frame, cfg, fidelity)
            tangent = tangent_step(U, prob, self.gamma, frame, cfg, fidelity)
            self.cg_iterations_total += normal.cg_iterations
            self.cg_breakdowns += int(normal.breakdown)
            if not tangent.skipped:
                n_dof = tangent.n_dof

            norm_n = float(np.linalg.norm(normal.H))
            norm_t = float(np.linalg.norm(tangent.H))
            row = {
                "iteration": iteration,
                "R": frame.residual,
                "P": probability,
                "fidelity_residual": float(np.linalg.norm(fidelity_residual(U, prob))),
                "norm_HN": norm_n,
                "norm_HT": norm_t,
                "cg_iters": normal.cg_iterations,
                "n_dof": tangent.n_dof,
            }

            if frame.residual <= cfg.eps_R and norm_t <= cfg.eps_T and not tangent.skipped:
                status = FEASIBLE_OPTIMUM
                self.history.append({**row, "eta": np.nan, "tau": 0.0, "merit": np.nan})
                break

            if frame.residual > cfg.eps_R and norm_n < cfg.stall_norm:
                stall += 1
                if stall >= cfg.stall_iterations:
                    status = INFEASIBLE_STATIONARY
                    self.history.append({**row, "eta": np.nan, "tau": 0.0, "merit": np.nan})
                    break
            else:
                stall = 0

            gradient = residual_gradient(frame)
            slope_r_n = residual_slope(gradient, normal.H)
            slope_r_t = residual_slope(gradient, tangent.H)
            slope_p_n = success_slope(U, prob, z, normal.H)
            slope_p_t = tangent.slope

            eta = cfg.eta_initial
            use_tangent = norm_t > 0.0
            while True:
                if use_tangent:
                    slope = slope_r_n + slope_r_t - eta * (slope_p_n + slope_p_t)
                else:
                    slope = slope_r_n - eta * slope_p_n
                if slope < 0.0:
                    break
                eta *= 0.5
                self.eta_halvings += 1
                if eta < cfg.eta_min:
                    if not use_tangent:
                        break
                    use_tangent = False
                    self.tangent_dropped += 1
                    eta = cfg.eta_initial
                    logger.debug("Iteração %d: H_T descartado (eta < %g)", iteration, cfg.eta_min)
            X = normal.H + tangent.H if use_tangent else normal.H

            merit0 = frame.residual - eta * probability
            if slope >= 0.0:
                # sem direção de descida: com estagnação em curso o contador decide
                self.history.append({**row, "eta": eta, "tau": 0.0, "merit": merit0})
                if stall > 0:
                    continue
                status = LINE_SEARCH_FAILURE
                logger.info("Sem direção de descida na iteração %d (R = %.3e)", iteration, frame.residual)
                break

            tau = 1.0
            accepted = False
            for _ in range(cfg.armijo_max_trials):
                self.line_search_trials += 1
                candidate = self.apply_step(U, X, tau)
                candidate_frame = self._frame(candidate)
                merit, _ = self._merit(candidate_frame, candidate, eta)
                if merit <= merit0 + cfg.armijo_c1 * tau * slope:
                    accepted = True
                    break
                tau *= cfg.armijo_shrink

            self.history.append({**row, "eta": eta, "tau": tau if accepted else 0.0, "merit": merit0})
            if not accepted:
                status = LINE_SEARCH_FAILURE
                logger.info("Busca linear falhou na iteração %d (R = %.3e)", iteration, frame.residual)
                break

            U, frame = candidate, candidate_frame
            logger.debug("Iteração %d: R = %.3e, P = %.6f, |H_N| = %.2e, |H_T| = %.2e, tau = %.3g",
                         iteration, frame.residual, success_amplitude(U, prob).probability,
                         norm_n, norm_t, tau)

        self.execution_time = time.time() - start_time
        result = self._prepare_result(U, frame, status, iteration, n_dof, seed, run_index)

        if verbose:
            print("=" * 70)
            print("EXECUÇÃO CONCLUÍDA")
            print("=" * 70)
            self._print_summary(result)

        logger.info("Execução %d (semente %d): %s, R = %.3e, P = %.6f em %d iterações",
                    run_index, seed, status, result.R_final, result.P_final, iteration)
        return result

    def _prepare_result(self, U: FockUnitary, frame: RotatedFrame, status: str,
                        iterations: int, n_dof: int, seed: int, run_index: int) -> RunResult:
        amplitude = success_amplitude(U, self.problem)

        scattering = None
        if frame.residual <= NUMERICAL_TOLERANCES["extraction_residual"]:
            try:
                scattering = extract_scattering(U, self.gamma, frame).scattering
            except ExtractionFailedError as exc:
                logger.warning("Extração de S falhou: %s", exc)

        return RunResult(
            status=status,
            R_final=frame.residual,
            P_final=amplitude.probability,
            z_final=amplitude.z,
            iterations=iterations,
            U_final=U,
            S_extracted=scattering,
            tangent_dof=n_dof,
            history=list(self.history),
            seed=seed,
            run_index=run_index,
            metrics=self._get_metrics(),
        )

    def _get_metrics(self) -> Dict:
        return {
            "cg_iterations_total": self.cg_iterations_total,
            "cg_breakdowns": self.cg_breakdowns,
            "line_search_trials": self.line_search_trials,
            "eta_halvings": self.eta_halvings,
            "tangent_dropped": self.tangent_dropped,
            "lanczos_growths": self.lanczos_growths,
            "lanczos_rank": self._lanczos_rank,
            "execution_time_seconds": self.execution_time,
        }

    def _print_summary(self, result: RunResult):
        print("\n📊 RESULTADO")
        print("-" * 70)
        print(f"Status: {result.status}")
        print(f"Resíduo óptico R: {result.R_final:.3e}")
        print(f"Probabilidade de sucesso P: {result.P_final:.8f}")
        print(f"Iterações: {result.iterations}")
        print(f"Graus de liberdade tangentes N_DoF: {result.tangent_dof}")
        print(f"Matriz S extraída: {'sim' if result.S_extracted is not None else 'não'}")

        print("\n📈 MÉTRICAS DE EXECUÇÃO")
        print("-" * 70)
        metrics = result.metrics
        print(f"Iterações de CG (total): {metrics['cg_iterations_total']}")
        print(f"Breakdowns de CG: {metrics['cg_breakdowns']}")
        print(f"Tentativas de busca linear: {metrics['line_search_trials']}")
        print(f"Reduções de eta: {metrics['eta_halvings']}")
        print(f"Tempo de Execução: {metrics['execution_time_seconds']:.3f}s")
        print("=" * 70)


def optimize(prob: HeraldingProblem, cfg: Optional[SolverConfig] = None,
             seed: Optional[int] = None, initial: Optional[FockUnitary] = None,
             gamma: Optional[GammaBasis] = None, run_index: int = 0) -> RunResult:
    """Executa uma otimização completa (atalho para HeraldSQPSolver.solve)."""
    solver = HeraldSQPSolver(prob, cfg, gamma)
    return solver.solve(initial=initial, seed=seed, run_index=run_index)


def validate_result(result: RunResult, prob: HeraldingProblem,
                    cfg: Optional[SolverConfig] = None) -> bool:
    """
    Confere os contratos de saída de uma execução.

    feasible-optimum exige R <= eps_R, S extraída e U(S) reproduzindo as
    amplitudes anunciadas U[mu, 0] a menos de fase global (1e-6).
    """
    cfg = cfg or SolverConfig()
    if result.status not in RUN_STATUSES:
        return False
    if not result.is_feasible:
        return True
    if result.R_final > cfg.eps_R or result.S_extracted is None:
        return False

    lifted = lift_unitary(result.S_extracted, prob.space).entries[prob.mu, prob.input_index]
    actual = result.U_final.entries[prob.mu, prob.input_index]
    overlap = np.vdot(lifted, actual)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return bool(np.max(np.abs(lifted * phase - actual), initial=0.0) <= 1e-6)
