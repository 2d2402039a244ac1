"""
==============================================================================
BASELINE: MAXIMIZAÇÃO DE P * F^p DIRETAMENTE SOBRE S
==============================================================================

f(S) = |w|^{2p} P^{1-p} = P F^p, com amplitudes anunciadas
    amp_alpha = <k_alpha, m| U(S) |n>   (permanentes)
    w = sum_alpha conj(a_alpha) amp_alpha,   P = sum_alpha |amp_alpha|^2.

Gradiente euclidiano G = 2 df/dS* pela expansão de Laplace do permanente
(derivada em relação a uma entrada = permanente do menor). Subida no grupo
unitário pela retração de Cayley:
    W = G S† - S G†,   S(tau) = (1 - tau W/2)^{-1} (1 + tau W/2) S,
com busca linear de Armijo em tau (passo dobra após aceite de primeira).
A subida para quando |W| <= gtol.

Perto de F = 1 o ótimo de P F^p é degenerado (a componente fora do alvo
entra só em segunda ordem) e a subida fica sublinear. Se a subida termina com
1 - F <= polish_threshold, um refinamento de Gauss-Newton zera o resíduo
    r(S) = (1 - a a†) amp(S)
em passos dS = i K S (K Hermitiana, mínimos quadrados de norma mínima),
aplicados pela mesma retração de Cayley.
==============================================================================
"""
import logging
from dataclasses import dataclass, field
from math import factorial, prod
from typing import List, Optional, Tuple

import numpy as np
from joblib import Parallel, delayed
from pydantic import BaseModel, Field
from scipy.linalg import solve
from scipy.stats import unitary_group

from config.config import BASELINE_DEFAULTS, HERALD_THREADS
from src.fock.fock_space import ScatteringMatrix
from src.fock.permanent import permanent, permanent_minors
from src.herald.heralding import HeraldingProblem
from src.optimization.multistart import derive_run_seed
from src.optimization.sqp_solver import hermitian_basis

logger = logging.getLogger(__name__)

CONVERGED = "converged"
STAGNATED = "stagnated"
ITERATION_LIMIT = "iteration-limit"


class BaselineConfig(BaseModel):
    """Parâmetros do baseline (valores padrão em BASELINE_DEFAULTS)."""
    p: float = Field(BASELINE_DEFAULTS["p"], ge=1, description="Expoente da fidelidade em P F^p")
    max_iters: int = Field(BASELINE_DEFAULTS["max_iters"], ge=1, description="Iterações de subida")
    gtol: float = Field(BASELINE_DEFAULTS["gtol"], gt=0, description="Parada em |W| <= gtol")
    initial_step: float = Field(BASELINE_DEFAULTS["initial_step"], gt=0)
    armijo_c1: float = Field(BASELINE_DEFAULTS["armijo_c1"], gt=0, lt=1)
    armijo_shrink: float = Field(BASELINE_DEFAULTS["armijo_shrink"], gt=0, lt=1)
    armijo_max_trials: int = Field(BASELINE_DEFAULTS["armijo_max_trials"], ge=1)
    polish_threshold: float = Field(BASELINE_DEFAULTS["polish_threshold"], ge=0, lt=1,
                                    description="Refina F por Gauss-Newton se 1 - F <= isto")
    polish_tol: float = Field(BASELINE_DEFAULTS["polish_tol"], gt=0,
                              description="Parada do refinamento em 1 - F <= polish_tol")
    polish_max_iters: int = Field(BASELINE_DEFAULTS["polish_max_iters"], ge=0)
    seed: int = Field(BASELINE_DEFAULTS["seed"], ge=0, description="Semente do S inicial")


@dataclass
class BaselineResult:
    F: float
    P: float
    S: ScatteringMatrix = field(repr=False)
    objective: float
    iterations: int
    status: str
    p: float
    seed: Optional[int] = None
    run_index: int = 0
    polish_iterations: int = 0

    def to_row(self) -> dict:
        return {
            "run_id": self.run_index,
            "seed": self.seed,
            "p": self.p,
            "F": self.F,
            "P": self.P,
            "status": self.status,
            "iterations": self.iterations,
        }


@dataclass(frozen=True, eq=False)
class _Outcome:
    rows: np.ndarray
    cols: np.ndarray
    norm: float


def _outcomes(prob: HeraldingProblem) -> List[_Outcome]:
    state_in = prob.input_state
    cols = np.array([m for m, c in enumerate(state_in) for _ in range(c)], dtype=int)
    in_norm = prod(factorial(c) for c in state_in)
    outcomes = []
    for position in prob.mu:
        state_out = prob.space.basis[position]
        rows = np.array([m for m, c in enumerate(state_out) for _ in range(c)], dtype=int)
        norm = np.sqrt(in_norm * prod(factorial(c) for c in state_out))
        outcomes.append(_Outcome(rows, cols, norm))
    return outcomes


def heralded_amplitudes(S: np.ndarray, outcomes: List[_Outcome]) -> np.ndarray:
    return np.array([
        permanent(S[np.ix_(o.rows, o.cols)]) / o.norm if o.rows.size else 1.0
        for o in outcomes
    ], dtype=complex)


def _amplitude_jacobians(S: np.ndarray, outcomes: List[_Outcome]) -> np.ndarray:
    """J[alpha, k, l] = d amp_alpha / d S_kl."""
    n = S.shape[0]
    jac = np.zeros((len(outcomes), n, n), dtype=complex)
    for alpha, o in enumerate(outcomes):
        if not o.rows.size:
            continue
        minors = permanent_minors(S[np.ix_(o.rows, o.cols)]) / o.norm
        np.add.at(jac[alpha], (o.rows[:, np.newaxis], o.cols[np.newaxis, :]), minors)
    return jac


def fidelity_and_probability(S: np.ndarray, prob: HeraldingProblem,
                             outcomes: Optional[List[_Outcome]] = None) -> Tuple[float, float]:
    """(F, P) do anúncio produzido por U(S)."""
    amps = heralded_amplitudes(S, outcomes or _outcomes(prob))
    probability = float(np.vdot(amps, amps).real)
    if probability < 1e-30:
        return 1.0, probability
    return float(abs(np.vdot(prob.target, amps)) ** 2 / probability), probability


def _objective(amps: np.ndarray, target: np.ndarray, p: float) -> float:
    w = np.vdot(target, amps)
    probability = float(np.vdot(amps, amps).real)
    if probability < 1e-300:
        return 0.0
    return float(abs(w) ** (2 * p) * probability ** (1 - p))


def _gradient(S: np.ndarray, amps: np.ndarray, prob: HeraldingProblem,
              outcomes: List[_Outcome], p: float) -> np.ndarray:
    target = prob.target
    w = np.vdot(target, amps)
    ww = abs(w) ** 2
    probability = float(np.vdot(amps, amps).real)
    if probability < 1e-300:
        return np.zeros_like(S)

    d_conj_amp = (p * ww ** (p - 1) * w * target * probability ** (1 - p)
                  + (1 - p) * ww ** p * probability ** (-p) * amps)
    jac = _amplitude_jacobians(S, outcomes)
    return 2.0 * np.tensordot(d_conj_amp, jac.conj(), axes=1)


def _cayley_step(S: np.ndarray, W: np.ndarray, tau: float) -> np.ndarray:
    identity = np.eye(S.shape[0])
    return solve(identity - 0.5 * tau * W, (identity + 0.5 * tau * W) @ S)


def polish_fidelity(S: np.ndarray, prob: HeraldingProblem, cfg: BaselineConfig,
                    outcomes: Optional[List[_Outcome]] = None) -> Tuple[np.ndarray, int, bool]:
    """
    Leva F a 1 por Gauss-Newton no resíduo fora do alvo, partindo de S perto do ótimo.

    Returns:
        (S refinado, iterações, convergiu em 1 - F <= polish_tol)
    """
    outcomes = outcomes or _outcomes(prob)
    n = S.shape[0]
    basis = hermitian_basis(n)
    target = prob.target
    projector = np.eye(target.size) - np.outer(target, target.conj())

    amps = heralded_amplitudes(S, outcomes)
    residual = projector @ amps
    for iteration in range(cfg.polish_max_iters + 1):
        probability = float(np.vdot(amps, amps).real)
        if probability < 1e-30:
            return S, iteration, False
        # 1 - F = |r|^2 / P
        if float(np.vdot(residual, residual).real) <= cfg.polish_tol * probability:
            return S, iteration, True
        if iteration == cfg.polish_max_iters:
            break

        # d amp_alpha = i sum_kl K_kl (J_alpha S^T)_kl
        coupling = (_amplitude_jacobians(S, outcomes) @ S.T).reshape(len(outcomes), n * n)
        d_residual = projector @ (1j * coupling @ basis)
        system = np.vstack([d_residual.real, d_residual.imag])
        rhs = -np.concatenate([residual.real, residual.imag])
        theta = np.linalg.lstsq(system, rhs, rcond=None)[0]
        W = 1j * (basis @ theta).reshape(n, n)

        tau = 1.0
        improved = False
        for _ in range(cfg.armijo_max_trials):
            candidate = _cayley_step(S, W, tau)
            candidate_amps = heralded_amplitudes(candidate, outcomes)
            candidate_residual = projector @ candidate_amps
            if np.linalg.norm(candidate_residual) < np.linalg.norm(residual):
                improved = True
                break
            tau *= cfg.armijo_shrink
        if not improved:
            return S, iteration, False
        S, amps, residual = candidate, candidate_amps, candidate_residual

    return S, cfg.polish_max_iters, False


def baseline_pfp(prob: HeraldingProblem, base_cfg: Optional[BaselineConfig] = None,
                 initial: Optional[np.ndarray] = None, seed: Optional[int] = None,
                 run_index: int = 0) -> BaselineResult:
    """
    Maximiza P F^p sobre S em U(N) por subida de gradiente com retração de Cayley.

    Args:
        prob: Problema de anúncio
        base_cfg: Configuração (p >= 1)
        initial: S inicial (senão Haar aleatório com a semente)
        seed: Sobrepõe base_cfg.seed

    Returns:
        BaselineResult com (F, P, S) terminais e status
    """
    cfg = base_cfg or BaselineConfig()
    seed = cfg.seed if seed is None else seed
    n = prob.space.modes
    outcomes = _outcomes(prob)

    if initial is not None:
        S = np.array(initial, dtype=complex)
    else:
        rng = np.random.default_rng(seed)
        S = unitary_group.rvs(n, random_state=rng) if n > 1 else np.eye(1, dtype=complex)

    amps = heralded_amplitudes(S, outcomes)
    value = _objective(amps, prob.target, cfg.p)
    step = cfg.initial_step
    status = ITERATION_LIMIT
    iteration = 0

    for iteration in range(cfg.max_iters):
        G = _gradient(S, amps, prob, outcomes, cfg.p)
        W = G @ S.conj().T - S @ G.conj().T
        if np.linalg.norm(W) <= cfg.gtol:
            status = CONVERGED
            break
        slope = 0.5 * float(np.linalg.norm(W) ** 2)

        tau = step
        accepted = False
        for _ in range(cfg.armijo_max_trials):
            candidate = _cayley_step(S, W, tau)
            candidate_amps = heralded_amplitudes(candidate, outcomes)
            candidate_value = _objective(candidate_amps, prob.target, cfg.p)
            if candidate_value >= value + cfg.armijo_c1 * tau * slope:
                accepted = True
                break
            tau *= cfg.armijo_shrink

        if not accepted:
            status = STAGNATED
            break
        S, amps, value = candidate, candidate_amps, candidate_value
        # passo aceito de primeira => tenta maior na próxima iteração
        step = min(2.0 * tau, 1e3) if tau == step else tau

    polish_iters = 0
    fidelity, probability = fidelity_and_probability(S, prob, outcomes)
    if probability > 1e-12 and 1.0 - fidelity <= cfg.polish_threshold:
        S, polish_iters, polished = polish_fidelity(S, prob, cfg, outcomes)
        logger.debug("Refinamento de F: %d passos de Gauss-Newton (%s)",
                     polish_iters, "convergiu" if polished else "parou")
        if polished:
            status = CONVERGED

    # remove deriva de arredondamento acumulada
    u, _, vh = np.linalg.svd(S)
    S = u @ vh
    fidelity, probability = fidelity_and_probability(S, prob, outcomes)
    value = _objective(heralded_amplitudes(S, outcomes), prob.target, cfg.p)
    logger.info("Baseline p=%g (semente %d): %s, F = %.10f, P = %.6f em %d iterações",
                cfg.p, seed, status, fidelity, probability, iteration)
    return BaselineResult(fidelity, probability, ScatteringMatrix(S), value, iteration,
                          status, cfg.p, seed, run_index, polish_iters)


def baseline_multistart(prob: HeraldingProblem, base_cfg: Optional[BaselineConfig] = None,
                        runs: int = BASELINE_DEFAULTS["runs"],
                        workers: int = HERALD_THREADS) -> List[BaselineResult]:
    """Execuções independentes do baseline com sementes derivadas de (seed, run)."""
    cfg = base_cfg or BaselineConfig()
    n_jobs = max(1, min(workers, HERALD_THREADS, runs))
    tasks = (delayed(baseline_pfp)(prob, cfg, None, derive_run_seed(cfg.seed, k), k)
             for k in range(runs))
    results = Parallel(n_jobs=n_jobs)(tasks)
    return sorted(results, key=lambda r: r.run_index)
