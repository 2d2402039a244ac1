"""
Atualizações de U que preservam a restrição de fidelidade.

U' = U e^{iH} g, g = diag(e^{i phi}, Omega):
- e^{iH} em forma fechada: H só tem a primeira linha/coluna (vetor t), logo age
  no plano {e_0, (0, t/|t|)} e e^{iH} = 1 + correção de posto 2.
- Omega = Cayley(omega) = (1 + i omega/2)(1 - i omega/2)^{-1}, exato ou por
  aproximação de posto r de omega via Lanczos.
"""
import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.linalg import LinAlgError, expm, qr, solve
from scipy.stats import unitary_group

from config.config import NUMERICAL_TOLERANCES
from src.fock.fock_space import FockUnitary, unitarity_defect
from src.herald.heralding import HeraldingProblem

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LowRankOmega:
    """
    omega ~ V T V† com V ortonormal (n x r) e T tridiagonal Hermitiana (r x r).

    Cayley(V T V†) = 1 + V (Cayley(T) - 1) V† é exatamente unitário.
    """
    vectors: np.ndarray
    tridiagonal: np.ndarray
    relative_error: float

    @property
    def rank(self) -> int:
        return self.vectors.shape[1]

    def apply_cayley(self, block: np.ndarray) -> np.ndarray:
        """block @ Cayley(V T V†)."""
        correction = cayley_transform(self.tridiagonal) - np.eye(self.rank)
        return block + (block @ self.vectors) @ correction @ self.vectors.conj().T


def cayley_transform(omega: np.ndarray) -> np.ndarray:
    """
    (1 + i omega/2)(1 - i omega/2)^{-1} para omega Hermitiana.

    Em falha da inversão cai para a exponencial exata e^{i omega}.
    """
    omega = np.asarray(omega, dtype=complex)
    identity = np.eye(omega.shape[0])
    try:
        return solve(identity - 0.5j * omega, identity + 0.5j * omega)
    except LinAlgError:
        logger.warning("Cayley falhou (bloco %d); usando exponencial exata", omega.shape[0])
        return expm(1j * omega)


def lanczos_low_rank(omega: np.ndarray, rank: int, seed: int = 0) -> LowRankOmega:
    """
    Aproximação de posto `rank` de omega Hermitiana por Lanczos com
    reortogonalização completa.

    Args:
        omega: Matriz Hermitiana n x n
        rank: Dimensão do subespaço de Krylov
        seed: Semente do vetor inicial

    Returns:
        LowRankOmega com erro relativo de Frobenius
    """
    omega = np.asarray(omega, dtype=complex)
    n = omega.shape[0]
    rank = max(1, min(rank, n))
    rng = np.random.default_rng(seed)

    vectors = np.zeros((n, rank), dtype=complex)
    alphas, betas = [], []
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    v /= np.linalg.norm(v)
    beta = 0.0
    v_prev = np.zeros(n, dtype=complex)

    for k in range(rank):
        vectors[:, k] = v
        w = omega @ v - beta * v_prev
        alpha = np.vdot(v, w).real
        w = w - alpha * v
        # reortogonalização completa
        w = w - vectors[:, :k + 1] @ (vectors[:, :k + 1].conj().T @ w)
        alphas.append(alpha)
        beta = np.linalg.norm(w)
        if k == rank - 1 or beta < 1e-14:
            break
        betas.append(beta)
        v_prev, v = v, w / beta

    size = len(alphas)
    vectors = vectors[:, :size]
    tridiagonal = np.diag(alphas).astype(complex)
    if size > 1:
        off = np.array(betas[:size - 1])
        tridiagonal += np.diag(off, 1) + np.diag(off, -1)

    approx = vectors @ tridiagonal @ vectors.conj().T
    scale = np.linalg.norm(omega)
    error = float(np.linalg.norm(omega - approx) / scale) if scale > 0 else 0.0
    return LowRankOmega(vectors, tridiagonal, error)


def reunitarize(entries: np.ndarray, prob: HeraldingProblem) -> np.ndarray:
    """
    Restaura unitariedade preservando a restrição de fidelidade.

    A parte mu da coluna 0 é projetada sobre a, a coluna é renormalizada e as
    demais colunas são ortogonalizadas por QR com a coluna 0 fixa.
    """
    column = entries[:, prob.input_index].copy()
    heralded = column[prob.mu]
    column[prob.mu] = prob.target * np.vdot(prob.target, heralded)
    column /= np.linalg.norm(column)

    matrix = entries.copy()
    matrix[:, 0] = column
    q, r = qr(matrix)
    diagonal = np.diag(r)
    phases = np.where(np.abs(diagonal) > 0, diagonal / np.abs(diagonal), 1.0)
    return q * phases[np.newaxis, :]


def apply_update(U: FockUnitary, prob: HeraldingProblem, H: np.ndarray,
                 omega: Union[None, np.ndarray, LowRankOmega] = None,
                 phi: float = 0.0,
                 omega_unitary: Optional[np.ndarray] = None) -> FockUnitary:
    """
    U' = U e^{iH} diag(e^{i phi}, Omega).

    Args:
        U: Ponto atual com fidelidade unitária
        prob: Problema
        H: Hermitiana com suporte na primeira linha/coluna (só H[1:, 0] é lido)
        omega: Gerador Hermitiano do bloco (denso => Cayley exato; LowRankOmega => Lanczos)
        phi: Fase do estado de entrada
        omega_unitary: Bloco Omega já unitário (alternativa a omega)

    Returns:
        Novo FockUnitary
    """
    entries = np.array(U.entries, dtype=complex, copy=True)
    t = np.asarray(H, dtype=complex)[1:, 0]
    s = np.linalg.norm(t)

    if s > 0.0:
        u = t / s
        c0 = entries[:, 0].copy()
        cu = entries[:, 1:] @ u
        cos_s, sin_s = np.cos(s), np.sin(s)
        entries[:, 0] = cos_s * c0 + 1j * sin_s * cu
        entries[:, 1:] += np.outer((cos_s - 1.0) * cu + 1j * sin_s * c0, u.conj())

    if phi:
        entries[:, 0] *= np.exp(1j * phi)

    if omega_unitary is not None:
        entries[:, 1:] = entries[:, 1:] @ omega_unitary
    elif isinstance(omega, LowRankOmega):
        entries[:, 1:] = omega.apply_cayley(entries[:, 1:])
    elif omega is not None:
        entries[:, 1:] = entries[:, 1:] @ cayley_transform(omega)

    drift = unitarity_defect(entries)
    if drift > NUMERICAL_TOLERANCES["reunitarize_drift"]:
        logger.warning("Deriva de unitariedade %.2e; reunitarizando", drift)
        entries = reunitarize(entries, prob)

    return FockUnitary(entries, U.space)


def initial_feasible_unitary(prob: HeraldingProblem, seed: int) -> FockUnitary:
    """
    Ponto inicial aleatório com fidelidade unitária.

    Coluna 0: c[mu] = z0 a com z0 = rho e^{i theta}, rho ~ U(0.1, 0.9); demais
    entradas complexas gaussianas normalizadas a sqrt(1 - rho^2). A coluna é
    completada a um unitário por QR contra um referencial de Haar.
    """
    rng = np.random.default_rng(seed)
    n_st = prob.space.dimension
    rho = rng.uniform(0.1, 0.9)
    theta = rng.uniform(0.0, 2.0 * np.pi)

    column = rng.standard_normal(n_st) + 1j * rng.standard_normal(n_st)
    column[prob.mu] = 0.0
    rest = np.linalg.norm(column)
    if rest < 1e-12:
        rho = 1.0
    else:
        column *= np.sqrt(1.0 - rho ** 2) / rest
    column[prob.mu] = rho * np.exp(1j * theta) * prob.target

    if n_st == 1:
        return FockUnitary(column.reshape(1, 1) / abs(column[0]), prob.space)

    frame = unitary_group.rvs(n_st, random_state=rng)
    q, r = qr(np.column_stack([column, frame[:, 1:]]))
    diagonal = np.diag(r)
    q = q * (diagonal / np.abs(diagonal))[np.newaxis, :]
    return FockUnitary(q, prob.space)
