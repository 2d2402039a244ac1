"""
==============================================================================
RESTRIÇÕES DE FIDELIDADE UNITÁRIA (HERALDING)
==============================================================================

O estado de entrada |n> ocupa a coluna 0 de U. Medindo o padrão m nos últimos
M modos, o estado anunciado nos N-M modos restantes é proporcional a
U[mu_alpha, 0], onde mu_alpha percorre os estados (k, m) da base.

Fidelidade unitária <=> (1 - a a†) U[mu, 0] = 0, com a amplitude de sucesso
z = <a, U[mu, 0]> e probabilidade P = |z|^2.

Simetrias que preservam a restrição: U -> U e^{iH} g, com H suportado na
primeira linha/coluna (t = xi h + Pu q) e g = diag(e^{i phi}, Omega).
==============================================================================
"""
import logging
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence, Tuple

import numpy as np

from config.config import NUMERICAL_TOLERANCES
from src.errors import InvalidArgumentError
from src.fock.fock_space import FockSpace, FockUnitary, Occupation, enumerate_basis

logger = logging.getLogger(__name__)


def _frozen(array: np.ndarray, dtype) -> np.ndarray:
    arr = np.array(array, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class HeraldingProblem:
    """
    Problema de anúncio: entrada, padrão medido e estado alvo.

    Atributos:
        space: Base de Fock com o estado de entrada na posição 0
        pattern: Ocupação medida nos últimos M modos
        output_states: Ocupações k dos N-M modos livres, na ordem de mu
        mu: Índices na base dos estados (k, m)
        target: Amplitudes alvo a_alpha (norma 1)
    """
    space: FockSpace
    pattern: Occupation
    output_states: Tuple[Occupation, ...]
    mu: np.ndarray = field(repr=False, compare=False)
    target: np.ndarray = field(repr=False, compare=False)
    input_index: int = 0

    def __post_init__(self):
        object.__setattr__(self, "mu", _frozen(self.mu, np.intp))
        object.__setattr__(self, "target", _frozen(self.target, complex))

    @property
    def input_state(self) -> Occupation:
        return self.space.basis[self.input_index]

    @property
    def measured_modes(self) -> int:
        return len(self.pattern)

    @property
    def output_dim(self) -> int:
        return len(self.output_states)

    @classmethod
    def build(cls, modes: int, photons: int, input_state: Sequence[int],
              pattern: Sequence[int], target: Mapping[Sequence[int], complex]) -> "HeraldingProblem":
        """
        Monta o problema a partir das ocupações.

        Args:
            modes: Número de modos N
            photons: Número de fótons n
            input_state: Ocupação de entrada (N entradas)
            pattern: Ocupação medida nos últimos M < N modos
            target: Mapa ocupação k (N-M entradas) -> amplitude; ausentes valem 0

        Returns:
            HeraldingProblem com alvo normalizado
        """
        input_state = tuple(int(v) for v in input_state)
        pattern = tuple(int(v) for v in pattern)
        if len(input_state) != modes:
            raise InvalidArgumentError(f"Entrada {input_state} não tem {modes} modos")
        if sum(input_state) != photons:
            raise InvalidArgumentError(f"Entrada {input_state} não tem {photons} fótons")
        if len(pattern) >= modes:
            raise InvalidArgumentError("Padrão medido deve cobrir menos modos que o total")
        if any(v < 0 for v in pattern) or sum(pattern) > photons:
            raise InvalidArgumentError(f"Padrão {pattern} incompatível com {photons} fótons")

        space = enumerate_basis(modes, photons, ordering_hint=input_state)
        free = modes - len(pattern)

        output_states, mu = [], []
        for position, state in enumerate(space.basis):
            if state[free:] == pattern:
                output_states.append(state[:free])
                mu.append(position)

        lookup = {state: alpha for alpha, state in enumerate(output_states)}
        amplitudes = np.zeros(len(output_states), dtype=complex)
        for occupation, amplitude in target.items():
            key = tuple(int(v) for v in occupation)
            if key not in lookup:
                raise InvalidArgumentError(
                    f"Estado alvo {key} não é compatível com {free} modos livres "
                    f"e {photons - sum(pattern)} fótons"
                )
            amplitudes[lookup[key]] = complex(amplitude)

        norm = np.linalg.norm(amplitudes)
        if norm == 0.0:
            raise InvalidArgumentError("Estado alvo tem norma zero")
        if abs(norm - 1.0) > 1e-6:
            logger.warning("Estado alvo com norma %.8f; normalizando", norm)
        amplitudes = amplitudes / norm

        return cls(space, pattern, tuple(output_states), np.array(mu), amplitudes)


class SuccessAmplitude(NamedTuple):
    z: complex
    probability: float
    approximate: bool


@dataclass(frozen=True, eq=False)
class FidelityFrame:
    """
    Vetor h, base e^(alpha) e projetor Pu sobre o complemento de V = Span{e^(alpha)}.

    Vetores de comprimento N_st - 1 indexam as colunas 1..N_st-1 de U.
    """
    z: complex
    h: np.ndarray
    e_basis: np.ndarray
    v_basis: np.ndarray
    rank_deficient: bool

    @property
    def v_dimension(self) -> int:
        return self.v_basis.shape[1]

    def project_u(self, q: np.ndarray) -> np.ndarray:
        """Aplica Pu = 1 - Q Q†."""
        return q - self.v_basis @ (self.v_basis.conj().T @ q)

    def projector(self) -> np.ndarray:
        """Pu denso (para diagnóstico e testes)."""
        return np.eye(self.h.shape[0]) - self.v_basis @ self.v_basis.conj().T


def _first_column(U: FockUnitary, prob: HeraldingProblem) -> np.ndarray:
    if U.space.dimension != prob.space.dimension:
        raise InvalidArgumentError("U e problema em espaços de Fock diferentes")
    return U.entries[prob.mu, prob.input_index]


def fidelity_residual(U: FockUnitary, prob: HeraldingProblem) -> np.ndarray:
    """(1 - a a†) U[mu, 0]; nulo sse o anúncio tem fidelidade unitária."""
    column = _first_column(U, prob)
    a = prob.target
    return column - a * np.vdot(a, column)


def success_amplitude(U: FockUnitary, prob: HeraldingProblem,
                      tol: float = NUMERICAL_TOLERANCES["approximate_amplitude"]) -> SuccessAmplitude:
    """
    Amplitude de sucesso z = <a, U[mu, 0]> e P = |z|^2.

    Fora da variedade de fidelidade unitária z é a projeção de mínimos
    quadrados e o resultado vem marcado como aproximado.
    """
    column = _first_column(U, prob)
    z = complex(np.vdot(prob.target, column))
    approximate = bool(np.linalg.norm(column - prob.target * z) > tol)
    return SuccessAmplitude(z, float(abs(z) ** 2), approximate)


def fidelity_diagnostic(U: FockUnitary, prob: HeraldingProblem) -> Tuple[float, float]:
    """(F, P) com P = sum |U[mu, 0]|^2 e F = |<a, U[mu, 0]>|^2 / P (F = 1 se P < 1e-30)."""
    column = _first_column(U, prob)
    probability = float(np.vdot(column, column).real)
    if probability < 1e-30:
        return 1.0, probability
    fidelity = float(abs(np.vdot(prob.target, column)) ** 2 / probability)
    return fidelity, probability


def build_frame(U: FockUnitary, prob: HeraldingProblem) -> FidelityFrame:
    """
    Constrói h_n = -i (z/|z|) sum_alpha a_alpha U*[mu_alpha, n] (n >= 1) e Pu.

    Com z = 0 usa-se fase 1. Deficiência de posto em {e^(alpha)} reduz dim V.
    """
    z = success_amplitude(U, prob).z
    phase = z / abs(z) if abs(z) > 1e-15 else 1.0 + 0.0j

    e_basis = U.entries[prob.mu, 1:].conj().T
    h = -1j * phase * (e_basis @ prob.target)

    if e_basis.size:
        left, singular, _ = np.linalg.svd(e_basis, full_matrices=False)
        rank = int(np.sum(singular > NUMERICAL_TOLERANCES["frame_rank"] * max(1.0, singular[0])))
        v_basis = left[:, :rank]
    else:
        rank = 0
        v_basis = np.zeros((e_basis.shape[0], 0), dtype=complex)

    rank_deficient = rank < prob.output_dim
    if rank_deficient:
        logger.debug("Base e^(alpha) com posto %d < %d", rank, prob.output_dim)

    return FidelityFrame(z, h, e_basis, v_basis, rank_deficient)


def project_tangent(U: FockUnitary, prob: HeraldingProblem, X: np.ndarray,
                    frame: FidelityFrame = None) -> np.ndarray:
    """
    Projeção Pi sobre o espaço tangente da restrição de fidelidade.

    Mantém phi = X[0, 0] e omega = X[1:, 1:]; troca t = X[1:, 0] por
    xi h + Pu t com xi = <h, t>/<h, h>.

    Args:
        U: Ponto atual (fidelidade unitária)
        prob: Problema
        X: Matriz Hermitiana N_st x N_st
        frame: Frame já calculado para U (opcional)

    Returns:
        Matriz Hermitiana projetada
    """
    if frame is None:
        frame = build_frame(U, prob)
    X = np.asarray(X, dtype=complex)
    t = X[1:, 0]

    h_norm_sq = np.vdot(frame.h, frame.h).real
    xi = np.vdot(frame.h, t) / h_norm_sq if h_norm_sq > 1e-30 else 0.0
    new_t = xi * frame.h + frame.project_u(t)

    projected = X.copy()
    projected[1:, 0] = new_t
    projected[0, 1:] = new_t.conj()
    return projected
