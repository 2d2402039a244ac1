"""
Extração da matriz de espalhamento S de um U realizável.

Para U = U(S): G^{(nm),(ij)} = O[(ij),(mn)] + delta_ij delta_nm / N = S_ni S*_mj.
A matriz de índices gêmeos M[(n,i),(m,j)] = S_ni S*_mj tem posto 1 e seu
autovetor dominante, redimensionado para N x N, é S a menos de fase global.
"""
import logging
from typing import NamedTuple, Optional

import numpy as np
from scipy.linalg import eigh, polar

from config.config import NUMERICAL_TOLERANCES
from src.errors import ExtractionFailedError, InfeasibleInputError
from src.feasibility.gamma_basis import GammaBasis, RotatedFrame
from src.fock.fock_space import FockUnitary, ScatteringMatrix, lift_unitary

logger = logging.getLogger(__name__)


class ExtractionResult(NamedTuple):
    scattering: ScatteringMatrix
    phase_fixed: bool
    rank_one_residual: float
    lift_error: float


def scattering_overlap_matrix(frame: RotatedFrame) -> np.ndarray:
    """G com linhas (n, m) e colunas (i, j); unitária quando U = U(S)."""
    n = frame.gamma.modes
    overlaps = frame.overlaps.reshape(n, n, n, n)  # [i, j, m, n]
    G = overlaps.transpose(3, 2, 0, 1).copy()      # [n, m, i, j]
    for a in range(n):
        for b in range(n):
            G[a, a, b, b] += 1.0 / n
    return G.reshape(n * n, n * n)


def twin_index_matrix(frame: RotatedFrame) -> np.ndarray:
    """M[(n,i),(m,j)] = G^{(nm),(ij)}, Hermitiana de posto 1 para U realizável."""
    n = frame.gamma.modes
    G = scattering_overlap_matrix(frame).reshape(n, n, n, n)  # [n, m, i, j]
    return G.transpose(0, 2, 1, 3).reshape(n * n, n * n)


def _fix_phase(matrix: np.ndarray):
    if abs(matrix[0, 0]) > 1e-8:
        pivot, fixed = matrix[0, 0], True
    else:
        pivot, fixed = matrix.flat[np.flatnonzero(np.abs(matrix) > 1e-8)[0]], False
    return matrix * (abs(pivot) / pivot), fixed


def _lift_error(candidate: np.ndarray, U: FockUnitary) -> float:
    lifted = lift_unitary(ScatteringMatrix(candidate), U.space).entries
    overlap = np.vdot(lifted, U.entries)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.max(np.abs(lifted * phase - U.entries)))


def extract_scattering(U: FockUnitary, gb: GammaBasis,
                       frame: Optional[RotatedFrame] = None) -> ExtractionResult:
    """
    Recupera S tal que U(S) = U a menos de fase global.

    Args:
        U: Unitário de Fock com R <= 1e-8
        gb: Base gamma do mesmo espaço
        frame: Base girada já calculada (opcional)

    Returns:
        ExtractionResult com S (fase fixada: S_00 real >= 0, ou a primeira
        entrada não nula se S_00 ~ 0)

    Raises:
        InfeasibleInputError: R acima da tolerância
        ExtractionFailedError: M sem posto 1 ou U(S) diferente de U
    """
    if frame is None:
        frame = RotatedFrame.build(U, gb)
    if frame.residual > NUMERICAL_TOLERANCES["extraction_residual"]:
        raise InfeasibleInputError(
            f"U não é realizável por óptica linear (R = {frame.residual:.3e})"
        )

    n = gb.modes
    twin = twin_index_matrix(frame)
    twin = 0.5 * (twin + twin.conj().T)
    eigenvalues, eigenvectors = eigh(twin)
    top = eigenvalues[-1]
    vector = eigenvectors[:, -1]

    scale = np.linalg.norm(twin)
    rank_one = float(np.linalg.norm(twin - top * np.outer(vector, vector.conj())) / scale)
    if rank_one > NUMERICAL_TOLERANCES["extraction_rank_one"]:
        raise ExtractionFailedError(f"Matriz de índices gêmeos não tem posto 1 ({rank_one:.3e})")

    scattering = np.sqrt(max(top, 0.0)) * vector.reshape(n, n)
    scattering = scattering / np.linalg.norm(scattering, axis=0, keepdims=True)
    scattering, _ = polar(scattering)

    # M[(p,q),(r,s)] = S_pq conj(S_rs): o autovetor lido linha a linha já é S
    matrix, phase_fixed = _fix_phase(scattering)
    error = _lift_error(matrix, U)
    if error > NUMERICAL_TOLERANCES["extraction_lift_match"]:
        raise ExtractionFailedError(f"U(S) difere de U em {error:.3e}")

    logger.debug("S extraída: posto-1 %.2e, erro de levantamento %.2e", rank_one, error)
    return ExtractionResult(ScatteringMatrix(matrix), phase_fixed, rank_one, error)
