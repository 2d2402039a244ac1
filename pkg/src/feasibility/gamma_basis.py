"""
==============================================================================
REALIZABILIDADE POR ÓPTICA LINEAR (BASE GAMMA)
==============================================================================

gamma^{ij} = (a†_i a_j - (n/N) delta_ij) / sqrt(2K),
K = n (N + n) N_st / [2 N (N + 1)].

Identidades:
    Tr[gamma^{ij} gamma^{nm}] = delta_im delta_jn - delta_ij delta_nm / N
    sqrt(2K) [gamma^{ij}, gamma^{nm}] = delta_jn gamma^{im} - delta_im gamma^{nj}

As gamma formam um frame de Parseval do seu span W (dimensão N^2 - 1). U é
realizável sse U† W U = W. Com gamma_bar^a = U† gamma^a U:
    R^a = (1 - P_W) gamma_bar^a      (resíduos ópticos)
    R   = sum_a |R^a|^2 / (N^2 - 1) = 1 - sum |Tr[gamma^{ij} gamma_bar^{nm}]|^2 / (N^2 - 1)

Convenção de passo: U -> U e^{iX}. O jacobiano é J^a X = i (1 - P_W)[gamma_bar^a, X]
e o operador de Gauss-Newton aplicado aqui é (1/2) J†J.
==============================================================================
"""
import logging
from dataclasses import dataclass, field
from typing import Optional, Tuple

import numpy as np
from scipy import sparse

from config.config import GN_MEMORY_BUDGET_MB
from src.errors import InvalidArgumentError
from src.fock.fock_space import FockSpace, FockUnitary, ladder_generator

logger = logging.getLogger(__name__)


def residual_norm_constant(modes: int) -> int:
    """sum_a |R^a|^2 = (N^2 - 1) R (soma dos |gamma_bar^a|^2 é N^2 - 1)."""
    return modes * modes - 1


def _hermitian_part(matrix: np.ndarray) -> np.ndarray:
    return 0.5 * (matrix + matrix.conj().swapaxes(-1, -2))


@dataclass(frozen=True, eq=False)
class GammaBasis:
    """
    Base gamma esparsa do setor de n fótons.

    Atributos:
        space: Espaço de Fock
        gammas: N^2 matrizes esparsas reais, índice a = i*N + j
        K: Constante de normalização
        flat: Matriz esparsa (N^2, N_st^2) com vec(gamma^a) por linha
    """
    space: FockSpace
    gammas: Tuple[sparse.csr_matrix, ...]
    K: float
    flat: sparse.csr_matrix = field(repr=False)

    @property
    def modes(self) -> int:
        return self.space.modes

    def index(self, i: int, j: int) -> int:
        return i * self.modes + j

    def pair(self, a: int) -> Tuple[int, int]:
        return divmod(a, self.modes)

    @property
    def transpose_order(self) -> np.ndarray:
        """Permutação a=(i,j) -> (j,i)."""
        n = self.modes
        return np.array([j * n + i for i in range(n) for j in range(n)])

    @property
    def upper_pairs(self) -> np.ndarray:
        """Índices a com i <= j."""
        n = self.modes
        return np.array([i * n + j for i in range(n) for j in range(i, n)])


def build_gamma(space: FockSpace) -> GammaBasis:
    """
    Constrói a base gamma normalizada.

    Args:
        space: Espaço de Fock (N >= 2, n >= 1)

    Returns:
        GammaBasis
    """
    n_modes, n_photons, n_st = space.modes, space.photons, space.dimension
    if n_modes < 2 or n_photons < 1:
        raise InvalidArgumentError("Base gamma exige N >= 2 modos e n >= 1 fótons")

    K = n_photons * (n_modes + n_photons) * n_st / (2.0 * n_modes * (n_modes + 1))
    scale = 1.0 / np.sqrt(2.0 * K)
    identity = sparse.identity(n_st, format="csr")

    gammas = []
    rows, cols, values = [], [], []
    for i in range(n_modes):
        for j in range(n_modes):
            gamma = ladder_generator(space, i, j)
            if i == j:
                gamma = gamma - (n_photons / n_modes) * identity
            gamma = sparse.csr_matrix(gamma * scale)
            gamma.eliminate_zeros()
            gammas.append(gamma)

            coo = gamma.tocoo()
            rows.extend([i * n_modes + j] * coo.nnz)
            cols.extend(coo.row * n_st + coo.col)
            values.extend(coo.data)

    flat = sparse.csr_matrix((values, (rows, cols)), shape=(n_modes ** 2, n_st ** 2))
    return GammaBasis(space, tuple(gammas), K, flat)


@dataclass(eq=False)
class RotatedFrame:
    """
    Base girada gamma_bar = U† gamma U, coeficientes, resíduos e comutadores.

    Atributos:
        unitary: U de referência
        rotated: (N^2, N_st, N_st) gamma_bar^a
        coefficients: C[a, b] = <gamma^b, gamma_bar^a>
        residuals: (N^2, N_st, N_st) R^a
        residual: R escalar
    """
    gamma: GammaBasis
    unitary: FockUnitary
    rotated: np.ndarray = field(repr=False)
    coefficients: np.ndarray = field(repr=False)
    residuals: np.ndarray = field(repr=False)
    residual: float
    commutators: Optional[np.ndarray] = field(default=None, repr=False)

    @classmethod
    def build(cls, U: FockUnitary, gb: GammaBasis) -> "RotatedFrame":
        u = U.entries
        u_dag = u.conj().T
        n_st = gb.space.dimension
        n_ops = len(gb.gammas)

        rotated = np.empty((n_ops, n_st, n_st), dtype=complex)
        for a, gamma in enumerate(gb.gammas):
            rotated[a] = u_dag @ (gamma @ u)

        rotated_flat = rotated.reshape(n_ops, n_st * n_st)
        coefficients = np.asarray((gb.flat @ rotated_flat.T).T)
        projected = np.asarray((gb.flat.T @ coefficients.T).T)
        residuals = (rotated_flat - projected).reshape(n_ops, n_st, n_st)

        norm_sq = float(np.sum(np.abs(residuals) ** 2))
        residual = norm_sq / residual_norm_constant(gb.modes)
        return cls(gb, U, rotated, coefficients, residuals, residual)

    @property
    def overlaps(self) -> np.ndarray:
        """O[(ij), (nm)] = Tr[gamma^{ij} gamma_bar^{nm}]."""
        return self.coefficients.T[self.gamma.transpose_order, :]

    def commutator_bytes(self) -> int:
        n_ops = len(self.gamma.gammas)
        n_st = self.gamma.space.dimension
        return len(self.gamma.upper_pairs) * n_ops * n_st * n_st * 16

    def materialize_commutators(self, budget_mb: float = GN_MEMORY_BUDGET_MB) -> bool:
        """
        Pré-calcula D_ab = [gamma_bar^a, gamma^b] para a = (i <= j) e todo b.

        Returns:
            True se coube no orçamento de memória
        """
        if self.commutators is not None:
            return True
        if self.commutator_bytes() > budget_mb * 1024 ** 2:
            return False

        gb = self.gamma
        n_st = gb.space.dimension
        pairs = gb.upper_pairs
        commutators = np.empty((len(pairs), len(gb.gammas), n_st * n_st), dtype=complex)
        for row, a in enumerate(pairs):
            bar = self.rotated[a]
            for b, gamma in enumerate(gb.gammas):
                right = (gamma.T @ bar.T).T
                commutators[row, b] = (right - gamma @ bar).ravel()
        self.commutators = commutators
        return True


def optical_residual(U: FockUnitary, gb: GammaBasis) -> Tuple[float, np.ndarray]:
    """
    R = 1 - (1/(N^2 - 1)) sum |Tr[gamma^{ij} gamma_bar^{nm}]|^2 e as sobreposições.

    R é acumulado pela norma dos resíduos (mesmo valor, sem cancelamento).
    """
    frame = RotatedFrame.build(U, gb)
    return frame.residual, frame.overlaps


def residual_vector(U: FockUnitary, gb: GammaBasis) -> np.ndarray:
    """R^a = gamma_bar^a - P_W gamma_bar^a, shape (N^2, N_st, N_st)."""
    return RotatedFrame.build(U, gb).residuals


def residual_gradient(frame: RotatedFrame) -> np.ndarray:
    """
    Gradiente Hermitiano G de R: dR(U e^{i eps X})/d eps = Re Tr(G X).

    G = (2 / (N^2 - 1)) sum_a Herm(-i [gamma_bar^{a†}, R^a]).
    """
    gb = frame.gamma
    adjoints = frame.rotated[gb.transpose_order]
    commutators = adjoints @ frame.residuals - frame.residuals @ adjoints
    total = -1j * commutators.sum(axis=0)
    return (2.0 / residual_norm_constant(gb.modes)) * _hermitian_part(total)


def half_gauss_newton_rhs(frame: RotatedFrame) -> np.ndarray:
    """(1/2) J† R = ((N^2 - 1)/4) grad R."""
    return 0.25 * residual_norm_constant(frame.gamma.modes) * residual_gradient(frame)


def _sandwich(gb: GammaBasis, matrix: np.ndarray) -> np.ndarray:
    """sum_{ij} gamma^{ji} Y gamma^{ij}."""
    total = np.zeros_like(matrix)
    for a, b in enumerate(gb.transpose_order):
        right = (gb.gammas[a].T @ matrix.T).T
        total += gb.gammas[b] @ right
    return total


def _commutator_term_streamed(frame: RotatedFrame, X: np.ndarray) -> np.ndarray:
    gb = frame.gamma
    n_ops = len(gb.gammas)
    n_st = gb.space.dimension
    bars = frame.rotated
    comm = bars @ X - X @ bars
    coeffs = np.asarray((gb.flat @ comm.reshape(n_ops, n_st * n_st).T).T)
    projected = np.asarray((gb.flat.T @ coeffs.T).T).reshape(n_ops, n_st, n_st)
    adjoints = bars[gb.transpose_order]
    term = (adjoints @ projected - projected @ adjoints).sum(axis=0)
    return 0.5 * _hermitian_part(term)


def _commutator_term_materialized(frame: RotatedFrame, X: np.ndarray) -> np.ndarray:
    gb = frame.gamma
    n_st = gb.space.dimension
    pairs = gb.upper_pairs
    multiplicity = np.array([1.0 if i == j else 2.0 for i, j in map(gb.pair, pairs)])

    flat = frame.commutators
    traces = flat @ X.T.ravel()
    weights = np.conj(traces) * multiplicity[:, np.newaxis]
    term = np.tensordot(weights, flat, axes=([0, 1], [0, 1])).reshape(n_st, n_st)
    return 0.5 * _hermitian_part(term)


def gauss_newton_apply(frame: RotatedFrame, X: np.ndarray) -> np.ndarray:
    """
    Aplica (1/2) J†J a uma Hermitiana X.

    GN(X) = ((N^2-1)/N_st) X - U† [sum gamma^{ji} (U X U†) gamma^{ij}] U
            - (1/2) sum Herm( Tr([gamma_bar^a, gamma^b] X)* [gamma_bar^a, gamma^b] )

    A soma de comutadores usa só a = (i <= j) com multiplicidade 2 fora da
    diagonal quando os comutadores estão materializados; senão é calculada
    em fluxo a partir de P_W[gamma_bar^a, X].
    """
    gb = frame.gamma
    X = np.asarray(X, dtype=complex)
    u = frame.unitary.entries
    u_dag = u.conj().T

    casimir = residual_norm_constant(gb.modes) / gb.space.dimension
    sparse_part = casimir * X - u_dag @ _sandwich(gb, u @ X @ u_dag) @ u

    if frame.commutators is not None:
        commutator_part = _commutator_term_materialized(frame, X)
    else:
        commutator_part = _commutator_term_streamed(frame, X)

    return _hermitian_part(sparse_part - commutator_part)
