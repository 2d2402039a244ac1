"""
==============================================================================
ESPAÇO DE FOCK MULTIMODO
==============================================================================

Base de números de ocupação para n fótons em N modos, operadores bilineares
a†_i a_j (esparsos), levantamento de uma matriz de espalhamento S (N x N) para
o unitário U(S) no setor de n fótons e o oráculo de amplitudes por permanentes.

CONVENÇÕES:
-----------
- Dimensão: N_st = C(N + n - 1, n).
- Ordem da base: lexicográfica reversa (|n00..>, |n-1,1,0..>, ...), com um
  estado opcional fixado na posição 0 (o estado de entrada do problema).
- U a†_j U† = sum_i S_ij a†_i, logo <out|U(S)|in> = perm(S[linhas out, colunas in])
  / sqrt(prod in! * prod out!).
==============================================================================
"""
import logging
from dataclasses import dataclass, field
from math import comb, factorial, prod
from typing import Dict, Iterator, Optional, Sequence, Tuple, Union

import numpy as np
from scipy import sparse
from scipy.linalg import expm, schur

from config.config import NUMERICAL_TOLERANCES
from src.errors import InvalidArgumentError, NonUnitaryError
from src.fock.permanent import permanent

logger = logging.getLogger(__name__)

Occupation = Tuple[int, ...]


def unitarity_defect(matrix: np.ndarray) -> float:
    """Máximo |(M†M - 1)_ij|."""
    m = np.asarray(matrix)
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


def _frozen_copy(matrix: np.ndarray) -> np.ndarray:
    arr = np.array(matrix, dtype=complex, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class FockSpace:
    """
    Base ordenada do setor de n fótons em N modos.

    Atributos:
        modes: Número de modos N
        photons: Número de fótons n
        basis: Vetores de ocupação na ordem da base
        index: Mapa ocupação -> posição
    """
    modes: int
    photons: int
    basis: Tuple[Occupation, ...]
    index: Dict[Occupation, int] = field(compare=False, repr=False)

    @property
    def dimension(self) -> int:
        return len(self.basis)

    def position(self, occupation: Sequence[int]) -> int:
        key = tuple(int(v) for v in occupation)
        if key not in self.index:
            raise InvalidArgumentError(f"Estado {key} não pertence ao espaço ({self.modes}, {self.photons})")
        return self.index[key]


@dataclass(frozen=True, eq=False)
class ScatteringMatrix:
    """Matriz de espalhamento S (N x N), unitária na construção."""
    entries: np.ndarray
    tolerance: float = field(default=NUMERICAL_TOLERANCES["scattering_unitarity"], compare=False)

    def __post_init__(self):
        arr = _frozen_copy(self.entries)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise InvalidArgumentError(f"Matriz de espalhamento deve ser quadrada, recebido {arr.shape}")
        defect = unitarity_defect(arr)
        if defect > self.tolerance:
            raise NonUnitaryError("Matriz de espalhamento não unitária", defect)
        object.__setattr__(self, "entries", arr)

    @property
    def modes(self) -> int:
        return self.entries.shape[0]


@dataclass(frozen=True, eq=False)
class FockUnitary:
    """Unitário denso N_st x N_st no espaço de Fock (variável de otimização)."""
    entries: np.ndarray
    space: FockSpace

    def __post_init__(self):
        arr = _frozen_copy(self.entries)
        n_st = self.space.dimension
        if arr.shape != (n_st, n_st):
            raise InvalidArgumentError(f"Unitário de Fock deve ter forma ({n_st}, {n_st}), recebido {arr.shape}")
        object.__setattr__(self, "entries", arr)

    def unitarity_defect(self) -> float:
        return unitarity_defect(self.entries)

    def check_unitary(self, tol: float = NUMERICAL_TOLERANCES["fock_unitarity"]) -> "FockUnitary":
        defect = self.unitarity_defect()
        if defect > tol:
            raise NonUnitaryError("Unitário de Fock perdeu unitariedade", defect)
        return self


def _reverse_lexicographic(photons: int, modes: int) -> Iterator[Occupation]:
    if modes == 1:
        yield (photons,)
        return
    for first in range(photons, -1, -1):
        for rest in _reverse_lexicographic(photons - first, modes - 1):
            yield (first,) + rest


def enumerate_basis(modes: int, photons: int,
                    ordering_hint: Optional[Sequence[int]] = None) -> FockSpace:
    """
    Enumera a base de Fock de n fótons em N modos.

    Args:
        modes: Número de modos (N >= 1)
        photons: Número de fótons (n >= 0)
        ordering_hint: Estado a ser fixado na posição 0 (opcional)

    Returns:
        FockSpace com C(N+n-1, n) estados
    """
    if modes < 1:
        raise InvalidArgumentError("Número de modos deve ser >= 1")
    if photons < 0:
        raise InvalidArgumentError("Número de fótons deve ser >= 0")

    states = list(_reverse_lexicographic(photons, modes))

    if ordering_hint is not None:
        hint = tuple(int(v) for v in ordering_hint)
        if len(hint) != modes:
            raise InvalidArgumentError(f"Estado {hint} não tem {modes} modos")
        if any(v < 0 for v in hint) or sum(hint) != photons:
            raise InvalidArgumentError(f"Estado {hint} não tem {photons} fótons")
        states.remove(hint)
        states.insert(0, hint)

    assert len(states) == comb(modes + photons - 1, photons)
    basis = tuple(states)
    return FockSpace(modes, photons, basis, {s: k for k, s in enumerate(basis)})


def ladder_generator(space: FockSpace, i: int, j: int) -> sparse.csr_matrix:
    """
    Matriz esparsa de a†_i a_j na base de `space`.

    <n'|a†_i a_j|n> = sqrt((n_i + 1) n_j) com n' = n - e_j + e_i (i != j);
    n_i na diagonal quando i == j.
    """
    if not (0 <= i < space.modes and 0 <= j < space.modes):
        raise InvalidArgumentError(f"Índices de modo ({i}, {j}) fora de [0, {space.modes})")

    rows, cols, values = [], [], []
    for col, state in enumerate(space.basis):
        if i == j:
            if state[i]:
                rows.append(col)
                cols.append(col)
                values.append(float(state[i]))
            continue
        if state[j] == 0:
            continue
        target = list(state)
        target[j] -= 1
        target[i] += 1
        rows.append(space.index[tuple(target)])
        cols.append(col)
        values.append(np.sqrt((state[i] + 1) * state[j]))

    n_st = space.dimension
    return sparse.csr_matrix((values, (rows, cols)), shape=(n_st, n_st))


def _entries(scattering: Union[ScatteringMatrix, np.ndarray]) -> np.ndarray:
    if isinstance(scattering, ScatteringMatrix):
        return scattering.entries
    return np.asarray(scattering, dtype=complex)


def lift_unitary(scattering: ScatteringMatrix, space: FockSpace) -> FockUnitary:
    """
    Levanta S para U(S) = exp(sum_ij L_ij a†_i a_j) com L = log principal de S.

    Se S tem autovalor a menos de 1e-8 de -1 (corte do logaritmo), S é
    multiplicada por uma fase global e^{i t}; o fator e^{i n t} é removido de U.
    """
    s = _entries(scattering)
    if s.shape != (space.modes, space.modes):
        raise InvalidArgumentError(f"S {s.shape} incompatível com {space.modes} modos")

    schur_form, vectors = schur(s, output="complex")
    eigenvalues = np.diag(schur_form)

    shift = 0.0
    if np.min(np.abs(eigenvalues + 1.0)) < NUMERICAL_TOLERANCES["branch_cut"]:
        rng = np.random.default_rng(len(eigenvalues))
        for _ in range(32):
            shift = rng.uniform(0.0, 2.0 * np.pi)
            if np.min(np.abs(np.exp(1j * shift) * eigenvalues + 1.0)) > 1e-3:
                break
        logger.debug("Autovalor de S no corte do logaritmo; fase global %.6f aplicada", shift)
        eigenvalues = np.exp(1j * shift) * eigenvalues

    log_s = vectors @ np.diag(np.log(eigenvalues)) @ vectors.conj().T

    n_st = space.dimension
    generator = sparse.csr_matrix((n_st, n_st), dtype=complex)
    for i in range(space.modes):
        for j in range(space.modes):
            if log_s[i, j] != 0:
                generator = generator + log_s[i, j] * ladder_generator(space, i, j)

    u = expm(generator.toarray())
    if shift:
        u = u * np.exp(-1j * space.photons * shift)
    return FockUnitary(u, space)


def amplitude_oracle(scattering: Union[ScatteringMatrix, np.ndarray],
                     in_state: Sequence[int], out_state: Sequence[int]) -> complex:
    """
    <out|U(S)|in> por permanente da submatriz com linhas/colunas repetidas.

    Args:
        scattering: Matriz S
        in_state: Ocupação de entrada
        out_state: Ocupação de saída

    Returns:
        Amplitude complexa
    """
    s = _entries(scattering)
    if len(in_state) != s.shape[0] or len(out_state) != s.shape[0]:
        raise InvalidArgumentError("Ocupações com número de modos incompatível com S")
    if sum(in_state) != sum(out_state):
        raise InvalidArgumentError(
            f"Número de fótons difere entre {tuple(in_state)} e {tuple(out_state)}"
        )

    rows = [mode for mode, count in enumerate(out_state) for _ in range(count)]
    cols = [mode for mode, count in enumerate(in_state) for _ in range(count)]
    norm = np.sqrt(prod(factorial(c) for c in in_state) * prod(factorial(c) for c in out_state))
    if not rows:
        return 1.0 + 0.0j
    return permanent(s[np.ix_(rows, cols)]) / norm
