"""
Decomposição retangular (malha de Clements) de uma matriz de espalhamento.

Elemento de dois modos em (k, k+1):

    T(theta, phi) = [[e^{i phi} cos(theta), -sin(theta)],
                     [e^{i phi} sin(theta),  cos(theta)]]
                  = Splitter(theta) . Phase(k, phi)

Diagonais pares anulam elementos multiplicando por T† à direita; ímpares
multiplicando por T à esquerda. O que sobra é diagonal (fases de saída).
Os elementos são guardados na ordem em que a luz os atravessa, logo
S = E_last ... E_2 E_1.
"""
import logging
import re
from dataclasses import dataclass, field
from typing import List, Tuple, Union

import numpy as np

from config.config import NUMERICAL_TOLERANCES
from src.errors import InvalidArgumentError, MatrixFormatError, NonUnitaryError
from src.fock.fock_space import ScatteringMatrix, unitarity_defect

logger = logging.getLogger(__name__)

SPLITTER = "splitter"
PHASE = "phase"
TRIVIAL_ANGLE = 1e-13


def splitter_matrix(dim: int, k: int, theta: float) -> np.ndarray:
    """Divisor real T(theta) nos modos (k, k+1)."""
    matrix = np.eye(dim, dtype=complex)
    c, s = np.cos(theta), np.sin(theta)
    matrix[k, k], matrix[k, k + 1] = c, -s
    matrix[k + 1, k], matrix[k + 1, k + 1] = s, c
    return matrix


def phase_matrix(dim: int, k: int, phi: float) -> np.ndarray:
    matrix = np.eye(dim, dtype=complex)
    matrix[k, k] = np.exp(1j * phi)
    return matrix


@dataclass(frozen=True)
class MeshElement:
    """Divisor em (k, k+1) com ângulo theta, ou defasador no modo k com fase phi."""
    kind: str
    modes: Tuple[int, int]
    theta: float = 0.0
    phi: float = 0.0

    def matrix(self, dim: int) -> np.ndarray:
        if self.kind == SPLITTER:
            return splitter_matrix(dim, self.modes[0], self.theta)
        return phase_matrix(dim, self.modes[0], self.phi)

    def describe(self, decimals: int = 6) -> str:
        theta, phi = float(np.degrees(self.theta)), float(np.degrees(self.phi))
        if decimals is None:
            return f"{self.kind}, ({self.modes[0]},{self.modes[1]}), {theta!r}, {phi!r}"
        return (f"{self.kind}, ({self.modes[0]},{self.modes[1]}), "
                f"{theta:.{decimals}f}, {phi:.{decimals}f}")


@dataclass
class MeshDecomposition:
    """Elementos na ordem de propagação e erro de recomposição."""
    modes: int
    elements: List[MeshElement] = field(default_factory=list)
    recomposition_error: float = 0.0

    @property
    def splitter_count(self) -> int:
        return sum(1 for e in self.elements if e.kind == SPLITTER)

    def recompose(self) -> np.ndarray:
        matrix = np.eye(self.modes, dtype=complex)
        for element in self.elements:
            matrix = element.matrix(self.modes) @ matrix
        return matrix


def _append_transfer(elements: List[MeshElement], k: int, theta: float, phi: float,
                     inverse: bool = False):
    """T = Splitter(theta) Phase(phi); T† = Phase(-phi) Splitter(-theta)."""
    steps = [(PHASE, phi), (SPLITTER, theta)]
    if inverse:
        steps = [(SPLITTER, -theta), (PHASE, -phi)]
    for kind, angle in steps:
        if abs(angle) <= TRIVIAL_ANGLE:
            continue
        if kind == SPLITTER:
            elements.append(MeshElement(SPLITTER, (k, k + 1), theta=angle))
        else:
            elements.append(MeshElement(PHASE, (k, k), phi=angle))


def _transfer(dim: int, k: int, theta: float, phi: float) -> np.ndarray:
    return splitter_matrix(dim, k, theta) @ phase_matrix(dim, k, phi)


def _relative_phase(a: complex, b: complex) -> float:
    if abs(a) == 0.0 or abs(b) == 0.0:
        return 0.0
    return float(np.angle(a) - np.angle(b))


def clements_decompose(S: Union[ScatteringMatrix, np.ndarray]) -> MeshDecomposition:
    """
    Decompõe S em divisores de modos vizinhos e defasadores.

    Args:
        S: Matriz unitária N x N (tolerância 1e-10)

    Returns:
        MeshDecomposition com no máximo N(N-1)/2 divisores
    """
    V = np.array(S.entries if isinstance(S, ScatteringMatrix) else S, dtype=complex)
    if V.ndim != 2 or V.shape[0] != V.shape[1]:
        raise InvalidArgumentError(f"Matriz deve ser quadrada, recebido {V.shape}")
    defect = unitarity_defect(V)
    if defect > NUMERICAL_TOLERANCES["decomposition_unitarity"]:
        raise NonUnitaryError("Matriz a decompor não é unitária", defect)

    target = V.copy()
    n = V.shape[0]
    right: List[Tuple[int, float, float]] = []
    left: List[Tuple[int, float, float]] = []

    for i in range(n - 1):
        if i % 2 == 0:
            for j in range(i + 1):
                row, k = n - 1 - j, i - j
                theta = float(np.arctan2(abs(V[row, k]), abs(V[row, k + 1])))
                phi = _relative_phase(V[row, k], V[row, k + 1])
                V = V @ _transfer(n, k, theta, phi).conj().T
                right.append((k, theta, phi))
        else:
            for j in range(1, i + 2):
                k, col = n + j - i - 3, j - 1
                theta = float(np.arctan2(abs(V[k + 1, col]), abs(V[k, col])))
                phi = _relative_phase(-V[k + 1, col], V[k, col])
                V = _transfer(n, k, theta, phi) @ V
                left.append((k, theta, phi))

    elements: List[MeshElement] = []
    for k, theta, phi in right:
        _append_transfer(elements, k, theta, phi)
    for mode in range(n):
        phase = float(np.angle(V[mode, mode]))
        if abs(phase) > TRIVIAL_ANGLE:
            elements.append(MeshElement(PHASE, (mode, mode), phi=phase))
    for k, theta, phi in reversed(left):
        _append_transfer(elements, k, theta, phi, inverse=True)

    decomposition = MeshDecomposition(n, elements)
    decomposition.recomposition_error = float(np.max(np.abs(decomposition.recompose() - target)))
    if decomposition.recomposition_error > NUMERICAL_TOLERANCES["decomposition_unitarity"]:
        logger.warning("Erro de recomposição %.3e", decomposition.recomposition_error)
    return decomposition


def format_mesh(decomposition: MeshDecomposition, decimals: int = 6) -> str:
    """Uma linha por elemento: "tipo, (k,l), theta (graus), phi (graus)"."""
    lines = [f"# modes {decomposition.modes}"]
    lines.extend(e.describe(decimals) for e in decomposition.elements)
    return "\n".join(lines) + "\n"


_LINE = re.compile(r"^\s*(splitter|phase)\s*,\s*\((\d+)\s*,\s*(\d+)\)\s*,\s*(\S+)\s*,\s*(\S+)\s*$")


def parse_mesh(text: str) -> MeshDecomposition:
    """Lê a lista exportada por format_mesh (ângulos em graus)."""
    modes = None
    elements = []
    for number, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        if line.startswith("#"):
            header = line[1:].split()
            if len(header) == 2 and header[0] == "modes":
                modes = int(header[1])
            continue
        match = _LINE.match(line)
        if match is None:
            raise MatrixFormatError(f"linha {number}: elemento inválido '{line}'")
        kind, a, b, theta, phi = match.groups()
        try:
            elements.append(MeshElement(kind, (int(a), int(b)),
                                        theta=float(np.radians(float(theta))),
                                        phi=float(np.radians(float(phi)))))
        except ValueError:
            raise MatrixFormatError(f"linha {number}: ângulo inválido '{line}'")
    if modes is None:
        raise MatrixFormatError("Cabeçalho '# modes N' ausente")
    return MeshDecomposition(modes, elements)
