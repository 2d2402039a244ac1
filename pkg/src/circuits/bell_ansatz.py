"""
==============================================================================
ANSATZ ANALÍTICO PARA O ESTADO DE BELL EM 6 MODOS
==============================================================================

Entrada |111100>, medição |11> nos modos 4 e 5, estado anunciado
(|0011> - |1100>)/sqrt(2) (a menos de fase global).

Matriz de espalhamento (linhas = modos de saída):

    [ 1/2  -1/2   1/2  -1/2    0    0 ]
    [ 1/2  -1/2  -1/2   1/2    0    0 ]
    [  a     a     b     b    -g    0 ]
    [  b     b    -a    -a     0   -g ]
    [  d     d    -s    -s     n    m ]
    [  s     s     d     d     m   -n ]

Representação angular:
    a + i b = e^{i phi} cos(theta)/sqrt(2),   d + i s = e^{i psi} sin(theta)/sqrt(2)
    g = sin(theta),   n + i m = e^{i (phi + psi)} cos(theta)
Vínculos que anulam as amplitudes com modos duplamente ocupados:
    cos^2(theta) = sin(2 phi) = x,   tg(2 psi) = 2 tg(2 phi)

Probabilidade de sucesso:  P(x) = 2 (1 - x)^2 x^2 / (1 + 3 x^2)
Máximo em 3x^3 + 2x - 1 = 0:
    x* = (1/3) [((sqrt(113) + 9)/2)^{1/3} - ((sqrt(113) - 9)/2)^{1/3}] ~ 0.40231994
    P(x*) ~ 0.07784190 > 2/27 = P(1/3)
==============================================================================
"""
import logging
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from src.errors import InvalidArgumentError
from src.fock.fock_space import ScatteringMatrix

logger = logging.getLogger(__name__)

BELL_MODES = 6
BELL_INPUT = (1, 1, 1, 1, 0, 0)
BELL_PATTERN = (1, 1)
BELL_TARGET = {(0, 0, 1, 1): 1.0 / np.sqrt(2.0), (1, 1, 0, 0): -1.0 / np.sqrt(2.0)}


@dataclass(frozen=True)
class BellAnsatz:
    """
    Parâmetros do ansatz derivados de phi no ramo phi em (0, pi/4).

    Atributos:
        phi: Ângulo livre (radianos)
    """
    phi: float

    def __post_init__(self):
        if not 0.0 < self.phi < np.pi / 4:
            raise InvalidArgumentError(
                f"phi = {self.phi} fora do ramo admissível (0, pi/4), sin(2 phi) deve estar em (0, 1)"
            )

    @classmethod
    def from_x(cls, x: float) -> "BellAnsatz":
        if not 0.0 < x < 1.0:
            raise InvalidArgumentError(f"x = {x} fora de (0, 1)")
        return cls(0.5 * float(np.arcsin(x)))

    @property
    def x(self) -> float:
        return float(np.sin(2.0 * self.phi))

    @property
    def theta(self) -> float:
        return float(np.arccos(np.sqrt(self.x)))

    @property
    def psi(self) -> float:
        return 0.5 * float(np.arctan(2.0 * np.tan(2.0 * self.phi)))

    @property
    def alpha(self) -> float:
        return float(np.cos(self.phi) * np.cos(self.theta) / np.sqrt(2.0))

    @property
    def beta(self) -> float:
        return float(np.sin(self.phi) * np.cos(self.theta) / np.sqrt(2.0))

    @property
    def delta(self) -> float:
        return float(np.cos(self.psi) * np.sin(self.theta) / np.sqrt(2.0))

    @property
    def sigma(self) -> float:
        return float(np.sin(self.psi) * np.sin(self.theta) / np.sqrt(2.0))

    @property
    def gamma(self) -> float:
        return float(np.sin(self.theta))

    @property
    def nu(self) -> float:
        return float(np.cos(self.theta) * np.cos(self.phi + self.psi))

    @property
    def mu(self) -> float:
        return float(np.cos(self.theta) * np.sin(self.phi + self.psi))

    def matrix(self) -> np.ndarray:
        a, b, d, s = self.alpha, self.beta, self.delta, self.sigma
        g, n, m = self.gamma, self.nu, self.mu
        return np.array([
            [0.5, -0.5, 0.5, -0.5, 0.0, 0.0],
            [0.5, -0.5, -0.5, 0.5, 0.0, 0.0],
            [a, a, b, b, -g, 0.0],
            [b, b, -a, -a, 0.0, -g],
            [d, d, -s, -s, n, m],
            [s, s, d, d, m, -n],
        ], dtype=float)

    def heralded_amplitudes(self) -> dict:
        """Amplitudes não normalizadas do estado anunciado: 2 d s em |1100>, -2 d s em |0011>."""
        weight = 2.0 * self.delta * self.sigma
        return {(1, 1, 0, 0): weight, (0, 0, 1, 1): -weight}


def ansatz_matrix(phi: float) -> ScatteringMatrix:
    """Matriz 6 x 6 do ansatz para phi em (0, pi/4); unitária a 1e-12."""
    return ScatteringMatrix(BellAnsatz(phi).matrix())


def success_curve(x):
    """P(x) = 2 (1 - x)^2 x^2 / (1 + 3 x^2), x em (0, 1); aceita arrays."""
    x = np.asarray(x, dtype=float)
    value = 2.0 * (1.0 - x) ** 2 * x ** 2 / (1.0 + 3.0 * x ** 2)
    return float(value) if value.ndim == 0 else value


def success_curve_exact(x: Fraction) -> Fraction:
    """P(x) em aritmética racional (P(1/3) = 2/27)."""
    x = Fraction(x)
    return 2 * (1 - x) ** 2 * x ** 2 / (1 + 3 * x ** 2)


def optimal_x() -> float:
    """Raiz real de 3x^3 + 2x - 1 = 0 (máximo de P(x)) pela fórmula de Cardano."""
    root = np.sqrt(113.0)
    x = (np.cbrt((root + 9.0) / 2.0) - np.cbrt((root - 9.0) / 2.0)) / 3.0

    step = 1e-6
    slope = (success_curve(x + step) - success_curve(x - step)) / (2.0 * step)
    if abs(slope) > 1e-9:
        logger.warning("dP/dx = %.3e no ótimo analítico", slope)
    return float(x)
