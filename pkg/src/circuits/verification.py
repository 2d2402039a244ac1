"""
Verificação do estado anunciado por uma matriz de espalhamento S.

Todas as amplitudes <(k, m)|U(S)|n> vêm do oráculo de permanentes; F e P são
comparados com o alvo do problema.
"""
import logging
from typing import NamedTuple, Union

import numpy as np
import pandas as pd

from src.fock.fock_space import ScatteringMatrix, amplitude_oracle
from src.herald.heralding import HeraldingProblem

logger = logging.getLogger(__name__)


class HeraldVerification(NamedTuple):
    fidelity: float
    probability: float
    table: pd.DataFrame
    max_double_occupancy: float


def occupation_label(occupation) -> str:
    return "".join(str(v) for v in occupation)


def verify_heralded_state(S: Union[ScatteringMatrix, np.ndarray],
                          prob: HeraldingProblem) -> HeraldVerification:
    """
    Calcula a tabela de amplitudes anunciadas, F e P.

    Returns:
        HeraldVerification; a tabela tem uma linha por estado k dos modos
        livres (state, amplitude_re, amplitude_im, probability, target_re,
        target_im) e max_double_occupancy é o maior |amplitude| entre estados
        com algum modo livre ocupado por 2 ou mais fótons
    """
    amplitudes = np.array([
        amplitude_oracle(S, prob.input_state, prob.space.basis[position])
        for position in prob.mu
    ], dtype=complex)

    probability = float(np.vdot(amplitudes, amplitudes).real)
    if probability < 1e-30:
        fidelity = 1.0
    else:
        fidelity = float(abs(np.vdot(prob.target, amplitudes)) ** 2 / probability)

    table = pd.DataFrame({
        "state": [occupation_label(k) for k in prob.output_states],
        "amplitude_re": amplitudes.real,
        "amplitude_im": amplitudes.imag,
        "probability": np.abs(amplitudes) ** 2,
        "target_re": prob.target.real,
        "target_im": prob.target.imag,
    })

    doubles = [abs(amp) for amp, k in zip(amplitudes, prob.output_states) if max(k, default=0) >= 2]
    max_double = float(max(doubles, default=0.0))
    logger.debug("Verificação: F = %.12f, P = %.10f", fidelity, probability)
    return HeraldVerification(fidelity, probability, table, max_double)
