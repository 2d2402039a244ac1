"""
Permanente de matrizes complexas (fórmula de Ryser com ordem de Gray).

Usado como oráculo de amplitudes multifotônicas e no gradiente do baseline
max P*F^p. Custo O(2^k * k); limitado a k <= 16.
"""
import numpy as np

from src.errors import InvalidArgumentError, PermanentSizeError

MAX_PERMANENT_SIZE = 16


def permanent(matrix: np.ndarray) -> complex:
    """
    Calcula o permanente exato de uma matriz quadrada.

    Ryser: perm(A) = (-1)^k * sum_{S != 0} (-1)^{|S|} prod_j sum_{i in S} a_ij,
    percorrendo os subconjuntos S de linhas em ordem de Gray (uma linha entra
    ou sai por passo).

    Args:
        matrix: Matriz k x k

    Returns:
        Permanente (complexo)
    """
    a = np.asarray(matrix, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidArgumentError(f"Permanente exige matriz quadrada, recebido {a.shape}")

    k = a.shape[0]
    if k == 0:
        return 1.0 + 0.0j
    if k > MAX_PERMANENT_SIZE:
        raise PermanentSizeError(
            f"Permanente de ordem {k} excede o limite do oráculo ({MAX_PERMANENT_SIZE})"
        )
    if k == 1:
        return complex(a[0, 0])

    row_comb = np.zeros(k, dtype=complex)
    total = 0.0 + 0.0j
    sign = 1.0
    old_gray = 0
    for idx in range(1, 2 ** k):
        gray = idx ^ (idx >> 1)
        diff = gray ^ old_gray
        row = diff.bit_length() - 1
        if gray & diff:
            row_comb += a[row]
        else:
            row_comb -= a[row]
        # |S| muda de paridade a cada passo
        sign = -sign
        total += sign * np.prod(row_comb)
        old_gray = gray

    return complex((-1) ** k * total)


def permanent_minors(matrix: np.ndarray) -> np.ndarray:
    """
    Matriz das derivadas d perm(A) / d a_rc = perm(menor sem linha r e coluna c).

    Args:
        matrix: Matriz k x k

    Returns:
        Matriz k x k com o permanente de cada menor
    """
    a = np.asarray(matrix, dtype=complex)
    k = a.shape[0]
    minors = np.zeros((k, k), dtype=complex)
    if k == 1:
        minors[0, 0] = 1.0
        return minors

    for r in range(k):
        rows = [i for i in range(k) if i != r]
        for c in range(k):
            cols = [j for j in range(k) if j != c]
            minors[r, c] = permanent(a[np.ix_(rows, cols)])
    return minors
