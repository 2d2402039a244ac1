"""
Formato texto de matrizes compartilhado pelo repositório.

Primeira linha "rows cols"; depois uma linha por linha da matriz, entradas
"re,im" separadas por espaço, 17 dígitos significativos (ida e volta exata).
"""
from pathlib import Path
from typing import Union

import numpy as np

from src.errors import MatrixFormatError


def _format_entry(value: complex) -> str:
    return f"{value.real:.17g},{value.imag:.17g}"


def format_matrix(matrix: np.ndarray) -> str:
    m = np.asarray(matrix, dtype=complex)
    if m.ndim != 2:
        raise MatrixFormatError(f"Esperada matriz 2D, recebido ndim={m.ndim}")
    lines = [f"{m.shape[0]} {m.shape[1]}"]
    lines.extend(" ".join(_format_entry(v) for v in row) for row in m)
    return "\n".join(lines) + "\n"


def parse_matrix(text: str) -> np.ndarray:
    """
    Lê uma matriz no formato texto.

    Raises:
        MatrixFormatError: cabeçalho, contagem de entradas ou número inválido
    """
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        raise MatrixFormatError("Arquivo de matriz vazio")

    header = lines[0].split()
    try:
        rows, cols = int(header[0]), int(header[1])
    except (IndexError, ValueError):
        raise MatrixFormatError(f"linha 1: cabeçalho inválido '{lines[0]}'")
    if len(header) != 2 or rows < 0 or cols < 0:
        raise MatrixFormatError(f"linha 1: cabeçalho inválido '{lines[0]}'")
    if len(lines) - 1 != rows:
        raise MatrixFormatError(f"Esperadas {rows} linhas de dados, encontradas {len(lines) - 1}")

    matrix = np.zeros((rows, cols), dtype=complex)
    for r, line in enumerate(lines[1:]):
        tokens = line.split()
        if len(tokens) != cols:
            raise MatrixFormatError(f"linha {r + 2}: esperadas {cols} entradas, encontradas {len(tokens)}")
        for c, token in enumerate(tokens):
            try:
                re_part, im_part = token.split(",")
                matrix[r, c] = complex(float(re_part), float(im_part))
            except ValueError:
                raise MatrixFormatError(f"linha {r + 2}: entrada inválida '{token}'")
    return matrix


def write_matrix(path: Union[str, Path], matrix: np.ndarray) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(format_matrix(matrix))
    return path


def read_matrix(path: Union[str, Path]) -> np.ndarray:
    path = Path(path)
    if not path.exists():
        raise MatrixFormatError(f"Arquivo de matriz não encontrado: {path}")
    return parse_matrix(path.read_text())
