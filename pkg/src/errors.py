"""
Exceções do otimizador de circuitos ópticos.

Estagnação numérica nunca gera exceção: é reportada pelo status do RunResult.
"""
from typing import Optional


class HeraldError(Exception):
    """Base de todos os erros do pacote."""


class InvalidArgumentError(HeraldError, ValueError):
    """Argumento fora do domínio da operação."""


class PermanentSizeError(InvalidArgumentError):
    """Matriz grande demais para o permanente exato do oráculo."""


class NonUnitaryError(InvalidArgumentError):
    """Matriz que deveria ser unitária não é."""

    def __init__(self, message: str, defect: float):
        super().__init__(f"{message} (defeito de unitariedade = {defect:.3e})")
        self.defect = defect


class InfeasibleInputError(HeraldError):
    """U não é realizável por óptica linear dentro da tolerância."""


class ExtractionFailedError(HeraldError):
    """A fatoração de posto 1 da matriz G não reproduziu U."""


class MatrixFormatError(HeraldError, ValueError):
    """Arquivo de matriz em formato inválido."""


class ConfigError(HeraldError):
    """Arquivo de problema inválido (mapeado para exit code 2)."""

    def __init__(self, message: str, path: Optional[str] = None,
                 field: Optional[str] = None, line: Optional[int] = None):
        location = []
        if path:
            location.append(str(path))
        if line is not None:
            location.append(f"linha {line}")
        if field:
            location.append(f"campo '{field}'")
        prefix = ", ".join(location) + ": " if location else ""
        super().__init__(prefix + message)
        self.path = path
        self.field = field
        self.line = line
