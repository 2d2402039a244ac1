"""
Arquivos de problema (.cfg) no formato INI.

    [problem]
    modes = 6
    photons = 4
    input = 111100
    pattern = 11

    [target]
    0011 = 0.70710678118654757,0
    1100 = -0.70710678118654757,0

    [solver]            ; opcional
    eps_R = 1e-12
    seed = 42

    [baseline]          ; opcional
    p = 2

Erros de sintaxe ou validação viram ConfigError com arquivo, linha e campo.
"""
import configparser
import logging
import re
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from pydantic import BaseModel, Field, ValidationError, field_validator

from src.errors import ConfigError, InvalidArgumentError
from src.herald.heralding import HeraldingProblem
from src.optimization.baseline import BaselineConfig
from src.optimization.sqp_solver import SolverConfig

logger = logging.getLogger(__name__)

_OCCUPATION = re.compile(r"^[0-9]*$")
_KEY_LINE = re.compile(r"^\s*([^=:#;\s][^=:]*?)\s*[=:]")
_SECTION_LINE = re.compile(r"^\s*\[([^\]]+)\]")


def parse_occupation(text: str) -> Tuple[int, ...]:
    """'111100' -> (1, 1, 1, 1, 0, 0); um dígito por modo."""
    return tuple(int(ch) for ch in text)


def parse_complex(text: str) -> complex:
    """'re,im' ou 're' -> complexo."""
    parts = [p.strip() for p in text.split(",")]
    if len(parts) == 1:
        return complex(float(parts[0]), 0.0)
    if len(parts) == 2:
        return complex(float(parts[0]), float(parts[1]))
    raise ValueError(f"amplitude inválida '{text}'")


class TargetAmplitude(BaseModel):
    occupation: str = Field(..., description="Ocupação dos modos livres, um dígito por modo")
    real: float = Field(..., description="Parte real da amplitude alvo")
    imag: float = Field(0.0, description="Parte imaginária da amplitude alvo")

    @field_validator("occupation")
    @classmethod
    def _digits(cls, value: str) -> str:
        if not value or not _OCCUPATION.match(value):
            raise ValueError(f"ocupação inválida '{value}'")
        return value

    @property
    def amplitude(self) -> complex:
        return complex(self.real, self.imag)


class SolverOverrides(BaseModel):
    eps_R: Optional[float] = Field(None, gt=0, description="Tolerância de realizabilidade")
    eps_T: Optional[float] = Field(None, gt=0, description="Tolerância do passo tangente")
    max_iters: Optional[int] = Field(None, ge=1, description="Iterações externas")
    seed: Optional[int] = Field(None, ge=0, description="Semente raiz")
    runs: Optional[int] = Field(None, ge=1, description="Execuções do multistart")
    workers: Optional[int] = Field(None, ge=1, description="Processos paralelos")


class BaselineOverrides(BaseModel):
    p: Optional[float] = Field(None, ge=1, description="Expoente de F em P F^p")
    max_iters: Optional[int] = Field(None, ge=1)
    runs: Optional[int] = Field(None, ge=1)


class ProblemConfig(BaseModel):
    """Problema de anúncio lido de um arquivo .cfg."""
    name: str = Field("problem", description="Nome (radical do arquivo)")
    modes: int = Field(..., ge=1, description="Número de modos N")
    photons: int = Field(..., ge=0, description="Número de fótons n")
    input: str = Field(..., description="Ocupação de entrada, ex. 111100")
    pattern: str = Field("", description="Ocupação medida nos últimos modos, ex. 11")
    target: List[TargetAmplitude] = Field(..., min_length=1, description="Estado alvo")
    solver: SolverOverrides = Field(default_factory=SolverOverrides)
    baseline: BaselineOverrides = Field(default_factory=BaselineOverrides)

    @field_validator("input", "pattern")
    @classmethod
    def _occupation(cls, value: str) -> str:
        if not _OCCUPATION.match(value):
            raise ValueError(f"ocupação inválida '{value}' (um dígito por modo)")
        return value

    @property
    def input_state(self) -> Tuple[int, ...]:
        return parse_occupation(self.input)

    @property
    def pattern_state(self) -> Tuple[int, ...]:
        return parse_occupation(self.pattern)

    def target_map(self) -> Dict[Tuple[int, ...], complex]:
        return {parse_occupation(t.occupation): t.amplitude for t in self.target}

    def build_problem(self) -> HeraldingProblem:
        return HeraldingProblem.build(self.modes, self.photons, self.input_state,
                                      self.pattern_state, self.target_map())

    def solver_config(self, **overrides) -> SolverConfig:
        values = {
            "eps_R": self.solver.eps_R,
            "eps_T": self.solver.eps_T,
            "max_outer_iters": self.solver.max_iters,
            "seed": self.solver.seed,
        }
        values.update(overrides)
        return SolverConfig(**{k: v for k, v in values.items() if v is not None})

    def baseline_config(self, **overrides) -> BaselineConfig:
        values = {"p": self.baseline.p, "max_iters": self.baseline.max_iters,
                  "seed": self.solver.seed}
        values.update(overrides)
        return BaselineConfig(**{k: v for k, v in values.items() if v is not None})


def _key_lines(text: str) -> Dict[Tuple[str, str], int]:
    """(seção, chave) -> número da linha, para diagnósticos."""
    lines = {}
    section = None
    for number, line in enumerate(text.splitlines(), start=1):
        header = _SECTION_LINE.match(line)
        if header:
            section = header.group(1).strip()
            lines[(section, "")] = number
            continue
        key = _KEY_LINE.match(line)
        if key and section is not None:
            lines[(section, key.group(1).strip())] = number
    return lines


def load_problem_config(path: Union[str, Path]) -> ProblemConfig:
    """
    Lê e valida um arquivo de problema.

    Raises:
        ConfigError: arquivo ausente, sintaxe INI, campo inválido ou
            contabilidade de fótons inconsistente
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError("arquivo não encontrado", path=str(path))
    text = path.read_text()

    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.optionxform = str
    try:
        parser.read_string(text, source=str(path))
    except configparser.MissingSectionHeaderError as exc:
        raise ConfigError("linha fora de seção", path=str(path), line=exc.lineno)
    except configparser.ParsingError as exc:
        line = exc.errors[0][0] if exc.errors else None
        raise ConfigError("sintaxe inválida", path=str(path), line=line)
    except configparser.Error as exc:
        raise ConfigError(str(exc).splitlines()[0], path=str(path), line=getattr(exc, "lineno", None))

    lines = _key_lines(text)

    def fail(message: str, section: str, key: str = "") -> ConfigError:
        return ConfigError(message, path=str(path), field=f"{section}.{key}" if key else section,
                           line=lines.get((section, key)))

    if not parser.has_section("problem"):
        raise fail("seção obrigatória ausente", "problem")
    if not parser.has_section("target"):
        raise fail("seção obrigatória ausente", "target")

    raw = {"name": path.stem, **dict(parser.items("problem"))}
    targets = []
    for occupation, value in parser.items("target"):
        try:
            amplitude = parse_complex(value)
            targets.append({"occupation": occupation, "real": amplitude.real, "imag": amplitude.imag})
        except ValueError:
            raise fail(f"amplitude inválida '{value}' (esperado re,im)", "target", occupation)
    raw["target"] = targets
    for section in ("solver", "baseline"):
        if parser.has_section(section):
            raw[section] = {k: v for k, v in parser.items(section) if v != ""}

    try:
        config = ProblemConfig(**raw)
    except ValidationError as exc:
        error = exc.errors()[0]
        loc = [str(part) for part in error["loc"]]
        if loc and loc[0] == "target" and len(loc) > 1 and loc[1].isdigit():
            section, key = "target", targets[int(loc[1])]["occupation"]
        elif loc and loc[0] in ("solver", "baseline"):
            section, key = loc[0], loc[1] if len(loc) > 1 else ""
        else:
            section, key = "problem", loc[0] if loc else ""
        raise fail(error["msg"], section, key)

    _check_bookkeeping(config, fail)
    return config


def _check_bookkeeping(config: ProblemConfig, fail) -> None:
    if len(config.input) != config.modes:
        raise fail(f"entrada '{config.input}' não tem {config.modes} modos", "problem", "input")
    if sum(config.input_state) != config.photons:
        raise fail(f"entrada '{config.input}' não tem {config.photons} fótons", "problem", "input")
    if len(config.pattern) >= config.modes:
        raise fail("padrão deve cobrir menos modos que o total", "problem", "pattern")
    if sum(config.pattern_state) > config.photons:
        raise fail(f"padrão '{config.pattern}' excede {config.photons} fótons", "problem", "pattern")

    free = config.modes - len(config.pattern)
    remaining = config.photons - sum(config.pattern_state)
    for target in config.target:
        state = parse_occupation(target.occupation)
        if len(state) != free or sum(state) != remaining:
            raise fail(f"estado alvo deve ter {free} modos e {remaining} fótons", "target", target.occupation)
    try:
        config.build_problem()
    except InvalidArgumentError as exc:
        raise fail(str(exc), "target")
