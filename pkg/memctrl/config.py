# File: memctrl/config.py
"""
Experiment configuration models.

Configs are JSON (or YAML) documents validated by pydantic before any
compute starts; unknown fields are rejected.
"""

from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple, Union
import json
import logging

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from . import settings
from .core.kernels import KernelFamily, MemoryKernel, Signal, TimeGrid
from .core.moment import ControlClass, TargetClass, TargetSpec
from .core.spectral import ModalBasis
from .core.synthesis import GeneratorShape, periodic_generator, sine_generator
from .exceptions import ConfigError

logger = logging.getLogger(__name__)


class ExperimentKind(str, Enum):
    """Experiments the CLI can run"""
    STEER = "steer"
    REGULARITY = "regularity"
    RIESZ = "riesz"
    ZETA_CONVERGENCE = "zeta-convergence"


# =============================================================================
# Models
# =============================================================================

class KernelConfig(BaseModel):
    """Memory kernel family and parameters"""
    model_config = ConfigDict(extra='forbid')

    family: KernelFamily = KernelFamily.ZERO
    k0: float = Field(default=1.0, description="Amplitude for constant/exponential kernels")
    a: float = Field(default=1.0, description="Decay rate for exponential kernels")
    csv_path: Optional[Path] = Field(default=None, description="Two-column CSV (t, K) for tabulated kernels")

    @model_validator(mode='after')
    def _tabulated_needs_csv(self) -> 'KernelConfig':
        if self.family == KernelFamily.TABULATED and self.csv_path is None:
            raise ValueError("tabulated kernels need csv_path")
        return self

    def build(self, base_dir: Optional[Path] = None) -> MemoryKernel:
        if self.family == KernelFamily.ZERO:
            return MemoryKernel.zero()
        if self.family == KernelFamily.CONSTANT:
            return MemoryKernel.constant(self.k0)
        if self.family == KernelFamily.EXPONENTIAL:
            return MemoryKernel.exponential(self.k0, self.a)
        path = self.csv_path
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return MemoryKernel.from_csv(path)


class TargetConfig(BaseModel):
    """Target coefficient generator"""
    model_config = ConfigDict(extra='forbid')

    generator: Literal['inverse_power', 'zero', 'explicit', 'random'] = 'inverse_power'
    power: float = 2.0
    component: Literal['xi', 'eta'] = 'xi'
    decay: float = 1.5
    xi: Optional[List[float]] = None
    eta: Optional[List[float]] = None

    @model_validator(mode='after')
    def _explicit_needs_lists(self) -> 'TargetConfig':
        if self.generator == 'explicit' and (self.xi is None or self.eta is None):
            raise ValueError("explicit targets need both xi and eta")
        if self.xi is not None and self.eta is not None and len(self.xi) != len(self.eta):
            raise ValueError("xi and eta must have the same length")
        return self

    def build(self, target_class: TargetClass, basis: ModalBasis, seed: int) -> TargetSpec:
        """Real sequences, phase-aligned with the basis so the target state is real"""
        n_modes = len(basis)
        if self.generator == 'zero':
            return TargetSpec.zero(target_class, n_modes)
        if self.generator == 'random':
            target = TargetSpec.random(target_class, n_modes, seed, self.decay)
        elif self.generator == 'explicit':
            if len(self.xi) != n_modes:
                raise ConfigError("target does not match n_modes",
                                  [{'field': 'target.xi', 'message': f"expected {n_modes} entries, got {len(self.xi)}"}])
            target = TargetSpec(target_class, np.array(self.xi), np.array(self.eta))
        else:
            target = TargetSpec.inverse_power(target_class, n_modes, self.power, self.component)
        return target.aligned(basis)


class RegularityConfig(BaseModel):
    """H³ generator g1 for the regularity experiment"""
    model_config = ConfigDict(extra='forbid')

    g0: float = Field(default=1.0, description="Boundary constant at x = 0")
    generator: GeneratorShape = GeneratorShape.PERIODIC
    cosine_weight: float = Field(default=0.01, gt=0, description="periodic: weight of the cosine pair")
    frequency: float = Field(default=3.0, gt=0, description="sine: g1 = P3(sin(frequency π t / T))")

    def generator_signal(self, grid: TimeGrid) -> Signal:
        if self.generator == GeneratorShape.SINE:
            return sine_generator(grid, self.frequency)
        return periodic_generator(grid, self.cosine_weight)


class ZetaStudyConfig(BaseModel):
    """Modes and base grid for the Richardson study"""
    model_config = ConfigDict(extra='forbid')

    modes: List[int] = Field(default_factory=lambda: [1])
    levels: int = Field(default=3, ge=3, le=5)

    @field_validator('modes')
    @classmethod
    def _positive(cls, value: List[int]) -> List[int]:
        if not value or any(n < 1 for n in value):
            raise ValueError("modes must be a non-empty list of positive integers")
        return value


class RieszConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    n_range: Optional[Tuple[int, int]] = None
    tolerance: float = Field(default=settings.GRAM_DEFECT_TOL, gt=0)


class ExperimentConfig(BaseModel):
    """One archived experiment"""
    model_config = ConfigDict(extra='forbid')

    experiment: ExperimentKind
    b: float = 0.0
    kernel: KernelConfig = Field(default_factory=KernelConfig)
    T: float = Field(default=2.5, gt=0)
    n_modes: int = Field(default=12, ge=1)
    grid: Union[Literal['auto'], int] = 'auto'
    control_class: Literal['L2', 'H10', 'H20', 'H30'] = 'H10'
    target: TargetConfig = Field(default_factory=TargetConfig)
    ridge: float = Field(default=1e-12, ge=0)
    seed: int = 0
    output_dir: Path = Path('results')
    convention: Literal['derived', 'paper'] = 'derived'
    zeta_solver: Literal['timestep', 'picard'] = 'timestep'
    regularity: RegularityConfig = Field(default_factory=RegularityConfig)
    zeta_study: ZetaStudyConfig = Field(default_factory=ZetaStudyConfig)
    riesz: RieszConfig = Field(default_factory=RieszConfig)

    @field_validator('grid')
    @classmethod
    def _grid_size(cls, value: Union[str, int]) -> Union[str, int]:
        if isinstance(value, int) and value < settings.MIN_GRID_STEPS:
            raise ValueError(f"grid must be 'auto' or an integer >= {settings.MIN_GRID_STEPS}")
        return value

    @property
    def control(self) -> ControlClass:
        return ControlClass.from_string(self.control_class)

    def make_grid(self, basis: ModalBasis) -> TimeGrid:
        if self.grid == 'auto':
            return TimeGrid.auto(self.T, float(np.max(np.abs(basis.lambdas))))
        return TimeGrid(self.T, int(self.grid))


# =============================================================================
# Loading
# =============================================================================

def _validation_diagnostics(exc: ValidationError) -> List[Dict[str, Any]]:
    return [
        {'field': '.'.join(str(part) for part in error['loc']) or '<root>', 'message': error['msg']}
        for error in exc.errors()
    ]


def parse_config(data: Any, source: str = '<config>') -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"{source}: invalid experiment config", _validation_diagnostics(exc)) from exc


def load_config(path: Union[str, Path]) -> ExperimentConfig:
    """Read a JSON (or .yaml/.yml) config and validate it"""
    path = Path(path)
    try:
        text = path.read_text(encoding='utf-8')
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from exc

    if path.suffix.lower() in ('.yaml', '.yml'):
        try:
            data = yaml.safe_load(text)
        except yaml.YAMLError as exc:
            mark = getattr(exc, 'problem_mark', None)
            diagnostics = [{'line': mark.line + 1, 'column': mark.column + 1, 'message': str(exc.problem)}] if mark else []
            raise ConfigError(f"{path}: YAML parse error", diagnostics) from exc
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: JSON parse error",
                              [{'line': exc.lineno, 'column': exc.colno, 'message': exc.msg}]) from exc

    logger.debug(f"Loaded config {path}")
    return parse_config(data, str(path))
