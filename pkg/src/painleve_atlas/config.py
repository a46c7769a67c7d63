"""
Run configuration.

Precedence is built-in defaults < config file < command-line flags.  Every
section forbids unknown keys, so a typo in a config file fails loudly with
ConfigError instead of being ignored.
"""
import cmath
import logging
import math
from pathlib import Path
from typing import Dict, List, Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .atlas import pole_line_section
from .errors import ConfigError
from .models import AtlasState, ChartId, ChartPoint, PathSpec, Region, StepControl

logger = logging.getLogger(__name__)


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ToleranceConfig(StepControl):
    model_config = ConfigDict(frozen=True, extra="forbid")

    def control(self) -> StepControl:
        return StepControl(**self.model_dump())


class IntegrateConfig(_Section):
    chart: ChartId = ChartId.B
    c1: complex = 0j
    c2: complex = 0j
    z0: complex = 6 + 0j
    path: Literal["straight", "polyline", "arc"] = "straight"
    # Vertices after z0 for straight/polyline paths.
    points: List[complex] = Field(default_factory=lambda: [60 + 0j])
    # Arc around 0 through z0, sweeping this many radians.
    sweep: float = 0.0
    autonomous: bool = False
    detours: bool = False
    monodromy_check: bool = False
    repellor_near: Optional[float] = Field(default=None, gt=0)

    @model_validator(mode="after")
    def _check_path(self):
        if self.z0 == 0:
            raise ValueError("z0 must be nonzero")
        if self.path == "arc" and self.sweep == 0:
            raise ValueError("arc paths need a nonzero sweep")
        if self.path in ("straight", "polyline") and not self.points:
            raise ValueError("straight and polyline paths need at least one end point")
        if self.path == "straight" and len(self.points) != 1:
            raise ValueError("a straight path has exactly one end point")
        return self

    def initial_state(self) -> AtlasState:
        return AtlasState(z=self.z0, point=ChartPoint(chart=self.chart, c1=self.c1, c2=self.c2))

    def path_spec(self) -> PathSpec:
        if self.path == "arc":
            theta0 = cmath.phase(self.z0)
            return PathSpec.arc(abs(self.z0), theta0, theta0 + self.sweep)
        return PathSpec.polyline([self.z0, *self.points])


class PoleFieldConfig(_Section):
    seed_chart: ChartId = ChartId.B
    seed_c1: complex = 0j
    seed_c2: complex = 0j
    seed_z: complex = 6 + 0j
    # When set, seed from the autonomous pole-line section at this level instead.
    level: Optional[complex] = None
    lower_left: complex = 2 - 4j
    upper_right: complex = 10 + 4j
    strategy: Literal["rays", "boustrophedon"] = "rays"
    n_rays: int = Field(default=32, ge=1)
    rows: int = Field(default=8, ge=1)
    autonomous: bool = False
    dedup_radius: float = Field(default=1e-6, gt=0)
    histogram_bins: int = Field(default=10, ge=1)

    @model_validator(mode="after")
    def _level_needs_autonomous(self):
        if self.level is not None and not self.autonomous:
            raise ValueError("a pole-line level seed only makes sense with autonomous: true")
        return self

    def region(self) -> Region:
        return Region(lower_left=self.lower_left, upper_right=self.upper_right)

    def seed(self) -> AtlasState:
        if self.level is not None:
            return AtlasState(z=self.seed_z, point=pole_line_section(self.level))
        return AtlasState(z=self.seed_z, point=ChartPoint(chart=self.seed_chart,
                                                          c1=self.seed_c1, c2=self.seed_c2))


class TritronqueeConfig(_Section):
    n_min: int = Field(default=1, ge=1)
    n_max: int = Field(default=20, ge=1, le=30)
    # None: closed-form Stokes constant.
    C: Optional[complex] = None
    re_t: float = Field(default=3.0, gt=0)
    seed_height: float = Field(default=40.0, gt=10)
    trigger: float = Field(default=0.5, gt=0)
    stokes_check: bool = False
    stokes_cs: List[float] = Field(default_factory=lambda: [8.0, 10.0, 12.0])

    @model_validator(mode="after")
    def _check_range(self):
        if self.n_max < self.n_min:
            raise ValueError("n_max must be >= n_min")
        if self.C == 0:
            raise ValueError("C must be nonzero")
        return self


def _default_levels() -> List[complex]:
    return [1e3 * cmath.exp(2j * math.pi * k / 8) for k in range(8)]


class PeriodsConfig(_Section):
    levels: List[complex] = Field(default_factory=_default_levels)
    order: Literal[0, 1] = 1
    ode_check: bool = True
    flow_check: bool = False
    grid: bool = True
    grid_n: int = Field(default=41, ge=2)
    grid_upper_right: complex = 2 + 2j


class LaurentConfig(_Section):
    zeta: complex = 10 + 0j
    a: complex = 0j
    radii: List[float] = Field(default_factory=lambda: [0.1, 0.15, 0.2, 0.25, 0.3])
    order: int = Field(default=4, ge=0)
    series_order: int = Field(default=10, ge=5)
    energy_radii: List[float] = Field(default_factory=lambda: [1e-3, 1e-2])

    @model_validator(mode="after")
    def _check_zeta(self):
        if self.zeta == 0:
            raise ValueError("zeta must be nonzero")
        return self


class VerifyConfig(_Section):
    samples: int = Field(default=100, ge=1)
    thresholds: Dict[str, float] = Field(default_factory=dict)


class RunConfig(_Section):
    seed: int = 0
    threads: int = Field(default=1, ge=1)
    out: str = "out"
    tolerances: ToleranceConfig = Field(default_factory=ToleranceConfig)
    integrate: IntegrateConfig = Field(default_factory=IntegrateConfig)
    pole_field: PoleFieldConfig = Field(default_factory=PoleFieldConfig)
    tritronquee: TritronqueeConfig = Field(default_factory=TritronqueeConfig)
    periods: PeriodsConfig = Field(default_factory=PeriodsConfig)
    laurent: LaurentConfig = Field(default_factory=LaurentConfig)
    verify: VerifyConfig = Field(default_factory=VerifyConfig)

    def control(self) -> StepControl:
        return self.tolerances.control()


def load_config(path: Optional[Union[str, Path]] = None) -> RunConfig:
    """Read a YAML (or JSON) config; no path means the built-in defaults."""
    if path is None:
        return RunConfig()
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, "r") as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: not valid YAML/JSON: {exc}") from exc
    if data is None:
        data = {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    try:
        config = RunConfig(**data)
    except ValidationError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    logger.info(f"loaded config {path}")
    return config


def apply_overrides(config: RunConfig, seed: Optional[int] = None, tol: Optional[float] = None,
                    threads: Optional[int] = None, out: Optional[str] = None) -> RunConfig:
    """Command-line flags win over the file."""
    data = config.model_dump()
    if seed is not None:
        data["seed"] = seed
    if threads is not None:
        data["threads"] = threads
    if out is not None:
        data["out"] = out
    if tol is not None:
        data["tolerances"]["rel_tol"] = tol
        data["tolerances"]["abs_tol"] = tol / 100
    try:
        return RunConfig(**data)
    except ValidationError as exc:
        raise ConfigError(f"invalid command-line override: {exc}") from exc
