"""
Value types shared by every module.

All types are pydantic models so they validate on construction and dump to
JSON with ``model_dump(mode="json")``.  Points and states are frozen: the
atlas and the integrator treat them as values.
"""
import cmath
import math
from enum import Enum
from typing import Annotated, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


def _finite(value: complex) -> bool:
    return math.isfinite(value.real) and math.isfinite(value.imag)


class ChartId(str, Enum):
    B = "B"
    C02 = "C02"
    C03 = "C03"
    C11 = "C11"
    C12 = "C12"
    C21 = "C21"
    C22 = "C22"
    C31 = "C31"
    C32 = "C32"
    C41 = "C41"
    C42 = "C42"
    C51 = "C51"
    C52 = "C52"
    C61 = "C61"
    C62 = "C62"
    C71 = "C71"
    C72 = "C72"
    C81 = "C81"
    C82 = "C82"
    C91 = "C91"
    C92 = "C92"


# --- Atlas -----------------------------------------------------------------

class ChartPoint(BaseModel):
    model_config = ConfigDict(frozen=True)

    chart: ChartId
    c1: complex
    c2: complex

    @field_validator("c1", "c2")
    @classmethod
    def _check_finite(cls, value: complex) -> complex:
        if not _finite(value):
            raise ValueError(f"chart coordinate must be finite, got {value}")
        return value


class Tangent(BaseModel):
    model_config = ConfigDict(frozen=True)

    d1: complex
    d2: complex

    @field_validator("d1", "d2")
    @classmethod
    def _check_finite(cls, value: complex) -> complex:
        if not _finite(value):
            raise ValueError(f"tangent component must be finite, got {value}")
        return value


class EnergyValue(BaseModel):
    model_config = ConfigDict(frozen=True)

    E: complex
    q: complex

    @model_validator(mode="after")
    def _q_is_twice_e(self):
        if self.q != 2 * self.E:
            raise ValueError(f"q must equal 2E (E={self.E}, q={self.q})")
        return self

    @classmethod
    def from_energy(cls, E: complex) -> "EnergyValue":
        return cls(E=E, q=2 * E)


# --- Integrator ------------------------------------------------------------

class AtlasState(BaseModel):
    model_config = ConfigDict(frozen=True)

    z: complex
    point: ChartPoint

    @field_validator("z")
    @classmethod
    def _z_nonzero(cls, value: complex) -> complex:
        if value == 0 or not _finite(value):
            raise ValueError("Boutroux time z must be finite and nonzero")
        return value

    @property
    def chart(self) -> ChartId:
        return self.point.chart


class LineSegment(BaseModel):
    model_config = ConfigDict(frozen=True)

    kind: Literal["line"] = "line"
    z_start: complex
    z_end: complex

    @property
    def start(self) -> complex:
        return self.z_start

    @property
    def end(self) -> complex:
        return self.z_end

    @property
    def length(self) -> float:
        return abs(self.z_end - self.z_start)

    def position(self, s: float) -> complex:
        if self.length == 0:
            return self.z_start
        return self.z_start + s * self.direction(s)

    def direction(self, s: float) -> complex:
        if self.length == 0:
            return 1.0 + 0j
        return (self.z_end - self.z_start) / self.length

    def distance_to_origin(self) -> float:
        d = self.z_end - self.z_start
        if d == 0:
            return abs(self.z_start)
        # Projection of 0 onto the segment, clamped.
        lam = -(self.z_start.conjugate() * d).real / abs(d) ** 2
        lam = min(1.0, max(0.0, lam))
        return abs(self.z_start + lam * d)


class ArcSegment(BaseModel):
    """Circular arc z = center + radius·exp(iθ), θ from arg_start to arg_end."""
    model_config = ConfigDict(frozen=True)

    kind: Literal["arc"] = "arc"
    center: complex = 0j
    radius: float = Field(gt=0)
    arg_start: float
    arg_end: float

    @property
    def start(self) -> complex:
        return self.center + self.radius * cmath.exp(1j * self.arg_start)

    @property
    def end(self) -> complex:
        return self.center + self.radius * cmath.exp(1j * self.arg_end)

    @property
    def length(self) -> float:
        return self.radius * abs(self.arg_end - self.arg_start)

    def _theta(self, s: float) -> float:
        sign = 1.0 if self.arg_end >= self.arg_start else -1.0
        return self.arg_start + sign * s / self.radius

    def position(self, s: float) -> complex:
        return self.center + self.radius * cmath.exp(1j * self._theta(s))

    def direction(self, s: float) -> complex:
        sign = 1.0 if self.arg_end >= self.arg_start else -1.0
        return sign * 1j * cmath.exp(1j * self._theta(s))

    def distance_to_origin(self) -> float:
        # Conservative: distance from 0 to the full circle.
        return abs(abs(self.center) - self.radius)


Segment = Annotated[Union[LineSegment, ArcSegment], Field(discriminator="kind")]


class PathSpec(BaseModel):
    model_config = ConfigDict(frozen=True)

    segments: List[Segment]

    @model_validator(mode="after")
    def _check_path(self):
        for prev, nxt in zip(self.segments, self.segments[1:]):
            scale = max(1.0, abs(prev.end))
            if abs(prev.end - nxt.start) > 1e-10 * scale:
                raise ValueError(f"path is not contiguous: {prev.end} != {nxt.start}")
        for seg in self.segments:
            if seg.distance_to_origin() <= 1e-12:
                raise ValueError("path passes through z = 0")
        return self

    @property
    def start(self) -> complex:
        return self.segments[0].start

    @property
    def end(self) -> complex:
        return self.segments[-1].end

    @property
    def length(self) -> float:
        return sum(seg.length for seg in self.segments)

    @classmethod
    def straight(cls, z_start: complex, z_end: complex) -> "PathSpec":
        return cls(segments=[LineSegment(z_start=z_start, z_end=z_end)])

    @classmethod
    def polyline(cls, points: List[complex]) -> "PathSpec":
        if len(points) < 2:
            points = [points[0], points[0]]
        return cls(segments=[LineSegment(z_start=a, z_end=b) for a, b in zip(points, points[1:])])

    @classmethod
    def arc(cls, radius: float, arg_start: float, arg_end: float, center: complex = 0j) -> "PathSpec":
        return cls(segments=[ArcSegment(center=center, radius=radius,
                                        arg_start=arg_start, arg_end=arg_end)])


class StepControl(BaseModel):
    model_config = ConfigDict(frozen=True)

    rel_tol: float = Field(default=1e-10, gt=0)
    abs_tol: float = Field(default=1e-12, gt=0)
    h_init: float = Field(default=1e-2, gt=0)
    h_min: float = Field(default=1e-13, gt=0)
    h_max: float = Field(default=0.5, gt=0)
    max_steps: int = Field(default=200_000, gt=0)
    safety: float = Field(default=0.9, gt=0, le=1)
    pole_trigger: float = Field(default=0.1, gt=0)
    d_min: float = Field(default=1e-8, gt=0)
    hysteresis: float = Field(default=0.5, gt=0, le=1)
    newton_tol: float = Field(default=1e-12, gt=0)
    newton_max_iter: int = Field(default=30, gt=0)

    @model_validator(mode="after")
    def _check_steps(self):
        if not self.h_min < self.h_init:
            raise ValueError("h_min must be smaller than h_init")
        return self

    def with_tolerance(self, rel_tol: float) -> "StepControl":
        return self.model_copy(update={"rel_tol": rel_tol, "abs_tol": rel_tol / 100})


class ChartSwitch(BaseModel):
    model_config = ConfigDict(frozen=True)

    step_index: int
    from_chart: ChartId
    to_chart: ChartId


# --- Poles -----------------------------------------------------------------

class PoleEvent(BaseModel):
    model_config = ConfigDict(frozen=True)

    zeta: complex
    a: complex
    step_index: Optional[int] = None
    source: str = ""
    residual: float = 0.0
    newton_iterations: int = 0
    hits: int = 1


class Region(BaseModel):
    """Axis-parallel rectangle of the z-plane."""
    model_config = ConfigDict(frozen=True)

    lower_left: complex
    upper_right: complex

    @model_validator(mode="after")
    def _check_corners(self):
        if self.upper_right.real < self.lower_left.real or self.upper_right.imag < self.lower_left.imag:
            raise ValueError("upper_right must lie above and right of lower_left")
        if self.contains(0j):
            raise ValueError("region must exclude z = 0")
        return self

    @property
    def width(self) -> float:
        return self.upper_right.real - self.lower_left.real

    @property
    def height(self) -> float:
        return self.upper_right.imag - self.lower_left.imag

    @property
    def center(self) -> complex:
        return (self.lower_left + self.upper_right) / 2

    @property
    def is_empty(self) -> bool:
        return self.width == 0 or self.height == 0

    def contains(self, z: complex, pad: float = 0.0) -> bool:
        return (self.lower_left.real - pad <= z.real <= self.upper_right.real + pad
                and self.lower_left.imag - pad <= z.imag <= self.upper_right.imag + pad)


class PoleFieldResult(BaseModel):
    events: List[PoleEvent] = Field(default_factory=list)
    warnings: List[str] = Field(default_factory=list)
    n_paths: int = 0


class LaurentCoeffs(BaseModel):
    """Coefficients of (z−ζ)^n for n = −2 … 4."""
    model_config = ConfigDict(frozen=True)

    zeta: complex
    a: complex
    coefficients: List[complex]

    @field_validator("coefficients")
    @classmethod
    def _seven_terms(cls, value: List[complex]) -> List[complex]:
        if len(value) != 7:
            raise ValueError("Laurent data holds exactly the orders -2..4")
        if value[0] != 1:
            raise ValueError("leading Laurent coefficient must be exactly 1")
        return value

    def coefficient(self, n: int) -> complex:
        if not -2 <= n <= 4:
            raise IndexError(n)
        return self.coefficients[n + 2]


class Trajectory(BaseModel):
    states: List[AtlasState] = Field(default_factory=list)
    s: List[float] = Field(default_factory=list)
    energies: List[Optional[EnergyValue]] = Field(default_factory=list)
    events: List[PoleEvent] = Field(default_factory=list)
    chart_switches: List[ChartSwitch] = Field(default_factory=list)
    n_rejected: int = 0

    @property
    def final(self) -> AtlasState:
        return self.states[-1]


# --- Asymptotics -----------------------------------------------------------

class ScaledState(BaseModel):
    """(t, π1, π2); ``sheet`` counts the 2π turns of arg t beyond the principal one."""
    model_config = ConfigDict(frozen=True)

    t: complex
    pi1: complex
    pi2: complex
    sheet: int = 0

    @field_validator("t", "pi1", "pi2")
    @classmethod
    def _check_finite(cls, value: complex) -> complex:
        if not _finite(value):
            raise ValueError("scaled state must be finite")
        return value


class Equilibrium(BaseModel):
    model_config = ConfigDict(frozen=True)

    epsilon: Literal[1, -1]
    u1: complex
    eigenvalues: Tuple[complex, complex]
    alpha: complex = -0.5
    mu1_plus: complex = -0.5
    c1_vec: Tuple[float, float] = (0.2, -0.2)

    @model_validator(mode="after")
    def _check_spectrum(self):
        lam_p, lam_m = self.eigenvalues
        if abs(lam_m + lam_p) > 1e-12 or abs(abs(lam_p) - 24 ** 0.25) > 1e-12:
            raise ValueError("eigenvalues must be ±24^(1/4)·phase")
        return self


class PoleSequenceParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    C: complex
    n_min: int = Field(default=1, ge=1)
    n_max: int = Field(default=30, ge=1)
    c_series: Tuple[float, float] = (12.0, 10.9)
    include_order: int = Field(default=2, ge=0, le=2)
    mode: Literal["fast", "newton", "transitional"] = "newton"
    log_c: Optional[complex] = None

    @model_validator(mode="after")
    def _check_range(self):
        if self.n_max < self.n_min:
            raise ValueError("n_max must be >= n_min")
        return self


class PolePrediction(BaseModel):
    model_config = ConfigDict(frozen=True)

    n: int
    T_fast: complex
    T_newton: complex
    T_transitional: complex
    T_numeric: Optional[complex] = None
    X: complex
    residual: float


# --- Elliptic --------------------------------------------------------------

class PeriodBasis(BaseModel):
    model_config = ConfigDict(frozen=True)

    q: complex
    p1: complex
    p2: complex
    labeling: str = "asymptotic"

    @model_validator(mode="after")
    def _genuine_lattice(self):
        if self.p1 == 0 or abs((self.p2 / self.p1).imag) < 1e-14:
            raise ValueError("p1, p2 do not generate a lattice")
        return self


class WeierstrassParams(BaseModel):
    model_config = ConfigDict(frozen=True)

    g2: complex = -2
    g3: complex

    @classmethod
    def from_level(cls, q: complex) -> "WeierstrassParams":
        return cls(g2=-2, g3=-q)
