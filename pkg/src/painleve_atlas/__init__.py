"""
Pole-crossing integration of the Boutroux-scaled first Painleve equation on a
regularized atlas of 21 charts, with the asymptotic and elliptic machinery
that describes its solutions near infinity.
"""
from .atlas import (
    chart_manifest,
    chart_to_base,
    chart_to_chart,
    distance_to_infinity,
    energy,
    vector_field,
)
from .config import RunConfig, load_config
from .errors import PainleveAtlasError
from .integrator import detect_pole, integrate_path, step, switch_chart
from .models import AtlasState, ChartId, ChartPoint, PathSpec, StepControl

__all__ = [
    "AtlasState",
    "ChartId",
    "ChartPoint",
    "PainleveAtlasError",
    "PathSpec",
    "RunConfig",
    "StepControl",
    "chart_manifest",
    "chart_to_base",
    "chart_to_chart",
    "detect_pole",
    "distance_to_infinity",
    "energy",
    "integrate_path",
    "load_config",
    "step",
    "switch_chart",
    "vector_field",
]
