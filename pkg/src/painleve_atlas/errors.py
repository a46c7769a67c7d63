"""
Error hierarchy for painleve_atlas.

Every error is a ValueError so callers that only guard against bad input
keep working; the families let the CLI map failures onto exit codes.
"""


class PainleveAtlasError(ValueError):
    """Root of every error raised by the package."""


# --- Atlas -----------------------------------------------------------------

class ChartError(PainleveAtlasError):
    pass


class InvalidChart(ChartError):
    pass


class DenominatorVanishes(ChartError):
    """The point sits over L0 or on the pole line: base coordinates are infinite."""


class OutsideChartDomain(ChartError):
    pass


class FieldInfinite(ChartError):
    """The vector field has a vanishing denominator at the point (infinity set I)."""


class EnergyInfinite(ChartError):
    pass


class NotNearInfinitySet(ChartError):
    pass


class NoValidChart(ChartError):
    pass


# --- Integration -----------------------------------------------------------

class IntegrationError(PainleveAtlasError):
    # Trajectory up to the failing step, attached by integrate_path.
    partial = None


class ApproachedInfinitySet(IntegrationError):
    pass


class StepLimitExceeded(IntegrationError):
    pass


class StepUnderflow(IntegrationError):
    pass


class NewtonDiverged(IntegrationError):
    pass


# --- Expansions ------------------------------------------------------------

class ExpansionError(PainleveAtlasError):
    pass


class ZetaZero(ExpansionError):
    pass


class AtPole(ExpansionError):
    pass


class BranchCut(ExpansionError):
    pass


class OrderUnavailable(ExpansionError):
    pass


class AtSingularXi(ExpansionError):
    pass


class SeedInvalid(ExpansionError):
    pass


class CZero(ExpansionError):
    pass


# --- Lattices --------------------------------------------------------------

class LatticeError(PainleveAtlasError):
    pass


class QTooSmall(LatticeError):
    pass


class SingularLevel(LatticeError):
    pass


class QuadratureFailed(LatticeError):
    pass


class AtLatticePoint(LatticeError):
    pass


# --- Config ----------------------------------------------------------------

class ConfigError(PainleveAtlasError):
    pass
