"""
The 21-chart atlas of the space of initial values of the Boutroux-scaled
first Painleve system

    du1/dz = u2 - 2 u1/(5z),    du2/dz = 6 u1^2 + 1 - 3 u2/(5z).

Charts form a tree rooted at the affine chart B.  B -> C02 and B -> C03 are
the two affine charts at the line at infinity; every other edge is a point
blow-up centred at (x0, 0) of the parent's first coordinates:

    kind 1:  child = ((x - x0)/y, y)          parent = (x0 + c1 c2, c2)
    kind 2:  child = (x - x0, y/(x - x0))     parent = (x0 + c1, c1 c2)

Only the last centre depends on z (x0 = -256/(5z)), so every chart function
takes ``e = 1/(5z)``; ``e = 0`` is the z = infinity (autonomous) atlas.

From chart C41 on, base coordinates come from b = u1/u2 and D = u2^2/u1^3
via u1 = 1/(b^2 D), u2 = 1/(b^3 D).
"""
import logging
import math
from typing import Callable, Dict, List, Optional, Tuple

import networkx as nx

from .errors import (
    DenominatorVanishes,
    EnergyInfinite,
    FieldInfinite,
    InvalidChart,
    NotNearInfinitySet,
    OutsideChartDomain,
)
from .models import ChartId, ChartPoint, EnergyValue, Tangent

logger = logging.getLogger(__name__)

# Printed denominators below this magnitude are treated as vanishing.
GUARD = 1e-14

Pair = Tuple[complex, complex]


def eps_of(z: Optional[complex]) -> complex:
    """1/(5z); ``None`` stands for z = infinity."""
    if z is None:
        return 0j
    if z == 0:
        raise InvalidChart("z = 0 is not a Boutroux time")
    return 1.0 / (5.0 * z)


# --- Base chart B ------------------------------------------------------------

def _b_field(x, y, e):
    return y - 2 * e * x, 6 * x * x + 1 - 3 * e * y


def _b_energy(x, y, e):
    return y * y / 2 - 2 * x ** 3 - x


# --- Charts at the line at infinity and the first blow-ups ------------------

def _c02_field(x, y, e):
    return x * (-y + 2 * e), (6 + x * x - x * y * y - e * x * y) / x


def _c03_field(x, y, e):
    return -x * x - 6 * y * y + 3 * e * x, (x - x * x * y - 6 * y ** 3 + e * x * y) / x


def _c11_field(x, y, e):
    return x * (-1 + 2 * e * y) / y, (x - 6 * y * y - x * x * y * y + e * x * y) / x


def _c12_field(x, y, e):
    return x * (-x - 6 * x * y * y + 3 * e), (1 - 2 * e * x * y) / x


def _c21_field(x, y, e):
    return ((-2 * x + 6 * y + x * x * y ** 3 + e * x * y) / y,
            (x - 6 * y - x * x * y ** 3 + e * x * y) / x)


def _c22_field(x, y, e):
    return ((-1 + 2 * e * x * y) / y,
            (2 - 6 * x * y * y - x ** 3 * y * y - e * x * y) / x)


def _c31_field(x, y, e):
    return ((12 - 3 * x + 2 * x * x * y ** 4) / y,
            (-6 + x - x * x * y ** 4 + e * x * y) / x)


def _c32_field(x, y, e):
    return ((-2 + 6 * y + x ** 4 * y ** 3 + e * x * y) / y,
            (3 - 12 * y - 2 * x ** 4 * y ** 3) / x)


# --- Charts C41 .. C72: D = u2^2/u1^3 written in chart coordinates ----------

def _d41(x, y, e):
    return 4 + x * y


def _d42(x, y, e):
    return 4 + x


def _d51(x, y, e):
    return 4 + x * y * y


def _d52(x, y, e):
    return 4 + x * x * y


def _d61(x, y, e):
    return 4 + x * y ** 3


def _d62(x, y, e):
    return 4 + x ** 3 * y * y


def _d71(x, y, e):
    return 4 + x * y ** 4


def _d72(x, y, e):
    return 4 + x ** 4 * y ** 3


def _d81(x, y, e):
    return 4 + 32 * y ** 4 + x * y ** 5


def _d82(x, y, e):
    return 4 + (x * y) ** 4 * (32 + x)


def _r91(x, y, e):
    return 32 + x * y * y - 256 * e * y


def _d91(x, y, e):
    return 4 + y ** 4 * _r91(x, y, e)


def _r92(x, y, e):
    return 32 + x * x * y - 256 * e * x * y


def _d92(x, y, e):
    return 4 + (x * y) ** 4 * _r92(x, y, e)


def _c41_field(x, y, e):
    D = _d41(x, y, e)
    dx = (-10 * x - 4 * x * x * y + 128 * y ** 3 + 112 * x * y ** 4 + 32 * x * x * y ** 5
          + 3 * x ** 3 * y ** 6 - e * x * y * D) / (y * D)
    dy = (-2 + x * y - 16 * y ** 4 - 8 * x * y ** 5 - x * x * y ** 6 + e * y * D) / D
    return dx, dy


def _c42_field(x, y, e):
    D = _d42(x, y, e)
    x3y4 = x ** 3 * y ** 4
    dx = (-3 + 32 * x3y4 + 16 * x * x3y4 + 2 * x * x * x3y4) / y
    dy = (10 + 4 * x - 128 * x3y4 - 112 * x * x3y4 - 32 * x * x * x3y4 - 3 * x ** 3 * x3y4
          + e * x * y * D) / (x * D)
    return dx, dy


def _c51_field(x, y, e):
    D = _d51(x, y, e)
    dx = (-8 * x + 128 * y * y - 5 * x * x * y * y + 128 * x * y ** 4 + 40 * x * x * y ** 6
          + 4 * x ** 3 * y ** 8 - 2 * e * x * y * D) / (y * D)
    dy = (-2 + x * y * y - 16 * y ** 4 - 8 * x * y ** 6 - x * x * y ** 8 + e * y * D) / D
    return dx, dy


def _c52_field(x, y, e):
    D = _d52(x, y, e)
    dx = (-10 - 4 * x * x * y + 128 * x * x * y ** 3 + 112 * x ** 4 * y ** 4
          + 32 * x ** 6 * y ** 5 + 3 * x ** 8 * y ** 6 - e * x * y * D) / (y * D)
    dy = (8 + 5 * x * x * y - 128 * x * x * y ** 3 - 128 * x ** 4 * y ** 4 - 40 * x ** 6 * y ** 5
          - 4 * x ** 8 * y ** 6 + 2 * e * x * y * D) / (x * D)
    return dx, dy


def _c61_field(x, y, e):
    D = _d61(x, y, e)
    dx = (-6 * x + 128 * y - 6 * x * x * y ** 3 + 144 * x * y ** 4 + 48 * x * x * y ** 7
          + 5 * x ** 3 * y ** 10 - 3 * e * x * y * D) / (y * D)
    dy = (-2 + x * y ** 3 - 16 * y ** 4 - 8 * x * y ** 7 - x * x * y ** 10 + e * y * D) / D
    return dx, dy


def _c62_field(x, y, e):
    D = _d62(x, y, e)
    dx = (-8 + 128 * x * y * y - 5 * x ** 3 * y * y + 128 * x ** 4 * y ** 4
          + 40 * x ** 7 * y ** 6 + 4 * x ** 10 * y ** 8 - 2 * e * x * y * D) / (y * D)
    dy = (6 - 128 * x * y * y + 6 * x ** 3 * y * y - 144 * x ** 4 * y ** 4 - 48 * x ** 7 * y ** 6
          - 5 * x ** 10 * y ** 8 + 3 * e * x * y * D) / (x * D)
    return dx, dy


def _c71_field(x, y, e):
    D = _d71(x, y, e)
    dx = (128 - 4 * x + 160 * x * y ** 4 - 7 * x * x * y ** 4 + 56 * x * x * y ** 8
          + 6 * x ** 3 * y ** 12 - 4 * e * x * y * D) / (y * D)
    dy = (-2 - 16 * y ** 4 + x * y ** 4 - 8 * x * y ** 8 - x * x * y ** 12 + e * y * D) / D
    return dx, dy


def _c72_field(x, y, e):
    D = _d72(x, y, e)
    dx = (-6 + 128 * y - 6 * x ** 4 * y ** 3 + 144 * x ** 4 * y ** 4 + 48 * x ** 8 * y ** 7
          + 5 * x ** 12 * y ** 10 - 3 * e * x * y * D) / (y * D)
    dy = (4 - 128 * y + 7 * x ** 4 * y ** 3 - 160 * x ** 4 * y ** 4 - 56 * x ** 8 * y ** 7
          - 6 * x ** 12 * y ** 10 + 4 * e * x * y * D) / (x * D)
    return dx, dy


# --- Charts C81 .. C92 -------------------------------------------------------

def _c81_field(x, y, e):
    D = _d81(x, y, e)
    S = 32 + x * y
    q81 = (2 * S * (D * D + 4 * D - 96) + 128 * D * D - 8 * x * y * S + 5 * x * y * D * D)
    dx = (-2 * x - e * (128 + 5 * x * y) * D + y ** 3 * q81) / (y * D)
    dy = 1 + e * y - 6 / D - y ** 4 * D
    return dx, dy


def _c82_field(x, y, e):
    D = _d82(x, y, e)
    b = x * y
    s = 32 + x
    core = 6 * D * D + 8 * D + 32 - 7 * s
    b4 = b ** 4
    dx = (-4 * x + b4 * s * core - 4 * e * s * b * D) / (b * D)
    dy = (2 * x + e * b * D * (128 + 5 * x) + b4 * (x * s - x * D * D - s * core)) / (x * x * D)
    return dx, dy


def _q9(A, eb, R, D):
    """Common numerator of the C91/C92 fields; A = a b^2, eb = e b in C91 terms."""
    return (2 * R * (D * D + 4 * D - 96) + D * D * (128 - 1280 * eb + 6 * A)
            + 1920 * eb * R - 9 * A * R)


def _c91_field(x, y, e):
    # x = a, y = b; regular on the pole line y = 0.
    R = _r91(x, y, e)
    D = 4 + y ** 4 * R
    Q = _q9(x * y * y, e * y, R, D)
    dx = (y * Q - 6 * x * e * D) / D
    dy = 1 + e * y - 6 / D - y ** 4 * D
    return dx, dy


def _c92_field(x, y, e):
    R = _r92(x, y, e)
    D = 4 + (x * y) ** 4 * R
    Q = _q9(x * x * y, e * x * y, R, D)
    dx = (x * x * y * y * Q + (D - 6) / y - x ** 4 * y ** 3 * D * D) / D - 5 * e * x
    dy = -x * y ** 3 * Q / D + 6 * e * y
    return dx, dy


def _c91_nonautonomous_part(x, y, e):
    return -2 * e * (64 - 640 * e * y + 3 * x * y * y) / (y * y), e * y


def _c92_nonautonomous_part(x, y, e):
    return (-e * (128 - 1280 * e * x * y + 5 * x * x * y) / (x * y),
            2 * e * (64 - 640 * e * x * y + 3 * x * x * y) / (x * x))


# --- Inverse maps ------------------------------------------------------------

def _from_bd(b, D):
    return 1 / (b * b * D), 1 / (b ** 3 * D)


def _odd_inverse(d_fn):
    def inverse(x, y, e):
        return _from_bd(y, d_fn(x, y, e))
    return inverse


def _even_inverse(d_fn):
    def inverse(x, y, e):
        return _from_bd(x * y, d_fn(x, y, e))
    return inverse


def _odd_dens(d_fn):
    return lambda x, y, e: (y, d_fn(x, y, e))


def _even_dens(d_fn):
    return lambda x, y, e: (x * y, d_fn(x, y, e))


class ChartSpec:
    """
    One chart of the atlas.  Every callable takes chart coordinates (x, y)
    and e = 1/(5z).
    """
    __slots__ = ("chart", "parent", "kind", "center", "center_label", "inverse",
                 "field", "w", "energy_w", "u1_w", "field_denominators",
                 "inverse_denominators", "substitution", "loci")

    def __init__(self, chart: ChartId, *, parent=None, kind=0, center=None, center_label="0",
                 inverse, field, w, energy_w, u1_w, field_denominators, inverse_denominators,
                 substitution: str, loci: List[str]):
        self.chart = chart
        self.parent = parent
        self.kind = kind
        self.center = center
        self.center_label = center_label
        self.inverse = inverse
        self.field = field
        self.w = w
        self.energy_w = energy_w
        self.u1_w = u1_w
        self.field_denominators = field_denominators
        self.inverse_denominators = inverse_denominators
        self.substitution = substitution
        self.loci = loci


def _zero(e):
    return 0j


def _four(e):
    return 4 + 0j


def _thirty_two(e):
    return 32 + 0j


def _b8_center(e):
    return -256 * e


C = ChartId

CHARTS: Dict[ChartId, ChartSpec] = {
    C.B: ChartSpec(
        C.B,
        inverse=lambda x, y, e: (x, y),
        field=_b_field,
        w=lambda x, y, e: 1 + 0j,
        energy_w=_b_energy,
        u1_w=lambda x, y, e: x,
        field_denominators=lambda x, y, e: (),
        inverse_denominators=lambda x, y, e: (),
        substitution="(u1, u2)",
        loci=[],
    ),
    C.C02: ChartSpec(
        C.C02, parent=C.B,
        inverse=lambda x, y, e: (1 / x, y / x),
        field=_c02_field,
        w=lambda x, y, e: -x ** 3,
        energy_w=lambda x, y, e: 2 + x * x - x * y * y / 2,
        u1_w=lambda x, y, e: -x * x,
        field_denominators=lambda x, y, e: (x,),
        inverse_denominators=lambda x, y, e: (x,),
        substitution="u021 = 1/u1, u022 = u2/u1",
        loci=["L0: u021 = 0"],
    ),
    C.C03: ChartSpec(
        C.C03, parent=C.B,
        inverse=lambda x, y, e: (y / x, 1 / x),
        field=_c03_field,
        w=lambda x, y, e: x ** 3,
        energy_w=lambda x, y, e: x / 2 - x * x * y - 2 * y ** 3,
        u1_w=lambda x, y, e: x * x * y,
        field_denominators=lambda x, y, e: (x,),
        inverse_denominators=lambda x, y, e: (x,),
        substitution="u031 = 1/u2, u032 = u1/u2",
        loci=["L0: u031 = 0", "b0: (0, 0)"],
    ),
    C.C11: ChartSpec(
        C.C11, parent=C.C03, kind=1, center=_zero,
        inverse=lambda x, y, e: (1 / x, 1 / (x * y)),
        field=_c11_field,
        w=lambda x, y, e: x ** 3 * y * y,
        energy_w=lambda x, y, e: x / 2 - 2 * y * y - x * x * y * y,
        u1_w=lambda x, y, e: x * x * y * y,
        field_denominators=lambda x, y, e: (x, y),
        inverse_denominators=lambda x, y, e: (x, y),
        substitution="u031 = u111*u112, u032 = u112",
        loci=["L0: u111 = 0", "L1: u112 = 0", "b1: (0, 0)"],
    ),
    C.C12: ChartSpec(
        C.C12, parent=C.C03, kind=2, center=_zero,
        inverse=lambda x, y, e: (y, 1 / x),
        field=_c12_field,
        w=lambda x, y, e: x * x,
        energy_w=lambda x, y, e: 0.5 - x * x * y - 2 * x * x * y ** 3,
        u1_w=lambda x, y, e: x * x * y,
        field_denominators=lambda x, y, e: (x,),
        inverse_denominators=lambda x, y, e: (x,),
        substitution="u031 = u121, u032 = u121*u122",
        loci=["L1: u121 = 0"],
    ),
    C.C21: ChartSpec(
        C.C21, parent=C.C11, kind=1, center=_zero,
        inverse=lambda x, y, e: (1 / (x * y), 1 / (x * y * y)),
        field=_c21_field,
        w=lambda x, y, e: x ** 3 * y ** 4,
        energy_w=lambda x, y, e: x / 2 - 2 * y - x * x * y ** 3,
        u1_w=lambda x, y, e: x * x * y ** 3,
        field_denominators=lambda x, y, e: (x, y),
        inverse_denominators=lambda x, y, e: (x, y),
        substitution="u111 = u211*u212, u112 = u212",
        loci=["L1: u211 = 0", "L2: u212 = 0", "b2: (0, 0)"],
    ),
    C.C22: ChartSpec(
        C.C22, parent=C.C11, kind=2, center=_zero,
        inverse=lambda x, y, e: (1 / x, 1 / (x * x * y)),
        field=_c22_field,
        w=lambda x, y, e: x ** 4 * y * y,
        energy_w=lambda x, y, e: 0.5 - 2 * x * y * y - x ** 3 * y * y,
        u1_w=lambda x, y, e: x ** 3 * y * y,
        field_denominators=lambda x, y, e: (x, y),
        inverse_denominators=lambda x, y, e: (x, y),
        substitution="u111 = u221, u112 = u221*u222",
        loci=["L0: u222 = 0", "L2: u221 = 0"],
    ),
    C.C31: ChartSpec(
        C.C31, parent=C.C21, kind=1, center=_zero,
        inverse=lambda x, y, e: (1 / (x * y * y), 1 / (x * y ** 3)),
        field=_c31_field,
        w=lambda x, y, e: x ** 3 * y ** 6,
        energy_w=lambda x, y, e: -2 + x / 2 - x * x * y ** 4,
        u1_w=lambda x, y, e: x * x * y ** 4,
        field_denominators=lambda x, y, e: (x, y),
        inverse_denominators=lambda x, y, e: (x, y),
        substitution="u211 = u311*u312, u212 = u312",
        loci=["L2: u311 = 0", "L3: u312 = 0", "b3: (4, 0)"],
    ),
    C.C32: ChartSpec(
        C.C32, parent=C.C21, kind=2, center=_zero,
        inverse=lambda x, y, e: (1 / (x * x * y), 1 / (x ** 3 * y * y)),
        field=_c32_field,
        w=lambda x, y, e: x ** 6 * y ** 4,
        energy_w=lambda x, y, e: 0.5 - 2 * y - x ** 4 * y ** 3,
        u1_w=lambda x, y, e: x ** 4 * y ** 3,
        field_denominators=lambda x, y, e: (x, y),
        inverse_denominators=lambda x, y, e: (x, y),
        substitution="u211 = u321, u212 = u321*u322",
        loci=["L1: u322 = 0", "L3: u321 = 0"],
    ),
    C.C41: ChartSpec(
        C.C41, parent=C.C31, kind=1, center=_four, center_label="4",
        inverse=_odd_inverse(_d41),
        field=_c41_field,
        w=lambda x, y, e: y ** 5 * _d41(x, y, e) ** 3,
        energy_w=lambda x, y, e: x / 2 - y ** 3 * _d41(x, y, e) ** 2,
        u1_w=lambda x, y, e: y ** 3 * _d41(x, y, e) ** 2,
        field_denominators=_odd_dens(_d41),
        inverse_denominators=_odd_dens(_d41),
        substitution="u311 - 4 = u411*u412, u312 = u412",
        loci=["L4: u412 = 0", "L2: D41 = 4 + u411*u412 = 0", "b4: (0, 0)"],
    ),
    C.C42: ChartSpec(
        C.C42, parent=C.C31, kind=2, center=_four, center_label="4",
        inverse=_even_inverse(_d42),
        field=_c42_field,
        w=lambda x, y, e: x ** 5 * y ** 6 * _d42(x, y, e) ** 3,
        energy_w=lambda x, y, e: 0.5 - x ** 3 * _d42(x, y, e) ** 2 * y ** 4,
        u1_w=lambda x, y, e: x ** 3 * y ** 4 * _d42(x, y, e) ** 2,
        field_denominators=_even_dens(_d42),
        inverse_denominators=_even_dens(_d42),
        substitution="u311 - 4 = u421, u312 = u421*u422",
        loci=["L3: u422 = 0", "L4: u421 = 0", "L2: 4 + u421 = 0"],
    ),
    C.C51: ChartSpec(
        C.C51, parent=C.C41, kind=1, center=_zero,
        inverse=_odd_inverse(_d51),
        field=_c51_field,
        w=lambda x, y, e: y ** 4 * _d51(x, y, e) ** 3,
        energy_w=lambda x, y, e: x / 2 - y * y * _d51(x, y, e) ** 2,
        u1_w=lambda x, y, e: y * y * _d51(x, y, e) ** 2,
        field_denominators=_odd_dens(_d51),
        inverse_denominators=_odd_dens(_d51),
        substitution="u411 = u511*u512, u412 = u512",
        loci=["L5: u512 = 0", "b5: (0, 0)"],
    ),
    C.C52: ChartSpec(
        C.C52, parent=C.C41, kind=2, center=_zero,
        inverse=_even_inverse(_d52),
        field=_c52_field,
        w=lambda x, y, e: x ** 4 * y ** 5 * _d52(x, y, e) ** 3,
        energy_w=lambda x, y, e: 0.5 - x * x * y ** 3 * _d52(x, y, e) ** 2,
        u1_w=lambda x, y, e: x * x * y ** 3 * _d52(x, y, e) ** 2,
        field_denominators=_even_dens(_d52),
        inverse_denominators=_even_dens(_d52),
        substitution="u411 = u521, u412 = u521*u522",
        loci=["L4: u522 = 0", "L5: u521 = 0"],
    ),
    C.C61: ChartSpec(
        C.C61, parent=C.C51, kind=1, center=_zero,
        inverse=_odd_inverse(_d61),
        field=_c61_field,
        w=lambda x, y, e: y ** 3 * _d61(x, y, e) ** 3,
        energy_w=lambda x, y, e: x / 2 - y * _d61(x, y, e) ** 2,
        u1_w=lambda x, y, e: y * _d61(x, y, e) ** 2,
        field_denominators=_odd_dens(_d61),
        inverse_denominators=_odd_dens(_d61),
        substitution="u511 = u611*u612, u512 = u612",
        loci=["L6: u612 = 0", "b6: (0, 0)"],
    ),
    C.C62: ChartSpec(
        C.C62, parent=C.C51, kind=2, center=_zero,
        inverse=_even_inverse(_d62),
        field=_c62_field,
        w=lambda x, y, e: x ** 3 * y ** 4 * _d62(x, y, e) ** 3,
        energy_w=lambda x, y, e: 0.5 - x * y * y * _d62(x, y, e) ** 2,
        u1_w=lambda x, y, e: x * y * y * _d62(x, y, e) ** 2,
        field_denominators=_even_dens(_d62),
        inverse_denominators=_even_dens(_d62),
        substitution="u511 = u621, u512 = u621*u622",
        loci=["L5: u622 = 0", "L6: u621 = 0"],
    ),
    C.C71: ChartSpec(
        C.C71, parent=C.C61, kind=1, center=_zero,
        inverse=_odd_inverse(_d71),
        field=_c71_field,
        w=lambda x, y, e: y * y * _d71(x, y, e) ** 3,
        energy_w=lambda x, y, e: x / 2 - _d71(x, y, e) ** 2,
        u1_w=lambda x, y, e: _d71(x, y, e) ** 2,
        field_denominators=_odd_dens(_d71),
        inverse_denominators=_odd_dens(_d71),
        substitution="u611 = u711*u712, u612 = u712",
        loci=["L7: u712 = 0", "b7: (32, 0)"],
    ),
    C.C72: ChartSpec(
        C.C72, parent=C.C61, kind=2, center=_zero,
        inverse=_even_inverse(_d72),
        field=_c72_field,
        w=lambda x, y, e: x * x * y ** 3 * _d72(x, y, e) ** 3,
        energy_w=lambda x, y, e: 0.5 - y * _d72(x, y, e) ** 2,
        u1_w=lambda x, y, e: y * _d72(x, y, e) ** 2,
        field_denominators=_even_dens(_d72),
        inverse_denominators=_even_dens(_d72),
        substitution="u611 = u721, u612 = u721*u722",
        loci=["L6: u722 = 0", "L7: u721 = 0"],
    ),
    C.C81: ChartSpec(
        C.C81, parent=C.C71, kind=1, center=_thirty_two, center_label="32",
        inverse=_odd_inverse(_d81),
        field=_c81_field,
        w=lambda x, y, e: y * _d81(x, y, e) ** 3,
        energy_w=lambda x, y, e: x / 2 - y ** 3 * (32 + x * y) * (_d81(x, y, e) + 4),
        u1_w=lambda x, y, e: _d81(x, y, e) ** 2 / y,
        field_denominators=_odd_dens(_d81),
        inverse_denominators=_odd_dens(_d81),
        substitution="u711 - 32 = u811*u812, u712 = u812",
        loci=["L8: u812 = 0", "b8: (-256/(5z), 0)"],
    ),
    C.C82: ChartSpec(
        C.C82, parent=C.C71, kind=2, center=_thirty_two, center_label="32",
        inverse=_even_inverse(_d82),
        field=_c82_field,
        w=lambda x, y, e: x * y * y * _d82(x, y, e) ** 3,
        energy_w=lambda x, y, e: (32 + x - 2 * _d82(x, y, e) ** 2) / (2 * x),
        u1_w=lambda x, y, e: _d82(x, y, e) ** 2 / x,
        field_denominators=lambda x, y, e: (x, y, _d82(x, y, e)),
        inverse_denominators=_even_dens(_d82),
        substitution="u711 - 32 = u821, u712 = u821*u822",
        loci=["L7: u822 = 0", "L8: u821 = 0"],
    ),
    C.C91: ChartSpec(
        C.C91, parent=C.C81, kind=1, center=_b8_center, center_label="-256/(5z)",
        inverse=_odd_inverse(_d91),
        field=_c91_field,
        w=lambda x, y, e: _d91(x, y, e) ** 3,
        energy_w=lambda x, y, e: (x / 2 - 128 * e / y
                                  - y * y * _r91(x, y, e) * (_d91(x, y, e) + 4)),
        u1_w=lambda x, y, e: _d91(x, y, e) ** 2 / (y * y),
        field_denominators=lambda x, y, e: (_d91(x, y, e),),
        inverse_denominators=_odd_dens(_d91),
        substitution="u811 + 256/(5z) = u911*u912, u812 = u912",
        loci=["L9 (pole line): u912 = 0"],
    ),
    C.C92: ChartSpec(
        C.C92, parent=C.C81, kind=2, center=_b8_center, center_label="-256/(5z)",
        inverse=_even_inverse(_d92),
        field=_c92_field,
        w=lambda x, y, e: y * _d92(x, y, e) ** 3,
        energy_w=lambda x, y, e: (0.5 - 128 * e / x
                                  - x * x * y ** 3 * _r92(x, y, e) * (_d92(x, y, e) + 4)),
        u1_w=lambda x, y, e: _d92(x, y, e) ** 2 / (x * x * y),
        field_denominators=lambda x, y, e: (y, _d92(x, y, e)),
        inverse_denominators=_even_dens(_d92),
        substitution="u811 + 256/(5z) = u921, u812 = u921*u922",
        loci=["L8: u922 = 0", "L9: u921 = 0"],
    ),
}

NONAUTONOMOUS_PART: Dict[ChartId, Callable] = {
    C.C91: _c91_nonautonomous_part,
    C.C92: _c92_nonautonomous_part,
}

# Charts whose coordinates depend on z through the centre of the last blow-up.
Z_DEPENDENT = frozenset({C.C91, C.C92})
NEAR_INFINITY_GROUP = frozenset({C.C81, C.C82, C.C91, C.C92})
# w92 is only used as the distance this close to the last exceptional line.
NEAR_LINE_U922 = 1e-2


# --- Chart tree --------------------------------------------------------------

def _root_edge(target: ChartId):
    if target == C.C02:
        down = lambda x, y, e: (1 / x, y / x)
        up = lambda c1, c2, e: (1 / c1, c2 / c1)
    else:
        down = lambda x, y, e: (1 / y, x / y)
        up = lambda c1, c2, e: (c2 / c1, 1 / c1)
    return down, up


def _blowup_edge(kind: int, center: Callable):
    if kind == 1:
        def down(x, y, e):
            return (x - center(e)) / y, y

        def up(c1, c2, e):
            return center(e) + c1 * c2, c2
    else:
        def down(x, y, e):
            dx = x - center(e)
            return dx, y / dx

        def up(c1, c2, e):
            return center(e) + c1, c1 * c2
    return down, up


def _build_graph() -> nx.DiGraph:
    """Parent -> child edges carrying the forward (down) and inverse (up) maps."""
    G = nx.DiGraph()
    for chart_id, spec in CHARTS.items():
        G.add_node(chart_id, kind=spec.kind)
    for chart_id, spec in CHARTS.items():
        if spec.parent is None:
            continue
        if spec.parent == C.B:
            down, up = _root_edge(chart_id)
        else:
            down, up = _blowup_edge(spec.kind, spec.center)
        G.add_edge(spec.parent, chart_id, down=down, up=up, center=spec.center_label,
                   kind=spec.kind)
    return G


CHART_GRAPH = _build_graph()
_UNDIRECTED = CHART_GRAPH.to_undirected(as_view=True)
_PATHS: Dict[ChartId, Dict[ChartId, List[ChartId]]] = dict(nx.all_pairs_shortest_path(_UNDIRECTED))


def chart_graph() -> nx.DiGraph:
    return CHART_GRAPH


def _hop(u: ChartId, v: ChartId, x: complex, y: complex, e: complex) -> Pair:
    if CHART_GRAPH.has_edge(u, v):
        return CHART_GRAPH.edges[u, v]["down"](x, y, e)
    return CHART_GRAPH.edges[v, u]["up"](x, y, e)


def _spec(chart: ChartId) -> ChartSpec:
    try:
        return CHARTS[ChartId(chart)]
    except (KeyError, ValueError):
        raise InvalidChart(f"unknown chart {chart!r}")


def _vanishes(values) -> bool:
    return any(abs(v) < GUARD for v in values)


# --- Operations ----------------------------------------------------------------

def chart_to_base(p: ChartPoint, z: Optional[complex]) -> Pair:
    spec = _spec(p.chart)
    e = eps_of(z)
    x, y = p.c1, p.c2
    if _vanishes(spec.inverse_denominators(x, y, e)):
        raise DenominatorVanishes(f"{p.chart.value} point ({x}, {y}) has infinite base coordinates")
    try:
        return spec.inverse(x, y, e)
    except ZeroDivisionError:
        raise DenominatorVanishes(f"{p.chart.value} point ({x}, {y}) has infinite base coordinates")


def transition(source: ChartId, target: ChartId, x: complex, y: complex, e: complex) -> Pair:
    """Raw coordinates of the same point in ``target``; ZeroDivisionError if unreachable."""
    path = _PATHS[source][target]
    for u, v in zip(path, path[1:]):
        x, y = _hop(u, v, x, y, e)
    return x, y


def chart_to_chart(p: ChartPoint, target: ChartId, z: Optional[complex]) -> ChartPoint:
    _spec(target)
    try:
        c1, c2 = transition(p.chart, ChartId(target), p.c1, p.c2, eps_of(z))
    except ZeroDivisionError:
        raise OutsideChartDomain(f"point of {p.chart.value} is not visible in {ChartId(target).value}")
    try:
        return ChartPoint(chart=target, c1=c1, c2=c2)
    except ValueError:
        raise OutsideChartDomain(f"point of {p.chart.value} is not visible in {ChartId(target).value}")


def base_to_chart(chart: ChartId, u1: complex, u2: complex, z: Optional[complex]) -> ChartPoint:
    return chart_to_chart(ChartPoint(chart=C.B, c1=u1, c2=u2), chart, z)


def coordinates_everywhere(chart: ChartId, x: complex, y: complex, e: complex) -> Dict[ChartId, Pair]:
    """The point in every chart reachable from ``chart`` without division by zero."""
    coords = {chart: (x, y)}
    for u, v in nx.bfs_edges(_UNDIRECTED, chart):
        if u not in coords:
            continue
        try:
            c = _hop(u, v, *coords[u], e)
        except (ZeroDivisionError, OverflowError):
            continue
        if all(abs(val) < float("inf") for val in c):
            coords[v] = c
    return coords


def chart_coordinates_everywhere(p: ChartPoint, z: Optional[complex]) -> Dict[ChartId, ChartPoint]:
    out = {}
    for chart, (c1, c2) in coordinates_everywhere(p.chart, p.c1, p.c2, eps_of(z)).items():
        out[chart] = ChartPoint(chart=chart, c1=c1, c2=c2)
    return out


def field_raw(chart: ChartId, x: complex, y: complex, e: complex) -> Pair:
    spec = CHARTS[chart]
    if _vanishes(spec.field_denominators(x, y, e)):
        raise FieldInfinite(f"{chart.value}: ({x}, {y}) lies on the infinity set")
    try:
        return spec.field(x, y, e)
    except ZeroDivisionError:
        raise FieldInfinite(f"{chart.value}: ({x}, {y}) lies on the infinity set")


def autonomous_field_raw(chart: ChartId, x: complex, y: complex, e: complex) -> Pair:
    """Limit field expressed in the z-dependent chart of time 1/(5e)."""
    dx, dy = field_raw(chart, x, y, 0j if chart not in Z_DEPENDENT else e)
    if chart in Z_DEPENDENT and e != 0:
        try:
            nx_, ny_ = NONAUTONOMOUS_PART[chart](x, y, e)
        except ZeroDivisionError:
            raise FieldInfinite(f"{chart.value}: autonomous field infinite at ({x}, {y})")
        return dx - nx_, dy - ny_
    return dx, dy


def vector_field(p: ChartPoint, z: complex) -> Tangent:
    d1, d2 = field_raw(p.chart, p.c1, p.c2, eps_of(z))
    return Tangent(d1=d1, d2=d2)


def autonomous_vector_field(p: ChartPoint, z: Optional[complex] = None) -> Tangent:
    """
    The z -> infinity limit field.  With ``z=None`` the z-dependent charts are
    taken at z = infinity; with a finite z they keep their z-dependent centre
    and the field is vector_field minus the printed non-autonomous part.
    """
    d1, d2 = autonomous_field_raw(p.chart, p.c1, p.c2, eps_of(z))
    return Tangent(d1=d1, d2=d2)


def jacobian_w(p: ChartPoint, z: Optional[complex] = None) -> complex:
    return _spec(p.chart).w(p.c1, p.c2, eps_of(z))


def energy_w(p: ChartPoint, z: Optional[complex]) -> complex:
    try:
        return _spec(p.chart).energy_w(p.c1, p.c2, eps_of(z))
    except ZeroDivisionError:
        raise EnergyInfinite(f"E*w infinite at {p.chart.value} ({p.c1}, {p.c2})")


def u1_w(p: ChartPoint, z: Optional[complex]) -> complex:
    try:
        return _spec(p.chart).u1_w(p.c1, p.c2, eps_of(z))
    except ZeroDivisionError:
        raise EnergyInfinite(f"u1*w infinite at {p.chart.value} ({p.c1}, {p.c2})")


def energy_raw(chart: ChartId, x: complex, y: complex, e: complex) -> complex:
    spec = CHARTS[chart]
    try:
        w = spec.w(x, y, e)
        if abs(w) < GUARD:
            raise EnergyInfinite(f"w vanishes at {chart.value} ({x}, {y})")
        return spec.energy_w(x, y, e) / w
    except ZeroDivisionError:
        raise EnergyInfinite(f"energy infinite at {chart.value} ({x}, {y})")


def energy(p: ChartPoint, z: Optional[complex]) -> EnergyValue:
    return EnergyValue.from_energy(energy_raw(p.chart, p.c1, p.c2, eps_of(z)))


def energy_dot(p: ChartPoint, z: complex) -> complex:
    """dE/dz = -(5z)^-1 (6E + 4u1), evaluated from the chart's E*w and u1*w."""
    spec = _spec(p.chart)
    e = eps_of(z)
    x, y = p.c1, p.c2
    try:
        w = spec.w(x, y, e)
        if abs(w) < GUARD:
            raise EnergyInfinite(f"w vanishes at {p.chart.value} ({x}, {y})")
        return -e * (6 * spec.energy_w(x, y, e) + 4 * spec.u1_w(x, y, e)) / w
    except ZeroDivisionError:
        raise EnergyInfinite(f"energy derivative infinite at {p.chart.value} ({x}, {y})")


def _c92_view(chart: ChartId, x: complex, y: complex, e: complex):
    """(u921, u922, D) of the point, read through C91 where possible so the pole line is covered."""
    try:
        a, b = transition(chart, C.C91, x, y, e)
        if math.isfinite(abs(a)) and math.isfinite(abs(b)):
            D = _d91(a, b, e)
            if a == 0:
                return 0j, complex(math.inf, 0), D
            return a * b, 1 / a, D
    except (ZeroDivisionError, OverflowError):
        pass
    try:
        u921, u922 = transition(chart, C.C92, x, y, e)
        return u921, u922, _d92(u921, u922, e)
    except (ZeroDivisionError, OverflowError):
        return None


def distance_raw(chart: ChartId, x: complex, y: complex, e: complex) -> complex:
    """
    Distance indicator d.  In C91/C92 with |u922| < 1e-2 it is w92 = u922 D^3,
    blended linearly into 1/q as |u921| goes from 8 to 16.  Everywhere else
    it is 1/q.
    """
    w92 = None
    u921 = None
    view = _c92_view(chart, x, y, e) if chart in Z_DEPENDENT else None
    if view is not None and abs(view[1]) < NEAR_LINE_U922:
        u921, u922, D = view
        w92 = u922 * D ** 3
    if w92 is not None and abs(u921) <= 8:
        return w92
    E = energy_raw(chart, x, y, e)
    if E == 0:
        raise NotNearInfinitySet(f"q = 0 at {chart.value} ({x}, {y})")
    inv_q = 1 / (2 * E)
    if w92 is None or abs(u921) >= 16:
        return inv_q
    lam = (abs(u921) - 8) / 8
    return (1 - lam) * w92 + lam * inv_q


def distance_to_infinity(p: ChartPoint, z: Optional[complex]) -> complex:
    return distance_raw(p.chart, p.c1, p.c2, eps_of(z))


def is_near_infinity(p: ChartPoint, z: Optional[complex], q0: float = 10.0) -> bool:
    if p.chart in NEAR_INFINITY_GROUP:
        return True
    try:
        return abs(energy(p, z).q) > q0
    except EnergyInfinite:
        return True


def guards(p: ChartPoint, z: Optional[complex]) -> Tuple[complex, ...]:
    return tuple(_spec(p.chart).field_denominators(p.c1, p.c2, eps_of(z)))


def base_points(z: complex) -> List[Tuple[ChartId, ChartPoint]]:
    e = eps_of(z)
    table = [
        (C.C03, 0, 0), (C.C11, 0, 0), (C.C21, 0, 0), (C.C31, 4, 0), (C.C41, 0, 0),
        (C.C51, 0, 0), (C.C61, 0, 0), (C.C71, 32, 0), (C.C81, -256 * e, 0),
    ]
    return [(chart, ChartPoint(chart=chart, c1=c1, c2=c2)) for chart, c1, c2 in table]


# Anticanonical point, reference data only.
ELLIPTIC_BASE_POINT = ChartPoint(chart=C.C81, c1=0, c2=0)


def pole_line_section(q: complex) -> ChartPoint:
    """Point of the z = infinity pole line with energy level q (E = a/128 there)."""
    return ChartPoint(chart=C.C91, c1=64 * q, c2=0)


def chart_manifest() -> Dict:
    charts = []
    for chart_id, spec in CHARTS.items():
        charts.append({
            "id": chart_id.value,
            "parent": spec.parent.value if spec.parent is not None else None,
            "blowup_kind": spec.kind,
            "center": spec.center_label if spec.parent not in (None, C.B) else None,
            "substitution": spec.substitution,
            "excluded_loci": list(spec.loci),
            "z_dependent": chart_id in Z_DEPENDENT,
        })
    return {"root": C.B.value, "charts": charts}
