"""
The autonomous limit system u1'' = 6 u1^2 + 1 at energy level q = 2E.

Its solutions are u1(z) = wp(z - z0) for the lattice P(q) of the cubic
4u^3 + 2u + q, i.e. g2 = -2, g3 = -q.  This module computes the lattice
(asymptotically and by quadrature), checks the period ODE, and evaluates wp.
"""
import cmath
import logging
import math
from typing import Dict, List, Optional, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import gamma

from .atlas import pole_line_section
from .errors import (
    AtLatticePoint,
    NewtonDiverged,
    PainleveAtlasError,
    QTooSmall,
    QuadratureFailed,
    SingularLevel,
)
from .integrator import integrate_path, integrate_system
from .models import AtlasState, PathSpec, PeriodBasis, StepControl, WeierstrassParams

logger = logging.getLogger(__name__)

GAMMA_THIRD = float(gamma(1 / 3))
A0 = -1j * GAMMA_THIRD ** 3 / (2 * math.pi)
B0 = -1j * 4 * 3 ** -1.5 * math.pi ** 2 / GAMMA_THIRD ** 3
SINGULAR_LEVELS = (1j * math.sqrt(8 / 27), -1j * math.sqrt(8 / 27))

ASYMPTOTIC_MIN_Q = 100.0
RAY_FACTOR = 1.2
GL_NODES = 16
MAX_PANELS = 256
QUAD_TOL = 1e-13
LAURENT_TERMS = 16
LAURENT_RADIUS = 0.25
LATTICE_POINT_TOL = 1e-10

_WP_CONTROL = StepControl(rel_tol=1e-13, abs_tol=1e-15, h_init=1e-3, h_min=1e-14, h_max=0.05)


# --- Period bases --------------------------------------------------------------------

def period_basis_asymptotic(q: complex, order: int = 1) -> PeriodBasis:
    """Large-|q| basis p = q^(-1/6) a(0) + q^(-5/6) b(0) and its e^(i pi/3) rotation."""
    if abs(q) < ASYMPTOTIC_MIN_Q:
        raise QTooSmall(f"|q| = {abs(q):.3g} < {ASYMPTOTIC_MIN_Q:g}")
    if order not in (0, 1):
        raise ValueError("order must be 0 or 1")
    lead = cmath.exp(-cmath.log(q) / 6)
    rot = cmath.exp(1j * math.pi / 3)
    p1 = lead * A0
    p2 = lead * rot * A0
    if order == 1:
        corr = lead ** 5
        p1 += corr * B0
        p2 += corr * B0 / rot
    return PeriodBasis(q=q, p1=p1, p2=p2, labeling="asymptotic")


def _check_level(q: complex):
    for s in SINGULAR_LEVELS:
        if abs(q - s) < 1e-6:
            raise SingularLevel(f"q = {q} is within 1e-6 of the singular level {s}")


def _panel_nodes(panels: int) -> Tuple[np.ndarray, np.ndarray]:
    x, w = leggauss(GL_NODES)
    edges = np.linspace(0.0, math.pi, panels + 1)
    mid = (edges[1:] + edges[:-1]) / 2
    half = (edges[1:] - edges[:-1]) / 2
    return (mid[:, None] + half[:, None] * x).ravel(), (half[:, None] * w).ravel()


def _pair_period(ei: complex, ej: complex, ek: complex) -> complex:
    """
    Twice the integral from ei to ej of du / sqrt(4 (u-e1)(u-e2)(u-e3)).

    With u = (ei+ej)/2 - (ej-ei)/2 cos(theta) this is the integral over
    [0, pi] of dtheta / sqrt(ek - u), the square root continued along theta.
    """
    previous = None
    panels = 1
    while panels <= MAX_PANELS:
        theta, weights = _panel_nodes(panels)
        u = (ei + ej) / 2 - (ej - ei) / 2 * np.cos(theta)
        root = np.sqrt(ek - u + 0j)
        jump = np.abs(root[1:] + root[:-1]) < np.abs(root[1:] - root[:-1])
        sign = np.concatenate([[1.0], np.cumprod(np.where(jump, -1.0, 1.0))])
        value = complex(np.sum(weights / (sign * root)))
        if previous is not None and abs(value - previous) <= QUAD_TOL * abs(value):
            return value
        previous = value
        panels *= 2
    raise QuadratureFailed(f"period integral over [{ei}, {ej}] did not converge")


def _gauss_reduce(w1: complex, w2: complex) -> Tuple[complex, complex]:
    for _ in range(100):
        if abs(w2) < abs(w1):
            w1, w2 = w2, w1
        mu = round((w2 * w1.conjugate()).real / abs(w1) ** 2)
        if mu == 0:
            break
        w2 -= mu * w1
    if (w2 / w1).imag < 0:
        w2 = -w2
    return w1, w2


def _raw_basis(q: complex) -> Tuple[complex, complex]:
    e1, e2, e3 = (complex(r) for r in np.roots([4, 0, 2, q]))
    return _gauss_reduce(_pair_period(e1, e2, e3), _pair_period(e2, e3, e1))


def lattice_coordinates(z: complex, w1: complex, w2: complex) -> np.ndarray:
    """Real (s, t) with z = s w1 + t w2."""
    M = np.array([[w1.real, w2.real], [w1.imag, w2.imag]])
    return np.linalg.solve(M, np.array([z.real, z.imag]))


def _relabel(w1: complex, w2: complex, t1: complex, t2: complex) -> Tuple[complex, complex]:
    """The basis of the lattice <w1, w2> nearest the target pair (t1, t2)."""
    m = np.rint([lattice_coordinates(t1, w1, w2), lattice_coordinates(t2, w1, w2)]).astype(int)
    if abs(m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]) != 1:
        raise QuadratureFailed("period labeling lost: target pair is not a lattice basis")
    p1 = complex(m[0, 0] * w1 + m[0, 1] * w2)
    p2 = complex(m[1, 0] * w1 + m[1, 1] * w2)
    if abs(p1 - t1) > 0.25 * abs(t1) or abs(p2 - t2) > 0.25 * abs(t2):
        raise QuadratureFailed("period labeling lost: no lattice basis close to the target")
    return p1, p2


def _ray_levels(q: complex) -> List[complex]:
    """Levels from q outward along a ray until the asymptotic labeling applies."""
    direction = q / abs(q) if q != 0 else 1.0 + 0j
    # Rays through a singular level are turned slightly to keep the labeling continuous.
    if abs(q) < math.sqrt(8 / 27) and min(abs(direction - s / abs(s)) for s in SINGULAR_LEVELS) < 0.1:
        direction *= cmath.exp(0.2j)
    mags = [abs(q)]
    while mags[-1] < ASYMPTOTIC_MIN_Q:
        mags.append(max(mags[-1] * RAY_FACTOR, 0.05))
    return [q] + [m * direction for m in mags[1:]]


def period_numeric(q: complex) -> PeriodBasis:
    """Quadrature periods labeled continuously from the large-|q| asymptotic basis."""
    _check_level(q)
    if abs(q) >= ASYMPTOTIC_MIN_Q:
        target = period_basis_asymptotic(q, 1)
        p1, p2 = _relabel(*_raw_basis(q), target.p1, target.p2)
        return PeriodBasis(q=q, p1=p1, p2=p2, labeling="asymptotic-match")

    levels = _ray_levels(q)
    for level in levels[1:]:
        _check_level(level)
    top = period_basis_asymptotic(levels[-1], 1)
    t1, t2 = _relabel(*_raw_basis(levels[-1]), top.p1, top.p2)
    for level in reversed(levels[:-1]):
        t1, t2 = _relabel(*_raw_basis(level), t1, t2)
    logger.debug(f"q={q}: labeled by ray tracking over {len(levels)} levels")
    return PeriodBasis(q=q, p1=t1, p2=t2, labeling="ray-tracked")


def period_ode_check(q: complex, p: complex, dp: complex, d2p: complex) -> complex:
    """Residual of p'' + 54q/(8+27q^2) p' + 15/(4(8+27q^2)) p."""
    disc = 8 + 27 * q * q
    if abs(disc) < 1e-12:
        raise SingularLevel(f"8 + 27 q^2 vanishes at q = {q}")
    return d2p + 54 * q / disc * dp + 15 / (4 * disc) * p


def asymptotic_period_derivatives(q: complex, which: int = 1) -> Tuple[complex, complex, complex]:
    """The order-1 asymptotic period with its exact first and second q-derivatives."""
    rot = cmath.exp(1j * math.pi / 3)
    a, b = (A0, B0) if which == 1 else (rot * A0, B0 / rot)
    lq = cmath.log(q)

    def power(s):
        return cmath.exp(s * lq)

    p = a * power(-1 / 6) + b * power(-5 / 6)
    dp = -a / 6 * power(-7 / 6) - 5 * b / 6 * power(-11 / 6)
    d2p = 7 * a / 36 * power(-13 / 6) + 55 * b / 36 * power(-17 / 6)
    return p, dp, d2p


def continued_period_residual(q: complex, rel_step: float = 0.01) -> Tuple[float, float]:
    """
    Period-ODE residuals of both numeric periods, derivatives by central
    differences along the ray through q, scaled by |p| / |q|^2.
    """
    h = rel_step * q
    bases = [period_numeric(q - h), period_numeric(q), period_numeric(q + h)]
    out = []
    for attr in ("p1", "p2"):
        lo, mid, hi = (getattr(b, attr) for b in bases)
        dp = (hi - lo) / (2 * h)
        d2p = (hi - 2 * mid + lo) / h ** 2
        out.append(abs(period_ode_check(q, mid, dp, d2p)) * abs(q) ** 2 / abs(mid))
    return out[0], out[1]


# --- Invariants and reduction ----------------------------------------------------------

def _divisor_sums(n: int, k: int) -> np.ndarray:
    idx = np.arange(1, n + 1)
    return np.array([np.sum(idx[m % idx == 0] ** k) for m in idx], dtype=float)


_SIGMA3 = _divisor_sums(40, 3)
_SIGMA5 = _divisor_sums(40, 5)


def lattice_invariants(p1: complex, p2: complex) -> Tuple[complex, complex]:
    """(g2, g3) of the lattice generated by p1, p2, by Eisenstein q-series."""
    w1, w2 = _gauss_reduce(p1, p2)
    tau = w2 / w1
    nome = cmath.exp(2j * math.pi * tau)
    powers = nome ** np.arange(1, 41)
    e4 = 1 + 240 * np.sum(_SIGMA3 * powers)
    e6 = 1 - 504 * np.sum(_SIGMA5 * powers)
    g2 = 4 * math.pi ** 4 / 3 * e4 / w1 ** 4
    g3 = 8 * math.pi ** 6 / 27 * e6 / w1 ** 6
    return complex(g2), complex(g3)


def hexagonal_lattice() -> Tuple[PeriodBasis, WeierstrassParams]:
    """The lattice generated by 1 and e^(i pi/3): g2 = 0, g3 = (Gamma(1/3)^3 / (2 pi))^6."""
    g3 = (GAMMA_THIRD ** 3 / (2 * math.pi)) ** 6
    basis = PeriodBasis(q=-g3, p1=1, p2=cmath.exp(1j * math.pi / 3), labeling="hexagonal")
    return basis, WeierstrassParams(g2=0, g3=g3)


def _params_for(basis: PeriodBasis, params: Optional[WeierstrassParams]) -> WeierstrassParams:
    if params is not None:
        return params
    if basis.labeling == "hexagonal":
        return hexagonal_lattice()[1]
    return WeierstrassParams.from_level(basis.q)


def reduce_to_cell(z: complex, basis: PeriodBasis) -> complex:
    """The representative of z modulo the lattice that is nearest to 0."""
    w1, w2 = _gauss_reduce(basis.p1, basis.p2)
    s, t = lattice_coordinates(z, w1, w2)
    base = z - round(s) * w1 - round(t) * w2
    candidates = [base - i * w1 - j * w2 for i in (-1, 0, 1) for j in (-1, 0, 1)]
    return min(candidates, key=abs)


# --- Weierstrass wp --------------------------------------------------------------------

def laurent_wp_coefficients(g2: complex, g3: complex, terms: int = LAURENT_TERMS) -> List[complex]:
    """c_k of wp = z^-2 + sum_{k>=2} c_k z^(2k-2)."""
    c = [0j, 0j, g2 / 20, g3 / 28]
    for k in range(4, terms + 1):
        c.append(3 / ((2 * k + 1) * (k - 3)) * sum(c[m] * c[k - m] for m in range(2, k - 1)))
    return c


def _wp_laurent(z: complex, c: List[complex]) -> Tuple[complex, complex]:
    wp = z ** -2
    dwp = -2 * z ** -3
    for k in range(2, len(c)):
        wp += c[k] * z ** (2 * k - 2)
        dwp += (2 * k - 2) * c[k] * z ** (2 * k - 3)
    return wp, dwp


def weierstrass_p(z: complex, basis: PeriodBasis,
                  params: Optional[WeierstrassParams] = None) -> Tuple[complex, complex]:
    """
    wp(z) and wp'(z) for the lattice of ``basis``.  Reduce z to the Voronoi
    cell of 0, evaluate the Laurent series on a small disc and continue
    (wp, wp') radially with wp'' = 6 wp^2 - g2/2.
    """
    params = _params_for(basis, params)
    zr = reduce_to_cell(z, basis)
    if abs(zr) < LATTICE_POINT_TOL:
        raise AtLatticePoint(f"z = {z} is a lattice point")
    c = laurent_wp_coefficients(params.g2, params.g3)
    r0 = LAURENT_RADIUS * min(abs(w) for w in _gauss_reduce(basis.p1, basis.p2))
    if abs(zr) <= r0:
        return _wp_laurent(zr, c)
    z0 = zr / abs(zr) * r0
    half_g2 = params.g2 / 2

    def rhs(_, y):
        return np.array([y[1], 6 * y[0] * y[0] - half_g2], dtype=complex)

    y = integrate_system(rhs, z0, _wp_laurent(z0, c), zr, _WP_CONTROL)
    return complex(y[0]), complex(y[1])


def weierstrass_residual(z: complex, basis: PeriodBasis,
                         params: Optional[WeierstrassParams] = None) -> complex:
    params = _params_for(basis, params)
    wp, dwp = weierstrass_p(z, basis, params)
    return dwp ** 2 - 4 * wp ** 3 + params.g2 * wp + params.g3


def weierstrass_grid(basis: PeriodBasis, params: Optional[WeierstrassParams] = None,
                     n: int = 41, lower_left: complex = 0j,
                     upper_right: complex = 2 + 2j) -> List[Tuple[float, float, float]]:
    """(Re z, Im z, |wp|) on an n x n grid; NaN within 1e-3 of lattice points."""
    params = _params_for(basis, params)
    rows = []
    for y in np.linspace(lower_left.imag, upper_right.imag, n):
        for x in np.linspace(lower_left.real, upper_right.real, n):
            z = complex(x, y)
            if abs(reduce_to_cell(z, basis)) < 1e-3:
                rows.append((float(x), float(y), math.nan))
                continue
            rows.append((float(x), float(y), abs(weierstrass_p(z, basis, params)[0])))
    return rows


def special_points(basis: PeriodBasis, params: Optional[WeierstrassParams] = None,
                   tol: float = 1e-12, max_iter: int = 30) -> Dict[str, List[complex]]:
    """Newton-refined zeros of wp near the third points and of wp' at the half periods."""
    params = _params_for(basis, params)
    p1, p2 = basis.p1, basis.p2

    def newton(z, f):
        for _ in range(max_iter):
            value, slope = f(z)
            if slope == 0:
                break
            dz = -value / slope
            z += dz
            if abs(dz) < tol * max(1.0, abs(z)):
                return z
        raise NewtonDiverged(f"special point refinement did not converge near {z}")

    def wp_and_slope(z):
        return weierstrass_p(z, basis, params)

    def dwp_and_slope(z):
        wp, dwp = weierstrass_p(z, basis, params)
        return dwp, 6 * wp * wp - params.g2 / 2

    return {
        "zeros_of_u": [newton((p1 + p2) / 3, wp_and_slope), newton(2 * (p1 + p2) / 3, wp_and_slope)],
        "zeros_of_du": [newton(w, dwp_and_slope) for w in (p1 / 2, p2 / 2, (p1 + p2) / 2)],
    }


# --- Flow-period oracle ------------------------------------------------------------

def flow_period(q: complex, z0: complex = 10.0, ctl: Optional[StepControl] = None,
                basis: Optional[PeriodBasis] = None) -> Tuple[complex, complex]:
    """
    Lattice vectors measured by the autonomous flow: start on the pole line
    at level q, integrate along p1 (then p2) past the next pole and return the
    displacement of the refined pole from z0.
    """
    ctl = ctl or StepControl(rel_tol=1e-12, abs_tol=1e-14)
    basis = basis or period_numeric(q)
    start = AtlasState(z=z0, point=pole_line_section(q))
    found = []
    for p in (basis.p1, basis.p2):
        traj = integrate_path(start, PathSpec.straight(z0, z0 + 1.25 * p), ctl, autonomous=True)
        far = [ev for ev in traj.events if abs(ev.zeta - z0) > 0.1 * abs(p)]
        if not far:
            raise PainleveAtlasError(f"no pole crossing found along {p}")
        best = min(far, key=lambda ev: abs(ev.zeta - z0 - p))
        found.append(best.zeta - z0)
    logger.info(f"flow periods at q={q}: {found[0]:.10g}, {found[1]:.10g}")
    return found[0], found[1]
