"""
Large-|x| behaviour: the scaled autonomous-at-infinity system, its formal
series, the transitional expansion that describes the first pole arrays, and
the Stokes constant joining the two tritronquée-type solutions.

Scaled variables (t, pi1, pi2) satisfy

    pi1' = pi2 - 2 pi1 / (5t)
    pi2' = (pi1^2 - 1) / 2 - 3 pi2 / (5t)

and are the Boutroux variables up to the constant map z = beta t,
u1 = alpha pi1, u2 = (alpha / beta) pi2.
"""
import cmath
import logging
import math
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from numpy.polynomial import Polynomial

from .errors import (
    AtSingularXi,
    BranchCut,
    CZero,
    NewtonDiverged,
    OrderUnavailable,
    PainleveAtlasError,
    SeedInvalid,
)
from .integrator import detect_pole, integrate_path, integrate_system
from .models import (
    AtlasState,
    ChartId,
    ChartPoint,
    Equilibrium,
    PathSpec,
    PolePrediction,
    PoleSequenceParams,
    ScaledState,
    StepControl,
)

logger = logging.getLogger(__name__)

BETA = 24 ** -0.25 * cmath.exp(1j * math.pi / 4)
ALPHA = -2 * BETA ** 2

# x = X_SCALE * xi,  eta = ETA_SCALE * y,  eta' = DETA_SCALE * y'
X_SCALE = -(2 ** -0.6) * 3 ** -0.2
ETA_SCALE = 2 ** 0.8 * 3 ** 0.6
DETA_SCALE = -(2 ** 0.2) * 3 ** 0.4

MAX_SERIES_ORDER = 8
SERIES_TRUST = 10.0

SERIES_A = [Fraction(1), Fraction(0), Fraction(-4, 25), Fraction(0), Fraction(-392, 625),
            Fraction(0), Fraction(-6272, 625), Fraction(0), Fraction(-141196832, 390625)]
SERIES_B = [Fraction(0), Fraction(2, 5), Fraction(0), Fraction(32, 125), Fraction(0),
            Fraction(7056, 3125), Fraction(0), Fraction(175616, 3125), Fraction(0)]

# Transitional numerators, ascending powers of xi.
P10 = (Fraction(144), Fraction(120), Fraction(1))
P20 = (Fraction(0), Fraction(1728), Fraction(144))
P11 = (Fraction(0), Fraction(216), Fraction(210), Fraction(3), Fraction(-1, 60))
P21 = tuple(Fraction(c, 60) for c in (497664, -134784, 266112, 25704, -24, 1))
XI_POLE = 12
C1 = Fraction(109, 10)


def stokes_constant() -> complex:
    return 1j * math.sqrt(6 / (5 * math.pi))


# --- Coordinate maps -----------------------------------------------------------

def _xi_from_x(x: complex) -> complex:
    xi = complex(x) / X_SCALE
    if xi.imag == 0 and xi.real < 0:
        raise BranchCut(f"x = {x} maps onto the cut arg(xi) = -pi")
    return xi


def scaled_from_x(x: complex, y: complex, yprime: complex) -> ScaledState:
    """PI solution data (x, y, y') -> (t, pi1, pi2), principal branches throughout."""
    xi = _xi_from_x(x)
    if xi == 0:
        raise BranchCut("x = 0 has no scaled image")
    log_xi = cmath.log(xi)
    t = 0.8 * cmath.exp(1.25 * log_xi)
    pi1 = cmath.exp(-0.5 * log_xi) * ETA_SCALE * y
    pi2 = cmath.exp(-0.75 * log_xi) * DETA_SCALE * yprime
    sheet = round((1.25 * log_xi.imag - cmath.phase(t)) / (2 * math.pi))
    return ScaledState(t=t, pi1=pi1, pi2=pi2, sheet=sheet)


def scaled_to_x(state: ScaledState) -> Tuple[complex, complex, complex]:
    arg_xi = 0.8 * (cmath.phase(state.t) + 2 * math.pi * state.sheet)
    log_xi = complex(0.8 * math.log(1.25 * abs(state.t)), arg_xi)
    xi = cmath.exp(log_xi)
    x = X_SCALE * xi
    y = cmath.exp(0.5 * log_xi) * state.pi1 / ETA_SCALE
    yprime = cmath.exp(0.75 * log_xi) * state.pi2 / DETA_SCALE
    return x, y, yprime


def boutroux_from_x(x: complex, y: complex, yprime: complex) -> Tuple[complex, complex, complex]:
    """(x, y, y') -> (z, u1, u2) with z = (4/5) x^(5/4), u1 = x^(-1/2) y, u2 = x^(-3/4) y'."""
    if x == 0:
        raise BranchCut("x = 0 has no Boutroux image")
    log_x = cmath.log(x)
    return (0.8 * cmath.exp(1.25 * log_x), cmath.exp(-0.5 * log_x) * y,
            cmath.exp(-0.75 * log_x) * yprime)


def scaled_to_boutroux(state: ScaledState) -> Tuple[complex, complex, complex]:
    return BETA * state.t, ALPHA * state.pi1, ALPHA / BETA * state.pi2


def boutroux_to_scaled(z: complex, u1: complex, u2: complex) -> ScaledState:
    return ScaledState(t=z / BETA, pi1=u1 / ALPHA, pi2=BETA * u2 / ALPHA)


def scaled_state_to_atlas(state: ScaledState) -> AtlasState:
    z, u1, u2 = scaled_to_boutroux(state)
    return AtlasState(z=z, point=ChartPoint(chart=ChartId.B, c1=u1, c2=u2))


def p_plus_minus(pi1: complex, pi2: complex) -> Tuple[complex, complex]:
    """Diagonalising variables of the linearisation at pi = (1, 0)."""
    return (pi1 - 1 + pi2) / 2, (pi1 - 1 - pi2) / 2


def equilibrium(epsilon: int) -> Equilibrium:
    """Autonomous equilibrium u1 = eps i / sqrt(6), u2 = 0 and its eigenvalues."""
    if epsilon not in (1, -1):
        raise ValueError("epsilon must be +1 or -1")
    lam = 24 ** 0.25 * cmath.exp(1j * math.pi * (0.5 - epsilon / 4))
    return Equilibrium(epsilon=epsilon, u1=epsilon * 1j / math.sqrt(6), eigenvalues=(lam, -lam))


def equilibria() -> List[Equilibrium]:
    return [equilibrium(1), equilibrium(-1)]


# --- Formal series -----------------------------------------------------------

def series_coefficients(order: int = MAX_SERIES_ORDER) -> Tuple[List[Fraction], List[Fraction]]:
    """
    Exact coefficients of pi1 ~ sum a_k t^-k, pi2 ~ sum b_k t^-k from

        b_k = (2/5 - (k-1)) a_{k-1}
        a_k = (3/5 - (k-1)) b_{k-1} - 1/2 sum_{i=1}^{k-1} a_i a_{k-i}
    """
    a = [Fraction(1)]
    b = [Fraction(0)]
    for k in range(1, order + 1):
        b.append((Fraction(2, 5) - (k - 1)) * a[k - 1])
        conv = sum((a[i] * a[k - i] for i in range(1, k)), Fraction(0))
        a.append((Fraction(3, 5) - (k - 1)) * b[k - 1] - conv / 2)
    return a, b


def truncated_series(t: complex, order: int = MAX_SERIES_ORDER) -> Tuple[complex, complex]:
    if order > MAX_SERIES_ORDER or order < 0:
        raise OrderUnavailable(f"series is tabulated through t^-{MAX_SERIES_ORDER}, asked {order}")
    if abs(t) < SERIES_TRUST:
        logger.warning(f"formal series evaluated at |t| = {abs(t):.3g} < {SERIES_TRUST:g}")
    s = 1 / t
    pi1 = sum(float(SERIES_A[k]) * s ** k for k in range(order + 1))
    pi2 = sum(float(SERIES_B[k]) * s ** k for k in range(order + 1))
    return complex(pi1), complex(pi2)


def scaled_field(t: complex, pi: np.ndarray) -> np.ndarray:
    pi1, pi2 = pi
    return np.array([pi2 - 2 * pi1 / (5 * t), (pi1 * pi1 - 1) / 2 - 3 * pi2 / (5 * t)], dtype=complex)


def integrate_scaled(state: ScaledState, t1: complex, ctl: Optional[StepControl] = None) -> ScaledState:
    """Straight-line integration of the scaled system; the path must avoid t = 0 and poles."""
    pi = integrate_system(scaled_field, state.t, [state.pi1, state.pi2], t1, ctl)
    return ScaledState(t=t1, pi1=pi[0], pi2=pi[1])


def seed_from_series(t: complex, order: int = MAX_SERIES_ORDER) -> ScaledState:
    pi1, pi2 = truncated_series(t, order)
    return ScaledState(t=t, pi1=pi1, pi2=pi2)


# --- Transitional expansion ----------------------------------------------------

def _poly(coeffs) -> Polynomial:
    return Polynomial([float(c) for c in coeffs])


_P = {
    (1, 0): _poly(P10),
    (2, 0): _poly(P20),
    (1, 1): _poly(P11),
    (2, 1): _poly(P21),
}


def _check_xi(xi: complex):
    if abs(xi - XI_POLE) < 1e-14:
        raise AtSingularXi("transitional terms are singular at xi = 12")


def pi_level(xi: complex, level: int) -> Tuple[complex, complex]:
    """(pi_{1,l}(xi), pi_{2,l}(xi)) = (P_{1l} / (xi-12)^(l+2), P_{2l} / (xi-12)^(l+3))."""
    if level not in (0, 1):
        raise OrderUnavailable(f"transitional level {level} is not tabulated")
    _check_xi(xi)
    d = xi - XI_POLE
    return (complex(_P[1, level](xi)) / d ** (level + 2),
            complex(_P[2, level](xi)) / d ** (level + 3))


def pi_level_derivative(xi: complex, level: int) -> Tuple[complex, complex]:
    _check_xi(xi)
    d = xi - XI_POLE
    out = []
    for k, power in ((1, level + 2), (2, level + 3)):
        p = _P[k, level]
        out.append(complex(p.deriv()(xi)) / d ** power - power * complex(p(xi)) / d ** (power + 1))
    return out[0], out[1]


def pi912_level(xi: complex, level: int) -> complex:
    """Expansion terms of pi1/pi2, whose zeros are the poles."""
    _check_xi(xi)
    p10, p20 = complex(_P[1, 0](xi)), complex(_P[2, 0](xi))
    if p20 == 0:
        raise AtSingularXi("pi_{2,0} vanishes")
    if level == 0:
        return (xi - XI_POLE) * p10 / p20
    if level == 1:
        p11, p21 = complex(_P[1, 1](xi)), complex(_P[2, 1](xi))
        return (p11 * p20 - p10 * p21) / p20 ** 2
    raise OrderUnavailable(f"transitional level {level} is not tabulated")


def pi912_level_derivative(xi: complex, level: int) -> complex:
    p10, p20 = _P[1, 0], _P[2, 0]
    if level == 0:
        num = Polynomial([-XI_POLE, 1]) * p10
        den = p20
    elif level == 1:
        num = _P[1, 1] * p20 - p10 * _P[2, 1]
        den = p20 * p20
    else:
        raise OrderUnavailable(f"transitional level {level} is not tabulated")
    d = complex(den(xi))
    if d == 0:
        raise AtSingularXi("pi_{2,0} vanishes")
    return (complex(num.deriv()(xi)) * d - complex(num(xi)) * complex(den.deriv()(xi))) / d ** 2


def _horner(coeffs, x: Fraction) -> Fraction:
    acc = Fraction(0)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def pi912_level0_exact(xi: Fraction) -> Fraction:
    xi = Fraction(xi)
    if xi == XI_POLE:
        raise AtSingularXi("evaluate the derivative at xi = 12 instead")
    return (xi - XI_POLE) * _horner(P10, xi) / _horner(P20, xi)


def transitional_derivative_at_pole() -> Tuple[Fraction, Fraction]:
    """(pi912_0'(12), pi912_1(12)) in exact arithmetic; the first is 1/24."""
    x = Fraction(XI_POLE)
    p10, p20 = _horner(P10, x), _horner(P20, x)
    p11, p21 = _horner(P11, x), _horner(P21, x)
    return p10 / p20, (p11 * p20 - p10 * p21) / p20 ** 2


def tau_of(t: complex) -> complex:
    return cmath.exp(-t) * cmath.exp(-0.5 * cmath.log(t))


def transitional_eval(t: complex, C: complex, order: int = 2) -> Tuple[complex, complex]:
    """pi_k(t) ~ sum_{l < order} t^-l pi_{k,l}(C tau(t))."""
    if order not in (1, 2):
        raise OrderUnavailable(f"transitional expansion has 1 or 2 levels, asked {order}")
    xi = C * tau_of(t)
    pi1 = pi2 = 0j
    for level in range(order):
        a, b = pi_level(xi, level)
        pi1 += a / t ** level
        pi2 += b / t ** level
    return pi1, pi2


# --- tau equation and pole sequences ---------------------------------------------

def _seed_guard(n: int, log_tau: complex, alpha: float):
    w = abs(2 * math.pi * n)
    if n == 0 or w <= 4 * (abs(log_tau) + abs(alpha) * math.log(w)):
        raise SeedInvalid(f"n = {n} is too small for log tau = {log_tau}")


def solve_tau_equation(tau: complex, log_tau: Optional[complex], n: int, alpha: float = -0.5,
                       tol: float = 1e-14, max_iter: int = 50) -> complex:
    """Root t_n of exp(-t) t^alpha = tau on the branch selected by n."""
    lam = cmath.log(tau) if log_tau is None else log_tau
    _seed_guard(n, lam, alpha)
    w = 2j * math.pi * n
    t = w + alpha * cmath.log(w) - lam
    for _ in range(max_iter):
        g = t - alpha * cmath.log(t) - (w - lam)
        dt = -g / (1 - alpha / t)
        t += dt
        if abs(dt) < tol * abs(t):
            break
    else:
        raise NewtonDiverged(f"tau equation did not converge for n = {n}")
    residual = abs(cmath.exp(-t + alpha * cmath.log(t)) - tau)
    if residual > 1e-10 * max(1.0, abs(tau)):
        raise NewtonDiverged(f"tau equation residual {residual:.3e} for n = {n}")
    return t


def tn_expansion(n: int, log_tau: complex, alpha: float = -0.5, order: int = 3) -> complex:
    """Explicit large-n expansion of the tau-equation root through ``order``."""
    if not 0 <= order <= 3:
        raise OrderUnavailable(f"t_n expansion is tabulated through order 3, asked {order}")
    _seed_guard(n, log_tau, alpha)
    w = 2j * math.pi * n
    L = cmath.log(w)
    u, v = 1 / w, L / w
    a, lam = alpha, log_tau
    terms = [
        0j,
        a ** 2 * v - a * lam * u,
        -a * lam * (a + lam / 2) * u ** 2 + a ** 2 * (a + lam) * u * v - a ** 3 * v ** 2 / 2,
        (-a * lam * (a ** 2 + 3 * a * lam / 2 + lam ** 2 / 3) * u ** 3
         + a ** 2 * (a ** 2 + 3 * a * lam + lam ** 2) * u ** 2 * v
         - a ** 3 * (3 * a / 2 + lam) * u * v ** 2 + a ** 4 * v ** 3 / 3),
    ]
    return w + a * L - lam + sum(terms[:order + 1])


def _log_c(params: PoleSequenceParams) -> complex:
    if params.C == 0:
        raise CZero("the transitional constant C must be nonzero")
    return cmath.log(params.C) if params.log_c is None else params.log_c


def fast_pole(n: int, log_c: complex, include_order: int = 2,
              c0: float = XI_POLE, c1: float = float(C1)) -> complex:
    """Explicit large-n position T_n of the n-th pole of the first array."""
    w = 2j * math.pi * n
    u, v = 1 / w, cmath.log(w) / w
    k = log_c - math.log(c0)
    T = w - 0.5 * cmath.log(w) + k
    if include_order >= 1:
        T += v / 4 - (k / 2 + c1 / c0) * u
    if include_order >= 2:
        T += v ** 2 / 16 - (k / 4 + 1 / 8 + c1 / (2 * c0)) * u * v
    return T


def newton_pole(n: int, log_c: complex, seed: complex, c1: float = float(C1),
                tol: float = 1e-14, max_iter: int = 50, c0: float = XI_POLE) -> complex:
    """Root of G(T) = T + log(T)/2 + log(c0 + c1/T) - log C - 2 pi i n."""
    T = seed
    target = log_c + 2j * math.pi * n
    for _ in range(max_iter):
        inner = c0 + c1 / T
        G = T + 0.5 * cmath.log(T) + cmath.log(inner) - target
        dG = 1 + 1 / (2 * T) - c1 / (T ** 2 * inner)
        dT = -G / dG
        T += dT
        if abs(dT) < tol * abs(T):
            return T
    raise NewtonDiverged(f"pole-sequence Newton did not converge for n = {n}")


def transitional_pole(n: int, log_c: complex, seed: complex, tol: float = 1e-13,
                      max_iter: int = 50) -> complex:
    """Root of pi912_0(xi(T)) + pi912_1(xi(T)) / T near ``seed``, xi(T) = C tau(T)."""
    T = seed
    for _ in range(max_iter):
        xi = cmath.exp(log_c - T - 0.5 * cmath.log(T))
        H = pi912_level(xi, 0) + pi912_level(xi, 1) / T
        dxi = -xi * (1 + 1 / (2 * T))
        dH = (pi912_level_derivative(xi, 0) + pi912_level_derivative(xi, 1) / T) * dxi \
            - pi912_level(xi, 1) / T ** 2
        dT = -H / dH
        T += dT
        if abs(dT) < tol * abs(T):
            return T
    raise NewtonDiverged(f"transitional pole condition did not converge for n = {n}")


def map_pole_to_x(T: complex) -> complex:
    """X = -2^(-3/5) 3^(-1/5) (5T/4)^(4/5), principal branch."""
    return X_SCALE * cmath.exp(0.8 * cmath.log(1.25 * T))


def pole_sequence(params: PoleSequenceParams) -> List[PolePrediction]:
    log_c = _log_c(params)
    c0 = params.c_series[0]
    c1 = params.c_series[1] if params.include_order >= 1 else 0.0
    out = []
    for n in range(params.n_min, params.n_max + 1):
        T_fast = fast_pole(n, log_c, params.include_order, c0=c0, c1=c1)
        T_newton = newton_pole(n, log_c, T_fast, c1, c0=c0)
        try:
            T_trans = transitional_pole(n, log_c, T_newton)
        except (NewtonDiverged, AtSingularXi) as exc:
            logger.warning(f"transitional refinement failed for n={n}: {exc}")
            T_trans = T_newton
        T = {"fast": T_fast, "newton": T_newton, "transitional": T_trans}[params.mode]
        xi = cmath.exp(log_c - T - 0.5 * cmath.log(T))
        residual = abs(xi - c0 - c1 / T)
        out.append(PolePrediction(n=n, T_fast=T_fast, T_newton=T_newton, T_transitional=T_trans,
                                  X=map_pole_to_x(T), residual=residual))
    return out


def continue_pole_in_c(params: PoleSequenceParams, n: int, steps: int = 16) -> complex:
    """Follow T_n while arg C increases by 2 pi; the endpoint is T_{n+1}."""
    log_c = _log_c(params)
    c0, c1 = params.c_series
    T = newton_pole(n, log_c, fast_pole(n, log_c, c0=c0, c1=c1), c1, c0=c0)
    for k in range(1, steps + 1):
        T = newton_pole(n, log_c + 2j * math.pi * k / steps, T, c1, c0=c0)
    return T


# --- Stokes constant and tritronquee poles -------------------------------------------

_STOKES_CONTROL = StepControl(rel_tol=1e-12, abs_tol=1e-14, h_init=1e-2, h_max=0.25)
STOKES_HEIGHT = 40.0


def stokes_gap(c: float, height: float = STOKES_HEIGHT, ctl: Optional[StepControl] = None) -> complex:
    """exp(c) c^(1/2) (p_down - p_up)^- at t = c, both solutions seeded from the series."""
    ctl = ctl or _STOKES_CONTROL
    up = integrate_scaled(seed_from_series(complex(c, height)), complex(c, 0), ctl)
    down = integrate_scaled(seed_from_series(complex(c, -height)), complex(c, 0), ctl)
    gap = p_plus_minus(down.pi1, down.pi2)[1] - p_plus_minus(up.pi1, up.pi2)[1]
    return math.exp(c) * math.sqrt(c) * gap


def stokes_constant_numeric(cs: Sequence[float] = (8.0, 10.0, 12.0),
                            ctl: Optional[StepControl] = None) -> Dict:
    """Fit g(c) = S + k1/c + k2/c^2 through the measured gaps."""
    cs = [float(c) for c in cs]
    gaps = [stokes_gap(c, ctl=ctl) for c in cs]
    degree = min(3, len(cs))
    A = np.array([[c ** -k for k in range(degree)] for c in cs], dtype=complex)
    coeffs, *_ = np.linalg.lstsq(A, np.array(gaps), rcond=None)
    S = complex(coeffs[0])
    exact = stokes_constant()
    logger.info(f"Stokes constant: numeric {S:.8g}, closed form {exact:.8g}")
    return {"S": S, "gaps": dict(zip(cs, gaps)), "closed_form": exact,
            "relative_error": abs(S - exact) / abs(exact)}


def tritronquee_seed(re_t: float = 3.0, height: float = STOKES_HEIGHT) -> AtlasState:
    """p_down seeded from the series far below the real t-axis, in Boutroux form."""
    return scaled_state_to_atlas(seed_from_series(complex(re_t, -height)))


def locate_tritronquee_poles(C: Optional[complex] = None, n_min: int = 1, n_max: int = 10,
                             re_t: float = 3.0, ctl: Optional[StepControl] = None,
                             trigger: float = 0.5, height: float = STOKES_HEIGHT) -> List[PolePrediction]:
    """
    Integrate p_down up the line Re t = re_t, branch off horizontally at each
    predicted pole and refine it; T_numeric is None where refinement fails.
    """
    ctl = ctl or StepControl(rel_tol=1e-12, abs_tol=1e-14)
    C = stokes_constant() if C is None else C
    predictions = pole_sequence(PoleSequenceParams(C=C, n_min=n_min, n_max=n_max))
    state = tritronquee_seed(re_t, height)
    t_now = complex(re_t, -height)
    out = []
    for pred in predictions:
        t_turn = complex(re_t, pred.T_newton.imag)
        state = integrate_path(state, PathSpec.straight(BETA * t_now, BETA * t_turn), ctl).final
        t_now = t_turn
        found = None
        try:
            branch = integrate_path(state, PathSpec.straight(BETA * t_turn, BETA * pred.T_newton), ctl)
            event = detect_pole([branch.final], ctl, trigger=trigger)
            found = event.zeta / BETA
        except PainleveAtlasError as exc:
            logger.warning(f"tritronquee pole n={pred.n} not refined: {type(exc).__name__}: {exc}")
        out.append(pred.model_copy(update={"T_numeric": found}))
    return out


def decay_exponent(rows: List[PolePrediction]) -> Optional[float]:
    """Slope of -log|T_numeric - T_newton| against log n."""
    pts = [(math.log(r.n), math.log(abs(r.T_numeric - r.T_newton)))
           for r in rows if r.T_numeric is not None and r.T_numeric != r.T_newton]
    if len(pts) < 2:
        return None
    x, y = np.array(pts).T
    return float(-np.polyfit(x, y, 1)[0])


def decays_monotonically(rows: List[PolePrediction], n_from: int = 3) -> bool:
    """|T_numeric - T_newton| strictly decreasing in n over the located rows with n >= n_from."""
    errs = [abs(r.T_numeric - r.T_newton) for r in rows if r.n >= n_from and r.T_numeric is not None]
    return all(b < a for a, b in zip(errs, errs[1:]))
