"""
Adaptive complex-path integration on the atlas.

Every path segment is parametrised by real arclength s, so the chart ODE
dc/ds = f(c, z(s)) * dz/ds is stepped with a real step size h.  The stepper
is the Dormand-Prince 5(4) pair; after every accepted step the state may be
moved to a better chart, and passages close to the pole line are refined
into PoleEvents by Newton's method on u912(z) = 0.
"""
import logging
import math
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from . import atlas
from .errors import (
    ApproachedInfinitySet,
    EnergyInfinite,
    FieldInfinite,
    IntegrationError,
    NewtonDiverged,
    NoValidChart,
    NotNearInfinitySet,
    StepLimitExceeded,
    StepUnderflow,
)
from .models import (
    ArcSegment,
    AtlasState,
    ChartId,
    ChartPoint,
    ChartSwitch,
    EnergyValue,
    LineSegment,
    PathSpec,
    PoleEvent,
    StepControl,
    Trajectory,
)

logger = logging.getLogger(__name__)

# Dormand-Prince 5(4) extended Butcher table.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.array([
    [0, 0, 0, 0, 0, 0],
    [1 / 5, 0, 0, 0, 0, 0],
    [3 / 40, 9 / 40, 0, 0, 0, 0],
    [44 / 45, -56 / 15, 32 / 9, 0, 0, 0],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0, 0],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0],
    [35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
])
_B5 = np.array([35 / 384, 0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0])
_B4 = np.array([5179 / 57600, 0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4

# Step-size controller clamps.
_GROW_MAX = 5.0
_SHRINK_MIN = 0.2

# Chart switch policy.
SWITCH_GUARD = 0.05
GUARD_PENALTY = 1e3
BASE_CHART_LIMIT = 100.0
C91_PREFERENCE_RADIUS = 0.3
C91_D_WINDOW = 1.0
POLE_D_WINDOW = 1.0

# Tolerances for the straight integrations inside detect_pole.
_NEWTON_CONTROL = StepControl(rel_tol=1e-13, abs_tol=1e-15, h_init=1e-3, h_min=1e-15, h_max=0.05)


def dopri_step(rhs: Callable[[float, np.ndarray], np.ndarray], s: float, y: np.ndarray,
               h: float) -> Tuple[np.ndarray, np.ndarray]:
    """One Dormand-Prince step; returns the 5th-order update and the embedded difference."""
    k = np.zeros((7, y.size), dtype=complex)
    for i in range(7):
        yi = y + h * (_A[i, :i] @ k[:i]) if i else y
        k[i] = rhs(s + _C[i] * h, yi)
    return y + h * (_B5 @ k), h * (_E @ k)


def error_norm(y_old: np.ndarray, y_new: np.ndarray, err: np.ndarray, ctl: StepControl) -> float:
    scale = ctl.abs_tol + ctl.rel_tol * np.maximum(np.abs(y_old), np.abs(y_new))
    return float(np.max(np.abs(err) / scale))


def _next_h(h: float, err: float, ctl: StepControl) -> float:
    if err == 0 or not math.isfinite(err):
        factor = _GROW_MAX if err == 0 else _SHRINK_MIN
    else:
        factor = min(_GROW_MAX, max(_SHRINK_MIN, ctl.safety * err ** -0.2))
    return min(h * factor, ctl.h_max)


def integrate_system(rhs: Callable[[complex, np.ndarray], np.ndarray], z0: complex, y0,
                     z1: complex, ctl: Optional[StepControl] = None,
                     samples: Optional[List] = None) -> np.ndarray:
    """
    Integrate dy/dz = rhs(z, y) along the straight segment z0 -> z1.

    The shared driver for plain complex systems (scaled system, Weierstrass
    continuation, fixed-chart refinements).  When ``samples`` is a list every
    accepted (z, y) pair is appended to it.
    """
    ctl = ctl or StepControl()
    y = np.asarray(y0, dtype=complex).copy()
    length = abs(z1 - z0)
    if length == 0:
        return y
    direction = (z1 - z0) / length

    def real_rhs(s, yy):
        return rhs(z0 + s * direction, yy) * direction

    s, h = 0.0, min(ctl.h_init, length)
    steps = 0
    while s < length * (1 - 1e-15):
        if steps >= ctl.max_steps:
            raise StepLimitExceeded(f"more than {ctl.max_steps} steps from {z0} to {z1}")
        steps += 1
        h = min(h, length - s)
        with np.errstate(all="ignore"):
            y_new, err_vec = dopri_step(real_rhs, s, y, h)
            err = error_norm(y, y_new, err_vec, ctl)
        if err <= 1.0 and np.all(np.isfinite(y_new)):
            s += h
            y = y_new
            if samples is not None:
                samples.append((z0 + s * direction, y.copy()))
        elif h <= ctl.h_min:
            raise StepUnderflow(f"step size underflow at z = {z0 + s * direction}")
        h = max(_next_h(h, err, ctl), min(ctl.h_min, length - s))
    return y


# --- Chart switching -----------------------------------------------------------

def _score(chart: ChartId, x: complex, y: complex, e: complex) -> float:
    score = max(abs(x), abs(y))
    if any(abs(d) < SWITCH_GUARD for d in atlas.CHARTS[chart].field_denominators(x, y, e)):
        score += GUARD_PENALTY
    return score


def _c91_pole_window(coords) -> Optional[complex]:
    """u912 if the point is in the C91 neighbourhood of the pole line, else None."""
    if ChartId.C91 not in coords:
        return None
    return coords[ChartId.C91][1]


def choose_chart(chart: ChartId, x: complex, y: complex, e: complex, ctl: StepControl,
                 force: bool = False) -> Tuple[ChartId, complex, complex]:
    """
    Best chart for the point per the switch policy.  With ``force`` the
    current chart is excluded and hysteresis is ignored.
    """
    coords = atlas.coordinates_everywhere(chart, x, y, e)
    if ChartId.C91 in coords and not (force and chart == ChartId.C91):
        a, b = coords[ChartId.C91]
        if abs(b) < C91_PREFERENCE_RADIUS and abs(atlas._d91(a, b, e) - 4) < C91_D_WINDOW:
            return ChartId.C91, a, b

    best, best_score = None, math.inf
    for candidate, (c1, c2) in coords.items():
        if force and candidate == chart:
            continue
        if candidate == ChartId.B and max(abs(c1), abs(c2)) > BASE_CHART_LIMIT:
            continue
        score = _score(candidate, c1, c2, e)
        if score < best_score:
            best, best_score = candidate, score
    if best is None:
        if force:
            return chart, x, y
        raise NoValidChart(f"{chart.value} point ({x}, {y}) is not representable")
    if force:
        return best, coords[best][0], coords[best][1]

    current = _score(chart, x, y, e)
    if chart == ChartId.B and max(abs(x), abs(y)) > BASE_CHART_LIMIT:
        current = math.inf
    if best != chart and best_score < ctl.hysteresis * current:
        return best, coords[best][0], coords[best][1]
    return chart, x, y


def switch_chart(s: AtlasState, ctl: Optional[StepControl] = None, autonomous: bool = False) -> AtlasState:
    ctl = ctl or StepControl()
    e = 0j if autonomous else atlas.eps_of(s.z)
    chart, c1, c2 = choose_chart(s.chart, s.point.c1, s.point.c2, e, ctl)
    if chart == s.chart:
        return s
    return AtlasState(z=s.z, point=ChartPoint(chart=chart, c1=c1, c2=c2))


# --- Single steps ----------------------------------------------------------------

def _chart_rhs(chart: ChartId, position: Callable, direction: Callable, autonomous: bool):
    field = atlas.autonomous_field_raw if autonomous else atlas.field_raw

    def rhs(s, c):
        z = position(s)
        e = 0j if autonomous else atlas.eps_of(z)
        d1, d2 = field(chart, c[0], c[1], e)
        dz = direction(s)
        return np.array([d1 * dz, d2 * dz])
    return rhs


def _chart_step(chart: ChartId, c: np.ndarray, seg, s: float, h: float, ctl: StepControl,
                autonomous: bool) -> Tuple[np.ndarray, float]:
    rhs = _chart_rhs(chart, seg.position, seg.direction, autonomous)
    with np.errstate(all="ignore"):
        c_new, err_vec = dopri_step(rhs, s, c, h)
    if not np.all(np.isfinite(c_new)):
        raise FieldInfinite(f"{chart.value}: step left the finite part of the chart")
    return c_new, error_norm(c, c_new, err_vec, ctl)


def step(s: AtlasState, dz: complex, ctl: Optional[StepControl] = None,
         autonomous: bool = False) -> Tuple[AtlasState, float]:
    """One embedded step along the straight increment dz in the current chart."""
    ctl = ctl or StepControl()
    seg = LineSegment(z_start=s.z, z_end=s.z + dz)
    c = np.array([s.point.c1, s.point.c2], dtype=complex)
    c_new, err = _chart_step(s.chart, c, seg, 0.0, abs(dz), ctl, autonomous)
    new = AtlasState(z=s.z + dz, point=ChartPoint(chart=s.chart, c1=c_new[0], c2=c_new[1]))
    return new, err


def _integrate_fixed_chart(chart: ChartId, c: Tuple[complex, complex], z0: complex, z1: complex,
                           autonomous: bool) -> np.ndarray:
    def rhs(z, y):
        e = 0j if autonomous else atlas.eps_of(z)
        d1, d2 = atlas.field_raw(chart, y[0], y[1], e)
        return np.array([d1, d2])
    return integrate_system(rhs, z0, c, z1, _NEWTON_CONTROL)


# --- Pole detection ----------------------------------------------------------------

def pole_indicator(chart: ChartId, x: complex, y: complex, e: complex) -> Optional[Tuple[complex, complex]]:
    """C91 coordinates (a, b) when the point lies near the pole line, else None."""
    try:
        a, b = atlas.transition(chart, ChartId.C91, x, y, e)
    except (ZeroDivisionError, OverflowError):
        return None
    if not (math.isfinite(abs(a)) and math.isfinite(abs(b))):
        return None
    if abs(atlas._d91(a, b, e) - 4) >= POLE_D_WINDOW:
        return None
    return a, b


def detect_pole(segment: Sequence[AtlasState], ctl: Optional[StepControl] = None,
                autonomous: bool = False, step_index: Optional[int] = None,
                trigger: Optional[float] = None) -> PoleEvent:
    """
    Refine the pole near a pair of states by complex Newton on u912(z) = 0.

    Each iteration integrates the C91 field straight from the current z to
    z - u912/u912', off the original path.
    """
    ctl = ctl or StepControl()
    trigger = ctl.pole_trigger if trigger is None else trigger
    best = None
    for state in segment:
        e = 0j if autonomous else atlas.eps_of(state.z)
        hit = pole_indicator(state.chart, state.point.c1, state.point.c2, e)
        if hit is not None and (best is None or abs(hit[1]) < abs(best[1][1])):
            best = (state, hit)
    if best is None or abs(best[1][1]) >= trigger:
        raise NewtonDiverged("no state of the segment is close to the pole line")

    state, (a, b) = best
    z = state.z
    for iteration in range(ctl.newton_max_iter + 1):
        if abs(b) < ctl.newton_tol:
            logger.info(f"pole at zeta={z:.12g}, a={a:.6g} after {iteration} Newton steps")
            return PoleEvent(zeta=z, a=a, step_index=step_index, source="detect_pole",
                             residual=abs(b), newton_iterations=iteration)
        e = 0j if autonomous else atlas.eps_of(z)
        try:
            b_dot = atlas.field_raw(ChartId.C91, a, b, e)[1]
        except FieldInfinite as exc:
            raise NewtonDiverged(f"C91 field infinite during refinement: {exc}")
        if b_dot == 0:
            raise NewtonDiverged("u912' vanishes")
        dz = -b / b_dot
        if abs(dz) > 1.0 or z + dz == 0:
            raise NewtonDiverged(f"Newton step {dz} left the pole neighbourhood")
        try:
            a, b = _integrate_fixed_chart(ChartId.C91, (a, b), z, z + dz, autonomous)
        except (FieldInfinite, StepUnderflow, StepLimitExceeded) as exc:
            raise NewtonDiverged(f"refinement integration failed: {exc}")
        z = z + dz
        logger.debug(f"newton {iteration}: z={z}, |u912|={abs(b):.3e}")
    raise NewtonDiverged(f"no convergence in {ctl.newton_max_iter} iterations")


# --- Paths -------------------------------------------------------------------------

def _safe_energy(chart: ChartId, x: complex, y: complex, e: complex) -> Optional[EnergyValue]:
    try:
        E = atlas.energy_raw(chart, x, y, e)
    except EnergyInfinite:
        return None
    if not (math.isfinite(E.real) and math.isfinite(E.imag)):
        return None
    return EnergyValue.from_energy(E)


def _check_distance(chart: ChartId, x: complex, y: complex, e: complex, z: complex,
                    ctl: StepControl):
    try:
        d = atlas.distance_raw(chart, x, y, e)
    except (EnergyInfinite, NotNearInfinitySet, ZeroDivisionError):
        return
    if abs(d) < ctl.d_min:
        raise ApproachedInfinitySet(f"|d| = {abs(d):.3e} < {ctl.d_min:g} at z = {z}")


def integrate_path(init: AtlasState, path: PathSpec, ctl: Optional[StepControl] = None,
                   autonomous: bool = False) -> Trajectory:
    """
    Integrate along every segment of ``path``, switching charts after each
    accepted step and recording a PoleEvent at every local minimum of |u912|
    below the trigger.  Integration continues through each pole.
    """
    ctl = ctl or StepControl()
    if abs(path.start - init.z) > 1e-10 * max(1.0, abs(init.z)):
        raise ValueError(f"path starts at {path.start}, state is at {init.z}")

    def eps(z):
        return 0j if autonomous else atlas.eps_of(z)

    chart, x, y = choose_chart(init.chart, init.point.c1, init.point.c2, eps(init.z), ctl)
    z = init.z
    traj = Trajectory(states=[AtlasState(z=z, point=ChartPoint(chart=chart, c1=x, c2=y))],
                      s=[0.0], energies=[_safe_energy(chart, x, y, eps(z))])
    if chart != init.chart:
        traj.chart_switches.append(ChartSwitch(step_index=0, from_chart=init.chart, to_chart=chart))

    s_offset = 0.0
    steps = 0
    h = ctl.h_init
    # |u912| history for the local-minimum trigger.
    prev2, prev1 = math.inf, _indicator_value(chart, x, y, eps(z))

    try:
        for seg in path.segments:
            length = seg.length
            s = 0.0
            while s < length * (1 - 1e-14) and length > 0:
                if steps >= ctl.max_steps:
                    raise StepLimitExceeded(f"more than {ctl.max_steps} steps")
                steps += 1
                h = min(h, length - s)
                c = np.array([x, y], dtype=complex)
                try:
                    c_new, err = _chart_step(chart, c, seg, s, h, ctl, autonomous)
                except (FieldInfinite, ZeroDivisionError, OverflowError):
                    new_chart, nx_, ny_ = choose_chart(chart, x, y, eps(z), ctl, force=True)
                    if new_chart != chart:
                        logger.debug(f"forced switch {chart.value} -> {new_chart.value} at z={z}")
                        traj.chart_switches.append(ChartSwitch(step_index=len(traj.states) - 1,
                                                               from_chart=chart, to_chart=new_chart))
                        chart, x, y = new_chart, nx_, ny_
                        continue
                    traj.n_rejected += 1
                    if h <= ctl.h_min:
                        raise StepUnderflow(f"step size underflow in {chart.value} at z = {z}")
                    h = max(h * _SHRINK_MIN, ctl.h_min)
                    continue

                if err > 1.0:
                    traj.n_rejected += 1
                    if h <= ctl.h_min:
                        raise StepUnderflow(f"step size underflow in {chart.value} at z = {z}")
                    h = max(_next_h(h, err, ctl), ctl.h_min)
                    continue

                s += h
                z = seg.position(s) if s < length else seg.end
                x, y = c_new[0], c_new[1]
                e = eps(z)
                _check_distance(chart, x, y, e, z, ctl)

                new_chart, x, y = choose_chart(chart, x, y, e, ctl)
                if new_chart != chart:
                    logger.debug(f"switch {chart.value} -> {new_chart.value} at z={z}")
                    traj.chart_switches.append(ChartSwitch(step_index=len(traj.states),
                                                           from_chart=chart, to_chart=new_chart))
                    chart = new_chart

                traj.states.append(AtlasState(z=z, point=ChartPoint(chart=chart, c1=x, c2=y)))
                traj.s.append(s_offset + s)
                traj.energies.append(_safe_energy(chart, x, y, e))

                current = _indicator_value(chart, x, y, e)
                if prev1 < ctl.pole_trigger and prev1 <= prev2 and prev1 < current:
                    _record_pole(traj, len(traj.states) - 2, ctl, autonomous)
                prev2, prev1 = prev1, current
                h = _next_h(h, err, ctl)
            s_offset += length
    except IntegrationError as exc:
        exc.partial = traj
        raise

    # A minimum at the very end of the path still counts.
    if len(traj.states) > 1 and prev1 < ctl.pole_trigger and prev1 <= prev2:
        _record_pole(traj, len(traj.states) - 1, ctl, autonomous)
    return traj


def _indicator_value(chart: ChartId, x: complex, y: complex, e: complex) -> float:
    hit = pole_indicator(chart, x, y, e)
    return math.inf if hit is None else abs(hit[1])


def _record_pole(traj: Trajectory, index: int, ctl: StepControl, autonomous: bool):
    lo, hi = max(0, index - 1), min(len(traj.states), index + 2)
    try:
        event = detect_pole(traj.states[lo:hi], ctl, autonomous=autonomous, step_index=index)
    except NewtonDiverged as exc:
        logger.warning(f"pole refinement failed near step {index}: {exc}")
        return
    traj.events.append(event.model_copy(update={"source": f"step:{index}"}))


# --- Detours and diagnostics -------------------------------------------------------------

DETOUR_BULGE = 0.05
MAX_DETOURS = 20


def detour_path(path: PathSpec, attempt: int) -> PathSpec:
    """Push every arc radially outward by 5% per attempt, keeping the end points."""
    if attempt == 0:
        return path
    factor = 1 + DETOUR_BULGE * attempt
    segments = []
    for seg in path.segments:
        if isinstance(seg, ArcSegment):
            outer = ArcSegment(center=seg.center, radius=seg.radius * factor,
                               arg_start=seg.arg_start, arg_end=seg.arg_end)
            segments.append(LineSegment(z_start=seg.start, z_end=outer.start))
            segments.append(outer)
            segments.append(LineSegment(z_start=outer.end, z_end=seg.end))
        else:
            segments.append(seg)
    return PathSpec(segments=segments)


def integrate_with_detours(init: AtlasState, path: PathSpec, ctl: Optional[StepControl] = None,
                           autonomous: bool = False) -> Trajectory:
    """integrate_path, retrying on bulged paths while |d| drops below 10 d_min."""
    ctl = ctl or StepControl()
    guarded = ctl.model_copy(update={"d_min": 10 * ctl.d_min})
    for attempt in range(MAX_DETOURS + 1):
        try:
            return integrate_path(init, detour_path(path, attempt), guarded, autonomous)
        except ApproachedInfinitySet as exc:
            logger.warning(f"detour {attempt + 1}/{MAX_DETOURS}: {exc}")
    return integrate_path(init, detour_path(path, MAX_DETOURS), ctl, autonomous)


def distance_series(traj: Trajectory, autonomous: bool = False) -> List[Tuple[complex, complex]]:
    out = []
    for state in traj.states:
        e = 0j if autonomous else atlas.eps_of(state.z)
        try:
            out.append((state.z, atlas.distance_raw(state.chart, state.point.c1, state.point.c2, e)))
        except (EnergyInfinite, NotNearInfinitySet, ZeroDivisionError):
            continue
    return out


def repellor_slope(traj: Trajectory, near: float = 0.1) -> float:
    """Least-squares slope of log|d| against log|z| over the states with |d| < near."""
    pts = [(math.log(abs(z)), math.log(abs(d))) for z, d in distance_series(traj) if 0 < abs(d) < near]
    if len(pts) < 2:
        raise ValueError("trajectory has fewer than two states near the infinity set")
    lx, ld = np.array(pts).T
    return float(np.polyfit(lx, ld, 1)[0])
