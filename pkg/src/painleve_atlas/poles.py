"""
Local analytic data at poles and region-scale pole fields.

Near a pole zeta the Boutroux-scaled solution has the Laurent expansion
u(z) = (z - zeta)^-2 + c_-1 (z - zeta)^-1 + ... whose only free parameter
a = u911(zeta) enters at the resonant order 4.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from typing import Dict, List, Optional, Tuple

import numpy as np

from .collapser import PoleEventCollapser
from .errors import AtPole, IntegrationError, ChartError, ZetaZero
from .integrator import integrate_path
from .models import (
    AtlasState,
    LaurentCoeffs,
    PathSpec,
    PoleEvent,
    PoleFieldResult,
    Region,
    StepControl,
)

logger = logging.getLogger(__name__)

DEDUP_RADIUS = 1e-6
DEFAULT_RAYS = 32


def _check_zeta(zeta: complex):
    if zeta == 0:
        raise ZetaZero("pole location zeta must be nonzero")


def laurent_coeffs(zeta: complex, a: complex) -> LaurentCoeffs:
    """Coefficients of (z - zeta)^n for n = -2..4."""
    _check_zeta(zeta)
    s = 1 / zeta
    coefficients = [
        1,
        -s / 5,
        3 * s ** 2 / (2 ** 2 * 5),
        -31 * s ** 3 / (2 * 5 ** 3),
        19 * 283 * s ** 4 / (2 ** 4 * 5 ** 5) - 1 / (2 * 5),
        -3 * 11 * 727 * s ** 5 / (2 ** 4 * 5 ** 6) - 11 * s / 150,
        197 * 443 * s ** 6 / (2 ** 6 * 5 ** 6) + 29 * s ** 2 / (2 ** 3 * 3 * 5 ** 2) - a / (2 ** 8 * 7),
    ]
    return LaurentCoeffs(zeta=zeta, a=a, coefficients=[complex(c) for c in coefficients])


def _inverse_z_series(zeta: complex, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Taylor coefficients of 1/z and 1/z^2 in powers of (z - zeta)."""
    j = np.arange(n)
    sign = (-1.0) ** j
    e = sign * zeta ** (-(j + 1.0))
    f = (j + 1) * sign * zeta ** (-(j + 2.0))
    return e.astype(complex), f.astype(complex)


def _recursion_rhs(c: Dict[int, complex], n: int, e: np.ndarray, f: np.ndarray) -> complex:
    """
    Right-hand side of (n-4)(n+3) c_n = ... from
    u'' = 6u^2 + 1 - u'/z + 4u/(25 z^2), with the c_n-terms moved left.
    """
    total = 0j
    for i in range(-2, n + 1):
        j = n - 2 - i
        if i == n or j == n or j < -2:
            continue
        total += 6 * c[i] * c[j]
    if n == 2:
        total += 1
    for k in range(-2, n):
        total -= k * c[k] * e[n - 1 - k]
    for k in range(-2, n - 1):
        total += 4 / 25 * c[k] * f[n - 2 - k]
    return total


def laurent_series(zeta: complex, a: complex, order: int = 10) -> Dict[int, complex]:
    """Laurent coefficients c_-2 .. c_order; order 4 is resonant and fixed by a."""
    _check_zeta(zeta)
    e, f = _inverse_z_series(zeta, order + 4)
    c: Dict[int, complex] = {-2: 1 + 0j}
    c4 = laurent_coeffs(zeta, a).coefficient(4)
    for n in range(-1, order + 1):
        if n == 4:
            c[4] = c4
            continue
        c[n] = _recursion_rhs(c, n, e, f) / ((n - 4) * (n + 3))
    return c


def laurent_compatibility(zeta: complex) -> complex:
    """The order-4 right-hand side; it vanishes for every zeta because the pole is movable."""
    _check_zeta(zeta)
    e, f = _inverse_z_series(zeta, 8)
    c = laurent_series(zeta, 0, order=3)
    return _recursion_rhs(c, 4, e, f)


def _trust_radius(zeta: complex) -> float:
    return min(0.5, abs(zeta) / 10)


def laurent_eval(zeta: complex, a: complex, z: complex, order: int = 4) -> complex:
    """Partial sum of the Laurent series through (z - zeta)^order."""
    if z == zeta:
        raise AtPole(f"z = zeta = {zeta}")
    w = z - zeta
    if abs(w) > _trust_radius(zeta):
        logger.warning(f"|z - zeta| = {abs(w):.3g} beyond the trust radius {_trust_radius(zeta):.3g}")
    if order <= 4:
        coeffs = laurent_coeffs(zeta, a).coefficients
        return sum(coeffs[k + 2] * w ** k for k in range(-2, order + 1))
    c = laurent_series(zeta, a, order)
    return sum(c[k] * w ** k for k in range(-2, order + 1))


def energy_near_pole(zeta: complex, a: complex, z: complex) -> complex:
    """Two-term expansion of E near a pole: simple pole with residue 4/(5 zeta)."""
    _check_zeta(zeta)
    if z == zeta:
        raise AtPole(f"z = zeta = {zeta}")
    return 4 / (5 * zeta * (z - zeta)) + a / 2 ** 7 - 22 / (5 * zeta) ** 2


# --- Pole fields -------------------------------------------------------------

def _exit_point(start: complex, direction: complex, region: Region) -> complex:
    """Where the ray start + t*direction leaves the rectangle."""
    t_exit = math.inf
    for lo, hi, p, d in ((region.lower_left.real, region.upper_right.real, start.real, direction.real),
                         (region.lower_left.imag, region.upper_right.imag, start.imag, direction.imag)):
        if d > 0:
            t_exit = min(t_exit, (hi - p) / d)
        elif d < 0:
            t_exit = min(t_exit, (lo - p) / d)
    return start + max(t_exit, 0.0) * direction


def ray_paths(seed_z: complex, region: Region, n_rays: int = DEFAULT_RAYS) -> List[PathSpec]:
    """A fan of rays from the seed to the region boundary, plus one circular sweep."""
    paths = []
    for k in range(n_rays):
        direction = complex(math.cos(2 * math.pi * k / n_rays), math.sin(2 * math.pi * k / n_rays))
        end = _exit_point(seed_z, direction, region)
        if abs(end - seed_z) > 1e-12:
            paths.append(PathSpec.straight(seed_z, end))
    radius = 0.4 * min(region.width, region.height)
    center = region.center
    if radius > 0:
        theta0 = 0.0 if seed_z == center else math.atan2((seed_z - center).imag, (seed_z - center).real)
        sweep = PathSpec.arc(radius, theta0, theta0 + 2 * math.pi, center=center)
        lead = PathSpec.straight(seed_z, sweep.start)
        paths.append(PathSpec(segments=list(lead.segments) + list(sweep.segments)))
    return paths


def boustrophedon_path(seed_z: complex, region: Region, rows: int) -> PathSpec:
    """Seed -> lower-left corner, then horizontal sweeps alternating in direction."""
    points = [seed_z, region.lower_left]
    left, right = region.lower_left.real, region.upper_right.real
    for r in range(rows + 1):
        y = region.lower_left.imag + region.height * r / max(rows, 1)
        row = [complex(left, y), complex(right, y)] if r % 2 == 0 else [complex(right, y), complex(left, y)]
        if abs(points[-1] - row[0]) > 0:
            points.append(row[0])
        points.append(row[1])
    deduped = [points[0]] + [p for prev, p in zip(points, points[1:]) if p != prev]
    return PathSpec.polyline(deduped)


def _run_path(seed: AtlasState, path: PathSpec, ctl: StepControl, autonomous: bool):
    try:
        traj = integrate_path(seed, path, ctl, autonomous=autonomous)
        return traj.events, None
    except (IntegrationError, ChartError) as exc:
        return [], f"path {path.start}->{path.end}: {type(exc).__name__}: {exc}"


def pole_field(seed: AtlasState, region: Region, strategy: str = "rays",
               n_rays: int = DEFAULT_RAYS, rows: int = 8, ctl: Optional[StepControl] = None,
               autonomous: bool = False, threads: int = 1,
               dedup_radius: float = DEDUP_RADIUS) -> PoleFieldResult:
    """
    Cover ``region`` with integration paths from ``seed`` and return the
    deduplicated pole events inside it.  Failed paths become warnings.
    """
    ctl = ctl or StepControl()
    if region.is_empty:
        return PoleFieldResult()
    if strategy == "rays":
        paths = ray_paths(seed.z, region, n_rays)
    elif strategy == "boustrophedon":
        paths = [boustrophedon_path(seed.z, region, rows)]
    else:
        raise ValueError(f"unknown pole-field strategy {strategy!r}")

    with ThreadPoolExecutor(max_workers=max(1, threads)) as pool:
        results = list(pool.map(lambda p: _run_path(seed, p, ctl, autonomous), paths))

    raw: List[PoleEvent] = []
    warnings = []
    for events, warning in results:
        raw.extend(events)
        if warning:
            logger.warning(warning)
            warnings.append(warning)
    events = PoleEventCollapser(raw, radius=dedup_radius, region=region).run()
    logger.info(f"pole field: {len(raw)} raw events -> {len(events)} poles over {len(paths)} paths")
    return PoleFieldResult(events=events, warnings=warnings, n_paths=len(paths))


def nearest_neighbour_spacings(events: List[PoleEvent]) -> List[float]:
    if len(events) < 2:
        return []
    zs = np.array([ev.zeta for ev in events])
    dist = np.abs(zs[:, None] - zs[None, :])
    np.fill_diagonal(dist, np.inf)
    return [float(d) for d in dist.min(axis=1)]


def spacing_histogram(spacings: List[float], bins: int = 10) -> Dict:
    """Nearest-neighbour diagnostic: histogram, median and relative spread around the median."""
    if not spacings:
        return {"counts": [], "edges": [], "median": None, "relative_spread": None, "n": 0}
    arr = np.asarray(spacings)
    counts, edges = np.histogram(arr, bins=bins)
    median = float(np.median(arr))
    q10, q90 = np.percentile(arr, [10, 90])
    return {
        "counts": counts.tolist(),
        "edges": edges.tolist(),
        "median": median,
        "relative_spread": float((q90 - q10) / median),
        "n": int(arr.size),
    }
