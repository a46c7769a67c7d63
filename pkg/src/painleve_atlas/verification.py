import logging
import math
from collections import defaultdict
from typing import Dict, List, Optional, Tuple

import networkx as nx
import numpy as np

from . import atlas
from .models import ChartId

logger = logging.getLogger(__name__)

C = ChartId

DEFAULT_THRESHOLDS = {
    "round_trip": 1e-12,
    "base_round_trip": 1e-6,
    "pushforward": 1e-6,
    "jacobian": 1e-6,
    "energy": 1e-10,
    "nonautonomous": 1e-10,
}

_SAMPLE_BOX = 1.5
_MIN_DENOMINATOR = 0.05
_MAX_COORD = 1e6


def _rel(a, b, scale=1.0) -> float:
    return abs(a - b) / max(1.0, abs(b), scale)


def _finite(*values) -> bool:
    return all(math.isfinite(abs(v)) and abs(v) < _MAX_COORD for v in values)


def _centre(child: ChartId, e: complex) -> complex:
    spec = atlas.CHARTS[child]
    return spec.center(e) if spec.center is not None else 0j


def edge_jacobian(child: ChartId, x: complex, y: complex, e: complex) -> np.ndarray:
    """d(child)/d(parent) at the parent point (x, y), from the blow-up formulas alone."""
    spec = atlas.CHARTS[child]
    if child == C.C02:
        return np.array([[-1 / x ** 2, 0], [-y / x ** 2, 1 / x]])
    if child == C.C03:
        return np.array([[0, -1 / y ** 2], [1 / y, -x / y ** 2]])
    dx = x - _centre(child, e)
    if spec.kind == 1:
        return np.array([[1 / y, -dx / y ** 2], [0, 1]])
    return np.array([[1, 0], [-y / dx ** 2, 1 / dx]])


def edge_z_derivative(child: ChartId, x: complex, y: complex, e: complex) -> np.ndarray:
    """d(child)/dz at fixed parent coordinates; nonzero only below the z-dependent centre."""
    if child not in atlas.Z_DEPENDENT:
        return np.zeros(2, dtype=complex)
    # x0 = -256 e and de/dz = -5 e^2
    dx0 = 1280 * e * e
    dx = x - _centre(child, e)
    if atlas.CHARTS[child].kind == 1:
        return np.array([-dx0 / y, 0j])
    return np.array([-dx0, y * dx0 / dx ** 2])


class AtlasValidator:
    """
    Validation pass over the chart atlas.
    1. Tree topology of the chart graph (manifest).
    2. Round trips chart -> base -> chart and across every blow-up edge.
    3. Pushforward of each parent field through its blow-up, with the z-term.
    4. Jacobian determinants w, edge by edge.
    5. Energy and u1 coherence against the base chart.
    6. Non-autonomous part of the z-dependent charts.
    """

    def __init__(self, samples: int = 100, seed: int = 0,
                 thresholds: Optional[Dict[str, float]] = None):
        self.samples = samples
        self.seed = seed
        self.thresholds = {**DEFAULT_THRESHOLDS, **(thresholds or {})}
        self.graph = atlas.chart_graph()
        self.report: Dict[str, Dict[str, float]] = defaultdict(dict)
        self._cache: Dict[ChartId, List[Tuple[complex, complex, complex]]] = {}

    # --- sampling ---------------------------------------------------------------

    def _usable(self, chart: ChartId, x: complex, y: complex, e: complex) -> bool:
        spec = atlas.CHARTS[chart]
        try:
            dens = list(spec.field_denominators(x, y, e)) + list(spec.inverse_denominators(x, y, e))
            if any(abs(d) < _MIN_DENOMINATOR for d in dens):
                return False
            if spec.parent is not None:
                px, py = atlas.transition(chart, spec.parent, x, y, e)
                if not _finite(px, py):
                    return False
                pspec = atlas.CHARTS[spec.parent]
                pdens = list(pspec.field_denominators(px, py, e)) + list(pspec.inverse_denominators(px, py, e))
                if any(abs(d) < _MIN_DENOMINATOR for d in pdens):
                    return False
            u1, u2 = spec.inverse(x, y, e)
            return _finite(u1, u2, *spec.field(x, y, e))
        except (ZeroDivisionError, OverflowError):
            return False

    def points(self, chart: ChartId) -> List[Tuple[complex, complex, complex]]:
        """Seeded sample (x, y, e) of chart points away from every printed denominator."""
        if chart in self._cache:
            return self._cache[chart]
        rng = np.random.default_rng([self.seed, list(C).index(chart)])
        out = []
        for _ in range(200 * self.samples):
            if len(out) >= self.samples:
                break
            x, y = (complex(*rng.uniform(-_SAMPLE_BOX, _SAMPLE_BOX, 2)) for _ in range(2))
            radius, angle = 4 + 16 * rng.uniform(), rng.uniform(0, 2 * math.pi)
            z = radius * complex(math.cos(angle), math.sin(angle))
            e = atlas.eps_of(z)
            if self._usable(chart, x, y, e):
                out.append((x, y, e))
        if len(out) < self.samples:
            logger.warning(f"{chart.value}: only {len(out)} of {self.samples} samples usable")
        self._cache[chart] = out
        return out

    # --- topology ---------------------------------------------------------------

    def validate_topology(self) -> List[str]:
        errors = []
        G = self.graph
        if G.number_of_nodes() != len(C):
            errors.append(f"Chart graph has {G.number_of_nodes()} nodes, expected {len(C)}")
        if not nx.is_arborescence(G):
            cycles = list(nx.simple_cycles(G))
            if cycles:
                errors.append(f"Cycle detected in chart graph: {cycles}")
            components = list(nx.weakly_connected_components(G))
            if len(components) > 1:
                errors.append(f"Disconnected component detected. Found {len(components)} islands.")
            if not cycles and len(components) == 1:
                errors.append("Chart graph is not a tree rooted at B")
        roots = [n for n in G.nodes if G.in_degree(n) == 0]
        if roots != [C.B]:
            errors.append(f"Chart graph roots are {roots}, expected [B]")
        for u, v, data in G.edges(data=True):
            if not data.get("center"):
                errors.append(f"Blow-up edge {u.value} -> {v.value} has no centre label")
        for entry in atlas.chart_manifest()["charts"]:
            chart = C(entry["id"])
            parents = list(G.predecessors(chart))
            expected = [C(entry["parent"])] if entry["parent"] else []
            if parents != expected:
                errors.append(f"Manifest parent of {chart.value} is {entry['parent']}, graph says {parents}")
        return errors

    # --- suites -----------------------------------------------------------------

    def _record(self, suite: str, chart: ChartId, residual: float):
        key = chart.value
        self.report[suite][key] = max(self.report[suite].get(key, 0.0), residual)

    def _round_trip(self, chart: ChartId):
        for x, y, e in self.points(chart):
            u1, u2 = atlas.CHARTS[chart].inverse(x, y, e)
            bx, by = atlas.transition(C.B, chart, u1, u2, e)
            self._record("base_round_trip", chart, max(_rel(bx, x), _rel(by, y)))
            parent = atlas.CHARTS[chart].parent
            if parent is None:
                continue
            px, py = atlas.transition(chart, parent, x, y, e)
            cx, cy = atlas.transition(parent, chart, px, py, e)
            self._record("round_trip", chart, max(_rel(cx, x), _rel(cy, y)))

    def _pushforward(self, chart: ChartId):
        parent = atlas.CHARTS[chart].parent
        if parent is None:
            return
        for x, y, e in self.points(chart):
            px, py = atlas.transition(chart, parent, x, y, e)
            f_parent = np.array(atlas.field_raw(parent, px, py, e))
            pushed = edge_jacobian(chart, px, py, e) @ f_parent + edge_z_derivative(chart, px, py, e)
            own = atlas.field_raw(chart, x, y, e)
            scale = max(abs(v) for v in pushed)
            self._record("pushforward", chart, max(_rel(own[0], pushed[0], scale),
                                                   _rel(own[1], pushed[1], scale)))

    def _jacobian(self, chart: ChartId):
        spec = atlas.CHARTS[chart]
        if spec.parent is None:
            return
        pspec = atlas.CHARTS[spec.parent]
        for x, y, e in self.points(chart):
            px, py = atlas.transition(chart, spec.parent, x, y, e)
            expected = pspec.w(px, py, e) * np.linalg.det(edge_jacobian(chart, px, py, e))
            self._record("jacobian", chart, _rel(spec.w(x, y, e), expected))

    def _energy(self, chart: ChartId):
        spec = atlas.CHARTS[chart]
        for x, y, e in self.points(chart):
            u1, u2 = spec.inverse(x, y, e)
            terms = (u2 * u2 / 2, 2 * u1 ** 3, u1)
            base = terms[0] - terms[1] - terms[2]
            w = spec.w(x, y, e)
            E = spec.energy_w(x, y, e) / w
            u1_chart = spec.u1_w(x, y, e) / w
            scale = max(abs(t) for t in terms)
            self._record("energy", chart, max(_rel(E, base, scale), _rel(u1_chart, u1)))

    def _nonautonomous(self, chart: ChartId):
        if chart not in atlas.Z_DEPENDENT:
            return
        parent = atlas.CHARTS[chart].parent
        for x, y, e in self.points(chart):
            px, py = atlas.transition(chart, parent, x, y, e)
            full = np.array(atlas.field_raw(parent, px, py, e))
            limit = np.array(atlas.field_raw(parent, px, py, 0j))
            expected = edge_jacobian(chart, px, py, e) @ (full - limit)
            printed = atlas.NONAUTONOMOUS_PART[chart](x, y, e)
            scale = max(abs(v) for v in expected)
            self._record("nonautonomous", chart, max(_rel(printed[0], expected[0], scale),
                                                     _rel(printed[1], expected[1], scale)))

    def run(self, charts: Optional[List[ChartId]] = None) -> List[str]:
        errors = []
        for chart in charts or list(C):
            if not self.points(chart):
                errors.append(f"No usable sample points in chart {chart.value}")
                continue
            for suite in (self._round_trip, self._pushforward, self._jacobian,
                          self._energy, self._nonautonomous):
                suite(chart)
        for suite, per_chart in self.report.items():
            limit = self.thresholds[suite]
            for chart, residual in per_chart.items():
                if not residual <= limit:
                    errors.append(f"{suite} residual {residual:.3e} exceeds {limit:g} in chart {chart}")
        logger.info(f"charts-verify: {len(errors)} failures over {len(charts or list(C))} charts")
        return errors
