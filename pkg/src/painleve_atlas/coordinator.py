import logging
import math
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from . import asymptotics, atlas, elliptic, poles
from .config import RunConfig
from .errors import (
    ChartError,
    ConfigError,
    ExpansionError,
    IntegrationError,
    LatticeError,
)
from .integrator import integrate_path, integrate_with_detours, repellor_slope
from .models import AtlasState, ChartId, ChartPoint, PathSpec, PoleEvent, PolePrediction, Trajectory
from .verification import AtlasValidator

logger = logging.getLogger(__name__)

# Failures that end a run early but still leave partial output behind.
NUMERIC_FAILURES = (IntegrationError, LatticeError, ExpansionError, ChartError)

MONODROMY_TOL = 1e-6
FLOW_PERIOD_TOL = 1e-6
TRITRONQUEE_DECAY_MIN = 1.5
MONOTONE_FROM_N = 3
# Order-1 period asymptotics are checked from this level on.
PERIOD_CHECK_MIN_Q = 1e3
PERIOD_DEVIATION_TOL = 1e-3
LAURENT_SLOPE_MIN = 4.7
# The order-5 remainder at |z - zeta| = 0.1 is ~1e-8 against |u| ~ 100.
LAURENT_REL_TOL = 1e-13

COMMANDS = ("charts-verify", "integrate", "pole-field", "tritronquee", "periods", "laurent")


class RunResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    command: str
    report: Dict[str, Any] = Field(default_factory=dict)
    trajectory: Optional[Trajectory] = None
    events: List[PoleEvent] = Field(default_factory=list)
    predictions: List[PolePrediction] = Field(default_factory=list)
    period_rows: List[Dict[str, Any]] = Field(default_factory=list)
    grid: List[Tuple[float, float, float]] = Field(default_factory=list)
    laurent_rows: List[Dict[str, Any]] = Field(default_factory=list)
    # Invariant failures; non-empty means exit 1.
    errors: List[str] = Field(default_factory=list)
    # Numeric failure that cut the run short; set means exit 2.
    partial: Optional[str] = None


def _relative(a: complex, b: complex) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


def _base_values(state: AtlasState) -> Optional[Tuple[complex, complex]]:
    try:
        return atlas.chart_to_base(state.point, state.z)
    except ChartError:
        return None


class RunCoordinator:
    """
    Runs one CLI command from a validated RunConfig and collects everything the
    exporters need into a RunResult.
    """

    def __init__(self, config: RunConfig):
        self.config = config
        self.ctl = config.control()

    def run(self, command: str) -> RunResult:
        handlers: Dict[str, Callable[[], RunResult]] = {
            "charts-verify": self.charts_verify,
            "integrate": self.integrate,
            "pole-field": self.pole_field,
            "tritronquee": self.tritronquee,
            "periods": self.periods,
            "laurent": self.laurent,
        }
        if command not in handlers:
            raise ConfigError(f"unknown command {command!r}")
        logger.info(f"running {command}")
        return handlers[command]()

    @staticmethod
    def check(result: RunResult):
        if result.errors:
            raise ValueError(f"CRITICAL: Invariant Violation in {result.command}: {result.errors}")

    # --- charts-verify -----------------------------------------------------------------

    def charts_verify(self) -> RunResult:
        vcfg = self.config.verify
        validator = AtlasValidator(samples=vcfg.samples, seed=self.config.seed,
                                   thresholds=vcfg.thresholds)

        # Check A: structure of the chart tree
        errors = validator.validate_topology()
        # Check B: the numeric suites only make sense on a sound tree
        if not errors:
            errors = validator.run()

        report = {
            "samples": vcfg.samples,
            "seed": self.config.seed,
            "thresholds": dict(validator.thresholds),
            "max_residual": {suite: dict(sorted(per_chart.items()))
                             for suite, per_chart in sorted(validator.report.items())},
            "passed": not errors,
        }
        return RunResult(command="charts-verify", report=report, errors=errors)

    # --- integrate ---------------------------------------------------------------------

    def integrate(self) -> RunResult:
        icfg = self.config.integrate
        init = icfg.initial_state()
        path = icfg.path_spec()
        runner = integrate_with_detours if icfg.detours else integrate_path
        result = RunResult(command="integrate")
        try:
            traj = runner(init, path, self.ctl, autonomous=icfg.autonomous)
        except NUMERIC_FAILURES as exc:
            traj = getattr(exc, "partial", None)
            result.partial = f"{type(exc).__name__}: {exc}"
            logger.error(f"integration stopped: {result.partial}")
        if traj is None:
            result.report = {"path_length": path.length, "n_states": 0}
            return result

        result.trajectory = traj
        result.events = list(traj.events)
        report = {
            "path_length": path.length,
            "n_states": len(traj.states),
            "n_rejected": traj.n_rejected,
            "n_chart_switches": len(traj.chart_switches),
            "n_poles": len(traj.events),
            "final": {"z": traj.final.z, "chart": traj.final.chart.value,
                      "c1": traj.final.point.c1, "c2": traj.final.point.c2},
        }
        if icfg.monodromy_check and result.partial is None:
            report["monodromy"] = self._monodromy(init, traj.final, result.errors)
        if icfg.repellor_near is not None:
            try:
                report["repellor_slope"] = repellor_slope(traj, icfg.repellor_near)
            except ValueError as exc:
                logger.warning(f"repellor slope unavailable: {exc}")
                report["repellor_slope"] = None
        result.report = report
        return result

    @staticmethod
    def _monodromy(init: AtlasState, final: AtlasState, errors: List[str]) -> Dict[str, Any]:
        """Once around x = 0: (u1, u2) -> (-u1, i u2)."""
        start, end = _base_values(init), _base_values(final)
        if start is None or end is None:
            errors.append("monodromy check needs both end points off the infinity set")
            return {"residual": None}
        expected = (-start[0], 1j * start[1])
        residual = max(_relative(end[0], expected[0]), _relative(end[1], expected[1]))
        if not residual <= MONODROMY_TOL:
            errors.append(f"monodromy residual {residual:.3e} exceeds {MONODROMY_TOL:g}")
        return {"start": start, "end": end, "expected": expected, "residual": residual}

    # --- pole-field --------------------------------------------------------------------

    def pole_field(self) -> RunResult:
        pcfg = self.config.pole_field
        field = poles.pole_field(pcfg.seed(), pcfg.region(), strategy=pcfg.strategy,
                                 n_rays=pcfg.n_rays, rows=pcfg.rows, ctl=self.ctl,
                                 autonomous=pcfg.autonomous, threads=self.config.threads,
                                 dedup_radius=pcfg.dedup_radius)
        spacings = poles.nearest_neighbour_spacings(field.events)
        report = {
            "n_paths": field.n_paths,
            "n_poles": len(field.events),
            "warnings": field.warnings,
            "spacing": poles.spacing_histogram(spacings, bins=pcfg.histogram_bins),
        }
        result = RunResult(command="pole-field", report=report, events=field.events)
        if field.n_paths and len(field.warnings) == field.n_paths:
            result.partial = f"all {field.n_paths} paths failed"
        return result

    # --- tritronquee -------------------------------------------------------------------

    def tritronquee(self) -> RunResult:
        tcfg = self.config.tritronquee
        closed = asymptotics.stokes_constant()
        report: Dict[str, Any] = {"S_closed_form": closed, "c0": asymptotics.XI_POLE,
                                  "c1": float(asymptotics.C1)}
        result = RunResult(command="tritronquee")
        C = tcfg.C
        if tcfg.stokes_check:
            try:
                stokes = asymptotics.stokes_constant_numeric(tcfg.stokes_cs, ctl=None)
                report["stokes"] = stokes
                if C is None:
                    C = closed if (stokes["S"] / closed).real > 0 else -closed
            except NUMERIC_FAILURES as exc:
                result.partial = f"Stokes constant: {type(exc).__name__}: {exc}"
                logger.error(result.partial)
        C = closed if C is None else C
        report["C"] = C

        try:
            rows = asymptotics.locate_tritronquee_poles(
                C, tcfg.n_min, tcfg.n_max, re_t=tcfg.re_t, ctl=self.ctl,
                trigger=tcfg.trigger, height=tcfg.seed_height)
        except NUMERIC_FAILURES as exc:
            result.partial = f"{type(exc).__name__}: {exc}"
            logger.error(f"tritronquee run stopped: {result.partial}")
            result.report = report
            return result

        missing = [r.n for r in rows if r.T_numeric is None]
        if missing and result.partial is None:
            result.partial = f"numeric pole location failed for n = {missing}"
        report["n_located"] = len(rows) - len(missing)
        decay = asymptotics.decay_exponent(rows)
        monotone = asymptotics.decays_monotonically(rows, MONOTONE_FROM_N)
        report["decay_exponent"] = decay
        report["monotone"] = monotone
        if result.partial is None:
            if decay is None or decay < TRITRONQUEE_DECAY_MIN:
                result.errors.append(f"tritronquee prediction error decay exponent {decay} "
                                     f"is below {TRITRONQUEE_DECAY_MIN:g}")
            if not monotone:
                result.errors.append(f"tritronquee prediction error is not decreasing from n = {MONOTONE_FROM_N}")
        report["fast_vs_newton"] = {r.n: abs(r.T_fast - r.T_newton) for r in rows}
        result.predictions = rows
        result.report = report
        return result

    # --- periods -----------------------------------------------------------------------

    def periods(self) -> RunResult:
        pcfg = self.config.periods
        result = RunResult(command="periods")
        for q in pcfg.levels:
            try:
                result.period_rows.append(self._period_row(q, result.errors))
            except NUMERIC_FAILURES as exc:
                result.partial = f"q = {q}: {type(exc).__name__}: {exc}"
                logger.error(f"period computation stopped: {result.partial}")
                break

        report: Dict[str, Any] = {"n_levels": len(result.period_rows)}
        if pcfg.grid and result.partial is None:
            basis, params = elliptic.hexagonal_lattice()
            result.grid = elliptic.weierstrass_grid(basis, params, n=pcfg.grid_n,
                                                    upper_right=pcfg.grid_upper_right)
            report["grid"] = {"lattice": "hexagonal", "p1": basis.p1, "p2": basis.p2,
                              "g2": params.g2, "g3": params.g3, "n": pcfg.grid_n}
        result.report = report
        return result

    def _period_row(self, q: complex, errors: List[str]) -> Dict[str, Any]:
        pcfg = self.config.periods
        basis = elliptic.period_numeric(q)
        row: Dict[str, Any] = {"q": q, "p1": basis.p1, "p2": basis.p2, "labeling": basis.labeling,
                               "relative_deviation": None, "ode_residual": None,
                               "flow_mismatch": None}
        if abs(q) >= elliptic.ASYMPTOTIC_MIN_Q:
            asym = elliptic.period_basis_asymptotic(q, pcfg.order)
            deviation = max(_relative(basis.p1, asym.p1), _relative(basis.p2, asym.p2))
            row["relative_deviation"] = deviation
            if pcfg.order == 1 and abs(q) >= PERIOD_CHECK_MIN_Q and not deviation < PERIOD_DEVIATION_TOL:
                errors.append(f"periods at q = {q} deviate from the asymptotic basis by {deviation:.3e}")
        if pcfg.ode_check:
            row["ode_residual"] = max(elliptic.continued_period_residual(q))
        if pcfg.flow_check:
            v1, v2 = elliptic.flow_period(q, ctl=self.ctl, basis=basis)
            mismatch = max(_relative(v1, basis.p1), _relative(v2, basis.p2))
            row["flow_mismatch"] = mismatch
            if not mismatch <= FLOW_PERIOD_TOL:
                errors.append(f"flow period at q = {q} misses the quadrature basis by {mismatch:.3e}")
        logger.info(f"q = {q}: p1 = {basis.p1:.10g}, p2 = {basis.p2:.10g} ({basis.labeling})")
        return row

    # --- laurent -----------------------------------------------------------------------

    def laurent(self) -> RunResult:
        """Integrate away from a seeded pole and compare with the Laurent partial sums."""
        lcfg = self.config.laurent
        zeta, a = lcfg.zeta, lcfg.a
        direction = zeta / abs(zeta)
        seed = AtlasState(z=zeta, point=ChartPoint(chart=ChartId.C91, c1=a, c2=0))
        ctl = self.ctl if self.ctl.rel_tol <= LAURENT_REL_TOL else self.ctl.with_tolerance(LAURENT_REL_TOL)
        result = RunResult(command="laurent")

        for r in sorted(set(lcfg.radii) | set(lcfg.energy_radii)):
            z = zeta + r * direction
            try:
                state = integrate_path(seed, PathSpec.straight(zeta, z), ctl).final
            except NUMERIC_FAILURES as exc:
                result.partial = f"r = {r}: {type(exc).__name__}: {exc}"
                logger.error(f"laurent run stopped: {result.partial}")
                break
            values = _base_values(state)
            if values is None:
                continue
            u = values[0]
            truncated = poles.laurent_eval(zeta, a, z, lcfg.order)
            series = poles.laurent_eval(zeta, a, z, lcfg.series_order)
            try:
                energy = atlas.energy(state.point, state.z).E
            except ChartError:
                continue
            result.laurent_rows.append({
                "r": r,
                "u": u,
                "u_truncated": truncated,
                "u_series": series,
                "truncation_error": abs(u - truncated),
                "series_error": abs(u - series) / abs(u),
                "residue_error": _relative((z - zeta) * energy, 4 / (5 * zeta)),
                "constant_term": energy - 4 / (5 * zeta * (z - zeta)),
            })

        report: Dict[str, Any] = {
            "zeta": zeta,
            "a": a,
            "compatibility_residual": abs(poles.laurent_compatibility(zeta)),
            "constant_term_expected": a / 2 ** 7 - 22 / (5 * zeta) ** 2,
            "truncation_slope": self._truncation_slope(result.laurent_rows, lcfg.radii),
            "rel_tol": ctl.rel_tol,
        }
        slope = report["truncation_slope"]
        if result.partial is None and lcfg.order == 4 and (slope is None or slope < LAURENT_SLOPE_MIN):
            result.errors.append(f"Laurent truncation error exponent {slope} is below {LAURENT_SLOPE_MIN:g}")
        result.report = report
        return result

    @staticmethod
    def _truncation_slope(rows: List[Dict[str, Any]], radii: List[float]) -> Optional[float]:
        pts = [(math.log(row["r"]), math.log(row["truncation_error"]))
               for row in rows if row["r"] in radii and row["truncation_error"] > 0]
        if len(pts) < 2:
            return None
        x, y = np.array(pts).T
        return float(np.polyfit(x, y, 1)[0])
