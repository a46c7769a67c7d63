"""
CSV writers for every array artifact.

Each file starts with a ``# config:`` line carrying the effective run config,
then a header row.  Floats are written with repr so identical runs give
byte-identical files.
"""
import csv
import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

from painleve_atlas.models import PoleEvent, PolePrediction, Trajectory


def config_line(config: Optional[Dict[str, Any]]) -> str:
    return "# config: " + json.dumps(config or {}, sort_keys=True, separators=(",", ":"))


def _parts(value: Optional[complex]) -> Tuple[Any, Any]:
    if value is None:
        return "", ""
    value = complex(value)
    return value.real, value.imag


def _write(path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]],
           config: Optional[Dict[str, Any]]):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        f.write(config_line(config) + "\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def write_trajectory_csv(path: Path, traj: Trajectory, config: Optional[Dict[str, Any]] = None):
    header = ["s", "z_re", "z_im", "chart", "c1_re", "c1_im", "c2_re", "c2_im", "E_re", "E_im"]
    rows = []
    for s, state, energy in zip(traj.s, traj.states, traj.energies):
        rows.append([s, *_parts(state.z), state.chart.value, *_parts(state.point.c1),
                     *_parts(state.point.c2), *_parts(energy.E if energy is not None else None)])
    _write(path, header, rows, config)


def write_pole_csv(path: Path, events: List[PoleEvent], config: Optional[Dict[str, Any]] = None):
    rows = [[*_parts(ev.zeta), *_parts(ev.a)] for ev in events]
    _write(path, ["zeta_re", "zeta_im", "a_re", "a_im"], rows, config)


def write_prediction_csv(path: Path, predictions: List[PolePrediction],
                         config: Optional[Dict[str, Any]] = None):
    header = ["n", "T_re", "T_im", "X_re", "X_im", "residual",
              "T_fast_re", "T_fast_im", "T_transitional_re", "T_transitional_im",
              "T_numeric_re", "T_numeric_im", "delta_T"]
    rows = []
    for p in predictions:
        delta = abs(p.T_numeric - p.T_newton) if p.T_numeric is not None else ""
        rows.append([p.n, *_parts(p.T_newton), *_parts(p.X), p.residual,
                     *_parts(p.T_fast), *_parts(p.T_transitional), *_parts(p.T_numeric), delta])
    _write(path, header, rows, config)


def write_period_csv(path: Path, period_rows: List[Dict[str, Any]],
                     config: Optional[Dict[str, Any]] = None):
    header = ["q_re", "q_im", "p1_re", "p1_im", "p2_re", "p2_im", "labeling",
              "relative_deviation", "ode_residual", "flow_mismatch"]
    rows = []
    for row in period_rows:
        extras = ["" if row.get(key) is None else row[key]
                  for key in ("relative_deviation", "ode_residual", "flow_mismatch")]
        rows.append([*_parts(row["q"]), *_parts(row["p1"]), *_parts(row["p2"]), row["labeling"], *extras])
    _write(path, header, rows, config)


def write_grid_csv(path: Path, grid: List[Tuple[float, float, float]],
                   config: Optional[Dict[str, Any]] = None):
    _write(path, ["z_re", "z_im", "abs_wp"], grid, config)


def write_laurent_csv(path: Path, laurent_rows: List[Dict[str, Any]],
                      config: Optional[Dict[str, Any]] = None):
    header = ["r", "u_re", "u_im", "u_truncated_re", "u_truncated_im", "u_series_re", "u_series_im",
              "truncation_error", "series_error", "residue_error"]
    rows = [[row["r"], *_parts(row["u"]), *_parts(row["u_truncated"]), *_parts(row["u_series"]),
             row["truncation_error"], row["series_error"], row["residue_error"]]
            for row in laurent_rows]
    _write(path, header, rows, config)
