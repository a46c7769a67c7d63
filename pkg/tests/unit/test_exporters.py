import json
import math

import numpy as np

from exporters import csv_tables, reports
from exporters.mermaid import ChartTreeExporter
from painleve_atlas.models import PoleEvent


class TestReports:

    def test_jsonable_handles_complex_and_nan(self):
        payload = {"z": 1 + 2j, "bad": math.nan, 3: [np.float64(0.5), (1j,)]}
        assert reports.jsonable(payload) == {"z": [1.0, 2.0], "bad": None, "3": [0.5, [[0.0, 1.0]]]}

    def test_pole_events_file(self, tmp_path):
        path = tmp_path / "events.json"
        reports.write_pole_events_json(path, [PoleEvent(zeta=10 + 1j, a=0.5, step_index=4)])
        data = json.loads(path.read_text())
        assert data == [{"a_im": 0.0, "a_re": 0.5, "step_index": 4, "zeta_im": 1.0, "zeta_re": 10.0}]


class TestCsv:

    def test_config_line_then_header(self, tmp_path):
        """
        Scenario: A pole table written with its run config.
        Expected: '# config:' line, header row, one row per pole with repr floats.
        """
        path = tmp_path / "poles.csv"
        csv_tables.write_pole_csv(path, [PoleEvent(zeta=0.1 + 0.2j, a=-1)], {"seed": 0, "out": "x"})
        lines = path.read_text().splitlines()

        assert lines[0] == '# config: {"out":"x","seed":0}'
        assert lines[1] == "zeta_re,zeta_im,a_re,a_im"
        assert lines[2] == "0.1,0.2,-1.0,0.0"

    def test_identical_input_gives_identical_bytes(self, tmp_path):
        grid = [(0.0, 0.0, math.nan), (0.5, 0.0, 1.2345678901234567)]
        csv_tables.write_grid_csv(tmp_path / "a.csv", grid, {"seed": 1})
        csv_tables.write_grid_csv(tmp_path / "b.csv", grid, {"seed": 1})
        assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


class TestMermaid:

    def test_chart_tree(self):
        chart = ChartTreeExporter().generate()

        assert chart.startswith("graph TD")
        assert "B --> C02" in chart
        assert 'C81 -->|"-256/(5z)"| C91' in chart
        assert "C91[" in chart and ":::zdep" in chart
        print("\n✅ Mermaid Export: Verified")
