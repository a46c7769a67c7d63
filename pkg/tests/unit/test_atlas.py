import cmath

import networkx as nx
import pytest

from painleve_atlas import atlas
from painleve_atlas.errors import DenominatorVanishes, InvalidChart, OutsideChartDomain
from painleve_atlas.models import ChartId, ChartPoint

C = ChartId


class TestChartTree:

    def test_manifest_lists_every_chart_once(self):
        """
        Scenario: The manifest is the machine-readable chart tree.
        21 charts, one root B, and only C91/C92 depend on z.
        """
        manifest = atlas.chart_manifest()
        ids = [entry["id"] for entry in manifest["charts"]]

        assert manifest["root"] == "B"
        assert sorted(ids) == sorted(c.value for c in C)
        assert {e["id"] for e in manifest["charts"] if e["z_dependent"]} == {"C91", "C92"}

    def test_graph_is_a_tree_rooted_at_base(self):
        G = atlas.chart_graph()
        assert nx.is_arborescence(G)
        assert [n for n in G.nodes if G.in_degree(n) == 0] == [C.B]
        assert set(G.successors(C.C81)) == {C.C91, C.C92}

    def test_pole_line_section_lies_on_the_pole_line(self):
        p = atlas.pole_line_section(10)
        assert p.chart == C.C91
        assert p.c2 == 0
        assert p.c1 == 640


class TestTransitions:

    @pytest.mark.parametrize("target", [C.C02, C.C03, C.C11, C.C21, C.C31, C.C41, C.C42])
    def test_base_round_trip(self, target):
        """
        Scenario: A generic base point sent to a chart and back.
        Expected: the same (u1, u2) to rounding.
        """
        u1, u2, z = 0.7 + 0.2j, -0.3 + 0.5j, 10 + 1j
        p = atlas.base_to_chart(target, u1, u2, z)
        back = atlas.chart_to_base(p, z)

        assert p.chart == target
        assert abs(back[0] - u1) < 1e-10
        assert abs(back[1] - u2) < 1e-10

    def test_chart_to_chart_follows_the_tree(self):
        """
        Scenario: C31 -> C12 goes up to C03 and down again.
        The composed move must agree with passing through the base chart.
        """
        z = 6.0
        p = atlas.base_to_chart(C.C31, 0.4 - 0.1j, 0.9 + 0.3j, z)
        direct = atlas.chart_to_chart(p, C.C12, z)
        via_base = atlas.base_to_chart(C.C12, *atlas.chart_to_base(p, z), z)

        assert abs(direct.c1 - via_base.c1) < 1e-10
        assert abs(direct.c2 - via_base.c2) < 1e-10

    def test_infinite_base_coordinates_are_rejected(self):
        with pytest.raises(DenominatorVanishes):
            atlas.chart_to_base(ChartPoint(chart=C.C02, c1=0, c2=1), 10)

    def test_unreachable_target_is_outside_domain(self):
        # u2 = 0 has no C03 image
        with pytest.raises(OutsideChartDomain):
            atlas.base_to_chart(C.C03, 1.0, 0.0, 10)

    def test_z_zero_is_invalid(self):
        with pytest.raises(InvalidChart):
            atlas.eps_of(0)


class TestEnergy:

    def test_base_energy_and_level(self):
        p = ChartPoint(chart=C.B, c1=0.5 + 0.1j, c2=-0.2j)
        value = atlas.energy(p, 8.0)
        expected = p.c2 ** 2 / 2 - 2 * p.c1 ** 3 - p.c1

        assert abs(value.E - expected) < 1e-15
        assert abs(value.q - 2 * expected) < 1e-15

    def test_energy_is_chart_independent(self):
        """
        Scenario: One point seen from several charts.
        E = (E w)/w must not depend on the chart used.
        """
        z = 12.0
        u1, u2 = 0.8 - 0.3j, 1.1 + 0.2j
        base = atlas.energy(ChartPoint(chart=C.B, c1=u1, c2=u2), z).E
        for chart in (C.C02, C.C03, C.C11, C.C21, C.C31):
            p = atlas.base_to_chart(chart, u1, u2, z)
            assert abs(atlas.energy(p, z).E - base) < 1e-10 * max(1.0, abs(base))

    def test_energy_law_in_base_chart(self):
        z = 7 - 2j
        p = ChartPoint(chart=C.B, c1=0.3 + 0.4j, c2=-1.0 + 0.1j)
        E = atlas.energy(p, z).E
        expected = -(6 * E + 4 * p.c1) / (5 * z)
        assert abs(atlas.energy_dot(p, z) - expected) < 1e-14

    def test_autonomous_field_drops_the_z_terms(self):
        p = ChartPoint(chart=C.B, c1=0.2 + 0.1j, c2=0.4)
        f = atlas.autonomous_vector_field(p)
        assert f.d1 == p.c2
        assert abs(f.d2 - (6 * p.c1 ** 2 + 1)) < 1e-15
        assert cmath.isclose(atlas.vector_field(p, 1e12).d1, p.c2, rel_tol=1e-10)


class TestInfinitySet:

    def test_base_points_follow_the_blow_up_chain(self):
        points = atlas.base_points(10)
        assert [chart for chart, _ in points][-1] == C.C81
        assert points[-1][1].c1 == pytest.approx(-256 / 50)
        assert points[3][1].c1 == 4

    def test_jacobian_of_the_first_blow_up(self):
        p = ChartPoint(chart=C.C02, c1=0.5, c2=1.0)
        assert atlas.jacobian_w(ChartPoint(chart=C.B, c1=1, c2=2)) == 1
        assert atlas.jacobian_w(p) == -0.125
        assert atlas.guards(p, 10) == (0.5,)

    def test_distance_near_and_far(self):
        """
        Scenario: One point next to the infinity set, one in the bulk of the base chart.
        Expected: |d| small near it; only the first counts as near infinity.
        """
        near = ChartPoint(chart=C.C92, c1=0.5, c2=1.5625e-5)
        far = ChartPoint(chart=C.B, c1=0.1, c2=0.2)

        assert abs(atlas.distance_to_infinity(near, 10)) < 1e-2
        assert atlas.is_near_infinity(near, 10)
        assert not atlas.is_near_infinity(far, 10)

    @pytest.mark.parametrize("chart", [C.B, C.C02])
    def test_distance_at_a_finite_point_is_the_inverse_level(self, chart):
        """
        Scenario: (u1, u2) = (-1.235, 0.0168i) has level q ~ 10 and lies far
        from the last exceptional line.
        Expected: d = 1/q whichever chart the point is given in.
        """
        p = atlas.base_to_chart(chart, -1.235, 0.0168j, 10)
        q = atlas.energy(p, 10).q

        assert abs(q - 10) < 0.01
        assert cmath.isclose(atlas.distance_to_infinity(p, 10), 1 / q, rel_tol=1e-12)

    def test_distance_on_the_pole_line_is_the_inverse_level(self):
        p = atlas.pole_line_section(10)
        assert cmath.isclose(atlas.distance_to_infinity(p, None), 0.1, rel_tol=1e-12)
