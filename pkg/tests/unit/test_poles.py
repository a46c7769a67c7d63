import cmath
import math

import numpy as np
import pytest

from painleve_atlas import atlas, poles
from painleve_atlas.errors import AtPole, ZetaZero
from painleve_atlas.integrator import integrate_path
from painleve_atlas.models import AtlasState, ChartId, ChartPoint, PathSpec, PoleEvent, Region, StepControl

REGION = Region(lower_left=7 - 3j, upper_right=13 + 3j)


class TestLaurent:

    @pytest.mark.parametrize("zeta", [10.0, 6 + 4j, -3 - 8j])
    def test_resonance_is_compatible(self, zeta):
        """The order-4 condition holds identically, so a stays free."""
        assert abs(poles.laurent_compatibility(zeta)) < 1e-12

    def test_recursion_agrees_with_closed_form(self):
        zeta, a = 8 - 2j, 0.3 + 0.1j
        closed = poles.laurent_coeffs(zeta, a)
        series = poles.laurent_series(zeta, a, order=6)
        for n in range(-2, 5):
            assert cmath.isclose(series[n], closed.coefficient(n), rel_tol=1e-10, abs_tol=1e-14)

    def test_truncation_error_is_fifth_order(self):
        """
        Scenario: Order-4 partial sum against a 12-term sum on growing circles.
        Expected: the gap grows like r^5.
        """
        zeta, radii = 10.0, [0.1, 0.2, 0.3]
        gaps = [abs(poles.laurent_eval(zeta, 0, zeta + r, 4) - poles.laurent_eval(zeta, 0, zeta + r, 12))
                for r in radii]
        slope = np.polyfit(np.log(radii), np.log(gaps), 1)[0]
        assert slope >= 4.7

    def test_series_matches_the_integrated_solution(self):
        """
        Scenario: Leave the pole at zeta = 10 along the pole-line chart.
        Expected: the Laurent sum reproduces u1 at z = 10.2.
        """
        ctl = StepControl(rel_tol=1e-12, abs_tol=1e-14)
        start = AtlasState(z=10.0, point=ChartPoint(chart=ChartId.C91, c1=0.3, c2=0))
        end = integrate_path(start, PathSpec.straight(10.0, 10.2), ctl).final
        u1, _ = atlas.chart_to_base(end.point, end.z)

        assert abs(poles.laurent_eval(10.0, 0.3, 10.2, order=10) - u1) < 1e-8 * abs(u1)

    def test_energy_has_a_simple_pole(self):
        ctl = StepControl(rel_tol=1e-12, abs_tol=1e-14)
        start = AtlasState(z=10.0, point=ChartPoint(chart=ChartId.C91, c1=0.3, c2=0))
        end = integrate_path(start, PathSpec.straight(10.0, 10.001), ctl).final
        E = atlas.energy(end.point, end.z).E

        # the constant term is only asymptotic in 1/zeta
        assert abs(E - poles.energy_near_pole(10.0, 0.3, 10.001)) < 1e-1

    def test_invalid_arguments(self):
        with pytest.raises(ZetaZero):
            poles.laurent_coeffs(0, 0)
        with pytest.raises(AtPole):
            poles.laurent_eval(10.0, 0, 10.0)
        with pytest.raises(AtPole):
            poles.energy_near_pole(10.0, 0, 10.0)


class TestCoverage:

    def test_rays_reach_the_boundary(self):
        paths = poles.ray_paths(10.0, REGION, n_rays=8)
        rays, sweep = paths[:-1], paths[-1]

        assert len(rays) == 8
        assert all(p.start == 10.0 for p in paths)
        for p in rays:
            end = p.end
            on_edge = (min(abs(end.real - 7), abs(end.real - 13)) < 1e-9
                       or min(abs(end.imag + 3), abs(end.imag - 3)) < 1e-9)
            assert on_edge
        assert len(sweep.segments) == 2

    def test_boustrophedon_sweeps_rows(self):
        path = poles.boustrophedon_path(10.0, REGION, rows=2)
        assert path.start == 10.0
        assert path.segments[0].end == REGION.lower_left
        assert path.end == 13 + 3j

    def test_unknown_strategy(self):
        seed = AtlasState(z=10.0, point=atlas.pole_line_section(10))
        with pytest.raises(ValueError):
            poles.pole_field(seed, REGION, strategy="spiral")


class TestSpacings:

    def test_nearest_neighbours(self):
        events = [PoleEvent(zeta=z, a=0) for z in (5, 6, 8)]
        assert poles.nearest_neighbour_spacings(events) == [1.0, 1.0, 2.0]
        assert poles.nearest_neighbour_spacings(events[:1]) == []

    def test_histogram(self):
        hist = poles.spacing_histogram([1.0, 1.0, 1.0, 2.0], bins=4)
        assert hist["median"] == 1.0
        assert hist["n"] == 4
        assert sum(hist["counts"]) == 4
        assert poles.spacing_histogram([])["median"] is None
        print("\n✅ Spacing diagnostics: Verified")
