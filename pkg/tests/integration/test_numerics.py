"""Long numeric runs reproducing the known global behaviour of the equation."""
from pathlib import Path

import pytest

from painleve_atlas import asymptotics, atlas, elliptic, poles
from painleve_atlas.config import load_config
from painleve_atlas.coordinator import RunCoordinator
from painleve_atlas.models import AtlasState, Region, StepControl

CONFIGS = Path(__file__).resolve().parents[2] / "configs"

pytestmark = pytest.mark.slow


def _run(name, command):
    return RunCoordinator(load_config(CONFIGS / name)).run(command)


class TestGlobalBehaviour:

    def test_generic_solution_crosses_poles(self):
        result = _run("integrate_generic.yaml", "integrate")
        assert result.partial is None
        assert result.report["n_poles"] >= 5
        assert result.report["final"]["z"] == pytest.approx(60)

    def test_monodromy_around_the_origin(self):
        """
        Scenario: Follow a generic solution once around x = 0 (z sweeps 5 pi / 2).
        Expected: (u1, u2) -> (-u1, i u2) to 1e-6.
        """
        result = _run("integrate_monodromy.yaml", "integrate")

        assert result.partial is None
        assert result.errors == []
        assert result.report["monodromy"]["residual"] < 1e-6

    def test_infinity_set_is_a_repellor(self):
        """
        Scenario: Start at |d| ~ 1e-3 next to the infinity set and integrate outward.
        Expected: |d| grows like |z|^(6/5).
        """
        result = _run("integrate_repellor.yaml", "integrate")
        assert result.report["repellor_slope"] == pytest.approx(1.2, abs=0.25)

    def test_autonomous_pole_field_is_the_period_lattice(self):
        """
        Scenario: Cover [7, 13] x [-3, 3] from the pole-line seed at z = 10, level q = 10.
        Expected: exactly the lattice points 10 + m p1 + n p2 inside the region.
        """
        config = load_config(CONFIGS / "pole_field.yaml")
        result = RunCoordinator(config).run("pole-field")
        basis = elliptic.period_numeric(10.0)
        shortest = min(abs(v) for v in (basis.p1, basis.p2, basis.p1 + basis.p2, basis.p1 - basis.p2))
        region = config.pole_field.region()
        lattice = [10 + m * basis.p1 + n * basis.p2 for m in range(-6, 7) for n in range(-6, 7)]
        inside = [w for w in lattice if region.contains(w)]

        assert result.partial is None
        assert result.report["n_poles"] == len(inside)
        assert all(min(abs(ev.zeta - w) for w in inside) < 1e-6 for ev in result.events)
        assert result.report["spacing"]["median"] == pytest.approx(shortest, rel=0.05)

    def test_flow_periods_match_quadrature(self):
        basis = elliptic.period_numeric(10.0)
        v1, v2 = elliptic.flow_period(10.0, basis=basis)
        assert abs(v1 - basis.p1) < 1e-6 * abs(basis.p1)
        assert abs(v2 - basis.p2) < 1e-6 * abs(basis.p2)

    def test_high_level_pole_field_is_regular(self):
        """
        Scenario: Autonomous pole field at level q = 1e3 over a 4 x 4 square around z = 10.
        Expected: the lattice shrinks like q^(-1/6) and stays regular: nearest-neighbour
        spread below 15% of the median.
        """
        q = 1e3
        seed = AtlasState(z=10, point=atlas.pole_line_section(q))
        region = Region(lower_left=8 - 2j, upper_right=12 + 2j)
        ctl = StepControl(rel_tol=1e-12, abs_tol=1e-14, pole_trigger=0.3)
        field = poles.pole_field(seed, region, strategy="boustrophedon", rows=10, ctl=ctl, autonomous=True)
        spacing = poles.spacing_histogram(poles.nearest_neighbour_spacings(field.events))
        basis = elliptic.period_numeric(q)
        shortest = min(abs(v) for v in (basis.p1, basis.p2, basis.p1 + basis.p2, basis.p1 - basis.p2))

        assert field.warnings == []
        assert len(field.events) >= 3
        assert spacing["relative_spread"] < 0.15
        assert spacing["median"] == pytest.approx(shortest, rel=0.05)


class TestTritronquee:

    def test_stokes_constant(self):
        """The sign depends on the orientation convention; the modulus is fixed."""
        stokes = asymptotics.stokes_constant_numeric()
        closed = abs(stokes["closed_form"])
        assert abs(abs(stokes["S"]) - closed) < 1e-2 * closed

    def test_predicted_poles_are_found(self):
        """
        Scenario: Locate the first ten poles of the first array numerically.
        Expected: every pole found, and the prediction error decays with n.
        """
        config = load_config(CONFIGS / "tritronquee.yaml")
        config = config.model_copy(update={"tritronquee": config.tritronquee.model_copy(update={"n_max": 10})})
        result = RunCoordinator(config).run("tritronquee")

        assert result.partial is None
        assert result.errors == []
        assert result.report["n_located"] == 10
        assert result.report["decay_exponent"] >= 1.5
        assert result.report["monotone"] is True
        print("\n✅ Tritronquee poles: Verified")
