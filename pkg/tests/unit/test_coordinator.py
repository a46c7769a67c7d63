import pytest

from painleve_atlas import asymptotics, atlas, elliptic, poles
from painleve_atlas.config import RunConfig
from painleve_atlas.coordinator import RunCoordinator, RunResult
from painleve_atlas.errors import ConfigError
from painleve_atlas.models import ChartId, PoleSequenceParams


def _config(**sections):
    return RunConfig(**sections)


class TestDispatch:

    def test_unknown_command(self):
        with pytest.raises(ConfigError):
            RunCoordinator(RunConfig()).run("solve-everything")

    def test_check_raises_on_invariant_failures(self):
        RunCoordinator.check(RunResult(command="laurent"))
        with pytest.raises(ValueError, match="CRITICAL"):
            RunCoordinator.check(RunResult(command="laurent", errors=["boom"]))


class TestCommands:

    def test_charts_verify_passes_on_the_shipped_atlas(self):
        """
        Scenario: Full verification on a handful of samples per chart.
        Expected: no failures, residuals reported for every chart.
        """
        result = RunCoordinator(_config(verify={"samples": 5})).run("charts-verify")

        assert result.errors == []
        assert result.report["passed"] is True
        assert set(result.report["max_residual"]["energy"]) == {c.value for c in ChartId}

    def test_charts_verify_reports_a_broken_chart(self, monkeypatch):
        spec = atlas.CHARTS[ChartId.C52]
        original = spec.energy_w
        monkeypatch.setattr(spec, "energy_w", lambda x, y, e: original(x, y, e) * 1.01)

        result = RunCoordinator(_config(verify={"samples": 5})).run("charts-verify")

        assert any("energy" in e and "C52" in e for e in result.errors)
        with pytest.raises(ValueError, match="CRITICAL"):
            RunCoordinator.check(result)

    def test_integrate_short_path(self):
        config = _config(integrate={"z0": 6, "points": [7], "c1": 0.1, "c2": 0.2})
        result = RunCoordinator(config).run("integrate")

        assert result.partial is None
        assert result.report["n_states"] > 1
        assert result.report["final"]["z"] == pytest.approx(7)

    def test_step_limit_leaves_partial_output(self):
        """
        Scenario: The step budget runs out long before z = 60.
        Expected: a partial trajectory and a reason, not an exception.
        """
        config = _config(tolerances={"max_steps": 3})
        result = RunCoordinator(config).run("integrate")

        assert "StepLimitExceeded" in result.partial
        assert result.trajectory is not None
        assert len(result.trajectory.states) >= 1

    def test_laurent_compares_series_and_integration(self):
        """
        Scenario: Default tolerances are looser than the Laurent comparison needs.
        Expected: the run tightens them, and the order-4 remainder shows its exponent.
        """
        result = RunCoordinator(_config(laurent={"a": 0.2})).run("laurent")

        assert result.partial is None
        assert result.errors == []
        assert result.report["rel_tol"] == 1e-13
        assert len(result.laurent_rows) == 7
        assert result.report["compatibility_residual"] < 1e-12
        assert result.report["truncation_slope"] >= 4.7
        assert all(row["series_error"] < 1e-6 for row in result.laurent_rows)

    def test_periods_at_one_level(self):
        config = _config(periods={"levels": [1e3], "grid_n": 3})
        result = RunCoordinator(config).run("periods")

        assert result.partial is None
        assert result.report["n_levels"] == 1
        assert result.errors == []
        assert result.period_rows[0]["relative_deviation"] < 1e-3
        assert len(result.grid) == 9
        print("\n✅ Coordinator Wiring: Verified")


def _predictions(error_of_n):
    rows = asymptotics.pole_sequence(PoleSequenceParams(C=asymptotics.stokes_constant(), n_min=1, n_max=10))
    return [r.model_copy(update={"T_numeric": r.T_newton + error_of_n(r.n)}) for r in rows]


class TestAcceptanceChecks:

    @pytest.mark.parametrize("error_of_n, n_errors", [(lambda n: 0.5 / n ** 2, 0), (lambda n: 0.1, 2)])
    def test_tritronquee_decay_and_monotonicity(self, monkeypatch, error_of_n, n_errors):
        """
        Scenario: Located poles that converge like n^-2, and ones stuck at a fixed offset.
        Expected: the first run is clean; the second fails both the rate and the monotone check.
        """
        rows = _predictions(error_of_n)
        monkeypatch.setattr(asymptotics, "locate_tritronquee_poles", lambda *args, **kwargs: rows)

        result = RunCoordinator(_config(tritronquee={"stokes_check": False, "n_max": 10})).run("tritronquee")

        assert result.partial is None
        assert len(result.errors) == n_errors
        assert result.report["monotone"] is (n_errors == 0)

    def test_period_deviation_is_an_invariant(self, monkeypatch):
        original = elliptic.period_basis_asymptotic

        def shifted(q, order=1):
            basis = original(q, order)
            return basis.model_copy(update={"p1": basis.p1 * 1.01})

        monkeypatch.setattr(elliptic, "period_basis_asymptotic", shifted)
        result = RunCoordinator(_config(periods={"levels": [2e4], "grid": False})).run("periods")

        assert result.partial is None
        assert any("deviate" in e for e in result.errors)
        with pytest.raises(ValueError, match="CRITICAL"):
            RunCoordinator.check(result)

    def test_laurent_exponent_is_an_invariant(self, monkeypatch):
        """
        Scenario: The partial sum is off by a constant 1e-6.
        Expected: the remainder no longer scales like r^5 and the run reports it.
        """
        original = poles.laurent_eval
        monkeypatch.setattr(poles, "laurent_eval", lambda zeta, a, z, order=4: original(zeta, a, z, order) + 1e-6)

        result = RunCoordinator(_config()).run("laurent")

        assert result.partial is None
        assert any("exponent" in e for e in result.errors)
