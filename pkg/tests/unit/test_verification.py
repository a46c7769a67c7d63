import numpy as np
import pytest

from painleve_atlas import atlas
from painleve_atlas.models import ChartId
from painleve_atlas.verification import AtlasValidator, edge_jacobian

C = ChartId


class TestTopology:

    def test_shipped_tree_is_sound(self):
        assert AtlasValidator(samples=1).validate_topology() == []

    def test_detects_cycle(self):
        """
        Scenario: A bogus edge C92 -> C11 closes a loop in the blow-up tree.
        Expected: Validator reports the cycle.
        """
        validator = AtlasValidator(samples=1)
        validator.graph = validator.graph.copy()
        validator.graph.add_edge(C.C92, C.C11, center="0")

        errors = validator.validate_topology()
        assert any("Cycle detected" in e for e in errors)

    def test_detects_islands(self):
        """
        Scenario: The edge B -> C02 is lost.
        Expected: C02 becomes a separate island and a second root.
        """
        validator = AtlasValidator(samples=1)
        validator.graph = validator.graph.copy()
        validator.graph.remove_edge(C.B, C.C02)

        errors = validator.validate_topology()
        assert any("Disconnected component" in e for e in errors)
        assert any("roots" in e for e in errors)


class TestSuites:

    def test_edge_jacobian_of_kind_one(self):
        # C11 = ((x - 0)/y, y) below C03
        J = edge_jacobian(C.C11, 0.3, 0.5, 0.02)
        assert np.allclose(J, [[1 / 0.5, -0.3 / 0.25], [0, 1]])

    def test_samples_are_deterministic(self):
        a = AtlasValidator(samples=4, seed=7).points(C.C41)
        b = AtlasValidator(samples=4, seed=7).points(C.C41)
        assert a == b

    @pytest.mark.parametrize("chart", [C.B, C.C03, C.C31, C.C81, C.C91, C.C92])
    def test_printed_charts_pass(self, chart):
        """
        Scenario: Round trips, pushforwards, Jacobians and energies on a small sample.
        Expected: every residual under its threshold.
        """
        validator = AtlasValidator(samples=8, seed=1)
        assert validator.run(charts=[chart]) == []
        assert chart.value in validator.report["base_round_trip"]

    def test_fault_injection_names_the_chart(self, monkeypatch):
        """
        Scenario: The C31 field is perturbed by one part in a thousand in its second component.
        Expected: the pushforward check fails and the report names C31.
        """
        spec = atlas.CHARTS[C.C31]
        original = spec.field

        def broken(x, y, e):
            d1, d2 = original(x, y, e)
            return d1, d2 * (1 + 1e-3) + 1e-3

        monkeypatch.setattr(spec, "field", broken)
        errors = AtlasValidator(samples=8, seed=1).run(charts=[C.C31])

        assert any("pushforward" in e and "chart C31" in e for e in errors)
        print("\n✅ Fault injection: Verified")
