import pytest

from painleve_atlas.collapser import PoleEventCollapser
from painleve_atlas.models import PoleEvent, Region


def _event(zeta, residual=1e-13, hits=1, a=0.0):
    return PoleEvent(zeta=zeta, a=a, residual=residual, hits=hits)


class TestPoleEventCollapser:

    def test_merges_consecutive_refinements_of_one_pole(self):
        """
        Scenario: One path refines the same pole three times in a row.
        Expected: a single event keeping the best residual and counting the hits.
        """
        events = [
            _event(10 + 1e-9, residual=1e-12),
            _event(10 + 2e-9, residual=1e-14),
            _event(10 - 1e-9, residual=1e-13),
        ]
        merged = PoleEventCollapser(events, radius=1e-6).run()

        assert len(merged) == 1
        assert merged[0].residual == 1e-14
        assert merged[0].hits == 3

    def test_merges_duplicates_from_different_paths(self):
        """
        Scenario: Two paths both cross the poles at 5 and 7, interleaved.
        Expected: two poles, each hit twice, sorted by Re zeta.
        """
        events = [_event(7.0), _event(5.0), _event(5.0 + 1e-8), _event(7.0 - 1e-8)]
        merged = PoleEventCollapser(events, radius=1e-6).run()

        assert [round(ev.zeta.real) for ev in merged] == [5, 7]
        assert all(ev.hits == 2 for ev in merged)

    def test_keeps_distinct_poles(self):
        events = [_event(5.0), _event(5.0 + 1e-3), _event(5.0 + 2e-3)]
        merged = PoleEventCollapser(events, radius=1e-6).run()
        assert len(merged) == 3

    def test_drops_events_outside_the_region(self):
        """
        Scenario: A ray overshoots the region of interest.
        Expected: the pole outside the rectangle is garbage-collected.
        """
        region = Region(lower_left=4 - 1j, upper_right=6 + 1j)
        events = [_event(5.0), _event(8.0)]
        merged = PoleEventCollapser(events, region=region).run()

        assert [ev.zeta for ev in merged] == [5.0]

    def test_empty_input(self):
        assert PoleEventCollapser([]).run() == []
        print("\n✅ Collapser: Verified")
