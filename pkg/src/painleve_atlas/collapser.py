from typing import List, Optional

import networkx as nx

from .models import PoleEvent, Region


class PoleEventCollapser:
    """
    Merge pass over raw pole events:
    1. Collapses consecutive events of one path that refine to the same pole.
    2. Merges duplicates found by different paths (proximity components).
    3. Garbage-collects events outside the region of interest.
    """

    def __init__(self, events: List[PoleEvent], radius: float = 1e-6,
                 region: Optional[Region] = None):
        self.events = events
        self.radius = radius
        self.region = region
        self.buffer: List[PoleEvent] = []
        self.merged: List[PoleEvent] = []

    def run(self) -> List[PoleEvent]:
        self.merged = []
        self.buffer = []

        for event in self.events:
            if self._is_connected_to_buffer(event):
                self.buffer.append(event)
            else:
                self._flush_buffer()
                self.buffer.append(event)
        self._flush_buffer()

        unique = self._merge_components(self.merged)
        return self._gc_events(unique)

    def _is_connected_to_buffer(self, event: PoleEvent) -> bool:
        if not self.buffer:
            return True
        return abs(event.zeta - self.buffer[-1].zeta) <= self.radius

    def _flush_buffer(self):
        if not self.buffer:
            return
        if len(self.buffer) == 1:
            self.merged.append(self.buffer[0])
        else:
            self.merged.append(self._create_merged_event(self.buffer))
        self.buffer = []

    @staticmethod
    def _create_merged_event(group: List[PoleEvent]) -> PoleEvent:
        best = min(group, key=lambda ev: (ev.residual, ev.zeta.real, ev.zeta.imag))
        return best.model_copy(update={"hits": sum(ev.hits for ev in group)})

    def _merge_components(self, events: List[PoleEvent]) -> List[PoleEvent]:
        order = sorted(range(len(events)), key=lambda i: (events[i].zeta.real, events[i].zeta.imag))
        G = nx.Graph()
        G.add_nodes_from(order)
        # Sweep in Re(zeta); only neighbours within the radius in Re can be linked.
        for pos, i in enumerate(order):
            for j in order[pos + 1:]:
                if events[j].zeta.real - events[i].zeta.real > self.radius:
                    break
                if abs(events[j].zeta - events[i].zeta) <= self.radius:
                    G.add_edge(i, j)
        merged = [self._create_merged_event([events[i] for i in sorted(comp)])
                  for comp in nx.connected_components(G)]
        return sorted(merged, key=lambda ev: (ev.zeta.real, ev.zeta.imag))

    def _gc_events(self, events: List[PoleEvent]) -> List[PoleEvent]:
        if self.region is None:
            return events
        return [ev for ev in events if self.region.contains(ev.zeta)]
