import networkx as nx

from painleve_atlas import atlas
from painleve_atlas.models import ChartId


class ChartTreeExporter:
    """
    Visualizes the blow-up tree of the atlas.
    Highlights the z-dependent charts and the pole-line charts near infinity.
    """

    def __init__(self, graph: nx.DiGraph = None):
        self.graph = graph if graph is not None else atlas.chart_graph()

    def generate(self) -> str:
        lines = ["graph TD"]

        # Styles
        lines.append("    classDef base fill:#e1f5fe,stroke:#01579b,stroke-width:2px,rx:5,ry:5;")
        lines.append("    classDef chart fill:#fff9c4,stroke:#fbc02d,stroke-width:2px;")
        lines.append("    classDef infinity fill:#ffccbc,stroke:#d84315,stroke-width:2px;")
        lines.append("    classDef zdep fill:#c8e6c9,stroke:#2e7d32,stroke-width:4px;")

        for chart in self.graph.nodes:
            if chart == ChartId.B:
                style = "base"
            elif chart in atlas.Z_DEPENDENT:
                style = "zdep"
            elif chart in atlas.NEAR_INFINITY_GROUP:
                style = "infinity"
            else:
                style = "chart"
            kind = self.graph.nodes[chart].get("kind", 0)
            label = chart.value if not kind else f"{chart.value}<br/>kind {kind}"
            lines.append(f'    {chart.value}["{label}"]:::{style}')

        for parent, child, data in self.graph.edges(data=True):
            center = data.get("center")
            if parent == ChartId.B or not center:
                lines.append(f"    {parent.value} --> {child.value}")
            else:
                lines.append(f'    {parent.value} -->|"{center}"| {child.value}')

        return "\n".join(lines)
