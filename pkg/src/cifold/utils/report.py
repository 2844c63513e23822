"""
RunReport: the structured text report written by `cifold cut`.

Sections appear in a fixed order and timings come last, so two runs with the
same inputs differ only below the `## timings` header. The layout is
documented in docs/report-schema.md.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import pandas as pd

from cifold import __version__
from cifold.cost import CostReport
from cifold.folding import FoldStats
from cifold.partition import Partition

TIMINGS_HEADER = "## timings"


def fragment_table(partition: Partition, cost: CostReport) -> pd.DataFrame:
    contribution = {f.fragment: f for f in cost.fragments}
    rows = [
        {
            "id": frag.id,
            "width": frag.width,
            "depth": frag.depth,
            "nodes": len(frag.node_ids),
            "variation": contribution[frag.id].variation,
            "contribution": contribution[frag.id].contribution,
            "qubits": ",".join(map(str, frag.qubits)),
        }
        for frag in partition.fragments
    ]
    columns = ["id", "width", "depth", "nodes", "variation", "contribution", "qubits"]
    return pd.DataFrame(rows, columns=columns)


def cut_table(partition: Partition, cost: CostReport) -> pd.DataFrame:
    group_of = {}
    for group in cost.groups:
        for cut in group.cuts:
            group_of[cut.edge.key] = group.kind
    rows = [
        {
            "kind": cut.kind,
            "gate": cut.edge.gate_name or "-",
            "src": cut.edge.src,
            "dst": cut.edge.dst,
            "fragments": f"{cut.fragments[0]}-{cut.fragments[1]}",
            "gamma": cut.gamma,
            "group": group_of.get(cut.edge.key, "single"),
        }
        for cut in partition.cuts
    ]
    columns = ["kind", "gate", "src", "dst", "fragments", "gamma", "group"]
    return pd.DataFrame(rows, columns=columns)


@dataclass
class RunReport:
    source: str
    q_con: int
    config: dict[str, object]
    partition: Partition
    cost: CostReport
    fold: FoldStats
    seed_choice: str
    baseline: CostReport | None = None
    timings: dict[str, float] = field(default_factory=dict)
    version: str = __version__

    @property
    def baseline_ratio(self) -> float | None:
        """Baseline QRO over CiFold QRO (> 1 means CiFold is cheaper)."""
        if self.baseline is None or self.cost.qro == 0:
            return None
        try:
            return self.baseline.qro / self.cost.qro
        except OverflowError:
            return float("inf")

    def summary(self) -> dict[str, object]:
        out: dict[str, object] = {
            "version": self.version,
            "input": self.source,
            "qubit_limit": self.q_con,
        }
        out.update({f"config.{k}": v for k, v in self.config.items()})
        out["seed_choice"] = self.seed_choice
        return out

    def render(self) -> str:
        lines = ["# cifold run report"]
        lines += [f"{k}: {v}" for k, v in self.summary().items()]

        lines += ["", "## fold"]
        lines += [
            f"original_nodes: {self.fold.original_nodes}",
            f"folded_nodes: {self.fold.folded_nodes}",
            f"original_edges: {self.fold.original_edges}",
            f"folded_edges: {self.fold.folded_edges}",
            f"compression: {self.fold.compression:.4f}",
        ]

        lines += ["", "## cost"]
        lines += [
            f"gamma_mode: {self.cost.mode}",
            f"qro: {self.cost.qro}",
            f"qro_practical: {self.cost.qro_practical}",
            f"qro_theoretical: {self.cost.qro_theoretical}",
            f"sampling_overhead: {self.cost.sampling_overhead}",
            f"shots: {self.cost.shots}",
        ]
        lines += [f"cuts.{k}: {v}" for k, v in self.cost.cut_counts.items()]
        if self.baseline is not None:
            lines += [
                f"baseline_qro: {self.baseline.qro}",
                f"baseline_qro_practical: {self.baseline.qro_practical}",
                f"baseline_qro_theoretical: {self.baseline.qro_theoretical}",
                f"baseline_ratio: {self.baseline_ratio:.6g}",
            ]

        lines += ["", "## fragments"]
        lines.append(fragment_table(self.partition, self.cost).to_string(index=False))
        lines += ["", "## cuts"]
        cuts = cut_table(self.partition, self.cost)
        lines.append(cuts.to_string(index=False) if not cuts.empty else "(none)")

        lines += ["", TIMINGS_HEADER]
        lines += [f"{k}: {v:.6f}" for k, v in self.timings.items()]
        return "\n".join(lines) + "\n"


def strip_timings(text: str) -> str:
    """Report text above the timings section."""
    return text.split(TIMINGS_HEADER, 1)[0]
