"""DQ assertion helpers for partitions and sweep tables."""

from __future__ import annotations

from typing import TYPE_CHECKING

import pandas as pd

from cifold.graphing import CircuitGraph

if TYPE_CHECKING:
    from cifold.partition import Partition


def check_partition(
    graph: CircuitGraph,
    partition: Partition,
    q_con: int,
    name: str = "partition",
) -> None:
    """Assert partition invariants; raise AssertionError on failure."""
    n = len(graph.nodes)
    assert len(partition.assignment) == n, (
        f"{name}: assignment covers {len(partition.assignment)} of {n} nodes"
    )
    seen: set[int] = set()
    for frag in partition.fragments:
        assert frag.node_ids, f"{name}: fragment {frag.id} is empty"
        overlap = seen & frag.node_ids
        assert not overlap, (
            f"{name}: node {min(overlap)} appears in more than one fragment"
        )
        seen |= frag.node_ids
        assert all(partition.assignment[v] == frag.id for v in frag.node_ids), (
            f"{name}: fragment {frag.id} disagrees with the assignment"
        )
        assert frag.width <= q_con, (
            f"{name}: fragment {frag.id} width {frag.width} exceeds "
            f"qubit constraint {q_con}"
        )
    assert len(seen) == n, f"{name}: {n - len(seen)} nodes in no fragment"

    crossing = {
        e.key for e in graph.edges
        if partition.assignment[e.src] != partition.assignment[e.dst]
    }
    cut_keys = [c.edge.key for c in partition.cuts]
    assert len(cut_keys) == len(set(cut_keys)), f"{name}: duplicate cuts"
    assert set(cut_keys) == crossing, (
        f"{name}: cut set differs from crossing edges "
        f"({len(cut_keys)} cuts, {len(crossing)} crossing)"
    )
    for cut in partition.cuts:
        assert cut.gamma == cut.edge.weight, (
            f"{name}: cut {cut.edge.key} γ {cut.gamma} != edge weight "
            f"{cut.edge.weight}"
        )


def check_sweep(
    table: pd.DataFrame,
    name: str,
    *,
    expected_rows: int,
    require_dominance: bool = False,
    qro_col: str = "qro_practical",
    baseline_col: str = "baseline_qro_practical",
) -> None:
    """Assert sweep table invariants; raise AssertionError on failure."""
    assert len(table) == expected_rows, (
        f"{name}: expected {expected_rows} rows, got {len(table)}"
    )
    for col in (qro_col, baseline_col):
        missing = int(table[col].isna().sum())
        assert missing == 0, f"{name}: {missing} missing values in {col!r}"
    worse = table[table[qro_col] > table[baseline_col]]
    ok = len(table) - len(worse)
    print(f"{name}: CiFold QRO <= baseline on {ok}/{len(table)} rows")
    if require_dominance:
        assert worse.empty, (
            f"{name}: QRO above baseline at sizes {worse['size'].tolist()}"
        )
