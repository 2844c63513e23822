"""Benchmark sweeps: one pipeline run per circuit size, as a plot-ready table."""

from __future__ import annotations

import logging
import time
from collections.abc import Iterable

import pandas as pd

from cifold.checks import check_partition
from cifold.config import CutConfig
from cifold.cost import qro, table_for
from cifold.generators import generate, size_for_qubits
from cifold.partition import naive_assignment, partition_from_assignment, run_pipeline

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = [
    "kind",
    "size",
    "qubits",
    "qubit_limit",
    "fragments",
    "cuts",
    "qro_practical",
    "qro_theoretical",
    "baseline_qro_practical",
    "baseline_qro_theoretical",
    "ratio_practical",
    "compression",
    "seed_choice",
    "runtime_s",
]


def _ratio(num: int, den: int) -> float:
    if den == 0:
        return float("nan")
    try:
        return num / den
    except OverflowError:
        return float("inf")


def sweep_row(kind: str, num_qubits: int, q_con: int, config: CutConfig) -> dict:
    circuit = generate(
        kind, size_for_qubits(kind, num_qubits), qft_swaps=config.qft_swaps
    )
    table = table_for(config.gamma_mode, config.gamma_convention)
    start = time.perf_counter()
    result = run_pipeline(circuit, q_con, config)
    runtime = time.perf_counter() - start
    check_partition(
        result.graph, result.partition, q_con, f"{kind} {num_qubits}q K={q_con}"
    )

    ours = qro(result.partition, table)
    naive = partition_from_assignment(
        result.graph, naive_assignment(result.graph, q_con)
    )
    base = qro(naive, table)
    compression = result.meta_graph.stats.compression if result.meta_graph else 1.0
    return {
        "kind": kind,
        "size": num_qubits,
        "qubits": circuit.num_qubits,
        "qubit_limit": q_con,
        "fragments": len(result.partition.fragments),
        "cuts": len(result.partition.cuts),
        "qro_practical": ours.qro_practical,
        "qro_theoretical": ours.qro_theoretical,
        "baseline_qro_practical": base.qro_practical,
        "baseline_qro_theoretical": base.qro_theoretical,
        "ratio_practical": _ratio(base.qro_practical, ours.qro_practical),
        "compression": round(compression, 6),
        "seed_choice": result.seed_choice,
        "runtime_s": runtime,
    }


def run_sweep(
    kind: str,
    sizes: Iterable[int],
    q_con: int,
    config: CutConfig | None = None,
) -> pd.DataFrame:
    """One row per size; sizes are qubit counts (adder sizes round down to
    an even count)."""
    config = config or CutConfig()
    rows = []
    for size in sizes:
        row = sweep_row(kind, size, q_con, config)
        logger.info(
            "%s %d qubits, K=%d: QRO %s vs baseline %s (%.2fs)",
            kind,
            row["qubits"],
            q_con,
            row["qro_practical"],
            row["baseline_qro_practical"],
            row["runtime_s"],
        )
        rows.append(row)
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)
