"""
Build the benchmark sweep tables: QRO of CiFold vs contiguous-block cutting
for every workload at both qubit constraints.

Each sweep is a standalone function that returns a DataFrame.
Call build_sweeps() to run them all and export() to write the CSVs.
"""

import os

import pandas as pd

from cifold.checks import check_sweep
from cifold.config import CutConfig
from cifold.sweep import run_sweep

OUT_DIR = "data/sweeps"

QUBIT_LIMITS = (20, 25)
STRUCTURED_SIZES = list(range(50, 191, 20))
QFT_SIZES = list(range(30, 101, 10))


# ---------------------------------------------------------------------------
# Sweeps
# ---------------------------------------------------------------------------


def sweep_bv(q_con: int, config: CutConfig) -> pd.DataFrame:
    table = run_sweep("bv", STRUCTURED_SIZES, q_con, config)
    check_sweep(
        table,
        f"BV K={q_con}",
        expected_rows=len(STRUCTURED_SIZES),
        require_dominance=True,
    )
    first, last = table["ratio_practical"].iloc[0], table["ratio_practical"].iloc[-1]
    assert last >= first, (
        f"BV K={q_con}: baseline/CiFold ratio fell from {first:.3g} to {last:.3g}"
    )
    return table


def sweep_ghz(q_con: int, config: CutConfig) -> pd.DataFrame:
    table = run_sweep("ghz", STRUCTURED_SIZES, q_con, config)
    check_sweep(
        table,
        f"GHZ K={q_con}",
        expected_rows=len(STRUCTURED_SIZES),
        require_dominance=True,
    )
    return table


def sweep_adder(q_con: int, config: CutConfig) -> pd.DataFrame:
    table = run_sweep("adder", STRUCTURED_SIZES, q_con, config)
    check_sweep(
        table,
        f"Adder K={q_con}",
        expected_rows=len(STRUCTURED_SIZES),
        require_dominance=True,
    )
    return table


def sweep_qft(q_con: int, config: CutConfig) -> pd.DataFrame:
    table = run_sweep("qft", QFT_SIZES, q_con, config)
    # dense all-to-all interaction; dominance is reported, not required
    check_sweep(table, f"QFT K={q_con}", expected_rows=len(QFT_SIZES))
    return table


# ---------------------------------------------------------------------------
# Orchestration
# ---------------------------------------------------------------------------


def build_sweeps(config: CutConfig | None = None) -> pd.DataFrame:
    config = config or CutConfig.from_env()
    tables = []
    for q_con in QUBIT_LIMITS:
        tables.append(sweep_bv(q_con, config))
        tables.append(sweep_ghz(q_con, config))
        tables.append(sweep_adder(q_con, config))
        tables.append(sweep_qft(q_con, config))
    return pd.concat(tables, ignore_index=True)


def export(sweeps: pd.DataFrame) -> None:
    os.makedirs(OUT_DIR, exist_ok=True)
    sweeps = sweeps.sort_values(["kind", "qubit_limit", "size"])
    for (kind, q_con), table in sweeps.groupby(["kind", "qubit_limit"]):
        path = os.path.join(OUT_DIR, f"{kind}_k{q_con}.csv")
        table.to_csv(path, index=False)
        print(f"Wrote {len(table)} rows to {path}")
    sweeps.to_csv(os.path.join(OUT_DIR, "all_sweeps.csv"), index=False)


def main() -> None:
    sweeps = build_sweeps()
    export(sweeps)


if __name__ == "__main__":
    main()
