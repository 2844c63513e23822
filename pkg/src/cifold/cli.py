"""
Command-line front end.

    cifold gen ghz 8 -o ghz8.qasm
    cifold cut ghz8.qasm --qubit-limit 4 --baseline --report run.txt
    cifold verify ghz8.qasm --qubit-limit 4 --observable ZZZZZZZZ
    cifold sweep bv --sizes 50:190:20 --qubit-limit 20 --out bv.csv

Exit codes: 0 success, 2 usage error, 3 input error, 4 verification failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from cifold import __version__
from cifold.circuit import Circuit, Observable, QasmError, parse_qasm, write_qasm
from cifold.config import GAMMA_CONVENTIONS, GAMMA_MODES, CutConfig
from cifold.cost import ErrorBudget, qro, table_for
from cifold.folding import FoldStats
from cifold.generators import generate
from cifold.graphing import export_dot
from cifold.knit import expectation, reconstruct, simulate
from cifold.partition import (
    naive_assignment,
    partition_from_assignment,
    run_pipeline,
)
from cifold.sweep import run_sweep
from cifold.utils.report import RunReport

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_VERIFY = 4

EXACT_TOLERANCE = 1e-8
SAMPLED_SIGMAS = 5


class UsageError(Exception):
    pass


def _common() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        "--threads", type=int, default=None,
        help="worker cap (default: CIFOLD_THREADS or 1)",
    )
    common.add_argument(
        "--seed", type=int, default=None, help="random seed (default 0)"
    )
    common.add_argument("-v", "--verbose", action="store_true", help="log to stderr")
    return common


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="cifold", description=__doc__.split("\n")[1])
    parser.add_argument("--version", action="version", version=f"cifold {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", parents=[common], help="write a benchmark circuit")
    gen.add_argument("kind", choices=["bv", "ghz", "adder", "qft"])
    gen.add_argument("size", type=int, nargs="?")
    gen.add_argument("--secret", help="BV secret bit string")
    gen.add_argument("--qft-swaps", action="store_true")
    gen.add_argument("-o", "--out", help="output path (default stdout)")

    cut = sub.add_parser("cut", parents=[common], help="partition a circuit")
    cut.add_argument("qasm")
    cut.add_argument("-k", "--qubit-limit", type=int, required=True)
    cut.add_argument("--gamma-mode", choices=GAMMA_MODES, default=None)
    cut.add_argument("--gamma-convention", choices=GAMMA_CONVENTIONS, default=None)
    cut.add_argument("--min-fold-len", type=int, default=None)
    cut.add_argument("--baseline", action="store_true", help="compare to naive blocks")
    cut.add_argument("--dot", help="write the meta-graph as DOT")
    cut.add_argument("--report", help="also write the report to this path")

    verify = sub.add_parser("verify", parents=[common], help="check a cut by knitting")
    verify.add_argument("qasm")
    verify.add_argument("-k", "--qubit-limit", type=int, required=True)
    verify.add_argument("--observable", help="Pauli string (default all Z)")
    verify.add_argument("--mode", choices=["exact", "sampled"], default="exact")
    verify.add_argument("--shots", type=int, default=100_000)

    sweep = sub.add_parser("sweep", parents=[common], help="QRO series over sizes")
    sweep.add_argument("kind", choices=["bv", "ghz", "adder", "qft"])
    sweep.add_argument(
        "--sizes", nargs="+", required=True,
        help="qubit counts, or start:stop:step (inclusive)",
    )
    sweep.add_argument("-k", "--qubit-limit", type=int, required=True)
    sweep.add_argument("--gamma-mode", choices=GAMMA_MODES, default=None)
    sweep.add_argument("--out", help="write the table as CSV")
    return parser


def parse_sizes(tokens: list[str]) -> list[int]:
    sizes: list[int] = []
    for token in tokens:
        if ":" in token:
            parts = token.split(":")
            if len(parts) != 3:
                raise UsageError(f"size range must be start:stop:step, got {token!r}")
            start, stop, step = map(int, parts)
            if step < 1:
                raise UsageError("size step must be positive")
            sizes.extend(range(start, stop + 1, step))
        else:
            sizes.append(int(token))
    return sizes


def _config(args: argparse.Namespace, **overrides) -> CutConfig:
    try:
        return CutConfig.from_env(workers=args.threads, seed=args.seed, **overrides)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc


def _check_limit(k: int) -> None:
    if k < 2:
        raise UsageError(f"--qubit-limit must be >= 2, got {k}")


def _load(path: str) -> Circuit:
    return parse_qasm(Path(path).read_text())


def cmd_gen(args: argparse.Namespace) -> int:
    circuit = generate(
        args.kind, args.size, secret=args.secret, qft_swaps=args.qft_swaps
    )
    text = write_qasm(circuit)
    if args.out:
        Path(args.out).write_text(text)
        print(f"wrote {args.kind} circuit ({circuit.num_qubits} qubits) to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_cut(args: argparse.Namespace) -> int:
    _check_limit(args.qubit_limit)
    config = _config(
        args,
        gamma_mode=args.gamma_mode,
        gamma_convention=args.gamma_convention,
        min_fold_len=args.min_fold_len,
    )
    circuit = _load(args.qasm)
    table = table_for(config.gamma_mode, config.gamma_convention)
    result = run_pipeline(circuit, args.qubit_limit, config)
    cost = qro(result.partition, table, ErrorBudget(config.epsilon))

    graph = result.graph
    if result.meta_graph is not None:
        fold = result.meta_graph.stats
    else:
        n, e = len(graph.nodes), len(graph.edges)
        fold = FoldStats(n, n, e, e)

    baseline = None
    if args.baseline:
        blocks = naive_assignment(graph, args.qubit_limit)
        naive = partition_from_assignment(graph, blocks)
        baseline = qro(naive, table, ErrorBudget(config.epsilon))

    report = RunReport(
        source=args.qasm,
        q_con=args.qubit_limit,
        config=config.echo(),
        partition=result.partition,
        cost=cost,
        fold=fold,
        seed_choice=result.seed_choice,
        baseline=baseline,
        timings=result.timings,
    )
    text = report.render()
    print(text, end="")
    if args.report:
        Path(args.report).write_text(text)
    if args.dot:
        target = graph if result.meta_graph is None else result.meta_graph
        Path(args.dot).write_text(export_dot(target))
    return EXIT_OK


def cmd_verify(args: argparse.Namespace) -> int:
    _check_limit(args.qubit_limit)
    config = _config(args)
    circuit = _load(args.qasm)
    observable = (
        Observable(args.observable) if args.observable
        else Observable.all_z(circuit.num_qubits)
    )
    observable.check(circuit.num_qubits)

    oracle = expectation(simulate(circuit, config.max_sim_qubits), observable)
    max_cuts = config.max_exact_cuts if args.mode == "exact" else None
    partition = run_pipeline(circuit, args.qubit_limit, config, max_cuts).partition
    rec = reconstruct(
        circuit, partition, observable, args.mode, args.shots, config.seed, config
    )
    error = abs(rec.value - oracle)
    if args.mode == "exact" or rec.std_error == 0:
        tolerance = EXACT_TOLERANCE
    else:
        tolerance = SAMPLED_SIGMAS * rec.std_error
    passed = error <= tolerance

    print(f"observable: {observable.paulis}")
    print(f"fragments: {len(partition.fragments)}")
    print(f"cuts: {len(partition.cuts)}")
    print(f"mode: {rec.mode}")
    print(f"oracle: {oracle:.12f}")
    print(f"reconstructed: {rec.value:.12f}")
    print(f"abs_error: {error:.3e}")
    print(f"tolerance: {tolerance:.3e}")
    print(f"combos: {rec.combos}")
    print(f"evaluations: {rec.evaluations}")
    print(f"status: {'PASS' if passed else 'FAIL'}")
    return EXIT_OK if passed else EXIT_VERIFY


def cmd_sweep(args: argparse.Namespace) -> int:
    _check_limit(args.qubit_limit)
    sizes = parse_sizes(args.sizes)
    config = _config(args, gamma_mode=args.gamma_mode)
    table = run_sweep(args.kind, sizes, args.qubit_limit, config)
    print(table.to_string(index=False))
    if args.out:
        table.to_csv(args.out, index=False)
        print(f"wrote {len(table)} rows to {args.out}")
    return EXIT_OK


COMMANDS = {"gen": cmd_gen, "cut": cmd_cut, "verify": cmd_verify, "sweep": cmd_sweep}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    if args.verbose:
        logging.basicConfig(
            level=logging.INFO,
            stream=sys.stderr,
            format="%(levelname)s %(name)s: %(message)s",
        )
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"cifold: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except QasmError as exc:
        print(f"cifold: {args.qasm}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, ValueError) as exc:
        print(f"cifold: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
