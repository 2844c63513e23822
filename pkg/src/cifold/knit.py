"""
Statevector simulation and quasiprobability knitting of cut fragments.

Qubit ordering is little-endian: amplitude index bit q is qubit q. Two-qubit
gate matrices are indexed 2*b(first operand) + b(second operand).

A wire cut is replaced by an 8-term measure-and-prepare decomposition; the
upstream measurement is folded into the fragment observable since nothing
acts on that segment afterwards. A 2-qubit gate is cut through its
ZZ-rotation form, CZ ~ (rz(pi/2) x rz(pi/2)) exp(i pi/4 ZZ), into six
products of local gates and signed mid-circuit Z measurements.
"""

from __future__ import annotations

import itertools
import logging
import math
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cache
from typing import TYPE_CHECKING

import numpy as np

from cifold.circuit import Circuit, Observable, UnsupportedGateError
from cifold.config import CutConfig

if TYPE_CHECKING:
    from cifold.partition import Partition

logger = logging.getLogger(__name__)

MAX_SIM_QUBITS = 14

_SQ2 = 1 / math.sqrt(2)
_PAULI = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_FIXED = {
    "h": np.array([[_SQ2, _SQ2], [_SQ2, -_SQ2]], dtype=complex),
    "x": _PAULI["X"],
    "y": _PAULI["Y"],
    "z": _PAULI["Z"],
    "s": np.diag([1, 1j]),
    "sdg": np.diag([1, -1j]),
    "t": np.diag([1, np.exp(1j * math.pi / 4)]),
    "tdg": np.diag([1, np.exp(-1j * math.pi / 4)]),
    "cx": np.array(
        [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
    ),
    "cz": np.diag([1, 1, 1, -1]).astype(complex),
    "swap": np.array(
        [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
    ),
}


class TooManyCutsError(ValueError):
    pass


class FragmentTooWideError(ValueError):
    pass


def gate_matrix(name: str, params: Sequence[float] = ()) -> np.ndarray:
    if name in _FIXED:
        return _FIXED[name]
    if name == "rx":
        (theta,) = params
        c, s = math.cos(theta / 2), math.sin(theta / 2)
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    if name == "ry":
        (theta,) = params
        c, s = math.cos(theta / 2), math.sin(theta / 2)
        return np.array([[c, -s], [s, c]], dtype=complex)
    if name == "rz":
        (theta,) = params
        return np.diag([np.exp(-0.5j * theta), np.exp(0.5j * theta)])
    if name == "p":
        (lam,) = params
        return np.diag([1, np.exp(1j * lam)])
    if name == "cp":
        (lam,) = params
        return np.diag([1, 1, 1, np.exp(1j * lam)])
    raise UnsupportedGateError(f"no matrix for gate {name!r}")


# ---------------------------------------------------------------------------
# Statevector
# ---------------------------------------------------------------------------


def _zero_tensor(n: int) -> np.ndarray:
    psi = np.zeros((2,) * n, dtype=complex)
    psi[(0,) * n] = 1.0
    return psi


def _apply(psi: np.ndarray, matrix: np.ndarray, qubits: Sequence[int]) -> np.ndarray:
    n, k = psi.ndim, len(qubits)
    axes = [n - 1 - q for q in qubits]
    u = matrix.reshape((2,) * (2 * k))
    out = np.tensordot(u, psi, axes=(list(range(k, 2 * k)), axes))
    return np.moveaxis(out, list(range(k)), axes)


def _project(psi: np.ndarray, qubit: int, outcome: int) -> np.ndarray:
    out = psi.copy()
    index = [slice(None)] * psi.ndim
    index[psi.ndim - 1 - qubit] = 1 - outcome
    out[tuple(index)] = 0
    return out


def _pauli_value(psi: np.ndarray, paulis: str) -> float:
    """<psi|P|psi> for `paulis[i]` on qubit i; psi may be unnormalized."""
    phi = psi
    for q, p in enumerate(paulis):
        if p != "I":
            phi = _apply(phi, _PAULI[p], (q,))
    return float(np.vdot(psi, phi).real)


@dataclass(frozen=True)
class StateVector:
    amplitudes: np.ndarray  # flat, length 2**num_qubits
    num_qubits: int

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def probability(self, bits: str) -> float:
        """Probability of a basis state written qubit 0 first."""
        index = sum(int(b) << q for q, b in enumerate(bits))
        return float(abs(self.amplitudes[index]) ** 2)

    def tensor(self) -> np.ndarray:
        return self.amplitudes.reshape((2,) * self.num_qubits)


def simulate(circuit: Circuit, max_qubits: int = MAX_SIM_QUBITS) -> StateVector:
    """Exact amplitudes of `circuit` applied to |0...0>."""
    if circuit.num_qubits > max_qubits:
        raise ValueError(
            f"cannot simulate {circuit.num_qubits} qubits (limit {max_qubits})"
        )
    psi = _zero_tensor(circuit.num_qubits)
    for gate in circuit.gates:
        psi = _apply(psi, gate_matrix(gate.name, gate.params), gate.qubits)
    return StateVector(psi.reshape(-1), circuit.num_qubits)


def expectation(state: StateVector, observable: Observable) -> float:
    observable.check(state.num_qubits)
    return _pauli_value(state.tensor(), observable.paulis)


# ---------------------------------------------------------------------------
# Quasiprobability decompositions
# ---------------------------------------------------------------------------

Step = tuple[str, tuple[float, ...]]  # gate name and params, or ("measure", ())

MEASURE: Step = ("measure", ())


@dataclass(frozen=True)
class LocalOp:
    """One side of a QPD term.

    `steps` run in order on the cut qubit; a "measure" step is a signed
    Z measurement (outcome 0 -> +1, 1 -> -1). `observe` is the basis of a
    signed end-of-segment measurement. `prepare` labels the eigenstate that
    `steps` prepare from |0> on a fresh qubit.
    """

    steps: tuple[Step, ...] = ()
    observe: str = "I"
    prepare: str | None = None


@dataclass(frozen=True)
class QpdTerm:
    coefficient: float
    left_op: LocalOp
    right_op: LocalOp


@dataclass(frozen=True)
class QpdDecomposition:
    channel_kind: str  # wire | gate
    terms: tuple[QpdTerm, ...]
    gate_name: str = ""
    params: tuple[float, ...] = ()

    @property
    def gamma(self) -> float:
        return math.fsum(abs(t.coefficient) for t in self.terms) ** 2

    @property
    def kappa(self) -> float:
        return math.fsum(abs(t.coefficient) for t in self.terms)

    def __len__(self) -> int:
        return len(self.terms)


_PREPARE: dict[str, tuple[Step, ...]] = {
    "0": (),
    "1": (("x", ()),),
    "+": (("h", ()),),
    "-": (("x", ()), ("h", ())),
    "+i": (("h", ()), ("s", ())),
    "-i": (("h", ()), ("sdg", ())),
}


@cache
def wire_cut_decomposition() -> QpdDecomposition:
    """rho = 1/2 [Tr(rho)(|0><0| + |1><1|) + Tr(X rho)(|+><+| - |-><-|)
    + Tr(Y rho)(|+i><+i| - |-i><-i|) + Tr(Z rho)(|0><0| - |1><1|)]"""
    rows = [
        ("I", "0", 0.5),
        ("I", "1", 0.5),
        ("X", "+", 0.5),
        ("X", "-", -0.5),
        ("Y", "+i", 0.5),
        ("Y", "-i", -0.5),
        ("Z", "0", 0.5),
        ("Z", "1", -0.5),
    ]
    terms = tuple(
        QpdTerm(a, LocalOp(observe=basis), LocalOp(_PREPARE[state], prepare=state))
        for basis, state, a in rows
    )
    return QpdDecomposition("wire", terms)


def _zz_form(name: str, params: tuple[float, ...]) -> tuple[float, float]:
    """(theta, local rz angle) with gate ~ (rz(a) x rz(a)) exp(i theta ZZ)."""
    if name in ("cx", "cz"):
        return math.pi / 4, math.pi / 2
    if name == "cp":
        (lam,) = params
        return lam / 4, lam / 2
    raise UnsupportedGateError(f"no gate-cut decomposition for {name!r}")


@cache
def gate_cut_decomposition(
    name: str, params: tuple[float, ...] = ()
) -> QpdDecomposition:
    """Six-term decomposition of cx, cz or cp(lambda).

    exp(i theta ZZ) = cos^2 id + sin^2 (Z.Z) + cos sin sum_a a [M x S_a + S_a x M]
    where M is a signed Z measurement and S_a = exp(i a pi/4 Z) = rz(-a pi/2).
    """
    theta, corr = _zz_form(name, tuple(params))
    c, s = math.cos(theta), math.sin(theta)
    local: Step = ("rz", (corr,))
    pre = ([], [("h", ())]) if name == "cx" else ([], [])

    def side(k: int, middle: list[Step]) -> LocalOp:
        return LocalOp(tuple(pre[k] + middle + [local] + pre[k]))

    def rot(a: int) -> list[Step]:
        return [("rz", (-a * math.pi / 2,))]

    rows = [
        (c * c, [], []),
        (s * s, [("z", ())], [("z", ())]),
        (c * s, [MEASURE], rot(+1)),
        (-c * s, [MEASURE], rot(-1)),
        (c * s, rot(+1), [MEASURE]),
        (-c * s, rot(-1), [MEASURE]),
    ]
    terms = tuple(QpdTerm(a, side(0, left), side(1, right)) for a, left, right in rows)
    return QpdDecomposition("gate", terms, name, tuple(params))


def _signed_kraus(steps: Sequence[Step]) -> list[tuple[int, np.ndarray]]:
    ops = [(1, np.eye(2, dtype=complex))]
    projectors = (np.diag([1, 0]).astype(complex), np.diag([0, 1]).astype(complex))
    for name, params in steps:
        if name == "measure":
            ops = [
                (sign * (1 - 2 * m), projectors[m] @ k)
                for sign, k in ops
                for m in (0, 1)
            ]
        else:
            g = gate_matrix(name, params)
            ops = [(sign, g @ k) for sign, k in ops]
    return ops


def apply_decomposition(decomp: QpdDecomposition, rho: np.ndarray) -> np.ndarray:
    """Apply the weighted term sum to a density matrix (2x2 for wire cuts,
    4x4 for gate cuts)."""
    out = np.zeros_like(rho, dtype=complex)
    for term in decomp.terms:
        if decomp.channel_kind == "wire":
            value = np.trace(_PAULI[term.left_op.observe] @ rho)
            prep = _zero_tensor(1)
            for name, params in term.right_op.steps:
                prep = _apply(prep, gate_matrix(name, params), (0,))
            out += term.coefficient * value * np.outer(prep, prep.conj())
            continue
        for (s0, k0), (s1, k1) in itertools.product(
            _signed_kraus(term.left_op.steps), _signed_kraus(term.right_op.steps)
        ):
            k = np.kron(k0, k1)
            out += term.coefficient * s0 * s1 * (k @ rho @ k.conj().T)
    return out


# ---------------------------------------------------------------------------
# Fragment programs
# ---------------------------------------------------------------------------


@dataclass
class _FragmentProgram:
    fragment: int
    width: int
    # ("gate", name, params, local qubits) | ("slot", cut, side, local qubit)
    ops: list[tuple] = field(default_factory=list)
    observable: list[str] = field(default_factory=list)
    observe_slots: list[tuple[int, int]] = field(default_factory=list)  # (cut, lq)
    cuts: list[int] = field(default_factory=list)


def _build_programs(
    partition: Partition, observable: Observable
) -> tuple[list[_FragmentProgram], list[QpdDecomposition]]:
    graph = partition.graph
    assign = partition.assignment
    pred, succ, partner = graph.wire_pred, graph.wire_succ, graph.partner

    cut_index = {cut.edge.key: k for k, cut in enumerate(partition.cuts)}
    decomps = []
    for cut in partition.cuts:
        if cut.kind == "wire":
            decomps.append(wire_cut_decomposition())
        else:
            node = graph.nodes[cut.edge.src]
            decomps.append(gate_cut_decomposition(node.gate_name, node.params))

    programs = []
    for frag in partition.fragments:
        inside = frag.node_ids
        local: dict[int, int] = {}  # node id -> local qubit, one per segment
        width = 0
        for v in sorted(inside):
            p = pred[v]
            if p is not None and p in inside:
                local[v] = local[p]
            else:
                local[v] = width
                width += 1
        prog = _FragmentProgram(frag.id, width, observable=["I"] * width)
        cuts: set[int] = set()
        for v in sorted(inside):
            node = graph.nodes[v]
            lq = local[v]
            s, mate = succ[v], partner[v]
            # a gate inside the fragment is emitted at its lower node, after
            # both operands are prepared
            if mate is None or mate not in inside:
                prepared = [v]
            elif mate > v:
                prepared = [v, mate]
            else:
                prepared = []
            for u in prepared:
                p = pred[u]
                if p is not None and p not in inside:
                    k = cut_index[(p, u)]
                    prog.ops.append(("slot", k, 1, local[u]))
                    cuts.add(k)
            if mate is None:
                prog.ops.append(("gate", node.gate_name, node.params, (lq,)))
            elif mate in inside:
                if mate > v:
                    prog.ops.append(
                        ("gate", node.gate_name, node.params, (lq, local[mate]))
                    )
            else:
                edge = graph.gate_edge_of[node.gate_ref]
                k = cut_index[edge.key]
                prog.ops.append(("slot", k, node.operand, lq))
                cuts.add(k)
            if s is None:
                prog.observable[lq] = observable.paulis[node.qubit]
            elif s not in inside:
                k = cut_index[(v, s)]
                prog.observe_slots.append((k, lq))
                cuts.add(k)
        prog.cuts = sorted(cuts)
        programs.append(prog)
    return programs, decomps


def _run_program(
    prog: _FragmentProgram,
    decomps: list[QpdDecomposition],
    choice: dict[int, int],
) -> float:
    """Fragment expectation for one choice of term per incident cut, summing
    over signed measurement branches."""
    branches = [(1, _zero_tensor(prog.width))]

    def side_op(k: int, side: int) -> LocalOp:
        term = decomps[k].terms[choice[k]]
        return term.left_op if side == 0 else term.right_op

    for op in prog.ops:
        if op[0] == "gate":
            _, name, params, qubits = op
            u = gate_matrix(name, params)
            branches = [(sign, _apply(psi, u, qubits)) for sign, psi in branches]
            continue
        _, k, side, lq = op
        for name, params in side_op(k, side).steps:
            if name == "measure":
                branches = [
                    (sign * (1 - 2 * m), _project(psi, lq, m))
                    for sign, psi in branches
                    for m in (0, 1)
                ]
            else:
                u = gate_matrix(name, params)
                branches = [(sign, _apply(psi, u, (lq,))) for sign, psi in branches]

    paulis = list(prog.observable)
    for k, lq in prog.observe_slots:
        paulis[lq] = side_op(k, 0).observe
    pauli_string = "".join(paulis)
    return math.fsum(sign * _pauli_value(psi, pauli_string) for sign, psi in branches)


def _fragment_tables(
    programs: list[_FragmentProgram],
    decomps: list[QpdDecomposition],
    workers: int,
) -> tuple[list[dict[tuple[int, ...], float]], int]:
    """Every fragment evaluated once per combination of its own cuts' terms."""
    jobs = []
    for idx, prog in enumerate(programs):
        ranges = [range(len(decomps[k])) for k in prog.cuts]
        for key in itertools.product(*ranges):
            jobs.append((idx, key))

    def run(job: tuple[int, tuple[int, ...]]) -> float:
        idx, key = job
        prog = programs[idx]
        return _run_program(prog, decomps, dict(zip(prog.cuts, key)))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            values = list(pool.map(run, jobs))
    else:
        values = [run(job) for job in jobs]

    tables: list[dict[tuple[int, ...], float]] = [{} for _ in programs]
    for (idx, key), value in zip(jobs, values):
        tables[idx][key] = value
    return tables, len(jobs)


# ---------------------------------------------------------------------------
# Reconstruction
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Reconstruction:
    value: float
    std_error: float
    evaluations: int  # fragment executions
    combos: int  # term combinations across all cuts
    mode: str
    shots: int = 0


def _idle_factor(partition: Partition, observable: Observable) -> float:
    """Qubits without gates stay in |0>."""
    used = {node.qubit for node in partition.graph.nodes}
    factor = 1.0
    for q, p in enumerate(observable.paulis):
        if q not in used and p in "XY":
            factor = 0.0
    return factor


def reconstruct(
    circuit: Circuit,
    partition: Partition,
    observable: Observable,
    mode: str = "exact",
    shots: int = 100_000,
    seed: int = 0,
    config: CutConfig | None = None,
) -> Reconstruction:
    """Rebuild <observable> from fragment expectations.

    exact: sum over the full product of term choices of coefficient products
    times fragment value products.
    sampled: Monte Carlo over term choices with probability |a|/kappa per
    cut; each sample contributes sign * prod(kappa) * prod(fragment values).
    """
    config = config or CutConfig()
    observable.check(circuit.num_qubits)
    if partition.graph.num_qubits != circuit.num_qubits:
        raise ValueError("partition was built for a different circuit")
    if mode not in ("exact", "sampled"):
        raise ValueError(f"mode must be 'exact' or 'sampled', got {mode!r}")
    n_cuts = len(partition.cuts)
    if mode == "exact" and n_cuts > config.max_exact_cuts:
        raise TooManyCutsError(
            f"{n_cuts} cuts exceed the exact-mode limit of {config.max_exact_cuts}"
        )

    programs, decomps = _build_programs(partition, observable)
    for prog in programs:
        if prog.width > config.max_sim_qubits:
            raise FragmentTooWideError(
                f"fragment {prog.fragment} needs {prog.width} qubits "
                f"(limit {config.max_sim_qubits})"
            )
    tables, evaluations = _fragment_tables(programs, decomps, config.workers)
    idle = _idle_factor(partition, observable)
    combos = math.prod(len(d) for d in decomps)

    if mode == "exact":
        parts = []
        for choice in itertools.product(*(range(len(d)) for d in decomps)):
            coeff = math.prod(d.terms[i].coefficient for d, i in zip(decomps, choice))
            if coeff == 0:
                continue
            value = coeff
            for prog, table in zip(programs, tables):
                value *= table[tuple(choice[k] for k in prog.cuts)]
            parts.append(value)
        value = idle * math.fsum(parts)
        logger.info(
            "exact reconstruction: %d combos, %d evaluations", combos, evaluations
        )
        return Reconstruction(value, 0.0, evaluations, combos, mode)

    if shots < 1:
        raise ValueError("shots must be >= 1")
    rng = np.random.default_rng(seed)
    samples = np.full(shots, idle)
    picks = []
    for d in decomps:
        weights = np.array([abs(t.coefficient) for t in d.terms])
        signs = np.sign([t.coefficient for t in d.terms])
        idx = rng.choice(len(d), size=shots, p=weights / weights.sum())
        samples *= d.kappa * signs[idx]
        picks.append(idx)
    for prog, table in zip(programs, tables):
        if not prog.cuts:
            samples *= table[()]
            continue
        keys = zip(*(picks[k].tolist() for k in prog.cuts))
        samples *= np.fromiter((table[key] for key in keys), float, shots)
    value = float(samples.mean())
    std_error = float(samples.std(ddof=1) / math.sqrt(shots)) if shots > 1 else math.inf
    logger.info("sampled reconstruction: %d shots, std error %.3g", shots, std_error)
    return Reconstruction(value, std_error, evaluations, combos, mode, shots)


def reconstruct_expectation(
    circuit: Circuit,
    partition: Partition,
    observable: Observable,
    mode: str = "exact",
    shots: int = 100_000,
    seed: int = 0,
    config: CutConfig | None = None,
) -> float:
    return reconstruct(circuit, partition, observable, mode, shots, seed, config).value
