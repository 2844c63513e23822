"""
Circuit graph G=(V, E) and per-qubit workload sequences.

Every 1-qubit gate becomes one node; every 2-qubit gate becomes two role
nodes, one per operand qubit, joined by an undirected gate edge. Wire edges
join consecutive nodes on the same qubit. Both cut types are then plain edge
deletions: a gate cut removes a gate edge, a wire cut removes a wire edge.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING

from cifold.circuit import Circuit, Gate
from cifold.cost import DEFAULT_TABLE, GammaTable

if TYPE_CHECKING:
    from cifold.folding import MetaGraph

logger = logging.getLogger(__name__)

SYMMETRIC_GATES = {"cz", "cp", "swap"}


@dataclass(frozen=True)
class GraphNode:
    id: int
    gate_ref: int
    gate_name: str
    params: tuple[float, ...]
    qubit: int
    role: str  # single | control | target | symmetric
    operand: int  # position of `qubit` in the gate's qubit tuple

    @property
    def is_half(self) -> bool:
        return self.role != "single"


@dataclass(frozen=True)
class GraphEdge:
    src: int
    dst: int
    kind: str  # wire | gate
    gate_name: str  # gate being cut for gate edges, "" for wire edges
    weight: int

    @property
    def key(self) -> tuple[int, int]:
        return (self.src, self.dst)


@dataclass(frozen=True)
class QubitGraph:
    qubit: int
    sequence: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.sequence)


@dataclass(frozen=True)
class CircuitGraph:
    num_qubits: int
    nodes: tuple[GraphNode, ...]
    edges: tuple[GraphEdge, ...]
    qubit_heads: dict[int, int]

    def __len__(self) -> int:
        return len(self.nodes)

    @cached_property
    def wire_edges(self) -> tuple[GraphEdge, ...]:
        return tuple(e for e in self.edges if e.kind == "wire")

    @cached_property
    def gate_edges(self) -> tuple[GraphEdge, ...]:
        return tuple(e for e in self.edges if e.kind == "gate")

    @cached_property
    def incident(self) -> tuple[tuple[tuple[int, GraphEdge], ...], ...]:
        """Per node: (neighbor id, edge) pairs in edge order."""
        adj: list[list[tuple[int, GraphEdge]]] = [[] for _ in self.nodes]
        for e in self.edges:
            adj[e.src].append((e.dst, e))
            adj[e.dst].append((e.src, e))
        return tuple(tuple(a) for a in adj)

    @cached_property
    def wire_pred(self) -> tuple[int | None, ...]:
        pred: list[int | None] = [None] * len(self.nodes)
        for e in self.wire_edges:
            pred[e.dst] = e.src
        return tuple(pred)

    @cached_property
    def wire_succ(self) -> tuple[int | None, ...]:
        succ: list[int | None] = [None] * len(self.nodes)
        for e in self.wire_edges:
            succ[e.src] = e.dst
        return tuple(succ)

    @cached_property
    def partner(self) -> tuple[int | None, ...]:
        """Other half of the node's 2-qubit gate, or None."""
        other: list[int | None] = [None] * len(self.nodes)
        for e in self.gate_edges:
            other[e.src], other[e.dst] = e.dst, e.src
        return tuple(other)

    @cached_property
    def gate_edge_of(self) -> dict[int, GraphEdge]:
        """gate_ref -> gate edge."""
        return {self.nodes[e.src].gate_ref: e for e in self.gate_edges}

    @cached_property
    def by_gate(self) -> dict[int, tuple[int, ...]]:
        """gate_ref -> node ids, ordered by operand."""
        groups: dict[int, list[GraphNode]] = {}
        for node in self.nodes:
            groups.setdefault(node.gate_ref, []).append(node)
        return {
            ref: tuple(n.id for n in sorted(ns, key=lambda n: n.operand))
            for ref, ns in groups.items()
        }

    @cached_property
    def layers(self) -> tuple[int, ...]:
        """Circuit-wide ASAP layer (1-based) of each node; both halves of a
        2-qubit gate share a layer."""
        level = [0] * self.num_qubits
        out = [0] * len(self.nodes)
        for ref in sorted(self.by_gate):
            ids = self.by_gate[ref]
            t = max(level[self.nodes[i].qubit] for i in ids) + 1
            for i in ids:
                level[self.nodes[i].qubit] = t
                out[i] = t
        return tuple(out)


def _roles(gate: Gate) -> tuple[str, ...]:
    if gate.arity == 1:
        return ("single",)
    if gate.name in SYMMETRIC_GATES:
        return ("symmetric", "symmetric")
    return ("control", "target")


def build_circuit_graph(
    circuit: Circuit, table: GammaTable = DEFAULT_TABLE
) -> CircuitGraph:
    """Node ids follow program order; both halves of a 2-qubit gate get
    consecutive ids in operand order."""
    nodes: list[GraphNode] = []
    edges: list[GraphEdge] = []
    last_on_qubit: dict[int, int] = {}
    heads: dict[int, int] = {}

    for ref, gate in enumerate(circuit.gates):
        ids = []
        for operand, (qubit, role) in enumerate(zip(gate.qubits, _roles(gate))):
            node = GraphNode(
                len(nodes), ref, gate.name, gate.params, qubit, role, operand
            )
            nodes.append(node)
            ids.append(node.id)
            if qubit in last_on_qubit:
                edges.append(
                    GraphEdge(
                        last_on_qubit[qubit], node.id, "wire", "", table.wire_weight()
                    )
                )
            else:
                heads[qubit] = node.id
            last_on_qubit[qubit] = node.id
        if len(ids) == 2:
            edges.append(
                GraphEdge(
                    ids[0], ids[1], "gate", gate.name, table.gate_weight(gate.name)
                )
            )

    graph = CircuitGraph(circuit.num_qubits, tuple(nodes), tuple(edges), heads)
    logger.info(
        "circuit graph: %d nodes, %d wire edges, %d gate edges",
        len(nodes),
        len(graph.wire_edges),
        len(graph.gate_edges),
    )
    return graph


def _walk_wire(graph: CircuitGraph, qubit: int) -> QubitGraph:
    seq = []
    node = graph.qubit_heads.get(qubit)
    while node is not None:
        seq.append(node)
        node = graph.wire_succ[node]
    return QubitGraph(qubit, tuple(seq))


def extract_qubit_graphs(graph: CircuitGraph, workers: int = 1) -> list[QubitGraph]:
    """One wire-path sequence per qubit, ordered by qubit index."""
    qubits = range(graph.num_qubits)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda q: _walk_wire(graph, q), qubits))
    return [_walk_wire(graph, q) for q in qubits]


def circuit_from_graph(graph: CircuitGraph) -> Circuit:
    """Replay nodes in program order, one gate per gate_ref."""
    gates = []
    for ref in sorted(graph.by_gate):
        halves = [graph.nodes[i] for i in graph.by_gate[ref]]
        first = halves[0]
        qubits = tuple(n.qubit for n in halves)
        gates.append(Gate(first.gate_name, qubits, first.params))
    return Circuit(graph.num_qubits, tuple(gates))


# ---------------------------------------------------------------------------
# DOT export
# ---------------------------------------------------------------------------


def _dot_escape(text: str) -> str:
    return text.replace('"', r"\"")


def _node_label(node: GraphNode) -> str:
    params = ""
    if node.params:
        params = "(" + ",".join(f"{p:.4g}" for p in node.params) + ")"
    role = "" if node.role in ("single", "symmetric") else f" {node.role[0]}"
    return f"{node.gate_name}{params}{role} q{node.qubit}"


def export_dot(graph: CircuitGraph | MetaGraph) -> str:
    """DOT digraph; wire edges are directed, gate edges drawn without arrows.
    Meta-graph nodes carry their fold weight as a ×w suffix."""
    from cifold.folding import MetaGraph

    lines = ["digraph circuit {", "  node [shape=box];"]
    if isinstance(graph, MetaGraph):
        base = graph.graph
        for meta in graph.meta_nodes:
            label = _dot_escape(_node_label(base.nodes[meta.representative]))
            lines.append(
                f'  n{meta.representative} [label="{label} ×{meta.fold_weight}"];'
            )
        edge_rows = [(s, d, kind, w) for s, d, kind, w in graph.meta_edges]
    else:
        for node in graph.nodes:
            lines.append(f'  n{node.id} [label="{_dot_escape(_node_label(node))}"];')
        edge_rows = [(e.src, e.dst, e.kind, e.weight) for e in graph.edges]

    for src, dst, kind, weight in edge_rows:
        style = "" if kind == "wire" else ", dir=none, style=dashed"
        lines.append(f'  n{src} -> n{dst} [label="{kind} {weight}"{style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"
