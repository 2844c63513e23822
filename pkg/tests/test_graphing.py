"""Tests for circuit graph construction, qubit sequences and DOT export."""

import pytest

from cifold.circuit import Circuit, Gate
from cifold.cost import table_for
from cifold.folding import fold
from cifold.generators import gen_adder, gen_ghz, gen_qft, random_circuit
from cifold.graphing import (
    build_circuit_graph,
    circuit_from_graph,
    export_dot,
    extract_qubit_graphs,
)


@pytest.fixture
def ghz3_graph():
    return build_circuit_graph(gen_ghz(3))


class TestBuildCircuitGraph:
    def test_one_node_per_operand(self, ghz3_graph):
        assert len(ghz3_graph) == 5
        assert [n.role for n in ghz3_graph.nodes] == [
            "single",
            "control",
            "target",
            "control",
            "target",
        ]

    def test_edges_and_weights(self, ghz3_graph):
        rows = [(e.src, e.dst, e.kind, e.weight) for e in ghz3_graph.edges]
        assert rows == [
            (0, 1, "wire", 16),
            (1, 2, "gate", 9),
            (2, 3, "wire", 16),
            (3, 4, "gate", 9),
        ]

    def test_variation_convention_uses_roots(self):
        graph = build_circuit_graph(gen_ghz(3), table_for("practical", "variation"))
        assert {e.kind: e.weight for e in graph.edges} == {"wire": 4, "gate": 3}

    def test_symmetric_gates(self):
        c = Circuit(2, (Gate("cz", (0, 1)), Gate("swap", (0, 1))))
        graph = build_circuit_graph(c)
        assert {n.role for n in graph.nodes} == {"symmetric"}
        assert [e.weight for e in graph.gate_edges] == [9, 49]

    def test_wire_edge_count(self):
        c = gen_adder(3)
        graph = build_circuit_graph(c)
        operands = sum(g.arity for g in c.gates)
        used = {q for g in c.gates for q in g.qubits}
        assert len(graph.wire_edges) == operands - len(used)
        assert len(graph.gate_edges) == len(c.two_qubit_gates)

    def test_halves_share_a_layer(self, ghz3_graph):
        assert ghz3_graph.layers == (1, 2, 2, 3, 3)

    def test_partner_links_gate_halves(self, ghz3_graph):
        assert ghz3_graph.partner == (None, 2, 1, 4, 3)


class TestQubitGraphs:
    def test_sequences_follow_wires(self, ghz3_graph):
        seqs = extract_qubit_graphs(ghz3_graph)
        assert [q.sequence for q in seqs] == [(0, 1), (2, 3), (4,)]

    def test_thread_pool_gives_same_result(self):
        graph = build_circuit_graph(gen_qft(6))
        assert extract_qubit_graphs(graph, workers=3) == extract_qubit_graphs(graph)

    def test_idle_qubit_has_empty_sequence(self):
        graph = build_circuit_graph(Circuit(3, (Gate("h", (0,)),)))
        assert [len(q) for q in extract_qubit_graphs(graph)] == [1, 0, 0]


class TestCircuitFromGraph:
    @pytest.mark.parametrize("seed", range(5))
    def test_graph_preserves_the_circuit(self, seed):
        circuit = random_circuit(5, 50, seed=seed)
        assert circuit_from_graph(build_circuit_graph(circuit)) == circuit


class TestExportDot:
    def test_circuit_graph(self, ghz3_graph):
        text = export_dot(ghz3_graph)
        assert text.startswith("digraph circuit {")
        assert 'n0 -> n1 [label="wire 16"];' in text
        assert 'n1 -> n2 [label="gate 9", dir=none, style=dashed];' in text
        assert text.rstrip().endswith("}")

    def test_meta_graph_shows_fold_weight(self):
        graph = build_circuit_graph(gen_ghz(8))
        meta = fold(extract_qubit_graphs(graph), graph)
        text = export_dot(meta)
        assert "×" in text
        assert text.count(" [label=") >= len(meta)
