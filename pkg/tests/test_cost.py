"""Tests for γ tables, cut grouping and QRO."""

import pytest

from cifold.circuit import Circuit, Gate
from cifold.cost import (
    ErrorBudget,
    GammaTable,
    gamma_lookup,
    qro,
    sampling_overhead,
    table_for,
)
from cifold.generators import gen_ghz
from cifold.graphing import build_circuit_graph
from cifold.partition import partition_from_assignment


def _partition(circuit, assignment, table=None):
    graph = build_circuit_graph(circuit, table or GammaTable())
    return partition_from_assignment(graph, assignment)


def _two_layer_split():
    """Two qubits, two layers; layer 1 in one fragment, layer 2 in another."""
    c = Circuit(
        2, (Gate("h", (0,)), Gate("h", (1,)), Gate("x", (0,)), Gate("x", (1,)))
    )
    return _partition(c, [0, 0, 1, 1])


class TestGammaLookup:
    @pytest.mark.parametrize(
        "kind,gate,expected",
        [("wire", None, 16), ("gate", "cx", 9), ("gate", "cz", 9),
         ("gate", "cp", 9), ("gate", "swap", 49)],
    )
    def test_sampling_weights(self, kind, gate, expected):
        assert gamma_lookup(kind, gate) == expected

    def test_mode_does_not_change_single_cuts(self):
        assert gamma_lookup("wire", mode="theoretical") == 16

    def test_variation_convention(self):
        table = table_for("practical", "variation")
        assert gamma_lookup("wire", table=table) == 4
        assert gamma_lookup("gate", "swap", table=table) == 7

    def test_unknown_gate(self):
        with pytest.raises(KeyError, match="h"):
            gamma_lookup("gate", "h")

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="unknown cut kind"):
            gamma_lookup("teleport")


class TestParallelWire:
    def test_group_of_one_is_a_single_cut(self):
        assert GammaTable().parallel_wire(1) == 16

    @pytest.mark.parametrize("n,expected", [(2, 81), (3, 289), (4, 1089)])
    def test_joint_weight(self, n, expected):
        assert GammaTable().parallel_wire(n) == expected

    def test_variation_root(self):
        assert table_for(convention="variation").parallel_wire(2) == 9

    def test_rejects_empty_group(self):
        with pytest.raises(ValueError, match="at least one cut"):
            GammaTable().parallel_wire(0)


class TestOverheadAndShots:
    def test_sampling_overhead(self):
        assert sampling_overhead(9, 2) == 81
        assert sampling_overhead(16, 0) == 1

    def test_shots_for_default_epsilon(self):
        assert ErrorBudget(0.05).shots(81) == 32400

    def test_shots_round_up(self):
        assert ErrorBudget(0.3).shots(1) == 12


class TestQro:
    def test_single_gate_cut(self):
        partition = _partition(gen_ghz(6), [0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1])
        report = qro(partition)
        assert [(f.width, f.depth, f.variation) for f in report.fragments] == [
            (3, 4, 9),
            (3, 3, 9),
        ]
        assert report.qro == 9 * 3 * 4 + 9 * 3 * 3
        assert report.qro_theoretical == report.qro_practical
        assert report.sampling_overhead == 9
        assert report.cut_counts["gate"] == 1
        assert report.recompute() == report.qro

    def test_uncut_partition_costs_width_times_depth(self):
        partition = _partition(gen_ghz(4), [0] * 7)
        report = qro(partition)
        assert report.qro == 4 * 4
        assert report.sampling_overhead == 1
        assert report.groups == ()

    def test_parallel_group_priced_jointly_in_theoretical_mode(self):
        report = qro(_two_layer_split())
        assert [g.kind for g in report.groups] == ["parallel"]
        assert report.qro_practical == 2 * (256 * 2 * 2)
        assert report.qro_theoretical == 2 * (81 * 2 * 2)
        assert report.qro == report.qro_practical
        assert report.cut_counts["parallel_groups"] == 1

    def test_theoretical_table_reports_theoretical_qro(self):
        report = qro(_two_layer_split(), table_for("theoretical"))
        assert report.mode == "theoretical"
        assert report.qro == report.qro_theoretical
        assert [f.variation for f in report.fragments] == [81, 81]

    def test_third_fragment_between_wires_makes_blackbox(self):
        c = Circuit(
            3,
            (
                Gate("h", (0,)), Gate("h", (1,)), Gate("h", (2,)),
                Gate("x", (0,)), Gate("x", (1,)), Gate("x", (2,)),
            ),
        )
        partition = _partition(c, [0, 2, 0, 1, 2, 1])
        report = qro(partition)
        assert [g.kind for g in report.groups] == ["blackbox"]
        assert report.qro_theoretical == report.qro_practical

    def test_cuts_in_different_slices_stay_single(self):
        gates = [Gate("h", (0,)), Gate("x", (0,))]
        gates += [Gate("h", (1,)), Gate("x", (1,)), Gate("z", (1,))]
        c = Circuit(2, tuple(gates))
        # q0 cut after layer 1, q1 cut after layer 2
        partition = _partition(c, [0, 1, 0, 0, 1])
        report = qro(partition)
        assert sorted(g.kind for g in report.groups) == ["single", "single"]

    def test_partition_cost_shortcut(self):
        partition = _partition(gen_ghz(6), [0] * 6 + [1] * 5)
        assert partition.cost().qro == qro(partition).qro
