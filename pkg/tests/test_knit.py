"""Tests for statevector simulation, cut decompositions and fragment knitting."""

import math

import numpy as np
import pytest

from cifold.circuit import Circuit, Gate, Observable, UnsupportedGateError
from cifold.config import CutConfig
from cifold.generators import gen_bv, gen_ghz, gen_qft
from cifold.graphing import build_circuit_graph
from cifold.knit import (
    FragmentTooWideError,
    TooManyCutsError,
    apply_decomposition,
    expectation,
    gate_cut_decomposition,
    gate_matrix,
    reconstruct,
    reconstruct_expectation,
    simulate,
    wire_cut_decomposition,
)
from cifold.partition import naive_assignment, partition_from_assignment

TOLERANCE = 1e-8


def _random_density(rng, dim):
    a = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = a @ a.conj().T
    return rho / np.trace(rho)


def _split(circuit, assignment):
    graph = build_circuit_graph(circuit)
    return partition_from_assignment(graph, assignment)


def _naive(circuit, q_con):
    graph = build_circuit_graph(circuit)
    return partition_from_assignment(graph, naive_assignment(graph, q_con))


def _oracle(circuit, paulis):
    return expectation(simulate(circuit), Observable(paulis))


def _mixed_circuit():
    """Three qubits with rotations, cx, cp and cz."""
    return Circuit(
        3,
        (
            Gate("ry", (0,), (0.3,)),  # node 0
            Gate("rx", (1,), (1.1,)),  # node 1
            Gate("cx", (0, 1)),  # nodes 2, 3
            Gate("ry", (2,), (0.7,)),  # node 4
            Gate("cp", (1, 2), (0.9,)),  # nodes 5, 6
            Gate("h", (1,)),  # node 7
            Gate("cz", (0, 2)),  # nodes 8, 9
            Gate("rx", (0,), (0.5,)),  # node 10
        ),
    )


class TestSimulate:
    def test_little_endian(self):
        state = simulate(Circuit(2, (Gate("x", (0,)),)))
        assert state.probability("10") == pytest.approx(1.0)
        assert abs(state.amplitudes[1]) == pytest.approx(1.0)

    def test_norm_preserved(self):
        assert simulate(_mixed_circuit()).norm == pytest.approx(1.0)

    def test_rotation_expectations(self):
        state = simulate(Circuit(1, (Gate("rx", (0,), (0.7,)),)))
        assert expectation(state, Observable("Y")) == pytest.approx(-math.sin(0.7))
        assert expectation(state, Observable("Z")) == pytest.approx(math.cos(0.7))

    def test_controlled_gate_operand_order(self):
        c = Circuit(2, (Gate("x", (1,)), Gate("cx", (1, 0))))
        assert simulate(c).probability("11") == pytest.approx(1.0)

    def test_qubit_limit(self):
        with pytest.raises(ValueError, match="cannot simulate 15 qubits"):
            simulate(gen_ghz(15))

    def test_no_matrix_for_unknown_name(self):
        with pytest.raises(UnsupportedGateError, match="no matrix"):
            gate_matrix("ccx")


class TestWireCut:
    def test_weights(self):
        decomp = wire_cut_decomposition()
        assert len(decomp) == 8
        assert decomp.kappa == pytest.approx(4.0)
        assert decomp.gamma == pytest.approx(16.0)

    def test_identity_channel_on_random_states(self):
        rng = np.random.default_rng(11)
        decomp = wire_cut_decomposition()
        for _ in range(100):
            rho = _random_density(rng, 2)
            np.testing.assert_allclose(
                apply_decomposition(decomp, rho), rho, atol=1e-12
            )


class TestGateCut:
    @pytest.mark.parametrize("name", ["cx", "cz"])
    def test_clifford_gates_have_gamma_nine(self, name):
        decomp = gate_cut_decomposition(name)
        assert len(decomp) == 6
        assert decomp.gamma == pytest.approx(9.0)

    def test_cp_gamma_follows_angle(self):
        lam = 0.9
        expected = (1 + 2 * abs(math.sin(lam / 2))) ** 2
        assert gate_cut_decomposition("cp", (lam,)).gamma == pytest.approx(expected)

    @pytest.mark.parametrize(
        "name,params",
        [("cx", ()), ("cz", ()), ("cp", (0.9,)), ("cp", (-2.3,)), ("cp", (math.pi,))],
    )
    def test_reproduces_gate_channel_on_random_states(self, name, params):
        rng = np.random.default_rng(5)
        decomp = gate_cut_decomposition(name, params)
        u = gate_matrix(name, params)
        for _ in range(100):
            rho = _random_density(rng, 4)
            np.testing.assert_allclose(
                apply_decomposition(decomp, rho), u @ rho @ u.conj().T, atol=1e-12
            )

    def test_swap_is_not_decomposed(self):
        with pytest.raises(UnsupportedGateError, match="swap"):
            gate_cut_decomposition("swap")


class TestReconstructExact:
    @pytest.mark.parametrize("paulis", ["ZZZZZZ", "XXXXXX", "ZIIIII", "IIZZII"])
    def test_ghz_gate_cut(self, paulis):
        circuit = gen_ghz(6)
        rec = reconstruct(circuit, _naive(circuit, 3), Observable(paulis))
        assert rec.value == pytest.approx(_oracle(circuit, paulis), abs=TOLERANCE)
        assert rec.combos == 6
        assert rec.evaluations == 12

    @pytest.mark.parametrize("paulis", ["ZZZ", "XIY", "IZX", "YYZ", "IXI"])
    def test_wire_and_gate_cuts(self, paulis):
        circuit = _mixed_circuit()
        partition = _split(circuit, [0, 0, 0, 0, 1, 1, 1, 1, 0, 1, 0])
        assert sorted(c.kind for c in partition.cuts) == ["gate", "wire"]
        value = reconstruct_expectation(circuit, partition, Observable(paulis))
        assert value == pytest.approx(_oracle(circuit, paulis), abs=TOLERANCE)

    @pytest.mark.parametrize("paulis", ["ZZZ", "XYZ", "IYX"])
    def test_fragment_revisits_a_qubit(self, paulis):
        circuit = _mixed_circuit()
        # q1 runs A -> B -> A
        partition = _split(circuit, [0, 0, 0, 0, 1, 1, 1, 0, 0, 1, 0])
        assert len(partition.cuts) == 3
        assert partition.fragments[0].width == 3
        value = reconstruct_expectation(circuit, partition, Observable(paulis))
        assert value == pytest.approx(_oracle(circuit, paulis), abs=TOLERANCE)

    def test_bv_wire_cut_reads_secret(self):
        circuit = gen_bv("101")
        graph = build_circuit_graph(circuit)
        # q2 and the ancilla finish in a second fragment from cx(2,3) on
        assignment = [1 if v in (7, 8, 11) else 0 for v in range(len(graph))]
        partition = partition_from_assignment(graph, assignment)
        assert [c.kind for c in partition.cuts] == ["wire", "wire"]
        for q, bit in enumerate("101"):
            obs = Observable.single(4, q)
            expected = -1.0 if bit == "1" else 1.0
            value = reconstruct_expectation(circuit, partition, obs)
            assert value == pytest.approx(expected, abs=TOLERANCE)

    @pytest.mark.parametrize("paulis", ["XXXX", "ZIII", "IIIZ"])
    def test_qft_four_gate_cuts(self, paulis):
        circuit = gen_qft(4)
        partition = _naive(circuit, 2)
        assert len(partition.cuts) == 4
        value = reconstruct_expectation(circuit, partition, Observable(paulis))
        assert value == pytest.approx(_oracle(circuit, paulis), abs=TOLERANCE)

    @pytest.mark.parametrize("operands", [(0, 1), (1, 0)])
    @pytest.mark.parametrize("paulis", ["IX", "ZX", "XZ", "ZZ"])
    def test_wire_cut_into_either_gate_operand(self, operands, paulis):
        circuit = Circuit(
            2,
            (
                Gate("x", (0,)),  # node 0
                Gate("ry", (1,), (0.7,)),  # node 1
                Gate("cz", operands),  # nodes 2, 3
            ),
        )
        # the ry runs alone, both halves of the cz share a fragment
        partition = _split(circuit, [0, 1, 0, 0])
        assert [c.kind for c in partition.cuts] == ["wire"]
        value = reconstruct_expectation(circuit, partition, Observable(paulis))
        assert value == pytest.approx(_oracle(circuit, paulis), abs=TOLERANCE)

    def test_thread_pool_gives_same_value(self):
        circuit = _mixed_circuit()
        partition = _split(circuit, [0, 0, 0, 0, 1, 1, 1, 1, 0, 1, 0])
        obs = Observable("XIY")
        serial = reconstruct(circuit, partition, obs)
        pooled = reconstruct(circuit, partition, obs, config=CutConfig(workers=4))
        assert pooled.value == pytest.approx(serial.value, abs=1e-12)

    def test_idle_qubits(self):
        circuit = Circuit(3, (Gate("h", (0,)),))
        partition = _split(circuit, [0])
        assert reconstruct_expectation(
            circuit, partition, Observable("XIZ")
        ) == pytest.approx(1.0)
        assert reconstruct_expectation(
            circuit, partition, Observable("XIX")
        ) == pytest.approx(0.0)


class TestReconstructSampled:
    def test_within_five_sigma(self):
        circuit = gen_ghz(6)
        partition = _naive(circuit, 3)
        rec = reconstruct(
            circuit, partition, Observable("ZZZZZZ"), "sampled", shots=20_000, seed=1
        )
        assert rec.mode == "sampled"
        assert rec.shots == 20_000
        assert abs(rec.value - 1.0) <= 5 * rec.std_error + TOLERANCE

    def test_error_tracks_predicted_std_error(self):
        circuit = gen_ghz(6)
        partition = _naive(circuit, 3)
        obs = Observable("ZZZZZZ")
        errors, predicted = [], []
        for seed in range(30):
            rec = reconstruct(circuit, partition, obs, "sampled", shots=2000, seed=seed)
            errors.append(abs(rec.value - 1.0))
            predicted.append(rec.std_error)
        assert np.mean(errors) <= 3 * np.mean(predicted)

    def test_same_seed_same_estimate(self):
        circuit = _mixed_circuit()
        partition = _split(circuit, [0, 0, 0, 0, 1, 1, 1, 1, 0, 1, 0])
        obs = Observable("ZZZ")
        a = reconstruct(circuit, partition, obs, "sampled", shots=500, seed=3)
        b = reconstruct(circuit, partition, obs, "sampled", shots=500, seed=3)
        assert a.value == b.value

    def test_rejects_zero_shots(self):
        circuit = gen_ghz(6)
        with pytest.raises(ValueError, match="shots must be >= 1"):
            reconstruct(
                circuit, _naive(circuit, 3), Observable("Z" * 6), "sampled", shots=0
            )


class TestReconstructErrors:
    def test_too_many_cuts(self):
        circuit = gen_ghz(6)
        config = CutConfig(max_exact_cuts=0)
        with pytest.raises(TooManyCutsError, match="1 cuts exceed"):
            reconstruct(
                circuit, _naive(circuit, 3), Observable("Z" * 6), config=config
            )

    def test_fragment_too_wide(self):
        circuit = gen_ghz(6)
        config = CutConfig(max_sim_qubits=2)
        with pytest.raises(FragmentTooWideError, match="needs 3 qubits"):
            reconstruct(
                circuit, _naive(circuit, 3), Observable("Z" * 6), config=config
            )

    def test_unknown_mode(self):
        circuit = gen_ghz(4)
        with pytest.raises(ValueError, match="mode must be"):
            reconstruct(circuit, _naive(circuit, 2), Observable("Z" * 4), "fast")

    def test_partition_of_other_circuit(self):
        with pytest.raises(ValueError, match="different circuit"):
            reconstruct(gen_ghz(5), _naive(gen_ghz(4), 2), Observable("Z" * 5))

    def test_swap_cut_cannot_be_knit(self):
        circuit = Circuit(2, (Gate("swap", (0, 1)),))
        with pytest.raises(UnsupportedGateError):
            reconstruct(circuit, _split(circuit, [0, 1]), Observable("ZZ"))


def _two_block_circuit(rng, depth=4):
    """Four qubits: gates inside {0, 1} and {2, 3}, one gate across."""
    gates = []
    for layer in range(depth):
        for q in range(4):
            name = str(rng.choice(["h", "t", "rx", "ry", "rz"]))
            params = (float(rng.uniform(-np.pi, np.pi)),) if name[0] == "r" else ()
            gates.append(Gate(name, (q,), params))
        pairs = [(0, 1), (2, 3)] + ([(1, 2)] if layer == 1 else [])
        for a, b in pairs:
            name = str(rng.choice(["cx", "cz", "cp"]))
            params = (float(rng.uniform(-np.pi, np.pi)),) if name == "cp" else ()
            qubits = (a, b) if rng.random() < 0.5 else (b, a)
            gates.append(Gate(name, qubits, params))
    return Circuit(4, tuple(gates))


class TestReconstructRandom:
    @pytest.mark.parametrize("seed", range(25))
    def test_matches_statevector(self, seed):
        rng = np.random.default_rng(seed)
        circuit = _two_block_circuit(rng)
        graph = build_circuit_graph(circuit)
        paulis = "".join(rng.choice(list("IXYZ"), size=4))
        oracle = _oracle(circuit, paulis)

        by_half = [int(node.qubit >= 2) for node in graph.nodes]
        partition = partition_from_assignment(graph, by_half)
        assert len(partition.cuts) == 1
        value = reconstruct_expectation(circuit, partition, Observable(paulis))
        assert value == pytest.approx(oracle, abs=TOLERANCE)

        # move a run of one wire into the other fragment
        wire = [v for v, node in enumerate(graph.nodes) if node.qubit == seed % 4]
        i, j = sorted(rng.choice(len(wire) + 1, size=2, replace=False))
        moved = list(by_half)
        for v in wire[i:j]:
            moved[v] = 1 - moved[v]
        partition = partition_from_assignment(graph, moved)
        if len(partition.cuts) <= CutConfig().max_exact_cuts:
            value = reconstruct_expectation(circuit, partition, Observable(paulis))
            assert value == pytest.approx(oracle, abs=TOLERANCE)
