"""Tests for the benchmark workload generators."""

import pytest

from cifold.circuit import Observable
from cifold.generators import (
    adder_layout,
    gen_adder,
    gen_bv,
    gen_ghz,
    gen_qft,
    generate,
    random_circuit,
    size_for_qubits,
)
from cifold.knit import expectation, simulate


def _adder_bits(n, a, b):
    """Expected basis state of gen_adder(n, a, b), written qubit 0 first."""
    layout = adder_layout(n)
    total = a + b
    bits = ["0"] * (2 * n + 2)
    for i in range(n):
        bits[layout["a"][i]] = str(a >> i & 1)
        bits[layout["b"][i]] = str(total >> i & 1)
    bits[layout["cout"]] = str(total >> n & 1)
    return "".join(bits)


class TestGhz:
    def test_shape(self):
        c = gen_ghz(5)
        assert c.num_qubits == 5
        assert c.count("h") == 1
        assert c.count("cx") == 4

    def test_state_is_cat_state(self):
        state = simulate(gen_ghz(4))
        assert state.probability("0000") == pytest.approx(0.5)
        assert state.probability("1111") == pytest.approx(0.5)

    def test_rejects_single_qubit(self):
        with pytest.raises(ValueError, match="at least 2 qubits"):
            gen_ghz(1)


class TestBernsteinVazirani:
    def test_one_cx_per_set_bit(self):
        c = gen_bv("10110")
        assert c.num_qubits == 6
        assert c.count("cx") == 3
        assert all(g.qubits[1] == 5 for g in c.two_qubit_gates)

    def test_data_qubits_read_out_secret(self):
        secret = "1011"
        state = simulate(gen_bv(secret))
        for q, bit in enumerate(secret):
            z = expectation(state, Observable.single(5, q))
            assert z == pytest.approx(-1.0 if bit == "1" else 1.0)

    def test_uncompute_adds_one_gate(self):
        assert len(gen_bv("11", uncompute_ancilla=True)) == len(gen_bv("11")) + 1

    def test_rejects_bad_secret(self):
        with pytest.raises(ValueError, match="only 0/1"):
            gen_bv("10a")


class TestAdder:
    @pytest.mark.parametrize("a,b", [(0, 0), (1, 2), (3, 1), (3, 3)])
    def test_two_bit_sums(self, a, b):
        state = simulate(gen_adder(2, a=a, b=b))
        assert state.probability(_adder_bits(2, a, b)) == pytest.approx(1.0)

    def test_three_bit_sum_with_carry(self):
        state = simulate(gen_adder(3, a=5, b=6))
        assert state.probability(_adder_bits(3, 5, 6)) == pytest.approx(1.0)

    def test_qubit_count(self):
        assert gen_adder(4).num_qubits == 10

    def test_rejects_oversized_operand(self):
        with pytest.raises(ValueError, match="fit in 2 bits"):
            gen_adder(2, a=4)


class TestQft:
    def test_gate_counts(self):
        c = gen_qft(5)
        assert c.count("h") == 5
        assert c.count("cp") == 10
        assert c.count("swap") == 0
        assert gen_qft(5, swaps=True).count("swap") == 2

    def test_zero_state_maps_to_uniform(self):
        state = simulate(gen_qft(3, swaps=True))
        for index in range(8):
            bits = format(index, "03b")
            assert state.probability(bits) == pytest.approx(1 / 8)


class TestGenerate:
    def test_bv_defaults_to_all_ones(self):
        c = generate("bv", 4)
        assert c.num_qubits == 5
        assert c.count("cx") == 4

    def test_bv_explicit_secret(self):
        assert generate("bv", secret="101").count("cx") == 2

    def test_unknown_kind(self):
        with pytest.raises(ValueError, match="unknown workload"):
            generate("grover", 4)

    def test_missing_size(self):
        with pytest.raises(ValueError, match="needs a size"):
            generate("ghz")

    @pytest.mark.parametrize(
        "kind,qubits,expected",
        [("bv", 20, 20), ("ghz", 20, 20), ("qft", 30, 30), ("adder", 21, 20)],
    )
    def test_size_for_qubits(self, kind, qubits, expected):
        circuit = generate(kind, size_for_qubits(kind, qubits))
        assert circuit.num_qubits == expected


class TestRandomCircuit:
    def test_same_seed_same_circuit(self):
        assert random_circuit(5, 30, seed=7) == random_circuit(5, 30, seed=7)

    def test_single_qubit_uses_one_qubit_gates(self):
        c = random_circuit(1, 20, seed=1)
        assert not c.two_qubit_gates
