"""Tests for the circuit IR and the OpenQASM 2.0 reader/writer."""

import math

import pytest

from cifold.circuit import (
    Circuit,
    Gate,
    Observable,
    QasmError,
    UnsupportedGateError,
    parse_qasm,
    write_qasm,
)
from cifold.generators import gen_adder, gen_bv, gen_ghz, gen_qft, random_circuit

GHZ3 = """OPENQASM 2.0;
include "qelib1.inc";
qreg q[3];
creg c[3];
h q[0];
cx q[0],q[1];
cx q[1],q[2];
barrier q;
measure q -> c;
"""


class TestGate:
    def test_rejects_wrong_arity(self):
        with pytest.raises(ValueError, match="takes 2 qubit"):
            Gate("cx", (0,))

    def test_rejects_missing_parameter(self):
        with pytest.raises(ValueError, match="takes 1 parameter"):
            Gate("rz", (0,))

    def test_rejects_duplicate_operand(self):
        with pytest.raises(ValueError, match="duplicate qubit"):
            Gate("cx", (1, 1))

    def test_rejects_unknown_gate(self):
        with pytest.raises(UnsupportedGateError, match="ccx"):
            Gate("ccx", (0, 1, 2))

    def test_angles_compare_within_tolerance(self):
        assert Gate("rz", (0,), (0.5,)) == Gate("rz", (0,), (0.5 + 1e-12,))
        assert Gate("rz", (0,), (0.5,)) != Gate("rz", (0,), (0.5 + 1e-6,))


class TestCircuit:
    def test_rejects_gate_outside_register(self):
        with pytest.raises(ValueError, match="outside the 2-qubit register"):
            Circuit(2, (Gate("cx", (1, 2)),))

    def test_counts_gates_by_name(self):
        c = gen_ghz(5)
        assert c.count("cx") == 4
        assert len(c.two_qubit_gates) == 4


class TestObservable:
    def test_all_z(self):
        assert Observable.all_z(3).paulis == "ZZZ"

    def test_single(self):
        assert Observable.single(4, 2).paulis == "IIZI"

    def test_rejects_bad_letters(self):
        with pytest.raises(ValueError, match="non-empty string"):
            Observable("ZQ")

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="does not match"):
            Observable("ZZ").check(3)


class TestParseQasm:
    def test_ghz_program(self):
        c = parse_qasm(GHZ3)
        assert c.num_qubits == 3
        assert [g.name for g in c.gates] == ["h", "cx", "cx"]
        assert c.gates[2].qubits == (1, 2)

    def test_parameter_expressions(self):
        c = parse_qasm(
            "OPENQASM 2.0;\nqreg q[2];\nrz(-pi/4) q[0];\ncp(2*pi/8) q[0],q[1];\n"
        )
        assert math.isclose(c.gates[0].params[0], -math.pi / 4)
        assert math.isclose(c.gates[1].params[0], math.pi / 4)

    def test_aliases_normalize(self):
        c = parse_qasm(
            "qreg q[2];\nu1(0.5) q[0];\ncu1(0.25) q[0],q[1];\nCX q[0],q[1];\n"
        )
        assert [g.name for g in c.gates] == ["p", "cp", "cx"]

    def test_single_qubit_broadcast(self):
        c = parse_qasm("qreg q[3];\nh q;\n")
        assert [g.qubits for g in c.gates] == [(0,), (1,), (2,)]

    def test_comments_ignored(self):
        c = parse_qasm("// leading\nqreg q[1];\nx q[0]; // trailing\n")
        assert len(c) == 1

    def test_unsupported_gate_has_location(self):
        with pytest.raises(QasmError, match=r"unsupported gate 'ccx' \(line 3"):
            parse_qasm("OPENQASM 2.0;\nqreg q[3];\nccx q[0],q[1],q[2];\n")

    def test_syntax_error_has_location(self):
        with pytest.raises(QasmError, match="syntax error") as info:
            parse_qasm("qreg q[2];\nh q[0]\n")
        assert info.value.line is not None

    def test_index_out_of_range(self):
        with pytest.raises(QasmError, match="out of range"):
            parse_qasm("qreg q[2];\nx q[2];\n")

    def test_multiple_registers_rejected(self):
        with pytest.raises(QasmError, match="multiple quantum registers"):
            parse_qasm("qreg a[1];\nqreg b[1];\n")

    def test_missing_register(self):
        with pytest.raises(QasmError, match="no quantum register"):
            parse_qasm("OPENQASM 2.0;\n")

    def test_two_qubit_broadcast_rejected(self):
        with pytest.raises(QasmError, match="broadcast"):
            parse_qasm("qreg q[2];\ncx q,q[1];\n")


class TestWriteQasm:
    @pytest.mark.parametrize(
        "circuit",
        [
            gen_ghz(6),
            gen_bv("1011"),
            gen_adder(3, a=5, b=2),
            gen_qft(5, swaps=True),
        ],
        ids=["ghz", "bv", "adder", "qft"],
    )
    def test_generators_survive_write_and_parse(self, circuit):
        assert parse_qasm(write_qasm(circuit)) == circuit

    def test_random_circuits_keep_angles(self):
        for seed in range(100):
            c = random_circuit(1 + seed % 6, 10 + seed % 50, seed=seed)
            back = parse_qasm(write_qasm(c))
            assert back == c
            assert all(
                a.params == b.params for a, b in zip(c.gates, back.gates)
            )
