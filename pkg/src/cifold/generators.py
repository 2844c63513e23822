"""Deterministic benchmark workloads: GHZ, Bernstein-Vazirani, adder, QFT."""

from __future__ import annotations

import math

import numpy as np

from cifold.circuit import GATE_SPECS, Circuit, Gate


def gen_ghz(n: int) -> Circuit:
    if n < 2:
        raise ValueError(f"GHZ needs at least 2 qubits, got {n}")
    gates = [Gate("h", (0,))]
    gates += [Gate("cx", (i, i + 1)) for i in range(n - 1)]
    return Circuit(n, tuple(gates))


def gen_bv(secret: str, uncompute_ancilla: bool = False) -> Circuit:
    """Bernstein-Vazirani with data qubits 0..n-1 and the ancilla last.

    Bit i of `secret` is read out on qubit i.
    """
    if not secret:
        raise ValueError("BV secret must be a non-empty bit string")
    if set(secret) - {"0", "1"}:
        raise ValueError(f"BV secret must contain only 0/1, got {secret!r}")
    n = len(secret)
    anc = n
    gates = [Gate("h", (q,)) for q in range(n)]
    gates += [Gate("x", (anc,)), Gate("h", (anc,))]
    gates += [Gate("cx", (q, anc)) for q, bit in enumerate(secret) if bit == "1"]
    gates += [Gate("h", (q,)) for q in range(n)]
    if uncompute_ancilla:
        gates.append(Gate("h", (anc,)))
    return Circuit(n + 1, tuple(gates))


def _ccx(a: int, b: int, c: int) -> list[Gate]:
    """Toffoli on controls a, b and target c in the {h, t, tdg, cx} basis."""
    return [
        Gate("h", (c,)),
        Gate("cx", (b, c)),
        Gate("tdg", (c,)),
        Gate("cx", (a, c)),
        Gate("t", (c,)),
        Gate("cx", (b, c)),
        Gate("tdg", (c,)),
        Gate("cx", (a, c)),
        Gate("t", (b,)),
        Gate("t", (c,)),
        Gate("h", (c,)),
        Gate("cx", (a, b)),
        Gate("t", (a,)),
        Gate("tdg", (b,)),
        Gate("cx", (a, b)),
    ]


def _maj(c: int, b: int, a: int) -> list[Gate]:
    return [Gate("cx", (a, b)), Gate("cx", (a, c)), *_ccx(c, b, a)]


def _uma(c: int, b: int, a: int) -> list[Gate]:
    return [*_ccx(c, b, a), Gate("cx", (a, c)), Gate("cx", (c, b))]


def adder_layout(n: int) -> dict[str, list[int] | int]:
    """Qubit roles of gen_adder(n).

    carry-in 0, b_i = 1+2i, a_i = 2+2i, carry-out 2n+1
    """
    return {
        "cin": 0,
        "b": [1 + 2 * i for i in range(n)],
        "a": [2 + 2 * i for i in range(n)],
        "cout": 2 * n + 1,
    }


def gen_adder(n: int, a: int = 0, b: int = 0) -> Circuit:
    """Cuccaro ripple-carry adder on 2n+2 qubits; the sum a+b lands in the b
    register with the high bit on carry-out. Nonzero operands are prepared
    with x gates first."""
    if n < 1:
        raise ValueError(f"adder needs at least 1 bit per operand, got {n}")
    if not (0 <= a < 2**n and 0 <= b < 2**n):
        raise ValueError(f"operands must fit in {n} bits")
    layout = adder_layout(n)
    a_reg, b_reg, cin, cout = layout["a"], layout["b"], layout["cin"], layout["cout"]

    gates: list[Gate] = []
    gates += [Gate("x", (a_reg[i],)) for i in range(n) if a >> i & 1]
    gates += [Gate("x", (b_reg[i],)) for i in range(n) if b >> i & 1]

    gates += _maj(cin, b_reg[0], a_reg[0])
    for i in range(1, n):
        gates += _maj(a_reg[i - 1], b_reg[i], a_reg[i])
    gates.append(Gate("cx", (a_reg[n - 1], cout)))
    for i in range(n - 1, 0, -1):
        gates += _uma(a_reg[i - 1], b_reg[i], a_reg[i])
    gates += _uma(cin, b_reg[0], a_reg[0])
    return Circuit(2 * n + 2, tuple(gates))


def gen_qft(n: int, swaps: bool = False) -> Circuit:
    if n < 1:
        raise ValueError(f"QFT needs at least 1 qubit, got {n}")
    gates: list[Gate] = []
    for i in range(n):
        gates.append(Gate("h", (i,)))
        for j in range(i + 1, n):
            gates.append(Gate("cp", (j, i), (math.pi / 2 ** (j - i),)))
    if swaps:
        gates += [Gate("swap", (i, n - 1 - i)) for i in range(n // 2)]
    return Circuit(n, tuple(gates))


def random_circuit(num_qubits: int, num_gates: int, seed: int = 0) -> Circuit:
    """Uniformly random gates over the supported set (2-qubit gates only when
    num_qubits >= 2)."""
    rng = np.random.default_rng(seed)
    names = sorted(n for n, (k, _) in GATE_SPECS.items() if k <= num_qubits)
    gates = []
    for _ in range(num_gates):
        name = names[rng.integers(len(names))]
        k, n_params = GATE_SPECS[name]
        qubits = tuple(int(q) for q in rng.choice(num_qubits, size=k, replace=False))
        params = tuple(float(p) for p in rng.uniform(-math.pi, math.pi, n_params))
        gates.append(Gate(name, qubits, params))
    return Circuit(num_qubits, tuple(gates))


GENERATORS = {
    "ghz": gen_ghz,
    "qft": gen_qft,
    "adder": gen_adder,
}


def generate(kind: str, size: int | None = None, secret: str | None = None,
             qft_swaps: bool = False) -> Circuit:
    """Dispatch by workload name. BV takes an explicit secret or defaults to
    the all-ones secret with `size` data qubits."""
    if kind == "bv":
        if secret is None:
            if size is None:
                raise ValueError("bv needs a size or a secret")
            secret = "1" * size
        return gen_bv(secret)
    if kind not in GENERATORS:
        raise ValueError(f"unknown workload {kind!r}; choose from bv, ghz, adder, qft")
    if size is None:
        raise ValueError(f"{kind} needs a size")
    if kind == "qft":
        return gen_qft(size, swaps=qft_swaps)
    return GENERATORS[kind](size)


def size_for_qubits(kind: str, num_qubits: int) -> int:
    """Generator size argument that yields `num_qubits` qubits (adder rounds down)."""
    if kind == "bv":
        return num_qubits - 1
    if kind == "adder":
        return (num_qubits - 2) // 2
    return num_qubits
