"""
Circuit intermediate representation and the OpenQASM 2.0 subset reader/writer.

A Circuit is an ordered tuple of 1- and 2-qubit Gates over one register. The
parser accepts a single `qreg`, any number of `creg`s, the gates listed in
GATE_SPECS, and drops `barrier` / `measure` statements.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import pyparsing as pp

# name -> (qubit count, parameter count)
GATE_SPECS: dict[str, tuple[int, int]] = {
    "h": (1, 0),
    "x": (1, 0),
    "y": (1, 0),
    "z": (1, 0),
    "s": (1, 0),
    "t": (1, 0),
    "sdg": (1, 0),
    "tdg": (1, 0),
    "rx": (1, 1),
    "ry": (1, 1),
    "rz": (1, 1),
    "p": (1, 1),
    "cx": (2, 0),
    "cz": (2, 0),
    "cp": (2, 1),
    "swap": (2, 0),
}

# Accepted on input, normalized to the canonical name.
GATE_ALIASES = {"u1": "p", "cu1": "cp", "cnot": "cx"}

ANGLE_TOLERANCE = 1e-9

PAULIS = "IXYZ"


class QasmError(ValueError):
    """Malformed or unsupported OpenQASM input, located by line and column."""

    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        where = f" (line {line}, col {col})" if line is not None else ""
        super().__init__(f"{message}{where}")


class UnsupportedGateError(ValueError):
    pass


def angles_close(a: tuple[float, ...], b: tuple[float, ...]) -> bool:
    return len(a) == len(b) and all(
        math.isclose(x, y, rel_tol=0.0, abs_tol=ANGLE_TOLERANCE) for x, y in zip(a, b)
    )


@dataclass(frozen=True, eq=False)
class Gate:
    name: str
    qubits: tuple[int, ...]
    params: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        if self.name not in GATE_SPECS:
            raise UnsupportedGateError(f"unsupported gate {self.name!r}")
        n_qubits, n_params = GATE_SPECS[self.name]
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        object.__setattr__(self, "params", tuple(float(p) for p in self.params))
        if len(self.qubits) != n_qubits:
            raise ValueError(
                f"{self.name} takes {n_qubits} qubit(s), got {len(self.qubits)}"
            )
        if len(self.params) != n_params:
            raise ValueError(
                f"{self.name} takes {n_params} parameter(s), got {len(self.params)}"
            )
        if len(set(self.qubits)) != len(self.qubits):
            raise ValueError(f"duplicate qubit operand in {self.name} {self.qubits}")
        if any(q < 0 for q in self.qubits):
            raise ValueError(f"negative qubit index in {self.name} {self.qubits}")

    @property
    def arity(self) -> int:
        return len(self.qubits)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Gate):
            return NotImplemented
        return (
            self.name == other.name
            and self.qubits == other.qubits
            and angles_close(self.params, other.params)
        )

    def __hash__(self) -> int:
        return hash((self.name, self.qubits))

    def __repr__(self) -> str:
        args = ",".join(map(str, self.qubits))
        if self.params:
            return f"{self.name}({', '.join(f'{p:.6g}' for p in self.params)})[{args}]"
        return f"{self.name}[{args}]"


@dataclass(frozen=True)
class Circuit:
    num_qubits: int
    gates: tuple[Gate, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        object.__setattr__(self, "gates", tuple(self.gates))
        if self.num_qubits < 1:
            raise ValueError(f"num_qubits must be positive, got {self.num_qubits}")
        for idx, gate in enumerate(self.gates):
            if max(gate.qubits) >= self.num_qubits:
                raise ValueError(
                    f"gate {idx} ({gate!r}) addresses a qubit outside "
                    f"the {self.num_qubits}-qubit register"
                )

    def __len__(self) -> int:
        return len(self.gates)

    def count(self, name: str) -> int:
        return sum(1 for g in self.gates if g.name == name)

    @property
    def two_qubit_gates(self) -> list[Gate]:
        return [g for g in self.gates if g.arity == 2]


@dataclass(frozen=True)
class Observable:
    """Pauli string; `paulis[i]` acts on qubit i."""

    paulis: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "paulis", self.paulis.upper())
        bad = set(self.paulis) - set(PAULIS)
        if bad or not self.paulis:
            raise ValueError(f"observable must be a non-empty string over {PAULIS}")

    @classmethod
    def all_z(cls, n: int) -> Observable:
        return cls("Z" * n)

    @classmethod
    def single(cls, n: int, qubit: int, pauli: str = "Z") -> Observable:
        return cls("".join(pauli if q == qubit else "I" for q in range(n)))

    def __len__(self) -> int:
        return len(self.paulis)

    def check(self, num_qubits: int) -> None:
        if len(self) != num_qubits:
            raise ValueError(
                f"observable length {len(self)} does not match "
                f"{num_qubits}-qubit circuit"
            )


# ---------------------------------------------------------------------------
# OpenQASM 2.0 grammar
# ---------------------------------------------------------------------------


def _fold_unary(tokens):
    sign, value = tokens[0]
    return -value if sign == "-" else value


def _fold_binary(tokens):
    ops = {
        "+": lambda a, b: a + b,
        "-": lambda a, b: a - b,
        "*": lambda a, b: a * b,
        "/": lambda a, b: a / b,
        "^": lambda a, b: a**b,
    }
    t = tokens[0]
    value = t[0]
    for op, rhs in zip(t[1::2], t[2::2]):
        value = ops[op](value, rhs)
    return value


def _build_grammar() -> pp.ParserElement:
    lbra, rbra, lpar, rpar, semi, comma = map(pp.Suppress, "[]();,")
    ident = pp.Word(pp.alphas + "_", pp.alphanums + "_")
    integer = pp.Word(pp.nums).set_parse_action(lambda t: int(t[0]))

    number = pp.Regex(r"(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?").set_parse_action(
        lambda t: float(t[0])
    )
    pi = pp.Keyword("pi").set_parse_action(lambda: math.pi)
    expr = pp.infix_notation(
        number | pi,
        [
            (pp.one_of("+ -"), 1, pp.OpAssoc.RIGHT, _fold_unary),
            ("^", 2, pp.OpAssoc.LEFT, _fold_binary),
            (pp.one_of("* /"), 2, pp.OpAssoc.LEFT, _fold_binary),
            (pp.one_of("+ -"), 2, pp.OpAssoc.LEFT, _fold_binary),
        ],
    )

    arg = pp.Group(ident("reg") + pp.Optional(lbra + integer("index") + rbra))

    def located(kind: str, body: pp.ParserElement) -> pp.ParserElement:
        def tag(s, loc, toks):
            return [(kind, loc, toks)]

        return body.copy().set_parse_action(tag)

    header = located(
        "header", pp.Keyword("OPENQASM") + pp.Regex(r"\d+(\.\d+)?")("version") + semi
    )
    include = located(
        "include", pp.Keyword("include") + pp.QuotedString('"')("path") + semi
    )
    qreg = located(
        "qreg",
        pp.Keyword("qreg") + ident("name") + lbra + integer("size") + rbra + semi,
    )
    creg = located(
        "creg",
        pp.Keyword("creg") + ident("name") + lbra + integer("size") + rbra + semi,
    )
    barrier = located(
        "barrier", pp.Keyword("barrier") + pp.delimited_list(arg)("args") + semi
    )
    measure = located(
        "measure", pp.Keyword("measure") + arg("src") + pp.Suppress("->") + arg + semi
    )
    gate = located(
        "gate",
        ident("name")
        + pp.Optional(
            lpar + pp.Group(pp.Optional(pp.delimited_list(expr)))("params") + rpar
        )
        + pp.Group(pp.delimited_list(arg))("args")
        + semi,
    )
    program = pp.Optional(header) + pp.ZeroOrMore(
        include | qreg | creg | barrier | measure | gate
    )
    program.ignore(pp.cpp_style_comment)
    return program


_GRAMMAR = _build_grammar()


def parse_qasm(text: str) -> Circuit:
    """Parse the supported OpenQASM 2.0 subset into a Circuit."""
    try:
        statements = _GRAMMAR.parse_string(text, parse_all=True)
    except pp.ParseException as exc:
        raise QasmError(f"syntax error: {exc.msg}", exc.lineno, exc.col) from exc

    def where(loc: int) -> tuple[int, int]:
        return pp.lineno(loc, text), pp.col(loc, text)

    register: tuple[str, int] | None = None
    pending: list[tuple[str, tuple[float, ...], list, int]] = []

    for kind, loc, toks in statements:
        if kind == "qreg":
            if register is not None:
                raise QasmError(
                    "multiple quantum registers are not supported", *where(loc)
                )
            register = (toks["name"], toks["size"])
        elif kind == "gate":
            name = toks["name"].lower()
            name = GATE_ALIASES.get(name, name)
            if name not in GATE_SPECS:
                raise QasmError(f"unsupported gate {toks['name']!r}", *where(loc))
            params = tuple(toks["params"]) if "params" in toks else ()
            pending.append((name, params, list(toks["args"]), loc))
        # header, include, creg, barrier and measure carry no gates

    if register is None:
        raise QasmError("program declares no quantum register")
    reg_name, size = register
    if size < 1:
        raise QasmError("quantum register must have at least one qubit")

    gates: list[Gate] = []
    for name, params, args, loc in pending:
        qubit_lists = []
        for a in args:
            if a["reg"] != reg_name:
                raise QasmError(f"unknown register {a['reg']!r}", *where(loc))
            if "index" in a:
                if a["index"] >= size:
                    raise QasmError(
                        f"qubit index {a['index']} out of range for {reg_name}[{size}]",
                        *where(loc),
                    )
                qubit_lists.append([a["index"]])
            else:
                qubit_lists.append(list(range(size)))
        n_qubits, _ = GATE_SPECS[name]
        if len(qubit_lists) != n_qubits:
            raise QasmError(
                f"{name} expects {n_qubits} operand(s), got {len(qubit_lists)}",
                *where(loc),
            )
        if n_qubits == 2 and any(len(q) > 1 for q in qubit_lists):
            raise QasmError(
                f"register broadcast is not supported for {name}", *where(loc)
            )
        try:
            if n_qubits == 1:
                gates.extend(Gate(name, (q,), params) for q in qubit_lists[0])
            else:
                gates.append(Gate(name, (qubit_lists[0][0], qubit_lists[1][0]), params))
        except ValueError as exc:
            raise QasmError(str(exc), *where(loc)) from exc

    return Circuit(size, tuple(gates))


def write_qasm(circuit: Circuit) -> str:
    """Serialize a Circuit; parse_qasm(write_qasm(c)) == c."""
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{circuit.num_qubits}];"]
    for gate in circuit.gates:
        head = gate.name
        if gate.params:
            head += "(" + ",".join(repr(p) for p in gate.params) + ")"
        lines.append(f"{head} " + ",".join(f"q[{q}]" for q in gate.qubits) + ";")
    return "\n".join(lines) + "\n"
