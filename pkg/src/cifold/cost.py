"""
γ-factor tables, cut classification and the quantum resource overhead (QRO).

QRO = Σ_i ( Π_{j ∈ s_i} γ_ij · w(c_i) · d(c_i) )

Weights are integers in both conventions, so products and QRO are exact
Python ints regardless of the number of cuts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from cifold.partition import Cut, Partition

# Sampling weights: (Σ|a_i|)² of the optimal decomposition.
SAMPLING_WIRE = 16
SAMPLING_GATES = {"cx": 9, "cz": 9, "cp": 9, "swap": 49}


@dataclass(frozen=True)
class GammaTable:
    """`convention="sampling"` uses the squared weights (16, 9, 49);
    `"variation"` uses their square roots (4, 3, 7)."""

    mode: str = "practical"
    convention: str = "sampling"
    wire_single: int = SAMPLING_WIRE
    gate: dict[str, int] = field(default_factory=lambda: dict(SAMPLING_GATES))

    def _scale(self, weight: int) -> int:
        if self.convention == "variation":
            return math.isqrt(weight)
        return weight

    def wire_weight(self) -> int:
        return self._scale(self.wire_single)

    def gate_weight(self, gate_name: str) -> int:
        if gate_name not in self.gate:
            raise KeyError(f"no gate-cut γ for {gate_name!r}")
        return self._scale(self.gate[gate_name])

    def parallel_wire(self, n: int) -> int:
        """Joint weight of n parallel wire cuts with classical communication,
        (2^(n+1)+1)²; a group of one is just a single cut."""
        if n < 1:
            raise ValueError("a parallel group has at least one cut")
        if n == 1:
            return self.wire_weight()
        root = 2 ** (n + 1) + 1
        return root if self.convention == "variation" else root * root

    def with_mode(self, mode: str) -> GammaTable:
        return GammaTable(mode, self.convention, self.wire_single, dict(self.gate))


DEFAULT_TABLE = GammaTable()


def table_for(mode: str = "practical", convention: str = "sampling") -> GammaTable:
    return GammaTable(mode=mode, convention=convention)


def gamma_lookup(
    kind: str, gate_name: str | None = None, mode: str = "practical",
    table: GammaTable | None = None,
) -> int:
    """Single-cut weight: wire 16, cx/cz/cp 9, swap 49 (sampling convention).
    `mode` does not change single-cut values."""
    table = (table or DEFAULT_TABLE).with_mode(mode)
    if kind == "wire":
        return table.wire_weight()
    if kind == "gate":
        if gate_name is None:
            raise KeyError("gate cuts need a gate name")
        return table.gate_weight(gate_name)
    raise ValueError(f"unknown cut kind {kind!r}")


def sampling_overhead(gamma: float, n_cuts: int) -> float:
    if n_cuts < 0:
        raise ValueError("n_cuts must be >= 0")
    return gamma**n_cuts


@dataclass(frozen=True)
class ErrorBudget:
    epsilon: float = 0.05

    def shots(self, overhead: int | float) -> int:
        """Shots for additive error ε: ceil(overhead / ε²)."""
        eps = Fraction(str(self.epsilon))
        return math.ceil(Fraction(overhead) / (eps * eps))


# ---------------------------------------------------------------------------
# Cut classification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CutGroup:
    kind: str  # single | parallel | blackbox
    fragments: tuple[int, int]
    cuts: tuple[Cut, ...]

    @property
    def size(self) -> int:
        return len(self.cuts)


def _slot_groups(cuts: list[Cut], layers) -> list[tuple[list[Cut], int]]:
    """Group wire cuts that can be cut in one time slice. A cut on edge
    (u, v) can be placed after any layer in [layer(u), layer(v) - 1]."""
    spans = sorted(
        ((layers[c.edge.src], layers[c.edge.dst] - 1, c) for c in cuts),
        key=lambda s: (s[1], s[0], s[2].edge.src),
    )
    groups: list[tuple[list[Cut], int]] = []
    current: list[Cut] = []
    slot = None
    for lo, hi, cut in spans:
        if slot is not None and lo <= slot:
            current.append(cut)
            continue
        if current:
            groups.append((current, slot))
        current, slot = [cut], hi
    if current:
        groups.append((current, slot))
    return groups


def group_parallel_cuts(partition: Partition) -> list[CutGroup]:
    """Classify cuts per fragment pair.

    Wire cuts running from fragment A to fragment B that share a time slice
    form a parallel group. If a node of a third fragment sits in that slice
    on a qubit between the group's wires, the group is a blackbox group and
    is costed as independent single cuts.
    """
    graph = partition.graph
    layers = graph.layers
    assignment = partition.assignment
    groups: list[CutGroup] = []

    by_pair: dict[tuple[int, int], list[Cut]] = {}
    for cut in partition.cuts:
        if cut.kind == "gate":
            groups.append(CutGroup("single", cut.fragments, (cut,)))
            continue
        direction = (assignment[cut.edge.src], assignment[cut.edge.dst])
        by_pair.setdefault(direction, []).append(cut)

    occupancy: dict[int, list[int]] = {}
    if by_pair:
        for node in graph.nodes:
            occupancy.setdefault(layers[node.id], []).append(node.id)

    for (a, b), cuts in sorted(by_pair.items()):
        pair = (min(a, b), max(a, b))
        for members, slot in _slot_groups(cuts, layers):
            if len(members) == 1:
                groups.append(CutGroup("single", pair, tuple(members)))
                continue
            qubits = [graph.nodes[c.edge.src].qubit for c in members]
            lo, hi = min(qubits), max(qubits)
            blocked = any(
                assignment[n] not in (a, b) and lo < graph.nodes[n].qubit < hi
                for n in occupancy.get(slot, ()) + occupancy.get(slot + 1, ())
            )
            kind = "blackbox" if blocked else "parallel"
            groups.append(CutGroup(kind, pair, tuple(members)))
    return groups


# ---------------------------------------------------------------------------
# QRO
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FragmentCost:
    fragment: int
    width: int
    depth: int
    variation: int  # Π γ_ij over the fragment's cuts

    @property
    def contribution(self) -> int:
        return self.variation * self.width * self.depth


@dataclass(frozen=True)
class CostReport:
    mode: str
    fragments: tuple[FragmentCost, ...]
    qro: int
    qro_practical: int
    qro_theoretical: int
    sampling_overhead: int
    shots: int
    cut_counts: dict[str, int]
    groups: tuple[CutGroup, ...]

    @property
    def parallel_groups(self) -> tuple[CutGroup, ...]:
        return tuple(g for g in self.groups if g.kind == "parallel")

    def recompute(self) -> int:
        return sum(f.contribution for f in self.fragments)


def _variations(
    partition: Partition, table: GammaTable, groups: list[CutGroup], theoretical: bool
) -> dict[int, int]:
    product = {f.id: 1 for f in partition.fragments}
    for group in groups:
        if theoretical and group.kind == "parallel":
            weight = table.parallel_wire(group.size)
            for frag in group.fragments:
                product[frag] *= weight
            continue
        for cut in group.cuts:
            for frag in cut.fragments:
                product[frag] *= cut.gamma
    return product


def qro(
    partition: Partition, table: GammaTable = DEFAULT_TABLE,
    budget: ErrorBudget | None = None,
) -> CostReport:
    """Evaluate QRO for the table's mode and report both modes side by side.

    Practical mode multiplies every cut's fixed weight into both endpoint
    fragments. Theoretical mode charges each parallel wire group of n ≥ 2
    cuts (2^(n+1)+1)² once per endpoint fragment instead.
    """
    groups = group_parallel_cuts(partition)
    practical = _variations(partition, table, groups, theoretical=False)
    theoretical = _variations(partition, table, groups, theoretical=True)

    def total(products: dict[int, int]) -> int:
        return sum(products[f.id] * f.width * f.depth for f in partition.fragments)

    chosen = theoretical if table.mode == "theoretical" else practical
    fragments = tuple(
        FragmentCost(f.id, f.width, f.depth, chosen[f.id]) for f in partition.fragments
    )
    overhead = 1
    for cut in partition.cuts:
        overhead *= cut.gamma
    counts = {"wire": 0, "gate": 0}
    for cut in partition.cuts:
        counts[cut.kind] += 1
    for kind in ("single", "parallel", "blackbox"):
        counts[f"{kind}_groups"] = sum(1 for g in groups if g.kind == kind)
    return CostReport(
        mode=table.mode,
        fragments=fragments,
        qro=total(chosen),
        qro_practical=total(practical),
        qro_theoretical=total(theoretical),
        sampling_overhead=overhead,
        shots=(budget or ErrorBudget()).shots(overhead),
        cut_counts=counts,
        groups=tuple(groups),
    )
