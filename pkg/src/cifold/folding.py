"""
Layered folding of qubit-level sequences into a meta-graph.

Each layer pairs the current qubit groups by entanglement (most spanning
two-qubit gates first), looks for the longest contiguous common run of gate
labels in each pair, joins the matched nodes of the higher group with the
lower group's, and composes the pair into one group. Layers repeat until a
single group remains; a final pass folds repeated runs inside that group's
own sequence.
"""

from __future__ import annotations

import logging
from collections.abc import Hashable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from networkx.utils import UnionFind

from cifold.graphing import CircuitGraph, GraphNode, QubitGraph

logger = logging.getLogger(__name__)

DEFAULT_MIN_LEN = 3
_PARAM_DIGITS = 9


@dataclass(frozen=True)
class NodeLabel:
    gate_name: str
    params: tuple[float, ...]
    role: str
    partner_kind: str | None

    def __str__(self) -> str:
        params = ",".join(f"{p:.9f}" for p in self.params)
        return f"{self.gate_name}({params})/{self.role}/{self.partner_kind or '-'}"


def label_of(node: GraphNode) -> NodeLabel:
    """Fold label of a node. Labels never carry the partner qubit index."""
    return NodeLabel(
        node.gate_name,
        tuple(round(p, _PARAM_DIGITS) + 0.0 for p in node.params),
        node.role,
        node.gate_name if node.is_half else None,
    )


@dataclass(frozen=True)
class MetaNode:
    representative: int
    folded_nodes: frozenset[int]

    @property
    def fold_weight(self) -> int:
        return len(self.folded_nodes)


@dataclass(frozen=True)
class FoldStats:
    original_nodes: int
    folded_nodes: int
    original_edges: int
    folded_edges: int

    @property
    def compression(self) -> float:
        return self.folded_nodes / self.original_nodes if self.original_nodes else 1.0


@dataclass(frozen=True)
class MetaGraph:
    graph: CircuitGraph
    meta_nodes: tuple[MetaNode, ...]
    # (src representative, dst representative, kind, weight)
    meta_edges: tuple[tuple[int, int, str, int], ...]
    provenance: dict[int, int]  # original node id -> representative

    def __len__(self) -> int:
        return len(self.meta_nodes)

    def node(self, representative: int) -> MetaNode:
        return self._by_rep[representative]

    @property
    def _by_rep(self) -> dict[int, MetaNode]:
        return {m.representative: m for m in self.meta_nodes}

    @property
    def stats(self) -> FoldStats:
        return FoldStats(
            len(self.graph.nodes),
            len(self.meta_nodes),
            len(self.graph.edges),
            len(self.meta_edges),
        )


# ---------------------------------------------------------------------------
# Longest consecutive common subsequence
# ---------------------------------------------------------------------------


def _encode(*seqs: Sequence[Hashable]) -> list[np.ndarray]:
    codes: dict[Hashable, int] = {}
    return [
        np.array([codes.setdefault(x, len(codes)) for x in s], dtype=np.int64)
        for s in seqs
    ]


def lccs(
    s1: Sequence[Hashable], s2: Sequence[Hashable], min_len: int = DEFAULT_MIN_LEN
) -> tuple[range, range] | None:
    """Longest contiguous run common to s1 and s2, as index ranges into each.

    The full DP table is evaluated; ties go to the smallest end index in s1,
    then in s2. Returns None when the longest run is shorter than min_len.
    """
    if min_len < 1:
        raise ValueError("min_len must be >= 1")
    if not s1 or not s2:
        return None
    a, b = _encode(s1, s2)
    prev = np.zeros(len(b) + 1, dtype=np.int64)
    best = end_i = end_j = 0
    for i in range(1, len(a) + 1):
        cur = np.zeros_like(prev)
        cur[1:] = np.where(b == a[i - 1], prev[:-1] + 1, 0)
        j = int(cur.argmax())
        if cur[j] > best:
            best, end_i, end_j = int(cur[j]), i, j
        prev = cur
    if best < min_len:
        return None
    return range(end_i - best, end_i), range(end_j - best, end_j)


def self_fold(
    seq: Sequence[Hashable], min_len: int = DEFAULT_MIN_LEN
) -> tuple[range, range] | None:
    """Longest run that occurs twice in `seq` without overlapping; the first
    range precedes the second."""
    if min_len < 1:
        raise ValueError("min_len must be >= 1")
    n = len(seq)
    if n < 2 * min_len:
        return None
    (a,) = _encode(seq)
    cols = np.arange(1, n + 1)
    prev = np.zeros(n + 1, dtype=np.int64)
    best = end_i = end_j = 0
    for i in range(1, n + 1):
        cur = np.zeros_like(prev)
        ok = (a == a[i - 1]) & (cols > i) & (prev[:-1] < cols - i)
        cur[1:] = np.where(ok, prev[:-1] + 1, 0)
        j = int(cur.argmax())
        if cur[j] > best:
            best, end_i, end_j = int(cur[j]), i, j
        prev = cur
    if best < min_len:
        return None
    return range(end_i - best, end_i), range(end_j - best, end_j)


# ---------------------------------------------------------------------------
# Most entangled pairs
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class QubitGroup:
    qubits: tuple[int, ...]
    sequence: tuple[int, ...]  # node ids

    @property
    def key(self) -> int:
        return self.qubits[0]


def interaction_matrix(graph: CircuitGraph) -> np.ndarray:
    """Symmetric count of 2-qubit gates per qubit pair."""
    a = np.zeros((graph.num_qubits, graph.num_qubits), dtype=np.int64)
    for e in graph.gate_edges:
        qs, qd = graph.nodes[e.src].qubit, graph.nodes[e.dst].qubit
        a[qs, qd] += 1
        a[qd, qs] += 1
    return a


def most_entangled_pairs(
    groups: Sequence[QubitGroup | QubitGraph], graph: CircuitGraph
) -> tuple[list[tuple[int, int]], list[int]]:
    """Greedy maximum-weight matching over groups.

    Pair weight is the number of 2-qubit gates spanning the two groups.
    Zero-weight pairs are still matched so every layer halves the group
    count. Returns (pairs of group indices, unmatched group indices).
    """
    groups = [_as_group(g) for g in groups]
    a = interaction_matrix(graph)
    member = np.zeros((len(groups), graph.num_qubits), dtype=np.int64)
    for idx, grp in enumerate(groups):
        member[idx, list(grp.qubits)] = 1
    weights = member @ a @ member.T

    candidates = sorted(
        (-int(weights[x, y]), groups[x].key, groups[y].key, x, y)
        for x in range(len(groups))
        for y in range(x + 1, len(groups))
    )
    taken: set[int] = set()
    pairs = []
    for _, _, _, x, y in candidates:
        if x in taken or y in taken:
            continue
        taken.update((x, y))
        pairs.append((x, y))
    leftover = [i for i in range(len(groups)) if i not in taken]
    return sorted(pairs, key=lambda p: groups[p[0]].key), leftover


def _as_group(g: QubitGroup | QubitGraph) -> QubitGroup:
    if isinstance(g, QubitGroup):
        return g
    return QubitGroup((g.qubit,), tuple(g.sequence))


# ---------------------------------------------------------------------------
# Folding
# ---------------------------------------------------------------------------


def _plan_pair(
    left: QubitGroup, right: QubitGroup, labels: list[NodeLabel], min_len: int
) -> tuple[QubitGroup, list[tuple[int, int]]]:
    """Fold plan for one pair: (composed group, [(folded node, into node)]).

    The composed group keeps both sequences whole, so what later layers see
    does not depend on min_len.
    """
    if right.key < left.key:
        left, right = right, left
    match = lccs(
        [labels[v] for v in left.sequence], [labels[v] for v in right.sequence], min_len
    )
    composed = QubitGroup(
        tuple(sorted(left.qubits + right.qubits)), left.sequence + right.sequence
    )
    if match is None:
        return composed, []
    keep, drop = match
    return composed, [(right.sequence[j], left.sequence[i]) for i, j in zip(keep, drop)]


def fold(
    qubit_graphs: Sequence[QubitGraph],
    graph: CircuitGraph,
    min_len: int = DEFAULT_MIN_LEN,
    workers: int = 1,
) -> MetaGraph:
    """Fold qubit-level sequences layer by layer into a MetaGraph.

    Pairs within a layer touch disjoint node sets, so their plans are computed
    independently (optionally on a thread pool). Every accepted match joins
    nodes in a union-find; a meta node is one joined component, represented
    by its smallest node id. Group sequences and the final self-fold pass
    never depend on min_len except through where they stop, so lowering
    min_len only adds joins and never yields more meta nodes.
    """
    if min_len < 1:
        raise ValueError("min_len must be >= 1")
    labels = [label_of(n) for n in graph.nodes]
    joined = UnionFind(range(len(graph.nodes)))

    groups = [_as_group(q) for q in qubit_graphs]
    layer = 0
    pool = ThreadPoolExecutor(max_workers=workers) if workers > 1 else None
    try:
        while len(groups) > 1:
            layer += 1
            pairs, leftover = most_entangled_pairs(groups, graph)
            jobs = [(groups[x], groups[y]) for x, y in pairs]

            def plan(job):
                return _plan_pair(job[0], job[1], labels, min_len)

            plans = list(pool.map(plan, jobs)) if pool else [plan(j) for j in jobs]
            folded = 0
            for _, merges in plans:
                for gone, into in merges:
                    joined.union(gone, into)
                folded += len(merges)
            groups = sorted(
                [g for g, _ in plans] + [groups[i] for i in leftover],
                key=lambda g: g.key,
            )
            logger.debug(
                "fold layer %d: %d pairs, %d nodes folded", layer, len(jobs), folded
            )
    finally:
        if pool:
            pool.shutdown()

    if groups:
        sequence = list(groups[0].sequence)
        while (match := self_fold([labels[v] for v in sequence], min_len)) is not None:
            keep, drop = match
            for i, j in zip(keep, drop):
                joined.union(sequence[j], sequence[i])
            sequence = [v for idx, v in enumerate(sequence) if idx not in drop]

    components = sorted((min(c), frozenset(c)) for c in joined.to_sets())
    rep = {v: r for r, c in components for v in c}
    meta_nodes = tuple(MetaNode(r, c) for r, c in components)
    meta_edges = tuple(
        sorted({(rep[e.src], rep[e.dst], e.kind, e.weight) for e in graph.edges})
    )
    meta = MetaGraph(graph, meta_nodes, meta_edges, dict(sorted(rep.items())))
    logger.info(
        "folded %d nodes into %d meta nodes in %d layers",
        len(graph.nodes),
        len(meta_nodes),
        layer,
    )
    return meta
