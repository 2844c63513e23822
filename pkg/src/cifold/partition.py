"""
Meta-graph guided partitioning of a CircuitGraph into fragments.

Pipeline (run_pipeline):
    build graph -> qubit sequences -> fold -> module_finding -> greedy_merge
    -> refine

Widths count wire segments: a fragment owns one qubit for every maximal run
of its nodes on a wire, so the node downstream of a wire cut opens a fresh
(prepared) qubit. Depth is ASAP layering of the fragment's own gates plus
one layer for each preparation, measurement and gate-cut local operation at
its boundary.
"""

from __future__ import annotations

import heapq
import logging
import time
from collections.abc import Collection, Iterator, Mapping, Sequence
from contextlib import contextmanager
from dataclasses import dataclass

import networkx as nx

from cifold.circuit import Circuit
from cifold.config import CutConfig
from cifold.cost import DEFAULT_TABLE, CostReport, GammaTable, qro, table_for
from cifold.folding import MetaGraph, fold, label_of
from cifold.graphing import (
    CircuitGraph,
    GraphEdge,
    build_circuit_graph,
    extract_qubit_graphs,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Fragment:
    id: int
    node_ids: frozenset[int]
    width: int
    depth: int
    qubits: tuple[int, ...]


@dataclass(frozen=True)
class Cut:
    edge: GraphEdge
    kind: str
    fragments: tuple[int, int]
    gamma: int


@dataclass(frozen=True, eq=False)
class Partition:
    graph: CircuitGraph
    fragments: tuple[Fragment, ...]
    cuts: tuple[Cut, ...]
    assignment: tuple[int, ...]  # node id -> fragment id

    @property
    def max_width(self) -> int:
        return max((f.width for f in self.fragments), default=0)

    def cost(self, table: GammaTable = DEFAULT_TABLE) -> CostReport:
        return qro(self, table)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return self.assignment == other.assignment and self.graph is other.graph


def _check_q_con(q_con: int) -> None:
    if q_con < 2:
        raise ValueError(f"qubit constraint must be >= 2, got {q_con}")


def fragment_shape(graph: CircuitGraph, nodes: Collection[int]) -> tuple[int, int]:
    """(width, depth) of the fragment made of `nodes`."""
    inside = nodes if isinstance(nodes, (set, frozenset)) else set(nodes)
    if not inside:
        return 0, 0
    pred, succ, partner = graph.wire_pred, graph.wire_succ, graph.partner
    level: dict[int, int] = {}
    width = 0

    def open_at(x: int) -> int:
        nonlocal width
        p = pred[x]
        if p is not None and p in inside:
            return level[p]
        width += 1
        return 0 if p is None else 1

    for v in sorted(inside):
        if v in level:
            continue
        mate = partner[v]
        if mate is not None and mate in inside:
            t = max(open_at(v), open_at(mate)) + 1
            level[v] = level[mate] = t
        else:
            level[v] = open_at(v) + 1

    depth = max(
        level[v] + (1 if succ[v] is not None and succ[v] not in inside else 0)
        for v in inside
    )
    return width, depth


def partition_from_assignment(
    graph: CircuitGraph, assignment: Sequence[int] | Mapping[int, int]
) -> Partition:
    """Fragments are renumbered in order of their smallest node id."""
    n = len(graph.nodes)
    if isinstance(assignment, Mapping):
        missing = [v for v in range(n) if v not in assignment]
        if missing:
            raise ValueError(f"node {missing[0]} has no fragment")
        labels = [assignment[v] for v in range(n)]
    else:
        labels = list(assignment)
        if len(labels) != n:
            raise ValueError(f"assignment covers {len(labels)} of {n} nodes")

    canon: dict[int, int] = {}
    for label in labels:
        canon.setdefault(label, len(canon))
    assign = tuple(canon[label] for label in labels)

    groups: list[list[int]] = [[] for _ in canon]
    for v, f in enumerate(assign):
        groups[f].append(v)
    fragments = []
    for f, ids in enumerate(groups):
        members = frozenset(ids)
        width, depth = fragment_shape(graph, members)
        qubits = tuple(sorted({graph.nodes[v].qubit for v in ids}))
        fragments.append(Fragment(f, members, width, depth, qubits))

    cuts = tuple(
        Cut(e, e.kind, tuple(sorted((assign[e.src], assign[e.dst]))), e.weight)
        for e in graph.edges
        if assign[e.src] != assign[e.dst]
    )
    return Partition(graph, tuple(fragments), cuts, assign)


# ---------------------------------------------------------------------------
# WL hashing and module finding
# ---------------------------------------------------------------------------


def induced_subgraph(graph: CircuitGraph, node_ids: Collection[int]) -> nx.Graph:
    inside = set(node_ids)
    sub = nx.Graph()
    for v in sorted(inside):
        sub.add_node(v, label=str(label_of(graph.nodes[v])))
    for e in graph.edges:
        if e.src in inside and e.dst in inside:
            sub.add_edge(e.src, e.dst, kind=e.kind)
    return sub


def wl_hash(graph: CircuitGraph, node_ids: Collection[int], iterations: int = 3) -> str:
    """Weisfeiler-Lehman fingerprint of the induced subgraph. Node colors
    start from the gate label, edge colors from the edge kind; qubit indices
    never enter the hash."""
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    return nx.weisfeiler_lehman_graph_hash(
        induced_subgraph(graph, node_ids),
        node_attr="label",
        edge_attr="kind",
        iterations=iterations,
    )


@dataclass(frozen=True)
class InitialPartition:
    buckets: dict[str, tuple[frozenset[int], ...]]

    def __len__(self) -> int:
        return sum(len(group) for group in self.buckets.values())

    def ranked(self) -> list[str]:
        """Hashes by instance count, then subgraph size, then smallest node."""
        return sorted(
            self.buckets,
            key=lambda h: (
                -len(self.buckets[h]),
                -max(len(s) for s in self.buckets[h]),
                min(min(s) for s in self.buckets[h]),
            ),
        )

    def supernodes(self) -> list[frozenset[int]]:
        out: list[frozenset[int]] = []
        for h in self.ranked():
            out.extend(sorted(self.buckets[h], key=min))
        return out


def _grow_lockstep(
    graph: CircuitGraph,
    labels: list,
    seeds: list[int],
    visited: set[int],
    q_con: int,
    size_limit: int,
) -> list[list[int]]:
    """Grow one subgraph per seed, adding a node to every instance at once.

    Instances are kept as position-aligned node lists; a candidate is taken
    only if each instance has a free neighbor of the same label attached to
    the same positions by the same edge kinds and directions. Aligned
    instances are isomorphic, hence WL-equal.
    """
    pred, succ = graph.wire_pred, graph.wire_succ
    instances = [[s] for s in seeds]
    position = [{s: 0} for s in seeds]
    claimed = set(seeds)
    width = 1

    def signature(x: int, w: int) -> tuple:
        pos = position[x]
        links = sorted(
            (pos[u], e.kind, e.src == w) for u, e in graph.incident[w] if u in pos
        )
        return labels[w], tuple(links)

    def free(w: int) -> bool:
        return w not in claimed and w not in visited

    i = 0
    while i < len(instances[0]) and len(instances[0]) < size_limit:
        for w0, _ in graph.incident[instances[0][i]]:
            if len(instances[0]) >= size_limit:
                break
            if not free(w0):
                continue
            grown = 1 - (pred[w0] in position[0]) - (succ[w0] in position[0])
            if width + grown > q_con:
                continue
            sig = signature(0, w0)
            picks, picked = [w0], {w0}
            for x in range(1, len(instances)):
                match = next(
                    (
                        w
                        for w, _ in graph.incident[instances[x][i]]
                        if free(w) and w not in picked and signature(x, w) == sig
                    ),
                    None,
                )
                if match is None:
                    break
                picks.append(match)
                picked.add(match)
            else:
                for x, w in enumerate(picks):
                    position[x][w] = len(instances[x])
                    instances[x].append(w)
                claimed.update(picks)
                width += grown
        i += 1
    return instances


def module_finding(
    graph: CircuitGraph,
    meta: MetaGraph,
    q_con: int,
    wl_iterations: int = 3,
    size_limit: int = 64,
) -> InitialPartition:
    """Seed from the meta node with the most unvisited instances, one
    subgraph per instance, and grow the instances in lockstep until the
    repeated pattern breaks, the width would exceed q_con, or size_limit is
    reached. Counts are re-read each round, so a meta node whose instances
    were swallowed by earlier modules drops in the order. Repeats until every
    node is in some module."""
    _check_q_con(q_con)
    labels = [label_of(n) for n in graph.nodes]
    visited: set[int] = set()
    buckets: dict[str, list[frozenset[int]]] = {}

    members = {m.representative: m.folded_nodes for m in meta.meta_nodes}
    # counts only shrink, so a popped entry is current once its count holds
    heap = [(-len(vs), r) for r, vs in members.items()]
    heapq.heapify(heap)
    while heap:
        count, r = heapq.heappop(heap)
        seeds = sorted(v for v in members[r] if v not in visited)
        if not seeds:
            continue
        if len(seeds) < -count:
            heapq.heappush(heap, (-len(seeds), r))
            continue
        instances = _grow_lockstep(graph, labels, seeds, visited, q_con, size_limit)
        for inst in instances:
            visited.update(inst)
        key = wl_hash(graph, instances[0], wl_iterations)
        buckets.setdefault(key, []).extend(frozenset(inst) for inst in instances)

    initial = InitialPartition({h: tuple(groups) for h, groups in buckets.items()})
    logger.info(
        "module finding: %d modules in %d hash buckets", len(initial), len(buckets)
    )
    return initial


# ---------------------------------------------------------------------------
# Greedy merge
# ---------------------------------------------------------------------------


def greedy_merge(
    graph: CircuitGraph, supernodes: Sequence[Collection[int]], q_con: int
) -> list[frozenset[int]]:
    """Coarsen supernodes by repeatedly merging the adjacent pair whose
    crossing edges carry the largest γ product, as long as the merged width
    stays within q_con. Products are exact ints; ties go to the lower
    supernode ids."""
    _check_q_con(q_con)
    owner = [-1] * len(graph.nodes)
    for idx, group in enumerate(supernodes):
        for v in group:
            owner[v] = idx
    if -1 in owner:
        raise ValueError(f"node {owner.index(-1)} is in no supernode")

    members = {i: set(group) for i, group in enumerate(supernodes)}
    width = {i: fragment_shape(graph, ms)[0] for i, ms in members.items()}
    # links[a][b] = [γ product of edges between a and b, wire edges between them]
    links: dict[int, dict[int, list[int]]] = {i: {} for i in members}
    for e in graph.edges:
        a, b = owner[e.src], owner[e.dst]
        if a == b:
            continue
        for x, y in ((a, b), (b, a)):
            link = links[x].setdefault(y, [1, 0])
            link[0] *= e.weight
            link[1] += e.kind == "wire"

    version = dict.fromkeys(members, 0)
    heap: list[tuple[int, int, int, int, int]] = []

    def push(a: int, b: int) -> None:
        a, b = min(a, b), max(a, b)
        gain, wires = links[a][b]
        if width[a] + width[b] - wires <= q_con:
            heapq.heappush(heap, (-gain, a, b, version[a], version[b]))

    for a in links:
        for b in links[a]:
            if a < b:
                push(a, b)

    merges = 0
    while heap:
        _, a, b, va, vb = heapq.heappop(heap)
        if a not in members or b not in members:
            continue
        if version[a] != va or version[b] != vb:
            continue
        width[a] += width.pop(b) - links[a][b][1]
        members[a] |= members.pop(b)
        for c, (gain, wires) in links.pop(b).items():
            links[c].pop(b)
            if c == a:
                continue
            for x, y in ((a, c), (c, a)):
                link = links[x].setdefault(y, [1, 0])
                link[0] *= gain
                link[1] += wires
        version[a] += 1
        for c in links[a]:
            push(a, c)
        merges += 1

    logger.info("greedy merge: %d merges, %d fragments left", merges, len(members))
    return [frozenset(members[i]) for i in sorted(members)]


# ---------------------------------------------------------------------------
# Refinement
# ---------------------------------------------------------------------------


class _Refiner:
    """Mutable partition state with incremental γ-product and width updates.

    Objective is practical-mode QRO: every cut's weight multiplies into both
    endpoint fragments.
    """

    def __init__(self, graph: CircuitGraph, assignment: Sequence[int], q_con: int):
        self.graph = graph
        self.q_con = q_con
        self.assign = list(assignment)
        self.members: dict[int, set[int]] = {}
        for v, f in enumerate(self.assign):
            self.members.setdefault(f, set()).add(v)
        self.var = dict.fromkeys(self.members, 1)
        for e in graph.edges:
            a, b = self.assign[e.src], self.assign[e.dst]
            if a != b:
                self.var[a] *= e.weight
                self.var[b] *= e.weight
        self.shape = {f: fragment_shape(graph, ms) for f, ms in self.members.items()}
        self.evaluations = 0

    def cost(self, f: int) -> int:
        width, depth = self.shape[f]
        return self.var[f] * width * depth

    def total(self) -> int:
        return sum(self.cost(f) for f in self.members)

    def _delta(self, v: int, dst: int) -> tuple[int, int, int, int]:
        """(γ product, width) of source and destination if v moved to dst."""
        src = self.assign[v]
        var_src, var_dst = self.var[src], self.var[dst]
        for u, e in self.graph.incident[v]:
            home = self.assign[u]
            if home == src:
                var_src *= e.weight
                var_dst *= e.weight
            elif home == dst:
                var_src //= e.weight
                var_dst //= e.weight
            else:
                var_src //= e.weight
                var_dst *= e.weight

        def inside(x: int | None, f: int) -> int:
            return int(x is not None and self.assign[x] == f)

        p, s = self.graph.wire_pred[v], self.graph.wire_succ[v]
        w_src = self.shape[src][0] - (1 - inside(p, src)) + inside(s, src)
        w_dst = self.shape[dst][0] + (1 - inside(p, dst)) - inside(s, dst)
        return var_src, var_dst, w_src, w_dst

    def _relocate(self, v: int, dst: int, var_src: int, var_dst: int) -> None:
        src = self.assign[v]
        self.assign[v] = dst
        self.members[src].discard(v)
        self.members[dst].add(v)
        self.var[src], self.var[dst] = var_src, var_dst

    def _settle(self, frags: tuple[int, ...], before: int, saved: dict) -> bool:
        """Recompute shapes of `frags`; keep the change if cost dropped."""
        self.evaluations += 1
        for f in frags:
            self.shape[f] = fragment_shape(self.graph, self.members[f])
        if sum(self.cost(f) for f in frags) < before:
            for f in frags:
                if not self.members[f]:
                    del self.members[f], self.var[f], self.shape[f]
            return True
        self._revert(saved)
        return False

    def _revert(self, saved: dict) -> None:
        for v, f in saved["assign"]:
            self.members[self.assign[v]].discard(v)
            self.members[f].add(v)
            self.assign[v] = f
        self.var.update(saved["var"])
        self.shape.update(saved["shape"])

    def try_move(self, v: int, dst: int) -> bool:
        src = self.assign[v]
        var_src, var_dst, w_src, w_dst = self._delta(v, dst)
        if w_src > self.q_con or w_dst > self.q_con:
            return False
        before = self.cost(src) + self.cost(dst)
        # removal leaves depth >= 1, addition never lowers depth
        bound = var_src * w_src + var_dst * w_dst * self.shape[dst][1]
        if bound >= before:
            return False
        saved = {
            "assign": [(v, src)],
            "var": {f: self.var[f] for f in (src, dst)},
            "shape": {f: self.shape[f] for f in (src, dst)},
        }
        self._relocate(v, dst, var_src, var_dst)
        return self._settle((src, dst), before, saved)

    def try_swap(self, v: int, u: int) -> bool:
        f, g = self.assign[v], self.assign[u]
        before = self.cost(f) + self.cost(g)
        saved = {
            "assign": [(v, f), (u, g)],
            "var": {x: self.var[x] for x in (f, g)},
            "shape": {x: self.shape[x] for x in (f, g)},
        }
        var_f, var_g, w_f, w_g = self._delta(v, g)
        self._relocate(v, g, var_f, var_g)
        self.shape[f], self.shape[g] = (w_f, 0), (w_g, 0)
        var_g, var_f, w_g, w_f = self._delta(u, f)
        self._relocate(u, f, var_g, var_f)
        feasible = w_f <= self.q_con and w_g <= self.q_con
        if not feasible or var_f * w_f + var_g * w_g >= before:
            self._revert(saved)
            return False
        return self._settle((f, g), before, saved)

    def boundary(self) -> list[int]:
        return [
            v
            for v in range(len(self.assign))
            if any(self.assign[u] != self.assign[v] for u, _ in self.graph.incident[v])
        ]


def refine(
    partition: Partition,
    graph: CircuitGraph,
    q_con: int,
    config: CutConfig | None = None,
) -> Partition:
    """First-improvement hill climbing over boundary nodes.

    Each pass tries, node by node in id order, a move to every adjacent
    fragment and then a swap with every neighbor across a cut. A change is
    kept only if practical QRO strictly drops and both widths stay within
    q_con. Stops after a pass with no change, after `refine_passes` passes,
    or once `refine_budget` exact evaluations have been spent.

    The objective is practical QRO for every `gamma_mode`. The configured
    mode is applied when `run_pipeline` compares refined seeds.
    """
    _check_q_con(q_con)
    config = config or CutConfig()
    if partition.max_width > q_con:
        raise ValueError(
            f"cannot refine: fragment width {partition.max_width} exceeds {q_con}"
        )
    state = _Refiner(graph, partition.assignment, q_con)
    start = state.total()
    passes = 0
    for passes in range(1, config.refine_passes + 1):
        improved = 0
        for v in state.boundary():
            if state.evaluations >= config.refine_budget:
                break
            home = state.assign[v]
            across = sorted(
                {(state.assign[u], u) for u, _ in graph.incident[v]
                 if state.assign[u] != home}
            )
            targets = sorted({f for f, _ in across})
            if any(state.try_move(v, f) for f in targets):
                improved += 1
                continue
            if any(state.try_swap(v, u) for _, u in across):
                improved += 1
        logger.debug("refine pass %d: %d improvements", passes, improved)
        if not improved or state.evaluations >= config.refine_budget:
            break

    result = partition_from_assignment(graph, state.assign)
    logger.info(
        "refine: QRO %d -> %d in %d passes (%d evaluations)",
        start,
        state.total(),
        passes,
        state.evaluations,
    )
    return result


# ---------------------------------------------------------------------------
# Baseline and pipeline
# ---------------------------------------------------------------------------


def naive_assignment(graph: CircuitGraph, q_con: int) -> list[int]:
    return [node.qubit // q_con for node in graph.nodes]


def naive_baseline(
    circuit: Circuit, q_con: int, table: GammaTable = DEFAULT_TABLE
) -> Partition:
    """Contiguous blocks of q_con qubits; every crossing edge is a cut."""
    _check_q_con(q_con)
    graph = build_circuit_graph(circuit, table)
    return partition_from_assignment(graph, naive_assignment(graph, q_con))


@dataclass(frozen=True)
class PipelineResult:
    partition: Partition
    graph: CircuitGraph
    meta_graph: MetaGraph | None
    modules: InitialPartition | None
    timings: dict[str, float]
    seed_choice: str  # whole | meta-graph | contiguous | baseline


@contextmanager
def _stage(timings: dict[str, float], name: str) -> Iterator[None]:
    start = time.perf_counter()
    try:
        yield
    finally:
        timings[name] = time.perf_counter() - start


def run_pipeline(
    circuit: Circuit,
    q_con: int,
    config: CutConfig | None = None,
    max_cuts: int | None = None,
) -> PipelineResult:
    """Full partitioning pipeline.

    The merged meta-graph seed and the contiguous-block seed are both
    refined; the one with lower QRO (in the configured mode) is returned,
    the meta-graph seed winning ties.

    With `max_cuts`, only partitions with at most that many cuts compete and
    the unrefined contiguous blocks (seed choice "baseline") join them. If
    none qualifies the unconstrained best is returned.
    """
    _check_q_con(q_con)
    config = config or CutConfig()
    table = table_for(config.gamma_mode, config.gamma_convention)
    graph = build_circuit_graph(circuit, table)
    timings: dict[str, float] = {}

    if circuit.num_qubits <= q_con:
        whole = partition_from_assignment(graph, [0] * len(graph.nodes))
        return PipelineResult(whole, graph, None, None, timings, "whole")

    with _stage(timings, "fold"):
        qubit_graphs = extract_qubit_graphs(graph, config.workers)
        meta = fold(qubit_graphs, graph, config.min_fold_len, config.workers)
    with _stage(timings, "module-find"):
        modules = module_finding(
            graph, meta, q_con, config.wl_iterations, config.module_size_limit
        )
    with _stage(timings, "merge"):
        merged = greedy_merge(graph, modules.supernodes(), q_con)
    with _stage(timings, "refine"):
        owner = [0] * len(graph.nodes)
        for idx, group in enumerate(merged):
            for v in group:
                owner[v] = idx
        guided = refine(partition_from_assignment(graph, owner), graph, q_con, config)
        contiguous = refine(
            partition_from_assignment(graph, naive_assignment(graph, q_con)),
            graph,
            q_con,
            config,
        )

    candidates = [
        (qro(guided, table).qro, "meta-graph", guided),
        (qro(contiguous, table).qro, "contiguous", contiguous),
    ]
    if max_cuts is not None:
        naive = partition_from_assignment(graph, naive_assignment(graph, q_con))
        candidates.append((qro(naive, table).qro, "baseline", naive))
        within = [c for c in candidates if len(c[2].cuts) <= max_cuts]
        candidates = within or candidates[:2]
    # min keeps the first of equal QROs
    best_qro, choice, best = min(candidates, key=lambda c: c[0])
    logger.info(
        "pipeline: %s, kept %s (QRO %d)",
        ", ".join(f"{name} seed QRO {q}" for q, name, _ in candidates),
        choice,
        best_qro,
    )
    return PipelineResult(best, graph, meta, modules, timings, choice)


def partition_circuit(
    circuit: Circuit, q_con: int, config: CutConfig | None = None
) -> Partition:
    return run_pipeline(circuit, q_con, config).partition
