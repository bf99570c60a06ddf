"""SABRE layout and SWAP routing with relative (delta) scoring.

The router is written once against a small backend protocol so that the
classic coupling-graph representation and the position-graph representation
can be compared decision for decision:

``num_positions``, ``dist``, ``swap_neighbors(p)``, ``can_execute(positions)``,
``shortest_path(a, b)``, ``layout_positions()`` and ``prepare_pass()``.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Sequence

from .circuit_ir import CircuitDag, DagCursor, lookahead_set
from .position_graph import (
    ArchCaches,
    EdgeCapability,
    MOVEMENT,
    Placement,
    PositionGraph,
    positions_executable,
)
from .qccd_builder import CouplingSpec
from .schedule import Op, OperationDurations

__all__ = [
    "SabreConfig",
    "CompiledCircuit",
    "CouplingGraphBackend",
    "PositionGraphBackend",
    "RoutingError",
    "HeuristicState",
    "heuristic_delta",
    "random_placement",
    "initial_layout",
    "route",
    "compile_sabre",
]


class RoutingError(RuntimeError):
    pass


@dataclass(frozen=True)
class SabreConfig:
    layout_passes: int = 2
    lookahead_size: int = 20
    extended_weight: float = 0.5
    decay_increment: float = 0.001
    decay_reset_interval: int = 5
    rng_seed: int = 0
    deadlock_factor: int = 5

    def __post_init__(self):
        if self.layout_passes < 0 or self.lookahead_size < 0 or self.decay_reset_interval < 1:
            raise ValueError("counts must be non-negative (reset interval >= 1)")
        if not 0 < self.extended_weight <= 1:
            raise ValueError("extended_weight must be in (0, 1]")
        if self.decay_increment < 0:
            raise ValueError("decay_increment must be >= 0")


@dataclass
class SabreStats:
    swaps: int = 0
    can_execute_calls: int = 0
    heuristic_evaluations: int = 0
    forced_routes: int = 0
    apsp_computations: int = 0

    def as_dict(self) -> dict[str, int]:
        return dict(vars(self))


@dataclass
class CompiledCircuit:
    ops: list[Op]
    initial_placement: list[int]
    final_placement: list[int]
    stats: SabreStats = field(default_factory=SabreStats)

    @property
    def swap_count(self) -> int:
        return sum(1 for op in self.ops if op.kind == "swap")


# --- backends -------------------------------------------------------------------


class CouplingGraphBackend:
    """Plain coupling graph: adjacency sets, hop-count APSP, subgraph connectivity.

    With ``recompute_apsp`` the distance matrix is rebuilt at the start of every
    routing pass, mirroring an implementation without architecture caching.
    """

    def __init__(self, spec: CouplingSpec, recompute_apsp: bool = False):
        self.num_positions = spec.num_qudits
        adj: list[set[int]] = [set() for _ in range(spec.num_qudits)]
        for a, b in spec.edges:
            adj[a].add(b)
            adj[b].add(a)
        self.adj = adj
        self._sorted_adj = [tuple(sorted(s)) for s in adj]
        self.recompute_apsp = recompute_apsp
        self.apsp_computations = 0
        self.can_execute_calls = 0
        self.dist = self._apsp()

    def _apsp(self) -> list[list[float]]:
        self.apsp_computations += 1
        n = self.num_positions
        out = []
        for s in range(n):
            row = [float("inf")] * n
            row[s] = 0.0
            q = deque([s])
            while q:
                u = q.popleft()
                for v in self._sorted_adj[u]:
                    if row[v] == float("inf"):
                        row[v] = row[u] + 1.0
                        q.append(v)
            out.append(row)
        return out

    def prepare_pass(self) -> None:
        if self.recompute_apsp:
            self.dist = self._apsp()

    def layout_positions(self) -> list[int]:
        return list(range(self.num_positions))

    def swap_neighbors(self, p: int) -> tuple[int, ...]:
        return self._sorted_adj[p]

    def get_subgraph(self, nodes: Sequence[int]) -> dict[int, set[int]]:
        members = set(nodes)
        return {u: self.adj[u] & members for u in members}

    def can_execute(self, positions: Sequence[int]) -> bool:
        self.can_execute_calls += 1
        if len(positions) <= 1:
            return True
        sub = self.get_subgraph(positions)
        start = next(iter(sub))
        seen = {start}
        stack = [start]
        while stack:
            for v in sub[stack.pop()]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return len(seen) == len(sub)

    def shortest_path(self, a: int, b: int) -> list[int]:
        d = self.dist
        if d[a][b] == float("inf"):
            raise RoutingError(f"{b} unreachable from {a}")
        path = [a]
        while path[-1] != b:
            u = path[-1]
            path.append(next(v for v in self._sorted_adj[u] if d[v][b] == d[u][b] - 1.0))
        return path


class PositionGraphBackend:
    """Position-graph backend: cached distances and execute adjacency."""

    def __init__(self, graph: PositionGraph, caches: ArchCaches | None = None):
        for (a, b), caps in graph.edges.items():
            if caps & MOVEMENT and EdgeCapability.SWAP not in caps:
                raise RoutingError("SWAP routing needs every movement edge to be a swap edge")
        self.graph = graph
        self.caches = caches or ArchCaches(graph, OperationDurations.unit())
        self.num_positions = graph.num_positions
        self.dist = self.caches.dist
        self.apsp_computations = 1
        self.can_execute_calls = 0
        self._swap_adj = graph.move_adj

    def prepare_pass(self) -> None:
        pass

    def layout_positions(self) -> list[int]:
        return self.graph.executable_slots()

    def swap_neighbors(self, p: int) -> tuple[int, ...]:
        return self._swap_adj[p]

    def can_execute(self, positions: Sequence[int]) -> bool:
        self.can_execute_calls += 1
        return positions_executable(positions, self.caches.exec_adj)

    def shortest_path(self, a: int, b: int) -> list[int]:
        try:
            return list(self.caches.path(a, b))
        except ValueError as exc:
            raise RoutingError(str(exc)) from None


# --- heuristic ------------------------------------------------------------------


def _gate_cost(positions: Sequence[int], dist) -> float:
    if len(positions) == 2:
        return dist[positions[0]][positions[1]]
    total = 0.0
    for i in range(len(positions)):
        row = dist[positions[i]]
        for j in range(i + 1, len(positions)):
            total += row[positions[j]]
    return total


class HeuristicState:
    """Per-round data for relative SWAP scoring.

    ``base`` is the undecayed cost S = mean front distance + w * mean lookahead
    distance.  :meth:`delta` touches only the gates on the two swapped
    positions' qudits.
    """

    def __init__(self, front: Sequence[Sequence[int]], lookahead: Sequence[Sequence[int]],
                 placement: Placement, dist, extended_weight: float):
        self.placement = placement
        self.dist = dist
        self.wf = 1.0 / len(front) if front else 0.0
        self.we = extended_weight / len(lookahead) if lookahead else 0.0
        # two-operand gates as (weight, partner); wider gates by index
        self.pairs: dict[int, list[tuple[float, int]]] = {}
        self.wide: dict[int, list[int]] = {}
        self.wide_gates: list[tuple[float, tuple[int, ...]]] = []
        sums = [0.0, 0.0]
        fwd = placement.forward
        for k, (w, group) in enumerate(((self.wf, front), (self.we, lookahead))):
            total = 0.0
            for ops in group:
                total += _gate_cost([fwd[q] for q in ops], dist)
                if len(ops) == 2:
                    x, y = ops
                    self.pairs.setdefault(x, []).append((w, y))
                    self.pairs.setdefault(y, []).append((w, x))
                elif len(ops) > 2:
                    idx = len(self.wide_gates)
                    self.wide_gates.append((w, tuple(ops)))
                    for q in ops:
                        self.wide.setdefault(q, []).append(idx)
            sums[k] = total
        self.base = self.wf * sums[0] + self.we * sums[1]

    def raw_delta(self, a: int, b: int) -> float:
        inv = self.placement.inverse
        fwd = self.placement.forward
        dist = self.dist
        qa, qb = inv[a], inv[b]
        da, db = dist[a], dist[b]
        d = 0.0
        # a pair gate between qa and qb keeps its distance
        if qa != -1:
            for w, r in self.pairs.get(qa, ()):
                if r != qb:
                    p = fwd[r]
                    d += w * (db[p] - da[p])
        if qb != -1:
            for w, r in self.pairs.get(qb, ()):
                if r != qa:
                    p = fwd[r]
                    d += w * (da[p] - db[p])
        if self.wide_gates:
            idxs = sorted(set(self.wide.get(qa, ())) | set(self.wide.get(qb, ())))
            for i in idxs:
                w, ops = self.wide_gates[i]
                old = [fwd[x] for x in ops]
                new = [b if p == a else a if p == b else p for p in old]
                d += w * (_gate_cost(new, dist) - _gate_cost(old, dist))
        return d

    def delta(self, a: int, b: int, decay: Sequence[float]) -> float:
        """decay(a, b) * S(after) - S(before)."""
        f = max(decay[a], decay[b])
        return f * (self.base + self.raw_delta(a, b)) - self.base


def heuristic_delta(
    swap: tuple[int, int],
    front: Sequence[Sequence[int]],
    lookahead: Sequence[Sequence[int]],
    placement: Placement,
    dist,
    decay: Sequence[float],
    extended_weight: float = 0.5,
) -> float:
    """Relative score of ``swap``; operands are given as logical-qudit tuples."""
    state = HeuristicState(front, lookahead, placement, dist, extended_weight)
    return state.delta(swap[0], swap[1], decay)


# --- routing --------------------------------------------------------------------


def random_placement(num_qudits: int, backend, seed: int) -> Placement:
    slots = backend.layout_positions()
    if len(slots) < num_qudits:
        raise RoutingError(f"{num_qudits} qudits but only {len(slots)} executable positions")
    rng = random.Random(seed)
    chosen = rng.sample(slots, num_qudits)
    return Placement.from_positions(chosen, backend.num_positions)


def _swap_op(placement: Placement, a: int, b: int) -> Op:
    ions = tuple(q for q in (placement.inverse[a], placement.inverse[b]) if q != -1)
    return Op("swap", (a, b), ions)


def _do_swap(placement: Placement, a: int, b: int) -> None:
    inv, fwd = placement.inverse, placement.forward
    qa, qb = inv[a], inv[b]
    inv[a], inv[b] = qb, qa
    if qa != -1:
        fwd[qa] = b
    if qb != -1:
        fwd[qb] = a


def route(
    dag: CircuitDag,
    backend,
    placement: Placement,
    config: SabreConfig,
    stats: SabreStats | None = None,
) -> CompiledCircuit:
    """Route ``dag`` from ``placement`` (not mutated) by inserting SWAPs."""
    stats = stats if stats is not None else SabreStats()
    backend.prepare_pass()
    dist = backend.dist
    pl = placement.copy()
    initial = pl.as_list()
    for q, p in enumerate(initial):
        if p == -1:
            raise RoutingError(f"qudit {q} is not placed")
    gates = dag.gates
    cursor = DagCursor(dag)
    ops: list[Op] = []
    n = backend.num_positions
    decay = [1.0] * n
    swaps_since_exec = 0
    swaps_since_reset = 0
    threshold = config.deadlock_factor * n

    # front gates whose executability may have changed since their last check
    pending = set(cursor.front)
    ext_ids: list[int] | None = None
    while True:
        executed_any = False
        progressed = True
        while progressed:
            progressed = False
            # same order as sweeping the whole sorted front: skipped gates are
            # known to be blocked
            for gid in sorted(pending & cursor.front):
                g = gates[gid]
                pos = [pl.forward[q] for q in g.operands]
                if g.arity == 1 or backend.can_execute(pos):
                    ops.append(Op("gate", tuple(pos), g.operands, gid))
                    before = set(cursor.front)
                    cursor.execute(gid)
                    pending |= cursor.front - before
                    progressed = executed_any = True
                pending.discard(gid)
        if executed_any:
            ext_ids = None
            decay = [1.0] * n
            swaps_since_exec = 0
            swaps_since_reset = 0
        if cursor.done:
            break

        front_ids = sorted(cursor.front)
        if swaps_since_exec >= threshold:
            _force_route(gates[front_ids[0]].operands, backend, pl, ops, stats)
            swaps_since_exec = 0
            pending = set(cursor.front)
            continue

        if ext_ids is None:
            ext_ids = lookahead_set(dag, cursor.executed, cursor.front, config.lookahead_size,
                                    multi_only=True)
        front_ops = [gates[i].operands for i in front_ids]
        state = HeuristicState(front_ops, [gates[i].operands for i in ext_ids], pl, dist,
                               config.extended_weight)
        cands = set()
        for ops_ in front_ops:
            for q in ops_:
                a = pl.forward[q]
                for b in backend.swap_neighbors(a):
                    cands.add((a, b) if a < b else (b, a))
        if not cands:
            raise RoutingError("no swap candidates: front-layer operands are isolated")
        best = None
        for a, b in sorted(cands):
            s = state.delta(a, b, decay)
            stats.heuristic_evaluations += 1
            if best is None or s < best[0]:
                best = (s, a, b)
        _, a, b = best
        ops.append(_swap_op(pl, a, b))
        moved = {pl.inverse[a], pl.inverse[b]}
        _do_swap(pl, a, b)
        pending.update(g for g in cursor.front if not moved.isdisjoint(gates[g].operands))
        stats.swaps += 1
        swaps_since_exec += 1
        swaps_since_reset += 1
        decay[a] += config.decay_increment
        decay[b] += config.decay_increment
        if swaps_since_reset >= config.decay_reset_interval:
            decay = [1.0] * n
            swaps_since_reset = 0

    stats.can_execute_calls = backend.can_execute_calls
    stats.apsp_computations = backend.apsp_computations
    return CompiledCircuit(ops, initial, pl.as_list(), stats)


def _force_route(operands, backend, pl: Placement, ops: list[Op], stats: SabreStats) -> None:
    """Walk every operand next to the first one along a shortest path."""
    stats.forced_routes += 1
    anchor = operands[0]
    for q in operands[1:]:
        path = backend.shortest_path(pl.forward[q], pl.forward[anchor])
        for a, b in zip(path[:-2], path[1:-1]):
            ops.append(_swap_op(pl, a, b))
            _do_swap(pl, a, b)
            stats.swaps += 1


def initial_layout(dag: CircuitDag, backend, config: SabreConfig,
                   stats: SabreStats | None = None) -> Placement:
    """Seeded random placement refined by forward/backward routing passes."""
    stats = stats if stats is not None else SabreStats()
    pl = random_placement(dag.num_qudits, backend, config.rng_seed)
    if config.layout_passes == 0:
        return pl
    rev = dag.reversed()
    for _ in range(config.layout_passes):
        fwd = route(dag, backend, pl, config, stats)
        pl = Placement.from_positions(fwd.final_placement, backend.num_positions)
        bwd = route(rev, backend, pl, config, stats)
        pl = Placement.from_positions(bwd.final_placement, backend.num_positions)
    return pl


def compile_sabre(dag: CircuitDag, backend, config: SabreConfig) -> CompiledCircuit:
    """Layout passes followed by the final routing pass."""
    stats = SabreStats()
    pl = initial_layout(dag, backend, config, stats)
    return route(dag, backend, pl, config, stats)
