"""Position Graph: occupiable positions, labeled transitions, and placements.

A :class:`PositionGraph` is static for a compilation.  Everything derivable
from it alone (travel-time distances, next-hop table, execute adjacency,
nearest-trap distances, blockage profiles) lives in :class:`ArchCaches`,
which is built once and shared read-only.  The dynamic part is the
:class:`Placement` of logical qudits onto positions.
"""

from __future__ import annotations

import enum
import heapq
import json
import math
import threading
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .schedule import OperationDurations

__all__ = [
    "EdgeCapability",
    "MOVEMENT",
    "UNREACHABLE",
    "Trap",
    "PositionInfo",
    "PositionGraph",
    "Placement",
    "PlacementError",
    "ArchCaches",
    "BlockageProfile",
    "compute_apsp",
    "can_execute",
    "positions_executable",
    "blockage_profile",
    "apply_move",
    "apply_swap",
    "dijkstra",
]

UNREACHABLE = math.inf


class EdgeCapability(enum.Flag):
    SWAP = enum.auto()
    MERGE_SPLIT = enum.auto()
    MOVE = enum.auto()
    EXECUTE = enum.auto()


MOVEMENT = EdgeCapability.SWAP | EdgeCapability.MERGE_SPLIT | EdgeCapability.MOVE

_CAP_NAMES = {
    EdgeCapability.SWAP: "swap",
    EdgeCapability.MERGE_SPLIT: "merge_split",
    EdgeCapability.MOVE: "move",
    EdgeCapability.EXECUTE: "execute",
}
_CAP_BY_NAME = {v: k for k, v in _CAP_NAMES.items()}


def caps_to_names(caps: EdgeCapability) -> list[str]:
    return [name for flag, name in _CAP_NAMES.items() if flag in caps]


def names_to_caps(names: Iterable[str]) -> EdgeCapability:
    caps = EdgeCapability(0)
    for n in names:
        try:
            caps |= _CAP_BY_NAME[n]
        except KeyError:
            raise ValueError(f"unknown edge capability {n!r}") from None
    return caps


def _movement_part(caps: EdgeCapability) -> EdgeCapability:
    return caps & MOVEMENT


@dataclass(frozen=True)
class Trap:
    id: int
    slots: tuple[int, ...]
    executable: bool = True

    @property
    def capacity(self) -> int:
        return len(self.slots)


@dataclass(frozen=True)
class PositionInfo:
    kind: str  # "slot" or "transport"
    trap: int | None = None
    slot: int | None = None


class PositionGraph:
    """Labeled graph of positions.

    ``edges`` maps an unordered pair ``(a, b)`` with ``a < b`` to its
    capability set.  ``meta`` carries builder metadata (architecture name,
    junction/segment bookkeeping) and is serialized verbatim.
    """

    FORMAT = "posgraph.architecture"
    VERSION = 1

    def __init__(
        self,
        positions: Sequence[PositionInfo],
        edges: Mapping[tuple[int, int], EdgeCapability],
        traps: Sequence[Trap],
        meta: dict | None = None,
    ):
        self.positions = tuple(positions)
        self.traps = tuple(traps)
        self.meta = dict(meta or {})
        n = len(self.positions)
        norm: dict[tuple[int, int], EdgeCapability] = {}
        for (a, b), caps in edges.items():
            if a == b:
                raise ValueError(f"self-loop at position {a}")
            if not (0 <= a < n and 0 <= b < n):
                raise ValueError(f"edge ({a}, {b}) references unknown position")
            key = (a, b) if a < b else (b, a)
            if key in norm:
                raise ValueError(f"duplicate edge {key}")
            if not caps:
                raise ValueError(f"edge {key} has an empty capability set")
            mv = _movement_part(caps)
            if mv and len(caps_to_names(mv)) > 1:
                raise ValueError(f"edge {key} carries more than one movement capability")
            norm[key] = caps
        self.edges = dict(sorted(norm.items()))
        self._check_traps()
        move_adj: list[list[int]] = [[] for _ in range(n)]
        exec_adj: list[set[int]] = [set() for _ in range(n)]
        for (a, b), caps in self.edges.items():
            if caps & MOVEMENT:
                move_adj[a].append(b)
                move_adj[b].append(a)
            if EdgeCapability.EXECUTE in caps:
                exec_adj[a].add(b)
                exec_adj[b].add(a)
        self.move_adj: tuple[tuple[int, ...], ...] = tuple(tuple(sorted(x)) for x in move_adj)
        self.exec_adj: tuple[frozenset[int], ...] = tuple(frozenset(x) for x in exec_adj)

    def _check_traps(self) -> None:
        seen: dict[int, int] = {}
        for t_idx, trap in enumerate(self.traps):
            if trap.id != t_idx:
                raise ValueError("trap ids must be 0..m-1 in order")
            for k, p in enumerate(trap.slots):
                if p in seen:
                    raise ValueError(f"position {p} in two traps")
                seen[p] = trap.id
                info = self.positions[p]
                if info.kind != "slot" or info.trap != trap.id or info.slot != k:
                    raise ValueError(f"position {p} metadata disagrees with trap {trap.id}")
        for p, info in enumerate(self.positions):
            if info.kind == "slot" and p not in seen:
                raise ValueError(f"slot position {p} belongs to no trap")
            if info.kind == "transport" and (info.trap is not None or info.slot is not None):
                raise ValueError(f"transport position {p} has trap metadata")
            if info.kind not in ("slot", "transport"):
                raise ValueError(f"position {p} has unknown kind {info.kind!r}")

    # -- queries ---------------------------------------------------------------

    @property
    def num_positions(self) -> int:
        return len(self.positions)

    @property
    def transport(self) -> list[int]:
        return [p for p, info in enumerate(self.positions) if info.kind == "transport"]

    @property
    def name(self) -> str:
        return self.meta.get("name", "")

    def capability(self, a: int, b: int) -> EdgeCapability:
        key = (a, b) if a < b else (b, a)
        return self.edges.get(key, EdgeCapability(0))

    def trap_of(self, p: int) -> int | None:
        return self.positions[p].trap

    def is_coupling(self) -> bool:
        return not self.transport and all(t.capacity == 1 for t in self.traps)

    def executable_slots(self) -> list[int]:
        return [p for t in self.traps if t.executable for p in t.slots]

    def edge_cost(self, a: int, b: int, durations: OperationDurations) -> float:
        caps = self.capability(a, b)
        if EdgeCapability.SWAP in caps:
            return durations.swap
        if EdgeCapability.MERGE_SPLIT in caps:
            return durations.merge_split
        if EdgeCapability.MOVE in caps:
            return durations.move
        raise ValueError(f"({a}, {b}) is not a movement edge")

    # -- serialization ---------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "format": self.FORMAT,
            "version": self.VERSION,
            "meta": self.meta,
            "positions": [
                {"id": p, "kind": i.kind, "trap": i.trap, "slot": i.slot}
                for p, i in enumerate(self.positions)
            ],
            "edges": [
                {"a": a, "b": b, "caps": caps_to_names(c)} for (a, b), c in self.edges.items()
            ],
            "traps": [
                {"id": t.id, "slots": list(t.slots), "executable": t.executable}
                for t in self.traps
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> "PositionGraph":
        if data.get("format") != cls.FORMAT:
            raise ValueError("not a position graph document")
        if data.get("version") != cls.VERSION:
            raise ValueError(f"unsupported architecture version {data.get('version')}")
        pos = sorted(data["positions"], key=lambda r: r["id"])
        if [r["id"] for r in pos] != list(range(len(pos))):
            raise ValueError("position ids must be 0..n-1")
        positions = [PositionInfo(r["kind"], r.get("trap"), r.get("slot")) for r in pos]
        edges = {(e["a"], e["b"]): names_to_caps(e["caps"]) for e in data["edges"]}
        traps = [Trap(t["id"], tuple(t["slots"]), bool(t.get("executable", True)))
                 for t in data["traps"]]
        return cls(positions, edges, traps, data.get("meta", {}))

    @classmethod
    def from_json(cls, text: str) -> "PositionGraph":
        return cls.from_dict(json.loads(text))


# --- placement -------------------------------------------------------------------


class PlacementError(ValueError):
    pass


class Placement:
    """Partial bijection between logical qudits and positions."""

    __slots__ = ("forward", "inverse")

    def __init__(self, num_qudits: int, num_positions: int):
        self.forward: list[int] = [-1] * num_qudits
        self.inverse: list[int] = [-1] * num_positions

    @classmethod
    def from_positions(cls, positions: Sequence[int], num_positions: int) -> "Placement":
        pl = cls(len(positions), num_positions)
        for q, p in enumerate(positions):
            if p >= 0:
                pl.place(q, p)
        return pl

    def place(self, q: int, p: int) -> None:
        if not 0 <= p < len(self.inverse):
            raise PlacementError(f"position {p} does not exist")
        if self.inverse[p] != -1:
            raise PlacementError(f"position {p} already holds qudit {self.inverse[p]}")
        if self.forward[q] != -1:
            self.inverse[self.forward[q]] = -1
        self.forward[q] = p
        self.inverse[p] = q

    def position_of(self, q: int) -> int:
        return self.forward[q]

    def occupant(self, p: int) -> int:
        """Qudit at ``p`` or -1."""
        return self.inverse[p]

    def occupied(self, p: int) -> bool:
        return self.inverse[p] != -1

    def copy(self) -> "Placement":
        pl = Placement.__new__(Placement)
        pl.forward = list(self.forward)
        pl.inverse = list(self.inverse)
        return pl

    def as_list(self) -> list[int]:
        return list(self.forward)

    def is_consistent(self) -> bool:
        for q, p in enumerate(self.forward):
            if p != -1 and self.inverse[p] != q:
                return False
        for p, q in enumerate(self.inverse):
            if q != -1 and self.forward[q] != p:
                return False
        return True

    def __eq__(self, other) -> bool:
        return isinstance(other, Placement) and self.forward == other.forward and len(
            self.inverse) == len(other.inverse)

    def __repr__(self) -> str:
        return f"Placement({self.forward})"


def apply_move(placement: Placement, graph: PositionGraph, qudit: int, to: int) -> None:
    """Move ``qudit`` along a movement edge into the empty position ``to``."""
    src = placement.forward[qudit]
    if src == -1:
        raise PlacementError(f"qudit {qudit} is not placed")
    if not graph.capability(src, to) & MOVEMENT:
        raise PlacementError(f"({src}, {to}) is not a movement edge")
    if placement.inverse[to] != -1:
        raise PlacementError(f"destination {to} is occupied by {placement.inverse[to]}")
    placement.inverse[src] = -1
    placement.inverse[to] = qudit
    placement.forward[qudit] = to


def apply_swap(placement: Placement, graph: PositionGraph, a: int, b: int) -> None:
    """Exchange the occupants (either may be empty) of swap-adjacent ``a``, ``b``."""
    if EdgeCapability.SWAP not in graph.capability(a, b):
        raise PlacementError(f"({a}, {b}) has no swap capability")
    qa, qb = placement.inverse[a], placement.inverse[b]
    placement.inverse[a], placement.inverse[b] = qb, qa
    if qa != -1:
        placement.forward[qa] = b
    if qb != -1:
        placement.forward[qb] = a


# --- shortest paths -------------------------------------------------------------


def _close(a: float, b: float) -> bool:
    return abs(a - b) <= 1e-9 * max(1.0, abs(a), abs(b))


def dijkstra(graph: PositionGraph, costs: OperationDurations, source: int) -> list[float]:
    """Travel-time distances from ``source`` over movement edges."""
    n = graph.num_positions
    dist = [UNREACHABLE] * n
    dist[source] = 0.0
    heap = [(0.0, source)]
    adj = graph.move_adj
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v in adj[u]:
            nd = d + graph.edge_cost(u, v, costs)
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def next_hops_towards(
    graph: PositionGraph, costs: OperationDurations, target: int, dist_to_target: Sequence[float]
) -> list[int]:
    """For every source, the smallest neighbour lying on a shortest path to ``target``.

    Following these hops yields the lexicographically smallest shortest path.
    """
    n = graph.num_positions
    hops = [-1] * n
    for s in range(n):
        ds = dist_to_target[s]
        if s == target or ds == UNREACHABLE:
            continue
        for v in graph.move_adj[s]:
            if _close(graph.edge_cost(s, v, costs) + dist_to_target[v], ds):
                hops[s] = v
                break
    return hops


def walk_path(next_hop: Sequence[int], source: int, target: int) -> tuple[int, ...]:
    """Materialize the path ``source .. target`` from a next-hop column."""
    if source == target:
        return (source,)
    path = [source]
    cur = source
    while cur != target:
        cur = next_hop[cur]
        if cur == -1:
            raise ValueError(f"{target} unreachable from {source}")
        path.append(cur)
    return tuple(path)


class PathTable:
    """Next-hop table: ``hop[t][s]`` is the next position from ``s`` towards ``t``."""

    def __init__(self, hop: list[list[int]]):
        self.hop = hop

    def path(self, s: int, t: int) -> tuple[int, ...]:
        return walk_path(self.hop[t], s, t)


def compute_apsp(
    graph: PositionGraph, costs: OperationDurations
) -> tuple[list[list[float]], PathTable]:
    """All-pairs travel-time distances and lexicographically-least shortest paths."""
    for (a, b), caps in graph.edges.items():
        if caps & MOVEMENT and graph.edge_cost(a, b, costs) <= 0:
            raise ValueError(f"non-positive cost on edge ({a}, {b})")
    n = graph.num_positions
    dist = [dijkstra(graph, costs, s) for s in range(n)]
    for s in range(n):
        row = dist[s]
        for t in range(s + 1, n):
            dist[t][s] = row[t]
    hop = [next_hops_towards(graph, costs, t, [dist[s][t] for s in range(n)]) for t in range(n)]
    return dist, PathTable(hop)


# --- executability --------------------------------------------------------------


def positions_executable(positions: Sequence[int], exec_adj: Sequence[frozenset[int]]) -> bool:
    """True iff ``positions`` induce a connected subgraph of the execute adjacency."""
    if len(positions) <= 1:
        return True
    if len(positions) == 2:
        return positions[1] in exec_adj[positions[0]]
    members = set(positions)
    seen = {positions[0]}
    stack = [positions[0]]
    while stack:
        u = stack.pop()
        for v in exec_adj[u]:
            if v in members and v not in seen:
                seen.add(v)
                stack.append(v)
    return len(seen) == len(members)


def can_execute(gate, placement: Placement, caches: "ArchCaches") -> bool:
    pos = []
    for q in gate.operands:
        p = placement.forward[q]
        if p == -1:
            raise PlacementError(f"operand {q} of gate {gate.id} is not placed")
        pos.append(p)
    return positions_executable(pos, caches.exec_adj)


# --- caches ---------------------------------------------------------------------


@dataclass(frozen=True)
class BlockageProfile:
    """Intermediate positions on the ``source -> target`` path with fixed penalties."""

    source: int
    target: int
    path: tuple[int, ...]
    penalties: tuple[float, ...]
    # penalty if the target itself is occupied (0 when entered by a swap)
    target_penalty: float = 0.0


def build_profile(
    graph: PositionGraph, costs: OperationDurations, full_path: Sequence[int]
) -> BlockageProfile:
    """Profile for an explicit path.

    Positions entered through a swap edge cost nothing to pass when occupied
    (the occupants are exchanged); every other intermediate carries the fixed
    clearing penalty.
    """
    inter = tuple(full_path[1:-1])
    pens = []
    rho = costs.clearing_penalty
    for i in range(1, len(full_path) - 1):
        caps = graph.capability(full_path[i - 1], full_path[i])
        pens.append(0.0 if EdgeCapability.SWAP in caps else rho)
    tpen = 0.0
    if len(full_path) > 1:
        caps = graph.capability(full_path[-2], full_path[-1])
        tpen = 0.0 if EdgeCapability.SWAP in caps else rho
    return BlockageProfile(full_path[0], full_path[-1], inter, tuple(pens), tpen)


@dataclass
class CacheCounters:
    profile_hits: int = 0
    profile_misses: int = 0


class ArchCaches:
    """Architecture-level data computed once per (graph, durations)."""

    def __init__(self, graph: PositionGraph, costs: OperationDurations | None = None):
        self.graph = graph
        self.costs = costs or OperationDurations()
        self.dist, self.paths = compute_apsp(graph, self.costs)
        self.exec_adj = graph.exec_adj
        n = graph.num_positions
        self.nearest_trap: list[list[float]] = [
            [min((self.dist[v][u] for u in trap.slots), default=UNREACHABLE)
             for trap in graph.traps]
            for v in range(n)
        ]
        self.hop_diameter = _hop_diameter(graph)
        self._profiles: dict[tuple[int, int], BlockageProfile] = {}
        self._lock = threading.Lock()
        self.counters = CacheCounters()

    def path(self, s: int, t: int) -> tuple[int, ...]:
        if self.dist[s][t] == UNREACHABLE:
            raise ValueError(f"{t} unreachable from {s}")
        return self.paths.path(s, t)

    def blockage_profile(self, s: int, t: int) -> BlockageProfile:
        key = (s, t)
        prof = self._profiles.get(key)
        if prof is not None:
            self.counters.profile_hits += 1
            return prof
        prof = build_profile(self.graph, self.costs, self.path(s, t))
        with self._lock:
            self._profiles.setdefault(key, prof)
        self.counters.profile_misses += 1
        return prof

    @property
    def profile_count(self) -> int:
        return len(self._profiles)


def blockage_profile(caches: ArchCaches, source: int, target: int) -> BlockageProfile:
    return caches.blockage_profile(source, target)


def _hop_diameter(graph: PositionGraph) -> int:
    best = 0
    for s in range(graph.num_positions):
        seen = {s: 0}
        q = deque([s])
        while q:
            u = q.popleft()
            for v in graph.move_adj[u]:
                if v not in seen:
                    seen[v] = seen[u] + 1
                    q.append(v)
        best = max(best, max(seen.values()))
    return best
