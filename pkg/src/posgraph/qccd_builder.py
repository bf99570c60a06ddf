"""Builders for grid QCCD position graphs and the coupling-graph specialization.

Grid layout (R x C traps, capacity k):

* trap ``(r, c)`` is a chain of k slots joined by swap edges; every slot pair
  of an executable trap is execute-adjacent;
* junctions sit on an R x (C+1) lattice; junction ``(r, c)`` touches the last
  slot of trap ``(r, c-1)`` and the first slot of trap ``(r, c)``, and the
  junctions ``(r+1, c)`` / ``(r-1, c)`` vertically;
* a junction is not a position.  Each trap-junction connection gets its own
  segment position (merge/split edge to the trap's boundary slot); each
  junction-junction connection is a single shared segment position.  The
  segments incident to a junction form a clique of move edges;
* junctions with fewer than two connections are dropped.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from itertools import combinations
from pathlib import Path

from .position_graph import EdgeCapability, PositionGraph, PositionInfo, Trap

__all__ = [
    "GridSpec",
    "CouplingSpec",
    "build_grid",
    "build_coupling",
    "parse_arch",
    "ArchSpecError",
    "vertex_count_identity",
    "edge_count_identity",
    "movement_edge_count",
]

S, MS, MV, EX = (EdgeCapability.SWAP, EdgeCapability.MERGE_SPLIT,
                 EdgeCapability.MOVE, EdgeCapability.EXECUTE)


class ArchSpecError(ValueError):
    pass


@dataclass(frozen=True)
class GridSpec:
    rows: int
    cols: int
    ions_per_trap: int
    non_executable: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ArchSpecError("grid needs rows, cols >= 1")
        if self.ions_per_trap < 1:
            raise ArchSpecError("ions_per_trap must be >= 1")

    @property
    def name(self) -> str:
        return f"grid:{self.rows}x{self.cols}:{self.ions_per_trap}"

    @property
    def total_capacity(self) -> int:
        return self.rows * self.cols * self.ions_per_trap


@dataclass(frozen=True)
class CouplingSpec:
    num_qudits: int
    edges: tuple[tuple[int, int], ...]
    name: str = "coupling"

    def __post_init__(self):
        seen = set()
        for a, b in self.edges:
            if a == b:
                raise ArchSpecError(f"self-loop on qudit {a}")
            if not (0 <= a < self.num_qudits and 0 <= b < self.num_qudits):
                raise ArchSpecError(f"edge ({a}, {b}) out of range")
            key = (min(a, b), max(a, b))
            if key in seen:
                raise ArchSpecError(f"duplicate edge {key}")
            seen.add(key)

    @classmethod
    def line(cls, n: int) -> "CouplingSpec":
        return cls(n, tuple((i, i + 1) for i in range(n - 1)), f"coupling:line:{n}")

    @classmethod
    def grid(cls, rows: int, cols: int) -> "CouplingSpec":
        edges = []
        for r in range(rows):
            for c in range(cols):
                q = r * cols + c
                if c + 1 < cols:
                    edges.append((q, q + 1))
                if r + 1 < rows:
                    edges.append((q, q + cols))
        return cls(rows * cols, tuple(edges), f"coupling:grid:{rows}x{cols}")

    @classmethod
    def load(cls, path: str | Path) -> "CouplingSpec":
        data = json.loads(Path(path).read_text())
        return cls(int(data["num_qudits"]), tuple((int(a), int(b)) for a, b in data["edges"]),
                   f"coupling:@{Path(path).name}")


def build_grid(spec: GridSpec) -> PositionGraph:
    R, C, k = spec.rows, spec.cols, spec.ions_per_trap
    positions: list[PositionInfo] = []
    traps: list[Trap] = []
    edges: dict[tuple[int, int], EdgeCapability] = {}

    for r in range(R):
        for c in range(C):
            tid = r * C + c
            slots = tuple(range(len(positions), len(positions) + k))
            for i in range(k):
                positions.append(PositionInfo("slot", tid, i))
            execu = tid not in spec.non_executable
            traps.append(Trap(tid, slots, execu))
            for a, b in combinations(slots, 2):
                caps = S if b == a + 1 else EdgeCapability(0)
                if execu:
                    caps |= EX
                if caps:
                    edges[(a, b)] = caps

    # junction (r, c) connections: ("trap", trap id, slot position) or ("junction", (r', c))
    conns: dict[tuple[int, int], list] = {}
    for r in range(R):
        for c in range(C + 1):
            lst = []
            if c >= 1:
                t = traps[r * C + c - 1]
                lst.append(("trap", t.id, t.slots[-1]))
            if c < C:
                t = traps[r * C + c]
                lst.append(("trap", t.id, t.slots[0]))
            for rr in (r - 1, r + 1):
                if 0 <= rr < R:
                    lst.append(("junction", (rr, c)))
            conns[(r, c)] = lst
    # drop dead-end junctions (cannot cascade: vertical links come in pairs)
    alive = {j for j, lst in conns.items() if len(lst) >= 2}

    junction_segments: dict[tuple[int, int], list[int]] = {j: [] for j in sorted(alive)}
    shared: dict[frozenset, int] = {}
    n_jt = n_jj = 0
    for j in sorted(alive):
        for conn in conns[j]:
            if conn[0] == "trap":
                seg = len(positions)
                positions.append(PositionInfo("transport"))
                edges[(conn[2], seg)] = MS
                junction_segments[j].append(seg)
                n_jt += 1
            else:
                other = conn[1]
                if other not in alive:
                    continue
                key = frozenset((j, other))
                if key not in shared:
                    shared[key] = len(positions)
                    positions.append(PositionInfo("transport"))
                    n_jj += 1
                junction_segments[j].append(shared[key])
    for j, segs in junction_segments.items():
        for a, b in combinations(sorted(segs), 2):
            edges[(a, b)] = MV

    meta = {
        "name": spec.name,
        "builder": "grid",
        "rows": R,
        "cols": C,
        "ions_per_trap": k,
        "junction_degrees": [len(junction_segments[j]) for j in sorted(alive)],
        "num_trap_junction_segments": n_jt,
        "num_junction_junction_segments": n_jj,
    }
    graph = PositionGraph(positions, edges, traps, meta)
    if not vertex_count_identity(graph):
        raise AssertionError("vertex count identity violated")
    if not edge_count_identity(graph):
        raise AssertionError("edge count identity violated")
    return graph


def build_coupling(spec: CouplingSpec) -> PositionGraph:
    positions = [PositionInfo("slot", q, 0) for q in range(spec.num_qudits)]
    traps = [Trap(q, (q,), True) for q in range(spec.num_qudits)]
    edges = {(min(a, b), max(a, b)): S | EX for a, b in spec.edges}
    meta = {"name": spec.name, "builder": "coupling"}
    return PositionGraph(positions, edges, traps, meta)


# --- counting identities --------------------------------------------------------


def vertex_count_identity(graph: PositionGraph) -> bool:
    """|V| = sum of trap capacities + |S|."""
    return graph.num_positions == sum(t.capacity for t in graph.traps) + len(graph.transport)


def movement_edge_count(graph: PositionGraph) -> int:
    return sum(1 for caps in graph.edges.values() if caps & (S | MS | MV))


def edge_count_identity(graph: PositionGraph) -> bool:
    """Movement-edge count against the trap/junction decomposition.

    Swap chains contribute sum(n_t - 1), junction cliques sum d(d-1)/2, and
    every segment contributes one merge/split edge except the shared
    junction-junction ones.  Execute-only annotations are not counted.
    """
    meta = graph.meta
    if meta.get("builder") != "grid":
        return True
    n_jt = meta["num_trap_junction_segments"]
    n_jj = meta["num_junction_junction_segments"]
    expected = (
        sum(t.capacity - 1 for t in graph.traps)
        + sum(d * (d - 1) // 2 for d in meta["junction_degrees"])
        + (n_jt + n_jj) - n_jj
    )
    return movement_edge_count(graph) == expected


# --- CLI architecture strings ---------------------------------------------------

_GRID = re.compile(r"^grid:(\d+)x(\d+):(\d+)$")
_CGRID = re.compile(r"^coupling:grid:(\d+)x(\d+)$")
_CLINE = re.compile(r"^coupling:line:(\d+)$")


def parse_arch_spec(text: str) -> GridSpec | CouplingSpec:
    text = text.strip()
    if m := _GRID.match(text):
        return GridSpec(int(m.group(1)), int(m.group(2)), int(m.group(3)))
    if m := _CGRID.match(text):
        return CouplingSpec.grid(int(m.group(1)), int(m.group(2)))
    if m := _CLINE.match(text):
        return CouplingSpec.line(int(m.group(1)))
    if text.startswith("coupling:@"):
        try:
            return CouplingSpec.load(text[len("coupling:@"):])
        except (OSError, KeyError, TypeError, ValueError) as exc:
            raise ArchSpecError(f"cannot load coupling file: {exc}") from None
    raise ArchSpecError(f"unrecognized architecture {text!r}")


def parse_arch(text: str) -> PositionGraph:
    spec = parse_arch_spec(text)
    return build_grid(spec) if isinstance(spec, GridSpec) else build_coupling(spec)
