from __future__ import annotations

import itertools
from collections import deque

import pytest

from posgraph.position_graph import ArchCaches, EdgeCapability, Placement, positions_executable
from posgraph.qccd_builder import (
    ArchSpecError,
    CouplingSpec,
    GridSpec,
    build_coupling,
    build_grid,
    edge_count_identity,
    movement_edge_count,
    parse_arch,
    parse_arch_spec,
    vertex_count_identity,
)
from posgraph.schedule import OperationDurations

S, MS, MV, EX = (EdgeCapability.SWAP, EdgeCapability.MERGE_SPLIT,
                 EdgeCapability.MOVE, EdgeCapability.EXECUTE)
GRIDS = [(r, r) for r in (1, 2, 3, 4, 6)]
CAPS = (3, 4, 5)


def test_one_by_one():
    g = build_grid(GridSpec(1, 1, 3))
    assert g.num_positions == 3
    assert movement_edge_count(g) == 2
    assert g.transport == []
    assert g.meta["junction_degrees"] == []


@pytest.mark.parametrize("rc", GRIDS)
@pytest.mark.parametrize("k", CAPS)
def test_vertex_count_by_enumeration(rc, k):
    g = build_grid(GridSpec(*rc, k))
    segments = [p for p, info in enumerate(g.positions) if info.kind == "transport"]
    slots = [p for p, info in enumerate(g.positions) if info.kind == "slot"]
    assert len(slots) == rc[0] * rc[1] * k
    assert g.num_positions == len(slots) + len(segments)
    assert vertex_count_identity(g)
    assert edge_count_identity(g)


def test_two_by_two_five_counts():
    g = build_grid(GridSpec(2, 2, 5))
    # 8 trap-junction segments plus 3 shared junction-junction segments
    assert len(g.transport) == 11
    assert g.num_positions == 31


def test_six_by_six_builds():
    g = build_grid(GridSpec(6, 6, 5))
    assert vertex_count_identity(g)
    assert sum(t.capacity for t in g.traps) == 180


def test_edge_identity_recount():
    g = build_grid(GridSpec(3, 4, 4))
    swaps = sum(1 for c in g.edges.values() if S in c)
    ms = sum(1 for c in g.edges.values() if MS in c)
    moves = sum(1 for c in g.edges.values() if MV in c)
    assert swaps == sum(t.capacity - 1 for t in g.traps)
    assert ms == g.meta["num_trap_junction_segments"]
    assert moves == sum(d * (d - 1) // 2 for d in g.meta["junction_degrees"])
    assert movement_edge_count(g) == swaps + ms + moves


def test_interior_junction_degree_is_four():
    g = build_grid(GridSpec(4, 4, 3))
    degrees = g.meta["junction_degrees"]
    assert max(degrees) == 4
    # interior junctions: rows 1..R-2, columns 1..C-1 of the R x (C+1) lattice
    assert degrees.count(4) == (4 - 2) * (4 - 1)


@pytest.mark.parametrize("rc", [(2, 2), (3, 3), (2, 4)])
def test_all_slots_connected(rc):
    g = build_grid(GridSpec(*rc, 3))
    seen = {0}
    q = deque([0])
    while q:
        for v in g.move_adj[q.popleft()]:
            if v not in seen:
                seen.add(v)
                q.append(v)
    assert seen == set(range(g.num_positions))


def test_execute_rule_is_co_location():
    g = build_grid(GridSpec(2, 2, 4))
    caches = ArchCaches(g)
    slots = [p for t in g.traps for p in t.slots]
    for a, b in itertools.combinations(slots, 2):
        same = g.positions[a].trap == g.positions[b].trap
        assert positions_executable([a, b], caches.exec_adj) == same
    for p in g.transport:
        assert not g.exec_adj[p]


def test_non_executable_trap():
    g = build_grid(GridSpec(1, 2, 3, frozenset({1})))
    assert not g.traps[1].executable
    assert all(not (EX & g.capability(a, b)) for a, b in itertools.combinations(g.traps[1].slots, 2))


def test_coupling_line():
    g = build_coupling(CouplingSpec.line(3))
    assert g.num_positions == 3
    assert g.edges == {(0, 1): S | EX, (1, 2): S | EX}
    assert g.is_coupling()


def test_coupling_empty_edges():
    g = build_coupling(CouplingSpec(3, ()))
    assert g.edges == {}
    caches = ArchCaches(g, OperationDurations.unit())
    assert not any(positions_executable([a, b], caches.exec_adj)
                   for a, b in itertools.combinations(range(3), 2))


def test_coupling_exec_adj_equals_input():
    # heavy-hex-like: 4x4 lattice with every other vertical link removed
    edges = []
    for r in range(4):
        for c in range(4):
            q = 4 * r + c
            if c < 3:
                edges.append((q, q + 1))
            if r < 3 and (r + c) % 2 == 0:
                edges.append((q, q + 4))
    spec = CouplingSpec(16, tuple(edges))
    g = build_coupling(spec)
    want = {u: set() for u in range(16)}
    for a, b in edges:
        want[a].add(b)
        want[b].add(a)
    assert {u: set(g.exec_adj[u]) for u in range(16)} == want


def test_coupling_spec_validation():
    with pytest.raises(ArchSpecError):
        CouplingSpec(2, ((0, 0),))
    with pytest.raises(ArchSpecError):
        CouplingSpec(2, ((0, 1), (1, 0)))
    with pytest.raises(ArchSpecError):
        GridSpec(0, 1, 1)


def test_arch_strings(tmp_path):
    assert parse_arch_spec("grid:2x3:4") == GridSpec(2, 3, 4)
    assert parse_arch_spec("coupling:line:4") == CouplingSpec.line(4)
    f = tmp_path / "c.json"
    f.write_text('{"num_qudits": 3, "edges": [[0, 1], [1, 2]]}')
    g = parse_arch(f"coupling:@{f}")
    assert g.num_positions == 3
    for bad in ("grid:2x2", "ring:4", "coupling:@/does/not/exist.json"):
        with pytest.raises(ArchSpecError):
            parse_arch(bad)
