from __future__ import annotations

import random
from collections import deque

import pytest

from conftest import random_dag
from posgraph.benchmarks import generate
from posgraph.circuit_ir import CircuitDag, Gate, parse_qasm
from posgraph.position_graph import (
    ArchCaches,
    EdgeCapability,
    Placement,
    PositionGraph,
    PositionInfo,
)
from posgraph.qccd_builder import CouplingSpec, GridSpec, build_coupling, build_grid
from posgraph.replay import replay_ops
from posgraph.schedule import OperationDurations
from posgraph.shaw import (
    EpisodeCaches,
    InfeasibleRouting,
    ShawConfig,
    ShawRouter,
    check_feasible,
    compile_shuttle,
    occupancy_signature,
    route_shuttle,
    seeded_trap_placement,
)

MV = EdgeCapability.MOVE
CACHE_FLAGS = ("profile_cache", "scoring_set_cache", "score_memo", "prune_traps")


def router_for(graph, mode="lightshaw", placement=None, **flags):
    r = ShawRouter(graph, ArchCaches(graph), ShawConfig(mode=mode, **flags))
    r.placement = placement
    return r


def random_placement(rng, graph, k):
    return Placement.from_positions(rng.sample(range(graph.num_positions), k), graph.num_positions)


def transport_graph(n, edges):
    return PositionGraph([PositionInfo("transport") for _ in range(n)],
                         {tuple(sorted(e)): MV for e in edges}, [])


# --- local scoring sets and congestion scores -------------------------------------


def bfs_hops(graph, p, d):
    hop = {p: 0}
    q = deque([p])
    while q:
        u = q.popleft()
        for v in graph.move_adj[u]:
            if v not in hop and hop[u] < d:
                hop[v] = hop[u] + 1
                q.append(v)
    return hop


def test_scoring_set_matches_bfs_oracle():
    g = build_grid(GridSpec(2, 2, 3))
    r = router_for(g)
    rng = random.Random(0)
    n = g.num_positions
    for d in (1, 2, 3):
        for _ in range(200):
            p, t, b = (rng.randrange(n) for _ in range(3))
            s = r.local_scoring_set(p, t, b, d)
            hop = bfs_hops(g, p, d)
            want = sorted(x for x in hop if x not in (p, t, b))
            assert list(s.members) == want
            assert list(s.hops) == [hop[x] for x in want]


def test_scoring_set_depth_one_is_neighbourhood():
    g = build_grid(GridSpec(2, 2, 3))
    r = router_for(g)
    for p in range(g.num_positions):
        assert set(r.local_scoring_set(p, p, p, 1).members) == set(g.move_adj[p])


def test_signature_and_fraction_example():
    # p = 0 with neighbours {1, 2, 4, 5, 7, 9}; requester 1 and blocker 2 excluded
    g = transport_graph(10, [(0, 1), (0, 2), (0, 4), (0, 5), (0, 7), (0, 9),
                             (4, 3), (5, 6), (7, 8)])
    pl = Placement.from_positions([5, 9, 1], 10)
    r = router_for(g, placement=pl)
    s = r.local_scoring_set(0, 1, 2, 1)
    assert s.members == (4, 5, 7, 9)
    assert occupancy_signature(0, s.members, pl) == (5, 9)
    score = r.congestion_score(0, 1, 2, 1, EpisodeCaches())
    assert score.fraction == 0.5
    assert score.weighted == pytest.approx(1.0)


def test_empty_scoring_set_scores_zero():
    g = transport_graph(3, [(0, 1), (0, 2)])
    r = router_for(g, placement=Placement.from_positions([1], 3))
    assert r.local_scoring_set(0, 1, 2, 1).members == ()
    s = r.congestion_score(0, 1, 2, 1, EpisodeCaches())
    assert (s.fraction, s.weighted) == (0.0, 0.0)


def test_score_memo_matches_scan():
    g = build_grid(GridSpec(3, 3, 3))
    n = g.num_positions
    rng = random.Random(1)
    pl = random_placement(rng, g, 14)
    cached = router_for(g, "lightshaw", pl)
    plain = router_for(g, "shaw", pl)
    episode = EpisodeCaches()
    pool = [(rng.randrange(n), rng.randrange(n), rng.randrange(n), rng.randint(1, 3))
            for _ in range(40)]
    for i in range(10_000):
        if i % 50 == 0:
            episode = EpisodeCaches()
        if rng.random() < 0.3:
            # random transposition, often outside the queried set
            a, b = rng.randrange(n), rng.randrange(n)
            inv = pl.inverse
            qa, qb = inv[a], inv[b]
            inv[a], inv[b] = qb, qa
            if qa != -1:
                pl.forward[qa] = b
            if qb != -1:
                pl.forward[qb] = a
        p, t, b, d = rng.choice(pool)
        assert cached.congestion_score(p, t, b, d, episode) == \
            plain.congestion_score(p, t, b, d, EpisodeCaches())
    assert cached.counters.score_cache_hits > 0
    assert plain.counters.score_cache_hits == 0


def test_congestion_is_monotone_in_occupancy():
    g = build_grid(GridSpec(2, 2, 4))
    rng = random.Random(2)
    n = g.num_positions
    for _ in range(300):
        k = rng.randint(0, n - 2)
        pos = rng.sample(range(n), k + 1)
        smaller = Placement.from_positions(pos[:k], n)
        larger = Placement.from_positions(pos, n)
        p, t, b = (rng.randrange(n) for _ in range(3))
        lo = router_for(g, "shaw", smaller).congestion_score(p, t, b, 2, EpisodeCaches())
        hi = router_for(g, "shaw", larger).congestion_score(p, t, b, 2, EpisodeCaches())
        assert lo.fraction <= hi.fraction and lo.weighted <= hi.weighted


# --- trap selection -----------------------------------------------------------------


@pytest.mark.parametrize("arch", [GridSpec(4, 4, 5), GridSpec(3, 3, 5)])
def test_pruned_selection_equals_exhaustive(arch, trials=500):
    g = build_grid(arch)
    slots = [p for t in g.traps for p in t.slots]
    rng = random.Random(3)
    caches = ArchCaches(g)
    r = ShawRouter(g, caches, ShawConfig())
    pruned_any = 0
    for _ in range(trials):
        k = rng.randint(2, len(slots) - 1)
        pl = Placement.from_positions(rng.sample(slots, k), g.num_positions)
        r.placement = pl
        gate = Gate(0, tuple(rng.sample(range(k), min(k, rng.choice((2, 2, 3))))))
        before = r.counters.traps_pruned
        a = r.select_target_trap(gate, prune=True)
        b = r.select_target_trap(gate, prune=False)
        pruned_any += r.counters.traps_pruned - before
        assert (a.trap, a.assignment) == (b.trap, b.assignment)
        assert a.adjusted_exact == pytest.approx(b.adjusted_exact)
    assert pruned_any > 0


def test_lower_bound_is_sound():
    g = build_grid(GridSpec(3, 3, 4))
    slots = [p for t in g.traps for p in t.slots]
    rng = random.Random(4)
    r = ShawRouter(g, ArchCaches(g), ShawConfig())
    for _ in range(300):
        k = rng.randint(2, len(slots))
        r.placement = Placement.from_positions(rng.sample(slots, k), g.num_positions)
        gate = Gate(0, tuple(rng.sample(range(k), 2)))
        for t in g.traps:
            assert r.lower_bound(gate, t) <= r.exact_score(gate, t)[0] + 1e-9


def test_single_executable_trap_prunes_nothing():
    g = build_grid(GridSpec(1, 3, 3, frozenset({1, 2})))
    rng = random.Random(5)
    slots = [p for t in g.traps for p in t.slots]
    r = ShawRouter(g, ArchCaches(g), ShawConfig())
    for _ in range(50):
        r.placement = Placement.from_positions(rng.sample(slots, 4), g.num_positions)
        assert r.select_target_trap(Gate(0, (0, 1))).trap == 0
    assert r.counters.traps_pruned == 0


def test_score_move_cached_equals_uncached():
    g = build_grid(GridSpec(3, 3, 3))
    rng = random.Random(6)
    n = g.num_positions
    for i in range(10_000):
        if i % 200 == 0:
            pl = random_placement(rng, g, 12)
            fast = router_for(g, "lightshaw", pl)
            slow = router_for(g, "shaw", pl)
        src = pl.forward[rng.randrange(12)]
        dst = rng.randrange(n)
        front = [tuple(rng.sample(range(12), 2)) for _ in range(rng.randint(1, 4))]
        look = [tuple(rng.sample(range(12), 2)) for _ in range(rng.randint(0, 4))]
        assert fast.score_move(src, dst, front, look) == slow.score_move(src, dst, front, look)


def test_path_penalty_examples():
    g = build_grid(GridSpec(1, 2, 2))
    d = OperationDurations()
    # slots 0,1 | segments 4,5 | slots 2,3
    r = router_for(g, placement=Placement.from_positions([1], g.num_positions))
    assert r.path_penalty(1, 2) == 0.0
    r.placement = Placement.from_positions([1, 4, 5], g.num_positions)
    assert r.path_penalty(1, 2, ignore=0) == pytest.approx(2 * d.clearing_penalty)
    # swap-only paths carry no penalty even when occupied
    r.placement = Placement.from_positions([0, 1], g.num_positions)
    assert r.path_penalty(0, 1, ignore=0) == 0.0


# --- congestion resolution ------------------------------------------------------------


def test_resolve_forced_single_exit():
    # 0 - 1 - 2 on the path, 1 branches to 3 (free) and 4 (occupied)
    g = transport_graph(7, [(0, 1), (1, 2), (1, 3), (1, 4), (3, 5), (4, 6)])
    r = router_for(g, placement=Placement.from_positions([0, 1, 2, 4], 7))
    assert r.resolve_congestion(0, [0, 1, 2], set()) == [(1, 3)]


def test_resolve_prefers_less_congested_exit():
    g = transport_graph(7, [(0, 1), (1, 2), (1, 3), (1, 4), (3, 5), (4, 6)])
    # 3's neighbourhood holds an ion at 5, 4's neighbourhood is empty
    r = router_for(g, placement=Placement.from_positions([0, 1, 2, 5], 7))
    assert r.resolve_congestion(0, [0, 1, 2], set()) == [(1, 4)]
    r.placement = Placement.from_positions([0, 1, 2, 6], 7)
    assert r.resolve_congestion(0, [0, 1, 2], set()) == [(1, 3)]


def test_resolve_chain_push():
    # the only exit 3 is occupied, 3 can push on to 5
    g = transport_graph(6, [(0, 1), (1, 2), (1, 3), (3, 5)])
    r = router_for(g, placement=Placement.from_positions([0, 1, 2, 3], 6))
    assert r.resolve_congestion(0, [0, 1, 2], set()) == [(3, 5), (1, 3)]


def test_episode_memo_starts_empty():
    dag = parse_qasm(generate("qft", 16))
    g = build_grid(GridSpec(2, 2, 4))
    router = ShawRouter(g, ArchCaches(g), ShawConfig())
    sizes = []
    router.on_episode_start = lambda ep: sizes.append(len(ep.scores))
    router.route(dag, seeded_trap_placement(g, 16, 0))
    assert sizes and set(sizes) == {0}


# --- full routing ---------------------------------------------------------------------


def test_two_trap_cx():
    g = build_grid(GridSpec(1, 2, 2))
    dag = CircuitDag.from_gates(2, [Gate(0, (0, 1))])
    pl = Placement.from_positions([0, 2], g.num_positions)
    sched, _ = route_shuttle(dag, g, ArchCaches(g), pl, ShawConfig())
    assert [t.op.kind for t in sched.ops] == ["split", "move", "merge", "gate"]


def test_all_executable_circuit_needs_no_shuttles():
    g = build_grid(GridSpec(2, 2, 4))
    dag = CircuitDag.from_gates(4, [Gate(0, (0, 1)), Gate(1, (2, 3)), Gate(2, (1, 2))])
    t = g.traps[0].slots
    pl = Placement.from_positions(list(t), g.num_positions)
    sched, _ = route_shuttle(dag, g, ArchCaches(g), pl, ShawConfig())
    assert {x.op.kind for x in sched.ops} == {"gate"}


def _compile(dag, g, **kw):
    sched, counters = compile_shuttle(dag, g, ArchCaches(g), ShawConfig(**kw))
    return [t.op for t in sched.ops], counters


def test_saturated_trap_modes_agree():
    g = build_grid(GridSpec(2, 2, 4))
    dag = parse_qasm(generate("qft", 16))
    a, _ = _compile(dag, g, mode="shaw")
    b, _ = _compile(dag, g, mode="lightshaw")
    assert a == b
    assert replay_ops(g, seeded_trap_placement(g, 16, 0).as_list(), a, dag).ok


@pytest.mark.parametrize("flag", CACHE_FLAGS)
def test_each_cache_is_transparent(flag):
    g = build_grid(GridSpec(2, 2, 5))
    dag = parse_qasm(generate("qaoa", 14))
    base, _ = _compile(dag, g, mode="shaw")
    on, _ = _compile(dag, g, mode="shaw", **{flag: True})
    off, _ = _compile(dag, g, mode="lightshaw", **{flag: False})
    assert on == base == off


@pytest.mark.parametrize("seed", range(6))
def test_random_circuits_replay(seed):
    rng = random.Random(seed)
    g = build_grid(GridSpec(2, 3, 3))
    dag = random_dag(rng, 15, 80, max_arity=3)
    ops, counters = _compile(dag, g, rng_seed=seed)
    res = replay_ops(g, seeded_trap_placement(g, 15, seed).as_list(), ops, dag)
    assert res.ok, res.message
    assert ops == _compile(dag, g, mode="shaw", rng_seed=seed)[0]


def test_infeasible_architectures():
    cx = CircuitDag.from_gates(2, [Gate(0, (0, 1))])
    with pytest.raises(InfeasibleRouting, match="no multi-slot executable trap"):
        check_feasible(cx, build_coupling(CouplingSpec.line(3)))
    with pytest.raises(InfeasibleRouting, match="exceed"):
        check_feasible(CircuitDag.from_gates(5, []), build_grid(GridSpec(1, 2, 2)))
    wide = CircuitDag.from_gates(3, [Gate(0, (0, 1, 2))])
    with pytest.raises(InfeasibleRouting):
        check_feasible(wide, build_grid(GridSpec(1, 2, 2)))


def test_config_validation():
    with pytest.raises(ValueError):
        ShawConfig(mode="fast")
    assert ShawConfig(mode="shaw").flag("prune_traps") is False
    assert ShawConfig(mode="shaw", prune_traps=True).flag("prune_traps") is True
