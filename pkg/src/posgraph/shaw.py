"""Shuttling-aware routing (SHAW) and its cached variant (LightSHAW).

Both modes run the same decision procedure.  LightSHAW only changes *how*
intermediate quantities are obtained:

========================  ==========================  ===========================
quantity                  shaw                        lightshaw
========================  ==========================  ===========================
blockage profile          rebuilt per query           memoized per (src, dst)
local scoring set         BFS per query               memoized per (p, t, b, d)
congestion score          rescanned per query         memoized per (p,t,b,d,sigma)
                                                      within one episode
target trap               exact score for every trap  lower-bound order + pruning
========================  ==========================  ===========================

Each switch can be flipped on its own through :class:`ShawConfig`.
"""

from __future__ import annotations

import itertools
import random
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .circuit_ir import CircuitDag, DagCursor, Gate, lookahead_set
from .position_graph import (
    ArchCaches,
    BlockageProfile,
    EdgeCapability,
    Placement,
    PositionGraph,
    build_profile,
    positions_executable,
)
from .schedule import Op, Schedule, assign_times

__all__ = [
    "ShawConfig",
    "ShawCounters",
    "LocalScoringSet",
    "CongestionScore",
    "EpisodeCaches",
    "TrapScore",
    "ShawRouter",
    "InfeasibleRouting",
    "route_shuttle",
    "compile_shuttle",
    "check_feasible",
    "seeded_trap_placement",
    "occupancy_signature",
]


class InfeasibleRouting(RuntimeError):
    pass


@dataclass(frozen=True)
class ShawConfig:
    mode: str = "lightshaw"
    lookahead_size: int = 8
    extended_weight: float = 0.5
    rng_seed: int = 0
    # per-cache overrides; None follows the mode
    profile_cache: bool | None = None
    scoring_set_cache: bool | None = None
    score_memo: bool | None = None
    prune_traps: bool | None = None
    route_step_factor: int = 4

    def __post_init__(self):
        if self.mode not in ("shaw", "lightshaw"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.lookahead_size < 0:
            raise ValueError("lookahead_size must be >= 0")

    def flag(self, name: str) -> bool:
        v = getattr(self, name)
        return self.mode == "lightshaw" if v is None else v


@dataclass
class ShawCounters:
    congestion_episodes: int = 0
    clearing_moves: int = 0
    escapes: int = 0
    evictions: int = 0
    fallback_paths: int = 0
    scoring_set_hits: int = 0
    scoring_set_misses: int = 0
    score_cache_hits: int = 0
    score_cache_misses: int = 0
    profile_hits: int = 0
    profile_builds: int = 0
    trap_selections: int = 0
    traps_exact_scored: int = 0
    traps_pruned: int = 0
    trap_retries: int = 0
    can_execute_calls: int = 0

    def as_dict(self) -> dict[str, int]:
        return dict(vars(self))


@dataclass(frozen=True)
class LocalScoringSet:
    key: tuple[int, int, int, int]
    members: tuple[int, ...]
    hops: tuple[int, ...]


@dataclass(frozen=True)
class CongestionScore:
    fraction: float
    weighted: float


@dataclass
class EpisodeCaches:
    scores: dict[tuple, CongestionScore] = field(default_factory=dict)


@dataclass(frozen=True)
class TrapScore:
    trap: int
    lower_bound: float
    occupancy_bonus: float
    exact: float | None = None
    assignment: tuple[int, ...] = ()

    @property
    def adjusted_lower_bound(self) -> float:
        return self.lower_bound - self.occupancy_bonus

    @property
    def adjusted_exact(self) -> float | None:
        return None if self.exact is None else self.exact - self.occupancy_bonus


def occupancy_signature(p: int, members: Sequence[int], placement: Placement) -> tuple[int, ...]:
    """Sorted occupied positions among ``p`` and ``members``."""
    inv = placement.inverse
    return tuple(sorted(x for x in (p, *members) if inv[x] != -1))


def seeded_trap_placement(graph: PositionGraph, num_qudits: int, seed: int) -> Placement:
    slots = [p for t in graph.traps for p in t.slots]
    if num_qudits > len(slots):
        raise InfeasibleRouting(f"infeasible: {num_qudits} qudits exceed {len(slots)} trap slots")
    rng = random.Random(seed)
    return Placement.from_positions(rng.sample(slots, num_qudits), graph.num_positions)


def check_feasible(dag: CircuitDag, graph: PositionGraph) -> None:
    """Raise :class:`InfeasibleRouting` when ``dag`` cannot run on ``graph`` at all."""
    if any(g.arity > 1 for g in dag.gates):
        if not any(t.executable and t.capacity >= 2 for t in graph.traps):
            raise InfeasibleRouting("infeasible: no multi-slot executable trap")
        widest = max(g.arity for g in dag.gates)
        if not any(t.executable and t.capacity >= widest for t in graph.traps):
            raise InfeasibleRouting(f"infeasible: no executable trap fits {widest} operands")
    slots = sum(t.capacity for t in graph.traps)
    if dag.num_qudits > slots:
        raise InfeasibleRouting(
            f"infeasible: {dag.num_qudits} qudits exceed {slots} trap slots")


class _RouteFailed(Exception):
    pass


class ShawRouter:
    """One router instance per compilation."""

    def __init__(self, graph: PositionGraph, caches: ArchCaches, config: ShawConfig):
        self.graph = graph
        self.caches = caches
        self.config = config
        self.costs = caches.costs
        self.counters = ShawCounters()
        self.use_profiles = config.flag("profile_cache")
        self.use_sets = config.flag("scoring_set_cache")
        self.use_memo = config.flag("score_memo")
        self.use_pruning = config.flag("prune_traps")
        self._sets: dict[tuple[int, int, int, int], LocalScoringSet] = {}
        self.max_depth = max(1, caches.hop_diameter)
        caps = [t.capacity for t in graph.traps if t.executable]
        self.initial_depth = max(1, max(caps, default=1) - 1)
        self.on_episode_start: Callable[[EpisodeCaches], None] | None = None
        self.placement: Placement | None = None
        self.ops: list[Op] = []

    # -- static queries ----------------------------------------------------------

    def profile(self, s: int, t: int) -> BlockageProfile:
        if self.use_profiles:
            before = self.caches.counters.profile_hits
            prof = self.caches.blockage_profile(s, t)
            if self.caches.counters.profile_hits > before:
                self.counters.profile_hits += 1
            else:
                self.counters.profile_builds += 1
            return prof
        self.counters.profile_builds += 1
        return build_profile(self.graph, self.costs, self.caches.path(s, t))

    def local_scoring_set(self, p: int, t: int, b: int, d: int) -> LocalScoringSet:
        key = (p, t, b, d)
        if self.use_sets:
            hit = self._sets.get(key)
            if hit is not None:
                self.counters.scoring_set_hits += 1
                return hit
        self.counters.scoring_set_misses += 1
        hop = {p: 0}
        q = deque([p])
        adj = self.graph.move_adj
        while q:
            u = q.popleft()
            if hop[u] == d:
                continue
            for v in adj[u]:
                if v not in hop:
                    hop[v] = hop[u] + 1
                    q.append(v)
        members = tuple(sorted(x for x in hop if x not in (p, t, b)))
        s = LocalScoringSet(key, members, tuple(hop[x] for x in members))
        if self.use_sets:
            self._sets[key] = s
        return s

    # -- placement-dependent scores ------------------------------------------------

    def congestion_score(self, p: int, t: int, b: int, d: int,
                         episode: EpisodeCaches) -> CongestionScore:
        sset = self.local_scoring_set(p, t, b, d)
        inv = self.placement.inverse
        if self.use_memo:
            sigma = occupancy_signature(p, sset.members, self.placement)
            key = (p, t, b, d, sigma)
            hit = episode.scores.get(key)
            if hit is not None:
                self.counters.score_cache_hits += 1
                return hit
        self.counters.score_cache_misses += 1
        occ = 0
        weighted = 0.0
        for m, h in zip(sset.members, sset.hops):
            if inv[m] != -1:
                occ += 1
                weighted += 1.0 / (1 + h)
        score = CongestionScore(occ / len(sset.members) if sset.members else 0.0, weighted)
        if self.use_memo:
            episode.scores[key] = score
        return score

    def path_penalty(self, s: int, t: int, ignore: int = -1) -> float:
        """Clearing penalties for currently occupied blockable positions on s -> t."""
        if s == t:
            return 0.0
        prof = self.profile(s, t)
        inv = self.placement.inverse
        total = 0.0
        for x, pen in zip(prof.path, prof.penalties):
            if pen and inv[x] != -1 and inv[x] != ignore:
                total += pen
        occ = inv[t]
        if prof.target_penalty and occ != -1 and occ != ignore:
            total += prof.target_penalty
        return total

    def _gate_cost(self, ops: Sequence[int], moved: int = -1, to: int = -1) -> float:
        fwd = self.placement.forward
        pos = [to if q == moved else fwd[q] for q in ops]
        dist = self.caches.dist
        total = 0.0
        for i in range(len(pos)):
            for j in range(i + 1, len(pos)):
                total += dist[pos[i]][pos[j]]
        return total

    def score_move(self, src: int, dst: int, front: Sequence[Sequence[int]],
                   lookahead: Sequence[Sequence[int]]) -> float:
        """Front/lookahead distance change of moving the ion at ``src`` plus path penalties."""
        ion = self.placement.inverse[src]
        wf = 1.0 / len(front) if front else 0.0
        we = self.config.extended_weight / len(lookahead) if lookahead else 0.0
        delta = 0.0
        for w, group in ((wf, front), (we, lookahead)):
            for ops in group:
                if ion in ops:
                    delta += w * (self._gate_cost(ops, ion, dst) - self._gate_cost(ops))
        return delta + self.path_penalty(src, dst, ignore=ion)

    # -- trap selection --------------------------------------------------------------

    def _bonus(self, trap) -> float:
        inv = self.placement.inverse
        free = sum(1 for p in trap.slots if inv[p] == -1)
        return free * self.costs.swap / trap.capacity

    def lower_bound(self, gate: Gate, trap) -> float:
        fwd = self.placement.forward
        nt = self.caches.nearest_trap
        return sum(nt[fwd[q]][trap.id] for q in gate.operands)

    def exact_score(self, gate: Gate, trap) -> tuple[float, tuple[int, ...]]:
        """Cheapest assignment of operands to distinct slots: distance + penalties."""
        fwd = self.placement.forward
        dist = self.caches.dist
        cost: list[dict[int, float]] = []
        for q in gate.operands:
            src = fwd[q]
            row = {}
            for s in trap.slots:
                row[s] = 0.0 if s == src else dist[src][s] + self.path_penalty(src, s, ignore=q)
            cost.append(row)
        best = None
        for assign in itertools.permutations(trap.slots, len(gate.operands)):
            total = 0.0
            for i, s in enumerate(assign):
                total += cost[i][s]
            if best is None or total < best[0]:
                best = (total, assign)
        return best

    def trap_candidates(self, gate: Gate, exclude: set[int]) -> list:
        return [t for t in self.graph.traps
                if t.executable and t.capacity >= gate.arity and t.id not in exclude]

    def select_target_trap(self, gate: Gate, exclude: set[int] | None = None,
                           prune: bool | None = None) -> TrapScore:
        exclude = exclude or set()
        prune = self.use_pruning if prune is None else prune
        self.counters.trap_selections += 1
        cands = self.trap_candidates(gate, exclude)
        if not cands:
            raise InfeasibleRouting("infeasible: no multi-slot executable trap")
        best: TrapScore | None = None
        if prune:
            scored = []
            for t in cands:
                bonus = self._bonus(t)
                scored.append((self.lower_bound(gate, t) - bonus, t.id, t, bonus))
            scored.sort(key=lambda x: (x[0], x[1]))
            for i, (lb, _, t, bonus) in enumerate(scored):
                if best is not None and lb > best.adjusted_exact:
                    self.counters.traps_pruned += len(scored) - i
                    break
                ex, assign = self.exact_score(gate, t)
                self.counters.traps_exact_scored += 1
                cand = TrapScore(t.id, lb + bonus, bonus, ex, assign)
                if best is None or (cand.adjusted_exact, t.id) < (best.adjusted_exact, best.trap):
                    best = cand
        else:
            for t in cands:
                bonus = self._bonus(t)
                ex, assign = self.exact_score(gate, t)
                self.counters.traps_exact_scored += 1
                cand = TrapScore(t.id, float("nan"), bonus, ex, assign)
                if best is None or (cand.adjusted_exact, t.id) < (best.adjusted_exact, best.trap):
                    best = cand
        return best

    # -- state transitions ---------------------------------------------------------

    def _step(self, a: int, b: int) -> None:
        """Move the ion at ``a`` to ``b`` (exchange on swap edges) and record it."""
        pl = self.placement
        caps = self.graph.capability(a, b)
        qa, qb = pl.inverse[a], pl.inverse[b]
        if EdgeCapability.SWAP in caps:
            ions = tuple(q for q in (qa, qb) if q != -1)
            self.ops.append(Op("swap", (a, b), ions))
            pl.inverse[a], pl.inverse[b] = qb, qa
            if qa != -1:
                pl.forward[qa] = b
            if qb != -1:
                pl.forward[qb] = a
            return
        if qb != -1:
            raise AssertionError(f"step into occupied position {b}")
        if EdgeCapability.MOVE in caps:
            kind = "move"
        elif EdgeCapability.MERGE_SPLIT in caps:
            kind = "split" if self.graph.positions[a].kind == "slot" else "merge"
        else:
            raise AssertionError(f"({a}, {b}) is not a movement edge")
        self.ops.append(Op(kind, (a, b), (qa,)))
        pl.inverse[a] = -1
        pl.inverse[b] = qa
        pl.forward[qa] = b

    # -- congestion resolution -----------------------------------------------------

    def resolve_congestion(self, ion: int, path: Sequence[int], pinned: set[int],
                           depth: int | None = None) -> list[tuple[int, int]] | None:
        """Clearing moves that vacate ``path[1]`` for ``ion`` at ``path[0]``.

        Returns the moves in execution order (each into an empty position) or
        ``None`` when the blockage cannot be cleared within the depth bound.
        The placement is not modified.
        """
        depth = self.initial_depth if depth is None else depth
        self.counters.congestion_episodes += 1
        episode = EpisodeCaches()
        if self.on_episode_start is not None:
            self.on_episode_start(episode)
        inv = self.placement.inverse
        blocked_at = path[1]
        # behind and at the blockage is off limits; ahead is a last resort
        behind = set(path[:2])
        ahead = list(path[2:])
        ahead_set = set(ahead)
        positions = self.graph.positions
        visited: set[int] = set()

        def clear(b: int, t: int, d: int) -> list[tuple[int, int]] | None:
            visited.add(b)
            # a pinned ion may shift inside its trap but never leave it
            home = positions[b].trap if inv[b] in pinned else None
            near, far = [], []
            for c in self.graph.move_adj[b]:
                if c in behind or c in visited:
                    continue
                if home is not None and positions[c].trap != home:
                    continue
                (far if c in ahead_set else near).append(c)

            def key(c):
                s = self.congestion_score(c, t, b, d, episode)
                return (s.fraction, s.weighted, c)

            near.sort(key=key)
            far.sort(key=key)
            ordered = near + far
            for c in ordered:
                if inv[c] == -1:
                    return [(b, c)]
            if d >= self.max_depth:
                return None
            for c in ordered:
                if c in visited:
                    continue
                sub = clear(c, b, d + 1)
                if sub is not None:
                    return sub + [(b, c)]
            return None

        return clear(blocked_at, path[0], depth)

    def _escape(self, ion: int, path: Sequence[int], pinned: set[int],
                last: int) -> int | None:
        """Free neighbour the travelling ion may step aside to, or None."""
        here = path[0]
        on_path = set(path)
        protected = {self.placement.forward[q] for q in pinned}
        episode = EpisodeCaches()
        cands = [c for c in self.graph.move_adj[here]
                 if c not in on_path and c != last and c not in protected
                 and self.placement.inverse[c] == -1]
        if not cands:
            return None
        d = self.initial_depth

        def key(c):
            s = self.congestion_score(c, path[-1], here, d, episode)
            return (s.fraction, s.weighted, c)

        return min(cands, key=key)

    def _vacate(self, start: int, forbidden: set[int]) -> list[tuple[int, int]] | None:
        """Chain of moves emptying ``start`` toward the nearest free position.

        The search never enters ``forbidden``; ties go to lower position ids.
        """
        inv = self.placement.inverse
        if inv[start] == -1:
            return []
        prev = {start: -1}
        q = deque([start])
        while q:
            u = q.popleft()
            for v in self.graph.move_adj[u]:
                if v in prev or v in forbidden:
                    continue
                prev[v] = u
                if inv[v] == -1:
                    chain = []
                    while prev[v] != -1:
                        chain.append((prev[v], v))
                        v = prev[v]
                    return chain
                q.append(v)
        return None

    def _evict(self, path: Sequence[int], pinned: set[int]) -> list[tuple[int, int]] | None:
        """Vacate trap slot ``path[1]`` by permuting its trap.

        If the trap has a hole it is bubbled to the blocked slot; otherwise a
        non-pinned ion is swapped to an end slot and split into a free segment
        off the path first.  Pinned ions are swapped around but stay inside.
        """
        b = path[1]
        info = self.graph.positions[b]
        if info.kind != "slot":
            return None
        slots = self.graph.traps[info.trap].slots
        inv = self.placement.inverse
        bi = slots.index(b)
        holes = [i for i, p in enumerate(slots) if inv[p] == -1]
        moves: list[tuple[int, int]] = []
        if holes:
            h = min(holes, key=lambda i: (abs(i - bi), i))
        else:
            forbidden = set(path) | set(slots)
            forbidden.update(self.placement.forward[q] for q in pinned)
            best = None
            for e in sorted({0, len(slots) - 1}):
                for seg in self.graph.move_adj[slots[e]]:
                    if seg in forbidden:
                        continue
                    chain = self._vacate(seg, forbidden)
                    if chain is None:
                        continue
                    for i, p in enumerate(slots):
                        if inv[p] in pinned:
                            continue
                        key = (len(chain) + abs(i - e), e, seg, i, chain)
                        if best is None or key < best:
                            best = key
            if best is None:
                return None
            _, e, seg, i, chain = best
            moves.extend(chain)
            step = 1 if e > i else -1
            for k in range(i, e, step):
                moves.append((slots[k], slots[k + step]))
            moves.append((slots[e], seg))
            h = e
        step = 1 if bi > h else -1
        for k in range(h, bi, step):
            moves.append((slots[k + step], slots[k]))
        return moves

    def _dynamic_path(self, src: int, target_trap: int, pinned: set[int]) -> list[int] | None:
        """Shortest path into ``target_trap`` avoiding currently blocked positions."""
        import heapq

        inv = self.placement.inverse
        graph = self.graph
        protected = {self.placement.forward[q] for q in pinned}
        dist = {src: 0.0}
        prev: dict[int, int] = {}
        heap = [(0.0, src)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u]:
                continue
            if graph.positions[u].trap == target_trap:
                out = [u]
                while out[-1] != src:
                    out.append(prev[out[-1]])
                return out[::-1]
            for v in graph.move_adj[u]:
                caps = graph.capability(u, v)
                if inv[v] != -1 and (EdgeCapability.SWAP not in caps or v in protected):
                    continue
                nd = d + graph.edge_cost(u, v, self.costs)
                if nd < dist.get(v, float("inf")) or (nd == dist[v] and u < prev.get(v, u)):
                    dist[v] = nd
                    prev[v] = u
                    heapq.heappush(heap, (nd, v))
        return None

    def route_ion(self, ion: int, target: int, pinned: set[int]) -> None:
        """Bring ``ion`` into the trap holding slot ``target``; raises _RouteFailed."""
        graph = self.graph
        pl = self.placement
        trap = graph.positions[target].trap
        limit = self.config.route_step_factor * graph.num_positions
        steps = 0
        last = -1
        dynamic: list[int] | None = None
        while graph.positions[pl.forward[ion]].trap != trap:
            steps += 1
            if steps > limit:
                raise _RouteFailed(f"ion {ion} did not reach trap {trap}")
            here = pl.forward[ion]
            if dynamic is not None and dynamic and dynamic[0] == here:
                path = dynamic
            else:
                dynamic = None
                path = self.caches.path(here, target)
            nxt = path[1]
            caps = graph.capability(here, nxt)
            if pl.inverse[nxt] == -1 or EdgeCapability.SWAP in caps:
                if pl.inverse[nxt] in pinned:
                    raise _RouteFailed("path runs through a pinned ion")
                self._step(here, nxt)
                if dynamic is not None:
                    dynamic = dynamic[1:]
                last = here
                continue
            moves = self.resolve_congestion(ion, path, pinned)
            if moves is not None:
                for a, b in moves:
                    self._step(a, b)
                self.counters.clearing_moves += len(moves)
                continue
            moves = self._evict(path, pinned)
            if moves:
                for a, b in moves:
                    self._step(a, b)
                self.counters.evictions += 1
                continue
            if dynamic is None:
                alt = self._dynamic_path(here, trap, pinned)
                if alt is not None and len(alt) > 1:
                    self.counters.fallback_paths += 1
                    dynamic = alt
                    continue
            esc = self._escape(ion, path, pinned, last)
            if esc is None:
                raise _RouteFailed(f"ion {ion} stuck at {here}")
            self.counters.escapes += 1
            self._step(here, esc)
            dynamic = None
            last = here

    # -- main loop -----------------------------------------------------------------

    def _executable(self, gate: Gate) -> bool:
        self.counters.can_execute_calls += 1
        if gate.arity == 1:
            return True
        fwd = self.placement.forward
        return positions_executable([fwd[q] for q in gate.operands], self.caches.exec_adj)

    def route(self, dag: CircuitDag, placement: Placement) -> list[Op]:
        graph = self.graph
        check_feasible(dag, graph)
        for q, p in enumerate(placement.forward):
            if p == -1 or graph.positions[p].kind != "slot":
                raise InfeasibleRouting(f"qudit {q} is not placed in a trap slot")
        self.placement = placement
        self.ops = []
        gates = dag.gates
        cursor = DagCursor(dag)
        stall = 0
        while True:
            progressed = True
            while progressed:
                progressed = False
                for gid in sorted(cursor.front):
                    g = gates[gid]
                    if self._executable(g):
                        fwd = placement.forward
                        self.ops.append(Op("gate", tuple(fwd[q] for q in g.operands),
                                           g.operands, gid))
                        cursor.execute(gid)
                        progressed = True
                        stall = 0
            if cursor.done:
                break
            stall += 1
            if stall > 3:
                raise InfeasibleRouting("infeasible: routing made no progress")
            self._route_step(dag, cursor)
        return self.ops

    def _route_step(self, dag: CircuitDag, cursor: DagCursor) -> None:
        gates = dag.gates
        front_ids = sorted(cursor.front)
        la_ids = lookahead_set(dag, cursor.executed, cursor.front,
                               self.config.lookahead_size, multi_only=True)
        front_ops = [gates[i].operands for i in front_ids]
        la_ops = [gates[i].operands for i in la_ids]
        fwd = self.placement.forward
        best = None
        for gid in front_ids:
            g = gates[gid]
            choice = self.select_target_trap(g)
            for q, s in zip(g.operands, choice.assignment):
                if self.graph.positions[fwd[q]].trap == choice.trap:
                    continue
                sc = self.score_move(fwd[q], s, front_ops, la_ops)
                key = (sc, gid, fwd[q], s)
                if best is None or key < best[0]:
                    best = (key, g, choice)
        _, gate, choice = best
        self._route_gate(gate, choice, front_ops, la_ops)

    def _route_gate(self, gate: Gate, choice: TrapScore, front_ops, la_ops) -> None:
        failed: set[int] = set()
        while True:
            try:
                self._move_into(gate, choice, front_ops, la_ops)
                return
            except _RouteFailed:
                failed.add(choice.trap)
                self.counters.trap_retries += 1
                try:
                    choice = self.select_target_trap(gate, failed)
                except InfeasibleRouting:
                    raise InfeasibleRouting(
                        f"infeasible: gate {gate.id} could not be routed into any trap"
                    ) from None

    def _move_into(self, gate: Gate, choice: TrapScore, front_ops, la_ops) -> None:
        graph = self.graph
        pl = self.placement
        movers = []
        pinned = set()
        for q, s in zip(gate.operands, choice.assignment):
            if graph.positions[pl.forward[q]].trap == choice.trap:
                pinned.add(q)
            else:
                movers.append((self.score_move(pl.forward[q], s, front_ops, la_ops),
                               pl.forward[q], q, s))
        movers.sort()
        for _, _, q, s in movers:
            self.route_ion(q, s, pinned)
            pinned.add(q)


def route_shuttle(
    dag: CircuitDag,
    graph: PositionGraph,
    caches: ArchCaches,
    placement: Placement,
    config: ShawConfig,
) -> tuple[Schedule, ShawCounters]:
    """Route ``dag`` on a QCCD position graph and time the resulting ops."""
    router = ShawRouter(graph, caches, config)
    start = placement.as_list()
    ops = router.route(dag, placement.copy())
    return assign_times(ops, caches.costs, initial=start), router.counters


def compile_shuttle(
    dag: CircuitDag,
    graph: PositionGraph,
    caches: ArchCaches,
    config: ShawConfig,
) -> tuple[Schedule, ShawCounters]:
    """Feasibility check, seeded initial placement, then :func:`route_shuttle`."""
    check_feasible(dag, graph)
    placement = seeded_trap_placement(graph, dag.num_qudits, config.rng_seed)
    return route_shuttle(dag, graph, caches, placement, config)
