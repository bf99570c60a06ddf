"""Independent legality checker for emitted op lists.

The replay only looks at the architecture and the ops; it shares no state with
the routers, so it is usable as an oracle for them.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .circuit_ir import CircuitDag
from .position_graph import EdgeCapability, PositionGraph, positions_executable
from .schedule import Op

__all__ = ["ReplayResult", "replay_ops"]


@dataclass
class ReplayResult:
    ok: bool
    message: str = ""
    index: int | None = None
    final_placement: list[int] = field(default_factory=list)
    gates_executed: int = 0


def replay_ops(
    graph: PositionGraph,
    initial: Sequence[int],
    ops: Sequence[Op],
    dag: CircuitDag | None = None,
) -> ReplayResult:
    """Apply ``ops`` from ``initial`` and report the first illegal one.

    Checks edge capabilities, occupancy, ion bookkeeping and gate
    executability.  With ``dag`` given, gates must also respect dependencies,
    match their operands and all appear exactly once.
    """
    fwd = list(initial)
    inv = [-1] * graph.num_positions
    for q, p in enumerate(fwd):
        if not 0 <= p < graph.num_positions:
            return ReplayResult(False, f"qudit {q} starts at invalid position {p}", None)
        if inv[p] != -1:
            return ReplayResult(False, f"qudits {inv[p]} and {q} share position {p}", None)
        inv[p] = q

    done = set()
    for i, op in enumerate(ops):
        def fail(msg: str) -> ReplayResult:
            return ReplayResult(False, f"op {i} ({op.kind}): {msg}", i, fwd, len(done))

        if op.kind == "gate":
            if len(op.ions) != len(op.positions):
                return fail("ions/positions length mismatch")
            for q, p in zip(op.ions, op.positions):
                if not 0 <= q < len(fwd) or fwd[q] != p:
                    return fail(f"qudit {q} is not at position {p}")
            if len(op.positions) > 1 and not positions_executable(op.positions, graph.exec_adj):
                return fail(f"positions {op.positions} cannot execute together")
            if dag is not None:
                g = op.gate
                if g is None or not 0 <= g < len(dag.gates):
                    return fail(f"unknown gate id {g}")
                if g in done:
                    return fail(f"gate {g} executed twice")
                if tuple(op.ions) != dag.gates[g].operands:
                    return fail(f"gate {g} operands {op.ions} != {dag.gates[g].operands}")
                missing = [p for p in dag.preds[g] if p not in done]
                if missing:
                    return fail(f"gate {g} runs before predecessor {missing[0]}")
            done.add(op.gate)
            continue

        if len(op.positions) != 2:
            return fail("needs two positions")
        a, b = op.positions
        if not (0 <= a < graph.num_positions and 0 <= b < graph.num_positions):
            return fail("position out of range")
        caps = graph.capability(a, b)
        qa, qb = inv[a], inv[b]
        if op.kind == "swap":
            if EdgeCapability.SWAP not in caps:
                return fail(f"({a}, {b}) has no swap capability")
            if sorted(op.ions) != sorted(q for q in (qa, qb) if q != -1):
                return fail(f"ions {op.ions} do not match occupants")
            inv[a], inv[b] = qb, qa
            if qa != -1:
                fwd[qa] = b
            if qb != -1:
                fwd[qb] = a
            continue

        need = {
            "move": EdgeCapability.MOVE,
            "split": EdgeCapability.MERGE_SPLIT,
            "merge": EdgeCapability.MERGE_SPLIT,
        }.get(op.kind)
        if need is None:
            return fail("unknown op kind")
        if need not in caps:
            return fail(f"({a}, {b}) lacks {op.kind} capability")
        if op.kind == "split" and graph.positions[a].kind != "slot":
            return fail("split must leave a trap slot")
        if op.kind == "merge" and graph.positions[b].kind != "slot":
            return fail("merge must enter a trap slot")
        if qa == -1:
            return fail(f"no ion at {a}")
        if tuple(op.ions) != (qa,):
            return fail(f"ions {op.ions} do not match occupant {qa}")
        if qb != -1:
            return fail(f"destination {b} is occupied by {qb}")
        inv[a], inv[b] = -1, qa
        fwd[qa] = b

    if dag is not None and len(done) != len(dag.gates):
        missing = min(set(range(len(dag.gates))) - done)
        return ReplayResult(False, f"gate {missing} never executed", len(ops), fwd, len(done))
    return ReplayResult(True, "", None, fwd, len(done))
