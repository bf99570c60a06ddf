from __future__ import annotations

import json
import random

import pytest

from posgraph.qccd_builder import GridSpec, build_grid
from posgraph.schedule import (
    Op,
    OperationDurations,
    Schedule,
    assign_times,
    serial_time,
    total_operation_time,
)

D = OperationDurations()


def resources(op):
    return {("i", q) for q in op.ions} | {("p", p) for p in op.positions}


def oracle_starts(ops, d):
    """Longest path through the conflict order: op j precedes i if j < i and they share a resource."""
    ends = []
    starts = []
    for i, op in enumerate(ops):
        s = max((ends[j] for j in range(i) if resources(ops[j]) & resources(op)), default=0.0)
        starts.append(s)
        ends.append(s + d.of(op.kind, len(op.ions)))
    return starts


def random_ops(rng, n):
    ops = []
    for _ in range(n):
        kind = rng.choice(("move", "split", "merge", "swap", "gate"))
        if kind == "gate":
            k = rng.choice((1, 2))
            ions = tuple(rng.sample(range(6), k))
            ops.append(Op(kind, tuple(rng.sample(range(12), k)), ions))
        else:
            ops.append(Op(kind, tuple(rng.sample(range(12), 2)), (rng.randrange(6),)))
    return ops


def test_empty_schedule():
    s = assign_times([], D)
    assert total_operation_time(s) == 0.0 and serial_time(s) == 0.0


def test_same_ion_serializes():
    ops = [Op("move", (0, 1), (0,)), Op("move", (1, 2), (0,))]
    assert total_operation_time(assign_times(ops, D)) == 2 * D.move


def test_disjoint_ops_overlap():
    ops = [Op("move", (0, 1), (0,)), Op("move", (2, 3), (1,))]
    s = assign_times(ops, D)
    assert total_operation_time(s) == D.move
    assert [t.start for t in s.ops] == oracle_starts(ops, D)


def test_shared_position_serializes():
    ops = [Op("move", (0, 1), (0,)), Op("move", (2, 1), (1,))]
    assert total_operation_time(assign_times(ops, D)) == 2 * D.move


def test_two_op_brute_force():
    rng = random.Random(0)
    for _ in range(500):
        a, b = random_ops(rng, 2)
        da, db = D.of(a.kind, len(a.ions)), D.of(b.kind, len(b.ions))
        want = da + db if resources(a) & resources(b) else max(da, db)
        assert total_operation_time(assign_times([a, b], D)) == want


@pytest.mark.parametrize("seed", range(10))
def test_matches_conflict_order_oracle(seed):
    rng = random.Random(seed)
    ops = random_ops(rng, 50)
    s = assign_times(ops, D)
    assert [t.start for t in s.ops] == pytest.approx(oracle_starts(ops, D))


@pytest.mark.parametrize("seed", range(10))
def test_schedule_invariants(seed):
    rng = random.Random(100 + seed)
    ops = random_ops(rng, 50)
    s = assign_times(ops, D)
    # sweep over start/end events: no resource is held by two ops at once
    events = []
    for i, t in enumerate(s.ops):
        events.append((t.start, 1, i))
        events.append((t.end, 0, i))
    events.sort()
    held: dict = {}
    for _, is_start, i in events:
        for r in resources(s.ops[i].op):
            if is_start:
                assert r not in held, f"resource {r} double-booked"
                held[r] = i
            else:
                held.pop(r, None)
    assert all(t.start >= 0 for t in s.ops)
    assert s.total_operation_time == max(t.end for t in s.ops)
    assert s.serial_time == pytest.approx(sum(t.duration for t in s.ops))
    assert s.total_operation_time <= s.serial_time + 1e-9
    # program order is kept among ops on one resource
    for i in range(len(ops)):
        for j in range(i):
            if resources(ops[i]) & resources(ops[j]):
                assert s.ops[j].end <= s.ops[i].start + 1e-9


def test_gate_durations_by_arity():
    s = assign_times([Op("gate", (0,), (0,)), Op("gate", (1, 2), (1, 2))], D)
    assert [t.duration for t in s.ops] == [D.gate1, D.gate2]


def test_op_counts():
    s = assign_times([Op("swap", (0, 1), (0,)), Op("gate", (1,), (0,))], D)
    assert s.op_counts() == {"move": 0, "split": 0, "merge": 0, "swap": 1, "gate": 1}


def test_malformed_ops_rejected():
    with pytest.raises(ValueError):
        assign_times([Op("teleport", (0, 1), (0,))], D)
    with pytest.raises(ValueError):
        assign_times([Op("move", (0,), (0,))], D)
    with pytest.raises(ValueError):
        assign_times([Op("gate", (0, 1), (0,))], D)


def test_replay_check_when_graph_given():
    g = build_grid(GridSpec(1, 2, 2))
    with pytest.raises(ValueError, match="illegal"):
        assign_times([Op("move", (0, 2), (0,))], D, graph=g, initial=[0])
    s = assign_times([Op("split", (1, 4), (0,))], D, graph=g, initial=[1])
    assert s.initial_placement == [1]


def test_durations_validation(tmp_path):
    with pytest.raises(ValueError):
        OperationDurations(move=-1)
    with pytest.raises(ValueError):
        OperationDurations.from_mapping({"warp": 1})
    f = tmp_path / "d.json"
    f.write_text(json.dumps({"move": 2, "gate2": 50}))
    d = OperationDurations.load(f)
    assert (d.move, d.gate2, d.split) == (2.0, 50.0, 80.0)
    assert OperationDurations.from_mapping(d.to_dict()) == d
    assert d.merge_split == (d.split + d.merge) / 2
    assert d.clearing_penalty == d.split + d.merge
    assert isinstance(Schedule().ops, list)
