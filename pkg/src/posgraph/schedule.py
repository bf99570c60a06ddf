"""Operation durations and ASAP timing of shuttle/gate operation lists."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Iterable, Sequence

__all__ = [
    "OperationDurations",
    "Op",
    "TimedOp",
    "Schedule",
    "OP_KINDS",
    "assign_times",
    "total_operation_time",
    "serial_time",
]

OP_KINDS = ("move", "split", "merge", "swap", "gate")


@dataclass(frozen=True)
class OperationDurations:
    """Per-operation durations in microseconds.

    Defaults are round figures in the range used by QCCD simulators
    (split/merge ~80 us, segment move ~5 us, two-qudit gate ~100 us).
    """

    move: float = 5.0
    split: float = 80.0
    merge: float = 80.0
    swap: float = 40.0
    gate1: float = 5.0
    gate2: float = 100.0

    def __post_init__(self):
        for f in fields(self):
            v = getattr(self, f.name)
            if not (isinstance(v, (int, float)) and v > 0):
                raise ValueError(f"duration {f.name!r} must be > 0, got {v!r}")

    @classmethod
    def unit(cls) -> "OperationDurations":
        return cls(1.0, 1.0, 1.0, 1.0, 1.0, 1.0)

    @classmethod
    def from_mapping(cls, data: dict) -> "OperationDurations":
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown duration keys: {sorted(extra)}")
        return cls(**{k: float(v) for k, v in data.items()})

    @classmethod
    def load(cls, path: str | Path) -> "OperationDurations":
        return cls.from_mapping(json.loads(Path(path).read_text()))

    def to_dict(self) -> dict[str, float]:
        return asdict(self)

    @property
    def merge_split(self) -> float:
        # undirected edge cost; split and merge may differ
        return (self.split + self.merge) / 2

    @property
    def clearing_penalty(self) -> float:
        """Fixed cost charged for clearing one blocked position."""
        return self.split + self.merge

    def of(self, kind: str, arity: int = 1) -> float:
        if kind == "gate":
            return self.gate1 if arity <= 1 else self.gate2
        if kind not in OP_KINDS:
            raise ValueError(f"unknown op kind {kind!r}")
        return getattr(self, kind)


@dataclass(frozen=True)
class Op:
    """One routing operation.  ``ions`` are logical qudit ids."""

    kind: str
    positions: tuple[int, ...]
    ions: tuple[int, ...]
    gate: int | None = None

    def to_dict(self) -> dict:
        d = {"kind": self.kind, "positions": list(self.positions), "ions": list(self.ions)}
        if self.gate is not None:
            d["gate"] = self.gate
        return d


@dataclass(frozen=True)
class TimedOp:
    op: Op
    start: float
    duration: float

    @property
    def end(self) -> float:
        return self.start + self.duration

    def to_dict(self) -> dict:
        d = self.op.to_dict()
        d["start"] = self.start
        d["duration"] = self.duration
        return d


@dataclass
class Schedule:
    ops: list[TimedOp] = field(default_factory=list)
    initial_placement: list[int] = field(default_factory=list)

    @property
    def total_operation_time(self) -> float:
        return max((t.end for t in self.ops), default=0.0)

    @property
    def serial_time(self) -> float:
        return sum(t.duration for t in self.ops)

    def op_counts(self) -> dict[str, int]:
        counts = {k: 0 for k in OP_KINDS}
        for t in self.ops:
            counts[t.op.kind] += 1
        return counts


def _validate_ops(ops: Sequence[Op]) -> None:
    for i, op in enumerate(ops):
        if op.kind not in OP_KINDS:
            raise ValueError(f"op {i}: unknown kind {op.kind!r}")
        if not op.positions:
            raise ValueError(f"op {i}: no positions")
        if op.kind in ("move", "split", "merge", "swap") and len(op.positions) != 2:
            raise ValueError(f"op {i}: {op.kind} needs exactly two positions")
        if op.kind == "gate" and len(op.ions) != len(op.positions):
            raise ValueError(f"op {i}: gate ions/positions mismatch")


def assign_times(
    ops: Iterable[Op],
    durations: OperationDurations,
    graph=None,
    initial: Sequence[int] | None = None,
) -> Schedule:
    """ASAP-schedule ``ops`` in sequence order under ion/position conflicts.

    Every ion and position is a resource; an op starts once all of its
    resources are released by earlier ops.  When ``graph`` and ``initial`` are
    given the list is replay-checked first and an illegal list raises
    ``ValueError``.
    """
    ops = list(ops)
    _validate_ops(ops)
    if graph is not None and initial is not None:
        from .replay import replay_ops

        result = replay_ops(graph, initial, ops)
        if not result.ok:
            raise ValueError(f"illegal op list: {result.message}")
    ready: dict[tuple[str, int], float] = {}
    timed: list[TimedOp] = []
    for op in ops:
        res = [("i", q) for q in op.ions] + [("p", p) for p in op.positions]
        start = max((ready.get(r, 0.0) for r in res), default=0.0)
        dur = durations.of(op.kind, len(op.ions))
        for r in res:
            ready[r] = start + dur
        timed.append(TimedOp(op, start, dur))
    return Schedule(timed, list(initial) if initial is not None else [])


def total_operation_time(schedule: Schedule) -> float:
    """Makespan of ``schedule`` in microseconds."""
    return schedule.total_operation_time


def serial_time(schedule: Schedule) -> float:
    return schedule.serial_time
