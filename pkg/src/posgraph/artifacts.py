"""JSON artifacts: compiled circuits, schedules and run reports.

Artifacts hold only deterministic content.  The router id and wall-clock live
in the :class:`RunReport`, so artifacts from equivalent routers can be
compared byte for byte.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any

from .sabre import CompiledCircuit
from .schedule import Op, Schedule

__all__ = [
    "SCHEDULE_FORMAT",
    "COMPILED_FORMAT",
    "REPORT_FORMAT",
    "RunReport",
    "circuit_digest",
    "schedule_to_dict",
    "compiled_to_dict",
    "ops_from_dict",
    "dumps",
    "write_json",
    "load_json",
]

SCHEDULE_FORMAT = "posgraph.schedule"
COMPILED_FORMAT = "posgraph.compiled"
REPORT_FORMAT = "posgraph.run_report"
VERSION = 1


def circuit_digest(text: str) -> str:
    return "sha256:" + hashlib.sha256(text.encode()).hexdigest()


def _header(fmt: str, arch: str, digest: str, num_qudits: int, seed: int) -> dict:
    return {
        "format": fmt,
        "version": VERSION,
        "arch": arch,
        "circuit_digest": digest,
        "num_qudits": num_qudits,
        "seed": seed,
    }


def schedule_to_dict(schedule: Schedule, *, arch: str, digest: str, num_qudits: int,
                     seed: int) -> dict:
    d = _header(SCHEDULE_FORMAT, arch, digest, num_qudits, seed)
    d["initial_placement"] = list(schedule.initial_placement)
    d["ops"] = [t.to_dict() for t in schedule.ops]
    d["total_operation_time"] = schedule.total_operation_time
    d["serial_time"] = schedule.serial_time
    d["op_counts"] = schedule.op_counts()
    return d


def compiled_to_dict(cc: CompiledCircuit, *, arch: str, digest: str, num_qudits: int,
                     seed: int, passes: int) -> dict:
    d = _header(COMPILED_FORMAT, arch, digest, num_qudits, seed)
    d["layout_passes"] = passes
    d["initial_placement"] = list(cc.initial_placement)
    d["final_placement"] = list(cc.final_placement)
    d["ops"] = [op.to_dict() for op in cc.ops]
    d["swap_count"] = cc.swap_count
    return d


def ops_from_dict(data: dict) -> list[Op]:
    """Op list of a schedule or compiled-circuit artifact (times dropped)."""
    ops = []
    for i, o in enumerate(data["ops"]):
        try:
            ops.append(Op(o["kind"], tuple(o["positions"]), tuple(o["ions"]), o.get("gate")))
        except (KeyError, TypeError) as exc:
            raise ValueError(f"op {i}: malformed ({exc})") from None
    return ops


@dataclass
class RunReport:
    circuit: str
    circuit_digest: str
    arch: str
    router: str
    seed: int
    passes: int
    status: str = "ok"
    message: str = ""
    wall_clock_s: float = 0.0
    num_qudits: int = 0
    total_ions: int = 0
    op_counts: dict[str, int] = field(default_factory=dict)
    operation_time: float = 0.0
    serial_time: float = 0.0
    swap_count: int = 0
    counters: dict[str, int] = field(default_factory=dict)
    artifact: str | None = None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["format"] = REPORT_FORMAT
        d["version"] = VERSION
        return d

    def deterministic_dict(self) -> dict:
        d = self.to_dict()
        d.pop("wall_clock_s")
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "RunReport":
        data = {k: v for k, v in data.items() if k not in ("format", "version")}
        return cls(**data)


def dumps(obj: Any) -> str:
    """Stable JSON: sorted keys, one list-of-object element per line."""

    def enc(v, indent):
        pad = " " * indent
        if isinstance(v, dict):
            if not v:
                return "{}"
            items = [f'{pad}  {json.dumps(k)}: {enc(v[k], indent + 2)}' for k in sorted(v)]
            return "{\n" + ",\n".join(items) + "\n" + pad + "}"
        if isinstance(v, list) and v and all(isinstance(x, dict) for x in v):
            rows = [pad + "  " + json.dumps(x, sort_keys=True, separators=(",", ":")) for x in v]
            return "[\n" + ",\n".join(rows) + "\n" + pad + "]"
        return json.dumps(v, sort_keys=True, separators=(",", ":"))

    return enc(obj, 0) + "\n"


def write_json(path: str | Path, obj: Any) -> None:
    """Atomic write (temp file in the same directory, then rename)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(dumps(obj))
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_json(path: str | Path) -> Any:
    return json.loads(Path(path).read_text())
