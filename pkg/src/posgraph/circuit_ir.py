"""OpenQASM-2 subset parser and gate dependency DAG.

Only the structure that routing needs is kept: which logical qudits each gate
touches and in which order.  Measurements and barriers are parsed and dropped.
"""

from __future__ import annotations

import ast
import math
import operator
import re
from dataclasses import dataclass, field
from typing import Iterable, Sequence

__all__ = [
    "Gate",
    "CircuitDag",
    "DagCursor",
    "QasmError",
    "parse_qasm",
    "to_qasm",
    "front_layer",
    "lookahead_set",
]


class QasmError(ValueError):
    """Raised for malformed or unsupported QASM input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


# name -> operand count; anything else with <= 2 operands is accepted as opaque
KNOWN_GATES = {
    "id": 1, "x": 1, "y": 1, "z": 1, "h": 1, "s": 1, "sdg": 1, "t": 1, "tdg": 1,
    "sx": 1, "sxdg": 1, "rx": 1, "ry": 1, "rz": 1, "p": 1, "u1": 1, "u2": 1,
    "u3": 1, "u": 1,
    "cx": 2, "cy": 2, "cz": 2, "ch": 2, "swap": 2, "cp": 2, "cu1": 2, "crx": 2,
    "cry": 2, "crz": 2, "rxx": 2, "ryy": 2, "rzz": 2, "rzx": 2, "ms": 2,
    "ccx": 3, "cswap": 3,
}


@dataclass(frozen=True)
class Gate:
    id: int
    operands: tuple[int, ...]
    kind: str = "g"
    params: tuple[float, ...] = ()

    def __post_init__(self):
        if len(self.operands) < 1:
            raise ValueError(f"gate {self.id} has no operands")
        if len(set(self.operands)) != len(self.operands):
            raise ValueError(f"gate {self.id} has repeated operands {self.operands}")

    @property
    def arity(self) -> int:
        return len(self.operands)


@dataclass(frozen=True, eq=False)
class CircuitDag:
    """Immutable gate list plus last-writer-per-qudit dependency edges."""

    num_qudits: int
    gates: tuple[Gate, ...]
    preds: tuple[tuple[int, ...], ...] = field(repr=False)
    succs: tuple[tuple[int, ...], ...] = field(repr=False)

    @classmethod
    def from_gates(cls, num_qudits: int, gates: Iterable[Gate]) -> "CircuitDag":
        gates = tuple(gates)
        last: dict[int, int] = {}
        preds: list[tuple[int, ...]] = []
        succs: list[list[int]] = [[] for _ in gates]
        for idx, g in enumerate(gates):
            if g.id != idx:
                raise ValueError(f"gate ids must be 0..n-1 in order, got {g.id} at {idx}")
            for q in g.operands:
                if not 0 <= q < num_qudits:
                    raise ValueError(f"operand {q} out of range for {num_qudits} qudits")
            ps = sorted({last[q] for q in g.operands if q in last})
            preds.append(tuple(ps))
            for p in ps:
                succs[p].append(idx)
            for q in g.operands:
                last[q] = idx
        return cls(num_qudits, gates, tuple(preds), tuple(tuple(s) for s in succs))

    def __len__(self) -> int:
        return len(self.gates)

    def reversed(self) -> "CircuitDag":
        """The same circuit with gate order reversed (ids renumbered)."""
        n = len(self.gates)
        gates = [
            Gate(n - 1 - g.id, g.operands, g.kind, g.params) for g in reversed(self.gates)
        ]
        return CircuitDag.from_gates(self.num_qudits, gates)

    def multi_qudit_gates(self) -> list[Gate]:
        return [g for g in self.gates if g.arity > 1]


class DagCursor:
    """Incremental front-layer tracker used by the routers."""

    def __init__(self, dag: CircuitDag):
        self.dag = dag
        self.remaining = [len(p) for p in dag.preds]
        self.front: set[int] = {i for i, r in enumerate(self.remaining) if r == 0}
        self.executed: set[int] = set()

    def execute(self, gid: int) -> None:
        if gid not in self.front:
            raise ValueError(f"gate {gid} is not in the front layer")
        self.front.discard(gid)
        self.executed.add(gid)
        for s in self.dag.succs[gid]:
            self.remaining[s] -= 1
            if self.remaining[s] == 0:
                self.front.add(s)

    @property
    def done(self) -> bool:
        return not self.front


def _check_downward_closed(dag: CircuitDag, executed: set[int]) -> None:
    for g in executed:
        for p in dag.preds[g]:
            if p not in executed:
                raise ValueError(
                    f"executed set is not downward-closed: {g} executed before {p}"
                )


def front_layer(dag: CircuitDag, executed: Iterable[int]) -> set[int]:
    """Unexecuted gates whose predecessors have all been executed."""
    executed = set(executed)
    _check_downward_closed(dag, executed)
    return {
        g.id
        for g in dag.gates
        if g.id not in executed and all(p in executed for p in dag.preds[g.id])
    }


def lookahead_set(
    dag: CircuitDag,
    executed: Iterable[int],
    front: Iterable[int],
    size: int,
    multi_only: bool = False,
) -> list[int]:
    """Up to ``size`` gates beyond the front, ordered by (BFS depth, gate id).

    With ``multi_only`` single-qudit gates are traversed but not returned.
    """
    if size <= 0:
        return []
    seen = set(front)
    layer = sorted(seen)
    out: list[int] = []
    # level-synchronous BFS; stop once a whole level brings the count to size
    while layer and len(out) < size:
        nxt = []
        for g in layer:
            for s in dag.succs[g]:
                if s not in seen:
                    seen.add(s)
                    nxt.append(s)
        nxt.sort()
        out.extend(s for s in nxt if not multi_only or dag.gates[s].arity > 1)
        layer = nxt
    return out[:size]


# --- parsing -----------------------------------------------------------------

_BINOPS = {
    ast.Add: operator.add,
    ast.Sub: operator.sub,
    ast.Mult: operator.mul,
    ast.Div: operator.truediv,
    ast.Pow: operator.pow,
}
_FUNCS = {"sin": math.sin, "cos": math.cos, "tan": math.tan, "exp": math.exp,
          "ln": math.log, "sqrt": math.sqrt}


def _eval_param(text: str) -> float:
    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name) and node.id == "pi":
            return math.pi
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
            return _BINOPS[type(node.op)](ev(node.left), ev(node.right))
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id in _FUNCS and len(node.args) == 1):
            return _FUNCS[node.func.id](ev(node.args[0]))
        raise ValueError(text)

    return ev(ast.parse(text.strip().replace("^", "**"), mode="eval"))


_STMT_GATE = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*(?:\((.*)\))?\s*(.*)$", re.S)
_ARG = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*(?:\[\s*(\d+)\s*\])?$")


def _statements(text: str):
    """Yield (line_number, statement) pairs with comments removed."""
    buf: list[str] = []
    start = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("//", 1)[0]
        while line:
            head, sep, line = line.partition(";")
            if head.strip() and start is None:
                start = lineno
            buf.append(head)
            if sep:
                stmt = " ".join(buf).strip()
                if stmt:
                    yield start, stmt
                buf, start = [], None
    rest = " ".join(buf).strip()
    if rest:
        raise QasmError(f"missing ';' after {rest!r}", start)


def parse_qasm(text: str) -> CircuitDag:
    """Parse an OpenQASM-2 subset into a :class:`CircuitDag`."""
    regs: dict[str, tuple[int, int]] = {}
    num_qudits = 0
    gates: list[Gate] = []

    def resolve(arg: str, lineno: int) -> list[int]:
        m = _ARG.match(arg.strip())
        if not m:
            raise QasmError(f"bad operand {arg!r}", lineno)
        name, idx = m.group(1), m.group(2)
        if name not in regs:
            raise QasmError(f"unknown register {name!r}", lineno)
        off, size = regs[name]
        if idx is None:
            return list(range(off, off + size))
        i = int(idx)
        if i >= size:
            raise QasmError(f"index {i} out of bounds for {name}[{size}]", lineno)
        return [off + i]

    for lineno, stmt in _statements(text):
        low = stmt.split(None, 1)[0] if stmt.split() else ""
        if low == "OPENQASM" or low == "include":
            continue
        if low in ("qreg", "creg"):
            m = re.match(r"^(qreg|creg)\s+([A-Za-z_][A-Za-z0-9_]*)\s*\[\s*(\d+)\s*\]$", stmt)
            if not m:
                raise QasmError(f"syntax error in {stmt!r}", lineno)
            if m.group(1) == "qreg":
                if m.group(2) in regs:
                    raise QasmError(f"register {m.group(2)!r} redeclared", lineno)
                size = int(m.group(3))
                regs[m.group(2)] = (num_qudits, size)
                num_qudits += size
            continue
        if low in ("measure", "barrier"):
            continue
        if low in ("gate", "opaque", "if", "reset"):
            raise QasmError(f"unsupported statement {low!r}", lineno)
        m = _STMT_GATE.match(stmt)
        if not m:
            raise QasmError(f"syntax error in {stmt!r}", lineno)
        name, ptext, atext = m.group(1), m.group(2), m.group(3)
        params: tuple[float, ...] = ()
        if ptext is not None and ptext.strip():
            try:
                params = tuple(_eval_param(p) for p in ptext.split(","))
            except (ValueError, SyntaxError, ZeroDivisionError):
                raise QasmError(f"bad parameter list ({ptext})", lineno) from None
        if not atext.strip():
            raise QasmError(f"gate {name!r} has no operands", lineno)
        groups = [resolve(a, lineno) for a in atext.split(",")]
        want = KNOWN_GATES.get(name)
        if want is not None and len(groups) != want:
            raise QasmError(f"{name} takes {want} operands, got {len(groups)}", lineno)
        if want is None and len(groups) > 2:
            raise QasmError(f"unsupported {len(groups)}-operand gate {name!r}", lineno)
        # register broadcast: q -> q[0], q[1], ...
        width = max(len(g) for g in groups)
        if any(len(g) not in (1, width) for g in groups):
            raise QasmError("register size mismatch in broadcast", lineno)
        for k in range(width):
            ops = tuple(g[k] if len(g) > 1 else g[0] for g in groups)
            if len(set(ops)) != len(ops):
                raise QasmError(f"repeated operand in {stmt!r}", lineno)
            gates.append(Gate(len(gates), ops, name, params))
    return CircuitDag.from_gates(num_qudits, gates)


def to_qasm(dag: CircuitDag) -> str:
    """Serialize to the subset accepted by :func:`parse_qasm`."""
    lines = ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{dag.num_qudits}];"]
    for g in dag.gates:
        p = f"({','.join(repr(x) for x in g.params)})" if g.params else ""
        args = ",".join(f"q[{q}]" for q in g.operands)
        lines.append(f"{g.kind}{p} {args};")
    return "\n".join(lines) + "\n"

