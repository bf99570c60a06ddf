"""Generators for the benchmark circuit families (emitted as QASM text)."""

from __future__ import annotations

import math
import random
import re

FAMILIES = ("qft", "qaoa", "tfim", "tfxy")


def _header(n: int) -> list[str]:
    return ["OPENQASM 2.0;", 'include "qelib1.inc";', f"qreg q[{n}];"]


def qft(n: int) -> str:
    """Textbook QFT without the final qubit-reversal swaps."""
    lines = _header(n)
    for i in range(n):
        lines.append(f"h q[{i}];")
        for j in range(i + 1, n):
            lines.append(f"cp({math.pi / 2 ** (j - i)!r}) q[{j}],q[{i}];")
    return "\n".join(lines) + "\n"


def erdos_renyi_edges(n: int, p: float, seed: int) -> list[tuple[int, int]]:
    rng = random.Random(seed)
    return [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]


def qaoa(n: int, layers: int = 1, p: float = 0.1, seed: int = 7) -> str:
    """MaxCut QAOA on a seeded Erdos-Renyi graph G(n, p)."""
    edges = erdos_renyi_edges(n, p, seed)
    lines = _header(n)
    lines += [f"h q[{i}];" for i in range(n)]
    for layer in range(layers):
        gamma = 0.4 + 0.1 * layer
        beta = 0.7 - 0.1 * layer
        lines += [f"rzz({2 * gamma!r}) q[{a}],q[{b}];" for a, b in edges]
        lines += [f"rx({2 * beta!r}) q[{i}];" for i in range(n)]
    return "\n".join(lines) + "\n"


def tfim(n: int, steps: int = 4, dt: float = 0.1) -> str:
    """Trotterized transverse-field Ising chain."""
    lines = _header(n)
    for _ in range(steps):
        for par in (0, 1):
            lines += [f"rzz({2 * dt!r}) q[{i}],q[{i + 1}];" for i in range(par, n - 1, 2)]
        lines += [f"rx({2 * dt!r}) q[{i}];" for i in range(n)]
    return "\n".join(lines) + "\n"


def tfxy(n: int, steps: int = 4, dt: float = 0.1) -> str:
    """Trotterized transverse-field XY chain."""
    lines = _header(n)
    for _ in range(steps):
        for par in (0, 1):
            for i in range(par, n - 1, 2):
                lines.append(f"rxx({2 * dt!r}) q[{i}],q[{i + 1}];")
                lines.append(f"ryy({2 * dt!r}) q[{i}],q[{i + 1}];")
        lines += [f"rz({2 * dt!r}) q[{i}];" for i in range(n)]
    return "\n".join(lines) + "\n"


_GEN = {"qft": qft, "qaoa": qaoa, "tfim": tfim, "tfxy": tfxy}


def generate(family: str, n: int) -> str:
    try:
        return _GEN[family.lower()](n)
    except KeyError:
        raise ValueError(f"unknown benchmark family {family!r}") from None


_NAME = re.compile(r"^(?:gen:)?([A-Za-z]+)[_:](\d+)$")


def parse_benchmark_name(name: str) -> tuple[str, int] | None:
    """``QFT_16`` / ``gen:qft:16`` -> ("qft", 16); anything else -> None."""
    m = _NAME.match(name)
    if not m or m.group(1).lower() not in FAMILIES:
        return None
    return m.group(1).lower(), int(m.group(2))
