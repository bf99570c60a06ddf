from __future__ import annotations

import random

import pytest

from posgraph.circuit_ir import CircuitDag, Gate


def random_dag(rng: random.Random, n_qudits: int, n_gates: int, max_arity: int = 2) -> CircuitDag:
    gates = []
    for i in range(n_gates):
        k = rng.randint(1, min(max_arity, n_qudits))
        gates.append(Gate(i, tuple(rng.sample(range(n_qudits), k))))
    return CircuitDag.from_gates(n_qudits, gates)


def random_downward_closed(rng: random.Random, dag: CircuitDag) -> set[int]:
    """Executed set obtained by firing random front gates."""
    executed: set[int] = set()
    steps = rng.randint(0, len(dag.gates))
    for _ in range(steps):
        front = [g.id for g in dag.gates
                 if g.id not in executed and all(p in executed for p in dag.preds[g.id])]
        if not front:
            break
        executed.add(rng.choice(front))
    return executed


@pytest.fixture
def rng():
    return random.Random(1234)
