"""One compilation run: resolve inputs, route, and package the results."""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from pathlib import Path

from .artifacts import RunReport, circuit_digest, compiled_to_dict, schedule_to_dict
from .benchmarks import generate, parse_benchmark_name
from .circuit_ir import CircuitDag, QasmError, parse_qasm
from .position_graph import ArchCaches, PositionGraph
from .qccd_builder import (
    ArchSpecError,
    CouplingSpec,
    GridSpec,
    build_coupling,
    build_grid,
    parse_arch_spec,
)
from .sabre import (
    CouplingGraphBackend,
    PositionGraphBackend,
    RoutingError,
    SabreConfig,
    compile_sabre,
)
from .schedule import OperationDurations, assign_times
from .shaw import InfeasibleRouting, ShawConfig, compile_shuttle

__all__ = ["ROUTERS", "ConfigError", "RunInputs", "load_circuit", "load_arch", "run_compile"]

log = logging.getLogger(__name__)

ROUTERS = ("sabre-cg", "sabre-pg", "shaw", "lightshaw")


class ConfigError(ValueError):
    """Bad flags, unreadable inputs or an architecture the router cannot use."""


@dataclass(frozen=True)
class RunInputs:
    circuit: str
    arch: str
    router: str
    seed: int = 0
    passes: int = 2
    durations: OperationDurations = OperationDurations()


def load_circuit(ref: str) -> tuple[str, CircuitDag]:
    """QASM text and DAG for a file path or a generator name like ``QFT_16``."""
    bench = parse_benchmark_name(ref)
    if bench is not None and not Path(ref).exists():
        text = generate(*bench)
    else:
        try:
            text = Path(ref).read_text()
        except OSError as exc:
            raise ConfigError(f"cannot read circuit {ref!r}: {exc.strerror}") from None
    try:
        return text, parse_qasm(text)
    except QasmError as exc:
        raise ConfigError(f"{ref}: {exc}") from None


def load_arch(arch: str) -> tuple[GridSpec | CouplingSpec, PositionGraph]:
    try:
        spec = parse_arch_spec(arch)
    except ArchSpecError as exc:
        raise ConfigError(str(exc)) from None
    graph = build_grid(spec) if isinstance(spec, GridSpec) else build_coupling(spec)
    return spec, graph


def run_compile(inputs: RunInputs) -> tuple[RunReport, dict]:
    """Compile once; returns the report and the artifact dictionary.

    Raises :class:`ConfigError` or :class:`InfeasibleRouting`.
    """
    if inputs.router not in ROUTERS:
        raise ConfigError(f"unknown router {inputs.router!r}")
    if inputs.passes < 0:
        raise ConfigError("--passes must be >= 0")
    text, dag = load_circuit(inputs.circuit)
    spec, graph = load_arch(inputs.arch)
    digest = circuit_digest(text)
    report = RunReport(
        circuit=inputs.circuit,
        circuit_digest=digest,
        arch=inputs.arch,
        router=inputs.router,
        seed=inputs.seed,
        passes=inputs.passes,
        num_qudits=dag.num_qudits,
        total_ions=sum(t.capacity for t in graph.traps),
    )
    common = dict(arch=inputs.arch, digest=digest, num_qudits=dag.num_qudits, seed=inputs.seed)

    if inputs.router.startswith("sabre"):
        if inputs.router == "sabre-cg":
            if not isinstance(spec, CouplingSpec):
                raise ConfigError("sabre-cg needs a coupling architecture")
            backend = CouplingGraphBackend(spec)
        else:
            try:
                backend = PositionGraphBackend(graph)
            except RoutingError as exc:
                raise ConfigError(f"sabre-pg: {exc}") from None
        if dag.num_qudits > len(backend.layout_positions()):
            raise InfeasibleRouting(
                f"infeasible: {dag.num_qudits} qudits exceed "
                f"{len(backend.layout_positions())} positions")
        config = SabreConfig(layout_passes=inputs.passes, rng_seed=inputs.seed)
        t0 = time.perf_counter()
        try:
            cc = compile_sabre(dag, backend, config)
        except RoutingError as exc:
            raise InfeasibleRouting(f"infeasible: {exc}") from None
        report.wall_clock_s = time.perf_counter() - t0
        sched = assign_times(cc.ops, inputs.durations)
        report.counters = cc.stats.as_dict()
        report.swap_count = cc.swap_count
        artifact = compiled_to_dict(cc, passes=inputs.passes, **common)
    else:
        caches = ArchCaches(graph, inputs.durations)
        config = ShawConfig(mode=inputs.router, rng_seed=inputs.seed)
        t0 = time.perf_counter()
        sched, counters = compile_shuttle(dag, graph, caches, config)
        report.wall_clock_s = time.perf_counter() - t0
        report.counters = counters.as_dict()
        report.swap_count = sched.op_counts()["swap"]
        artifact = schedule_to_dict(sched, **common)

    report.op_counts = sched.op_counts()
    report.operation_time = sched.total_operation_time
    report.serial_time = sched.serial_time
    log.info("%s %s %s seed=%d: %.3fs, %d ops", inputs.router, inputs.circuit, inputs.arch,
             inputs.seed, report.wall_clock_s, len(sched.ops))
    return report, artifact
