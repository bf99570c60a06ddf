"""Benchmark harness: manifest expansion, repeated runs, aggregation, power-law fits."""

from __future__ import annotations

import csv
import logging
import math
import re
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .artifacts import RunReport, write_json
from .runner import ROUTERS, ConfigError, RunInputs, run_compile
from .schedule import OperationDurations
from .shaw import InfeasibleRouting

__all__ = ["Manifest", "BenchRow", "PowerLawFit", "power_law_fit", "run_bench", "aggregate"]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Manifest:
    """What to run.  ``pairs`` (circuit, arch) overrides the circuits x archs product."""

    routers: tuple[str, ...]
    circuits: tuple[str, ...] = ()
    archs: tuple[str, ...] = ()
    pairs: tuple[tuple[str, str], ...] = ()
    seeds: tuple[int, ...] = (0,)
    repetitions: int = 1
    passes: int = 2
    durations: OperationDurations = OperationDurations()

    @classmethod
    def from_dict(cls, data: dict) -> "Manifest":
        try:
            routers = tuple(data["routers"])
            pairs = tuple((str(c), str(a)) for c, a in data.get("pairs", []))
            m = cls(
                routers=routers,
                circuits=tuple(data.get("circuits", [])),
                archs=tuple(data.get("archs", [])),
                pairs=pairs,
                seeds=tuple(int(s) for s in data.get("seeds", [0])),
                repetitions=int(data.get("repetitions", 1)),
                passes=int(data.get("passes", 2)),
                durations=OperationDurations.from_mapping(data.get("durations", {})),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad manifest: {exc}") from None
        bad = [r for r in m.routers if r not in ROUTERS]
        if bad:
            raise ConfigError(f"bad manifest: unknown routers {bad}")
        if m.repetitions < 1:
            raise ConfigError("bad manifest: repetitions must be >= 1")
        if not m.pairs and not (m.circuits and m.archs):
            raise ConfigError("bad manifest: give circuits and archs, or pairs")
        return m

    def runs(self) -> list[RunInputs]:
        pairs = self.pairs or tuple((c, a) for c in self.circuits for a in self.archs)
        return [
            RunInputs(c, a, r, s, self.passes, self.durations)
            for c, a in pairs
            for r in self.routers
            for s in self.seeds
        ]


@dataclass
class BenchRow:
    circuit: str
    arch: str
    router: str
    seed: int
    total_ions: int
    status: str
    repetitions: int = 0
    mean_wall_clock_s: float = math.nan
    operation_time: float = math.nan
    ops: int = 0
    message: str = ""


@dataclass(frozen=True)
class PowerLawFit:
    """y = a * x**b fitted by least squares in log-log space."""

    a: float
    b: float
    points: int

    def __call__(self, x: float) -> float:
        return self.a * x ** self.b


def power_law_fit(xs: Sequence[float], ys: Sequence[float]) -> PowerLawFit | None:
    """None when fewer than two distinct x values (or non-positive data)."""
    pts = [(x, y) for x, y in zip(xs, ys) if x > 0 and y > 0]
    if len({x for x, _ in pts}) < 2:
        return None
    lx = [math.log(x) for x, _ in pts]
    ly = [math.log(y) for _, y in pts]
    slope, intercept = statistics.linear_regression(lx, ly)
    return PowerLawFit(math.exp(intercept), slope, len(pts))


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "-", text).strip("-")


def _one(inputs: RunInputs) -> tuple[RunReport, int]:
    """Worker: never raises, failures become report rows."""
    try:
        report, artifact = run_compile(inputs)
        return report, len(artifact["ops"])
    except (ConfigError, InfeasibleRouting) as exc:
        status = "infeasible" if isinstance(exc, InfeasibleRouting) else "error"
        message = str(exc)
    except Exception as exc:  # noqa: BLE001 - keep the bench going
        status = "error"
        message = f"{type(exc).__name__}: {exc}"
    report = RunReport(inputs.circuit, "", inputs.arch, inputs.router, inputs.seed,
                       inputs.passes, status=status, message=message)
    return report, 0


def aggregate(reports: Iterable[tuple[RunReport, int]]) -> list[BenchRow]:
    groups: dict[tuple, list[tuple[RunReport, int]]] = {}
    for rep, n in reports:
        groups.setdefault((rep.circuit, rep.arch, rep.router, rep.seed), []).append((rep, n))
    rows = []
    for (circ, arch, router, seed), items in groups.items():
        ok = [(r, n) for r, n in items if r.status == "ok"]
        if len(ok) < len(items):
            failed = next(r for r, _ in items if r.status != "ok")
            rows.append(BenchRow(circ, arch, router, seed, failed.total_ions, failed.status,
                                 len(items), message=failed.message))
            continue
        first, n = ok[0]
        rows.append(BenchRow(
            circ, arch, router, seed, first.total_ions, "ok", len(ok),
            statistics.fmean(r.wall_clock_s for r, _ in ok), first.operation_time, n,
        ))
    return rows


def fits_by_router(rows: Sequence[BenchRow]) -> dict[str, PowerLawFit | None]:
    out = {}
    for router in sorted({r.router for r in rows}):
        ok = [r for r in rows if r.router == router and r.status == "ok"]
        out[router] = power_law_fit([r.total_ions for r in ok], [r.mean_wall_clock_s for r in ok])
    return out


_CSV_FIELDS = ["circuit", "arch", "router", "seed", "total_ions", "status", "repetitions",
               "mean_wall_clock_s", "operation_time", "ops", "message"]


def run_bench(manifest: Manifest, out_dir: str | Path, jobs: int = 1) -> dict:
    """Run every manifest entry, write reports, CSV and summary; returns the summary."""
    out = Path(out_dir)
    (out / "runs").mkdir(parents=True, exist_ok=True)
    tasks = [inp for inp in manifest.runs() for _ in range(manifest.repetitions)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_one, tasks))
    else:
        results = [_one(t) for t in tasks]
    for i, (rep, _) in enumerate(results):
        name = f"{i:04d}_{_slug(rep.router)}_{_slug(rep.circuit)}_{_slug(rep.arch)}_s{rep.seed}.json"
        write_json(out / "runs" / name, rep.to_dict())
        if rep.status != "ok":
            log.warning("run %d failed (%s): %s", i, rep.status, rep.message)

    rows = aggregate(results)
    tmp = out / ".aggregate.csv.tmp"
    with tmp.open("w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=_CSV_FIELDS)
        w.writeheader()
        for r in rows:
            w.writerow(vars(r))
    tmp.replace(out / "aggregate.csv")

    fits = fits_by_router(rows)
    summary = {
        "format": "posgraph.bench_summary",
        "version": 1,
        "x_axis": "total_ions (traps x trap capacity)",
        "runs": len(results),
        "failures": sum(1 for r, _ in results if r.status != "ok"),
        "fits": {k: ({"a": f.a, "b": f.b, "points": f.points} if f else None)
                 for k, f in fits.items()},
    }
    write_json(out / "summary.json", summary)
    return summary
