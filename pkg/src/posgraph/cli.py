"""Command-line driver: ``posgraph compile | verify | bench | gen``.

Exit codes: 0 success, 1 verification failure, 2 parse/config error,
3 infeasible routing.  Set ``POSGRAPH_LOG`` (debug, info, warning) for logs.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from .artifacts import COMPILED_FORMAT, SCHEDULE_FORMAT, load_json, ops_from_dict, write_json
from .bench import Manifest, run_bench
from .benchmarks import FAMILIES, generate
from .circuit_ir import CircuitDag
from .replay import replay_ops
from .runner import ROUTERS, ConfigError, RunInputs, load_arch, load_circuit, run_compile
from .schedule import OperationDurations
from .shaw import InfeasibleRouting

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_INFEASIBLE = 0, 1, 2, 3

log = logging.getLogger("posgraph")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_CONFIG)


def _durations(value: str | None) -> OperationDurations:
    if value is None:
        return OperationDurations()
    path = value[1:] if value.startswith("@") else value
    try:
        return OperationDurations.load(path)
    except (OSError, ValueError, TypeError) as exc:
        raise ConfigError(f"bad durations file {path!r}: {exc}") from None


def cmd_compile(args) -> int:
    inputs = RunInputs(args.circuit, args.arch, args.router, args.seed, args.passes,
                       _durations(args.durations))
    report, artifact = run_compile(inputs)
    out = Path(args.out)
    name = "schedule.json" if artifact["format"] == SCHEDULE_FORMAT else "compiled.json"
    write_json(out / name, artifact)
    report.artifact = name
    write_json(out / "report.json", report.to_dict())
    print(f"{args.router}: {len(artifact['ops'])} ops, operation time "
          f"{report.operation_time:g} us, {report.wall_clock_s:.3f} s -> {out / name}")
    return EXIT_OK


def _load_artifact(path: str) -> dict:
    try:
        data = load_json(path)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read artifact {path!r}: {exc}") from None
    if not isinstance(data, dict) or data.get("format") not in (SCHEDULE_FORMAT, COMPILED_FORMAT):
        raise ConfigError(f"{path}: not a schedule or compiled-circuit artifact")
    return data


def cmd_verify(args) -> int:
    if args.replay:
        data = _load_artifact(args.replay)
        _, graph = load_arch(args.arch or data["arch"])
        dag: CircuitDag | None = None
        if args.circuit:
            _, dag = load_circuit(args.circuit)
        try:
            ops = ops_from_dict(data)
        except ValueError as exc:
            print(f"FAIL: {exc}", file=sys.stderr)
            return EXIT_VERIFY
        res = replay_ops(graph, data["initial_placement"], ops, dag)
        if not res.ok:
            print(f"FAIL: {res.message}", file=sys.stderr)
            return EXIT_VERIFY
        final = data.get("final_placement")
        if final is not None and list(final) != res.final_placement:
            print("FAIL: final placement does not match the replayed state", file=sys.stderr)
            return EXIT_VERIFY
        print(f"OK: {len(ops)} ops replayed, {res.gates_executed} gates")
        return EXIT_OK

    a, b = (_load_artifact(p) for p in args.diff)
    oa, ob = a["ops"], b["ops"]
    for i, (x, y) in enumerate(zip(oa, ob)):
        if x != y:
            print(f"FAIL: op {i} differs: {x} != {y}", file=sys.stderr)
            return EXIT_VERIFY
    if len(oa) != len(ob):
        print(f"FAIL: op {min(len(oa), len(ob))}: lengths differ ({len(oa)} vs {len(ob)})",
              file=sys.stderr)
        return EXIT_VERIFY
    if a["initial_placement"] != b["initial_placement"]:
        print("FAIL: initial placements differ", file=sys.stderr)
        return EXIT_VERIFY
    print(f"OK: {len(oa)} ops identical")
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        data = load_json(args.manifest)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read manifest: {exc}") from None
    summary = run_bench(Manifest.from_dict(data), args.out, jobs=args.jobs)
    for router, fit in summary["fits"].items():
        if fit is None:
            print(f"{router}: fit omitted (needs >= 2 sizes)")
        else:
            print(f"{router}: t = {fit['a']:.3g} * ions^{fit['b']:.3f}")
    print(f"{summary['runs']} runs, {summary['failures']} failed -> {args.out}")
    return EXIT_OK


def cmd_gen(args) -> int:
    text = generate(args.family, args.n)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="posgraph", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("compile", help="route one circuit")
    c.add_argument("--circuit", required=True, help="QASM file or generator name (QFT_16)")
    c.add_argument("--arch", required=True,
                   help="grid:RxC:k | coupling:@file.json | coupling:grid:RxC | coupling:line:N")
    c.add_argument("--router", required=True, choices=ROUTERS)
    c.add_argument("--passes", type=int, default=2, help="SABRE layout passes")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--durations", help="@file.json with per-kind durations in us")
    c.add_argument("--out", default="out")
    c.set_defaults(func=cmd_compile)

    v = sub.add_parser("verify", help="replay an artifact or diff two")
    g = v.add_mutually_exclusive_group(required=True)
    g.add_argument("--replay", metavar="ARTIFACT")
    g.add_argument("--diff", nargs=2, metavar=("A", "B"))
    v.add_argument("--arch", help="override the architecture recorded in the artifact")
    v.add_argument("--circuit", help="also check gate order and completeness")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="run a benchmark manifest")
    b.add_argument("manifest")
    b.add_argument("--out", default="bench_out")
    b.add_argument("--jobs", type=int, default=1)
    b.set_defaults(func=cmd_bench)

    q = sub.add_parser("gen", help="emit a benchmark circuit as QASM")
    q.add_argument("family", choices=FAMILIES)
    q.add_argument("n", type=int)
    q.add_argument("--out")
    q.set_defaults(func=cmd_gen)
    return p


def main(argv: list[str] | None = None) -> int:
    level = os.environ.get("POSGRAPH_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleRouting as exc:
        print(str(exc), file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
