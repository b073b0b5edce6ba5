"""Command-line entry point: ``qccd-shuttle {schedule,verify,oracle,bench}``.

Exit codes: 0 success, 1 verification found violations, 2 unreadable input,
3 invalid input, 4 livelock, 5 saturation, 6 oracle budget exhausted.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from statistics import mean

from .arch_graph import GridSpec, build_grid_graph
from .circuit.generators import FAMILIES, builtin
from .circuit.model import Circuit
from .circuit.passes import compile_circuit
from .circuit.qasm import parse_circuit
from .exceptions import (
    BudgetExceededError,
    LivelockError,
    QasmSyntaxError,
    SaturationError,
    ScheduleFormatError,
    UnsupportedFeatureError,
    ValidationError,
)
from .placement import chains_for_occupancy, random_placement
from .schedule_io import ScheduleDocument, dumps, read_schedule, write_schedule
from .scheduler import SchedulerConfig, run_schedule
from .verifier_oracle.oracle import optimal_schedule_length
from .verifier_oracle.verifier import verify_schedule

log = logging.getLogger("qccd_shuttle")

EXIT_OK, EXIT_VIOLATIONS, EXIT_PARSE, EXIT_VALIDATION, EXIT_LIVELOCK, EXIT_SATURATION, EXIT_BUDGET = range(7)

# small rows and the full benchmark grid of twenty architectures
SMALL_ROWS = [(3, 3, 1, 1), (2, 2, 1, 5), (4, 2, 1, 1), (2, 4, 1, 1)]
TABLE_ROWS = [
    (2, 2, 1, 5), (2, 2, 1, 11), (2, 2, 1, 19), (2, 2, 1, 29), (2, 2, 1, 39),
    (2, 4, 1, 1), (2, 6, 1, 1), (2, 8, 1, 1), (2, 10, 1, 1), (2, 10, 5, 5),
    (4, 2, 1, 1), (6, 2, 1, 1), (8, 2, 1, 1), (10, 2, 1, 1), (10, 2, 5, 5),
    (3, 3, 1, 1), (4, 4, 1, 1), (5, 5, 1, 1), (6, 6, 1, 1), (10, 10, 1, 1),
]  # fmt: skip
PRESETS = {"small": SMALL_ROWS, "table": TABLE_ROWS}


class _InputError(Exception):
    """Unreadable command-line input (maps to the parse exit code)."""


def arch_type(spec: GridSpec) -> str:
    if spec.m == 2 and spec.n == 2:
        return "racetrack"
    if spec.m == 2:
        return "vertical-grate"
    if spec.n == 2:
        return "horizontal-grate"
    return "lattice"


# -- input helpers --------------------------------------------------------
def load_arch(text: str) -> GridSpec:
    """A JSON architecture file, or an inline ``m,n,v,h`` quadruple."""
    parts = text.split(",")
    if len(parts) == 4 and all(p.strip().isdigit() for p in parts):
        return GridSpec(*(int(p) for p in parts)).validate()
    try:
        return GridSpec.from_json(text)
    except OSError as exc:
        raise _InputError(f"cannot read architecture file {text}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise _InputError(f"architecture file {text} is not valid JSON: {exc}") from exc
    except TypeError as exc:
        raise ValidationError(f"bad architecture description: {exc}", field="arch") from exc


def load_circuit(text: str) -> Circuit:
    """``builtin:<family>:<n>``, a JSON circuit file, or an OpenQASM file."""
    if text.startswith("builtin:"):
        parts = text.split(":")
        if len(parts) != 3 or not parts[2].isdigit():
            raise _InputError(f"expected builtin:<family>:<n>, got {text!r}")
        return builtin(parts[1], int(parts[2]))
    try:
        source = Path(text).read_text(encoding="utf-8")
    except OSError as exc:
        raise _InputError(f"cannot read circuit file {text}: {exc}") from exc
    if text.endswith(".json"):
        try:
            return Circuit.from_dict(json.loads(source))
        except (json.JSONDecodeError, KeyError, TypeError) as exc:
            raise _InputError(f"bad circuit JSON in {text}: {exc}") from exc
    return parse_circuit(source)


def config_from_args(args) -> SchedulerConfig:
    return SchedulerConfig(
        duration_1q=args.duration_1q,
        duration_2q=args.duration_2q,
        max_queue_len=args.max_queue_len,
        recompute_queue_each_step=args.recompute_queue_each_step,
        max_steps_guard=args.max_steps_guard,
    ).validate()


def chain_count(graph, occupancy: float, qubits: int) -> int:
    k = chains_for_occupancy(graph, occupancy)
    if k < qubits:
        raise ValidationError(
            f"occupancy {occupancy} gives {k} chains but the circuit has {qubits} qubits", field="occupancy"
        )
    return k


# -- commands -------------------------------------------------------------
def cmd_schedule(args) -> int:
    spec = load_arch(args.arch)
    graph = build_grid_graph(spec)
    circuit, _ = compile_circuit(load_circuit(args.circuit))
    cfg = config_from_args(args)
    initial = random_placement(graph, chain_count(graph, args.occupancy, circuit.qubit_count), args.seed)
    t0 = time.perf_counter()
    schedule = run_schedule(graph, circuit, initial, cfg)
    t_cpu = time.perf_counter() - t0
    if args.out:
        write_schedule(args.out, ScheduleDocument(spec, circuit, initial, schedule, cfg, args.seed))
    print(f"T_hat={schedule.T_hat} G={schedule.gate_count} t_cpu={t_cpu:.3f}")
    return EXIT_OK


def cmd_verify(args) -> int:
    doc = read_schedule(args.schedule)
    graph = build_grid_graph(doc.architecture)
    report = verify_schedule(graph, doc.circuit, doc.initial, doc.schedule, doc.config)
    sys.stdout.write(report.to_json() if args.json else report.to_text())
    return EXIT_OK if report.ok else EXIT_VIOLATIONS


def cmd_oracle(args) -> int:
    spec = load_arch(args.arch)
    graph = build_grid_graph(spec)
    cfg = config_from_args(args)
    k = args.chains if args.chains is not None else chains_for_occupancy(graph, args.occupancy)
    initial = random_placement(graph, k, args.seed)
    result = optimal_schedule_length(graph, initial, cfg=cfg, budget=args.budget, time_limit=args.time_limit)
    if args.out:
        data = result.to_dict()
        data["elapsed"] = round(result.elapsed, 3)
        data["witness"] = json.loads(
            dumps(ScheduleDocument(spec, result.circuit, initial, result.witness, cfg, args.seed))
        )
        Path(args.out).write_text(json.dumps(data, sort_keys=True, indent=1) + "\n", encoding="utf-8")
    if args.witness:
        write_schedule(args.witness, ScheduleDocument(spec, result.circuit, initial, result.witness, cfg, args.seed))
    print(f"T_min={result.T_min} states={result.states_explored} t_cpu={result.elapsed:.3f}")
    return EXIT_OK


@dataclass
class BenchResult:
    spec: GridSpec
    family: str
    chains: int
    seeds: list[int]
    T_hat: list[int] = field(default_factory=list)
    t_cpu: list[float] = field(default_factory=list)
    G: int = 0
    T_min: list[int | None] = field(default_factory=list)

    @property
    def T_hat_mean(self) -> float:
        return mean(self.T_hat)

    @property
    def T_min_mean(self) -> float | None:
        if not self.T_min or any(t is None for t in self.T_min):
            return None
        return mean(self.T_min)

    def row(self, timing: bool = True) -> dict:
        s = self.spec
        tmin = self.T_min_mean
        return {
            "type": arch_type(s),
            "m": s.m,
            "n": s.n,
            "v": s.v,
            "h": s.h,
            "chains": self.chains,
            "memory_edges": s.memory_edge_count,
            "family": self.family,
            "G": self.G,
            "seeds": ";".join(map(str, self.seeds)),
            "T_hat_per_seed": ";".join(map(str, self.T_hat)),
            "T_hat_mean": f"{self.T_hat_mean:.2f}",
            "t_cpu_mean": f"{mean(self.t_cpu):.4f}" if timing else "",
            "T_min_per_seed": ";".join("" if t is None else str(t) for t in self.T_min),
            "T_min_mean": "" if tmin is None else f"{tmin:.2f}",
            "ratio": "" if not tmin else f"{self.T_hat_mean / tmin:.3f}",
        }


BENCH_COLUMNS = list(BenchResult(GridSpec(2, 2, 1, 1), "fra", 0, [0], [0], [1.0]).row())


def run_bench_cell(spec: GridSpec, family: str, seeds, occupancy: float, cfg: SchedulerConfig,
                   oracle: bool = False, oracle_time_limit: float | None = 60.0) -> BenchResult:
    """One (architecture, family) cell: every seed scheduled, optionally solved exactly."""
    graph = build_grid_graph(spec)
    k = chains_for_occupancy(graph, occupancy)
    circuit, _ = compile_circuit(builtin(family, k))
    res = BenchResult(spec, family, k, list(seeds), G=len(circuit.gates))
    for seed in seeds:
        initial = random_placement(graph, k, seed)
        t0 = time.perf_counter()
        schedule = run_schedule(graph, circuit, initial, cfg)
        res.t_cpu.append(max(time.perf_counter() - t0, 1e-9))
        res.T_hat.append(schedule.T_hat)
        if oracle and family == "fra":
            try:
                res.T_min.append(optimal_schedule_length(graph, initial, cfg=cfg, time_limit=oracle_time_limit).T_min)
            except BudgetExceededError:
                res.T_min.append(None)
    return res


def _cell_job(job) -> BenchResult:
    return run_bench_cell(*job)


def load_arch_list(text: str) -> list[GridSpec]:
    if text in PRESETS:
        return [GridSpec(*row) for row in PRESETS[text]]
    try:
        data = json.loads(Path(text).read_text(encoding="utf-8"))
    except OSError as exc:
        raise _InputError(f"cannot read architecture list {text}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise _InputError(f"architecture list {text} is not valid JSON: {exc}") from exc
    if isinstance(data, dict):
        data = data.get("architectures", [])
    if not isinstance(data, list) or not data:
        raise ValidationError("architecture list must be a non-empty JSON list", field="archs")
    out = []
    for item in data:
        if isinstance(item, list):
            out.append(GridSpec(*item).validate())
        else:
            out.append(GridSpec.from_dict(item))
    return out


def bench_csv(results: list[BenchResult], timing: bool = True) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=BENCH_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for r in results:
        writer.writerow(r.row(timing))
    return buf.getvalue()


def cmd_bench(args) -> int:
    archs = load_arch_list(args.archs)
    families = [f.strip() for f in args.families.split(",") if f.strip()]
    for f in families:
        if f not in FAMILIES:
            raise ValidationError(f"unknown circuit family {f!r}; choose from {sorted(FAMILIES)}", field="families")
    seeds = [int(s) for s in args.seeds.split(",")] if args.seeds else list(range(5))
    cfg = config_from_args(args)
    jobs = [(s, f, seeds, args.occupancy, cfg, args.oracle, args.oracle_time_limit) for s in archs for f in families]
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_cell_job, jobs))
    else:
        results = [_cell_job(j) for j in jobs]
    text = bench_csv(results, timing=not args.no_timing)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- parser ---------------------------------------------------------------
def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--duration-1q", type=int, default=1, help="time steps per single-qubit gate")
    p.add_argument("--duration-2q", type=int, default=1, help="time steps per two-qubit gate")
    p.add_argument("--max-queue-len", type=int, default=None, help="priority queue length (default pz_capacity + 2)")
    p.add_argument("--recompute-queue-each-step", action="store_true", help="rebuild the queue every time step")
    p.add_argument("--max-steps-guard", type=int, default=None, help="livelock guard in time steps")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qccd-shuttle", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("schedule", help="build a shuttling schedule")
    p.add_argument("--arch", required=True, help="architecture JSON file or m,n,v,h")
    p.add_argument("--circuit", required=True, help="QASM/JSON file or builtin:<family>:<n>")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--occupancy", type=float, default=0.5)
    p.add_argument("--out", help="schedule JSON output path")
    _add_config_flags(p)
    p.set_defaults(func=cmd_schedule)

    p = sub.add_parser("verify", help="check a schedule file against the movement rules")
    p.add_argument("schedule", help="schedule JSON file")
    p.add_argument("--json", action="store_true", help="machine-readable report")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("oracle", help="exact minimum length for full register access")
    p.add_argument("--arch", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--occupancy", type=float, default=0.5)
    p.add_argument("--chains", type=int, default=None, help="chain count (overrides --occupancy)")
    p.add_argument("--budget", type=int, default=10**7, help="maximum number of stored states")
    p.add_argument("--time-limit", type=float, default=None, help="seconds before giving up")
    p.add_argument("--out", help="result JSON path")
    p.add_argument("--witness", help="write the witness as a schedule file")
    _add_config_flags(p)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("bench", help="CSV benchmark over architectures and circuit families")
    p.add_argument("--archs", default="small", help="architecture list JSON file, or preset 'small' / 'table'")
    p.add_argument("--families", default="fra,ghz,graph,qft")
    p.add_argument("--seeds", default=None, help="comma-separated seeds (default 0..4)")
    p.add_argument("--occupancy", type=float, default=0.5)
    p.add_argument("--oracle", action="store_true", help="also solve full register access exactly")
    p.add_argument("--oracle-time-limit", type=float, default=60.0)
    p.add_argument("--jobs", type=int, default=1, help="worker processes")
    p.add_argument("--no-timing", action="store_true", help="leave t_cpu empty for reproducible output")
    p.add_argument("--out", help="CSV output path (default stdout)")
    _add_config_flags(p)
    p.set_defaults(func=cmd_bench)
    return parser


def _setup_logging() -> None:
    level = os.environ.get("SHUTTLE_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), format="%(levelname)s %(name)s: %(message)s")


def main(argv: list[str] | None = None) -> int:
    _setup_logging()
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (_InputError, QasmSyntaxError, ScheduleFormatError, UnsupportedFeatureError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except LivelockError as exc:
        print(f"error: {exc}", file=sys.stderr)
        log.info("stuck state: %s", exc.state)
        return EXIT_LIVELOCK
    except SaturationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_SATURATION
    except BudgetExceededError as exc:
        print(f"error: {exc} {json.dumps(exc.stats, sort_keys=True)}", file=sys.stderr)
        return EXIT_BUDGET


if __name__ == "__main__":
    sys.exit(main())
