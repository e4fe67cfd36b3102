"""Experiment harness: VNF-count sweeps over a fixed topology.

A sweep takes one topology (an instance file or a generator configuration),
redraws the VNF inventory at each requested size with a per-point seed of
``base_seed + vnf_count``, and runs the configured solvers: the two-step
heuristic once per run seed (``base_seed + run``), the exact solver once per
point since it is deterministic. One CSV row is written per run plus one
aggregate row per (point, algorithm) group with the means of the successful
runs, rounded to two decimals.

Re-running an identical configuration reproduces the CSV byte for byte:
rows are emitted in a canonical order (VNF count, then algorithm, then
seed), every solver is seeded, and ``runtime_ms`` stays at zero unless
``wall_clock`` is set, because measured time would break reproducibility.
"""

from __future__ import annotations

import csv
import json
import time
from dataclasses import dataclass, fields
from pathlib import Path

from .errors import InfeasibleDomain, InstanceFormatError, NoFeasiblePlan
from .model import Solution, save_solution
from .oracle import OracleBudget, OracleStatus, solve_exact
from .tabu import TabuParams
from .topology import (
    DEFAULT_NFVO_VNFM_BOUND_MS,
    DEFAULT_VNF_VNFM_BOUND_MS,
    GeneratorConfig,
    ProblemInstance,
    generate_instance,
    load_problem,
    resolve_instance_path,
    with_uniform_vnfs,
)

CSV_HEADER = ("instance", "pops", "vnfs", "algorithm", "seed", "objective",
              "nfvo_count", "vnfm_count", "iterations", "runtime_ms", "status")

STATUS_OK = "ok"
STATUS_AGGREGATE = "aggregate"


@dataclass(frozen=True)
class ExperimentConfig:
    """One sweep: a topology source plus the grid of runs to execute."""

    instance_file: str | None = None
    generator: GeneratorConfig | None = None
    vnf_counts: tuple[int, ...] = (10, 20, 30, 40, 50, 60)
    algorithms: tuple[str, ...] = ("tsp",)
    runs_per_point: int = 20
    base_seed: int = 0
    output: str = "results.csv"
    emit_solutions: bool = False
    solutions_dir: str | None = None
    wall_clock: bool = False
    vnfm_delay_bound: float = DEFAULT_VNF_VNFM_BOUND_MS
    nfvo_vnfm_delay_bound: float = DEFAULT_NFVO_VNFM_BOUND_MS
    stop_patience: int | None = None
    tabu_tenure: int | None = None
    neighborhood_samples: int | None = None
    oracle_max_nodes: int = 1_000_000
    oracle_time_limit_s: float = 60.0

    def __post_init__(self):
        if (self.instance_file is None) == (self.generator is None):
            raise ValueError("exactly one of instance_file and generator must be set")
        if not self.vnf_counts or any(v < 1 for v in self.vnf_counts):
            raise ValueError("vnf_counts must be a nonempty list of positive counts")
        if not self.algorithms:
            raise ValueError("algorithms must not be empty")
        for alg in self.algorithms:
            if alg not in ("tsp", "exact"):
                raise ValueError(f"unknown algorithm {alg!r} (expected 'tsp' or 'exact')")
        if self.runs_per_point < 1:
            raise ValueError("runs_per_point must be >= 1")


@dataclass(frozen=True)
class RunRecord:
    """One solver execution; numeric fields are None when the run failed."""

    instance: str
    pops: int
    vnfs: int
    algorithm: str
    seed: int
    objective: int | None
    nfvo_count: int | None
    vnfm_count: int | None
    iterations: int | None
    runtime_ms: float | None
    status: str


def load_experiment_config(path: str | Path) -> ExperimentConfig:
    """Read a sweep configuration file (JSON, strict keys)."""
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InstanceFormatError(f"{path}: expected a configuration object")

    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(data) - known
    if unknown:
        raise InstanceFormatError(f"{path}: unknown key(s) {sorted(unknown)}")

    kwargs = dict(data)
    if "generator" in kwargs and kwargs["generator"] is not None:
        gen = kwargs["generator"]
        if not isinstance(gen, dict):
            raise InstanceFormatError(f"{path}: generator must be an object")
        gen_known = {f.name for f in fields(GeneratorConfig)}
        gen_unknown = set(gen) - gen_known
        if gen_unknown:
            raise InstanceFormatError(
                f"{path}: generator: unknown key(s) {sorted(gen_unknown)}")
        try:
            kwargs["generator"] = GeneratorConfig(**gen)
        except (TypeError, ValueError) as exc:
            raise InstanceFormatError(f"{path}: generator: {exc}") from exc
    for key in ("vnf_counts", "algorithms"):
        if key in kwargs and isinstance(kwargs[key], list):
            kwargs[key] = tuple(kwargs[key])
    try:
        return ExperimentConfig(**kwargs)
    except (TypeError, ValueError) as exc:
        raise InstanceFormatError(f"{path}: {exc}") from exc


def _base_instance(config: ExperimentConfig) -> tuple[ProblemInstance, str]:
    if config.instance_file is not None:
        path = resolve_instance_path(config.instance_file)
        return load_problem(path), path.stem
    assert config.generator is not None
    gen = config.generator
    return generate_instance(gen), f"gen{gen.pop_count}s{gen.seed}"


def _run_tsp(config: ExperimentConfig, instance: ProblemInstance,
             instance_id: str, seed: int) -> tuple[RunRecord, Solution | None]:
    from .vnfm import two_step_place_detailed

    params = TabuParams(stop_patience=config.stop_patience,
                        tabu_tenure=config.tabu_tenure,
                        neighborhood_samples=config.neighborhood_samples,
                        seed=seed)
    start = time.perf_counter()
    try:
        result = two_step_place_detailed(instance, params)
    except (NoFeasiblePlan, InfeasibleDomain) as exc:
        runtime = (time.perf_counter() - start) * 1000 if config.wall_clock else 0.0
        status = ("no_feasible_plan" if isinstance(exc, NoFeasiblePlan)
                  else "infeasible_domain")
        return RunRecord(instance_id, instance.pop_count, instance.vnf_count,
                         "tsp", seed, None, None, None, None, runtime, status), None
    runtime = (time.perf_counter() - start) * 1000 if config.wall_clock else 0.0
    sol = result.solution
    record = RunRecord(instance_id, instance.pop_count, instance.vnf_count,
                       "tsp", seed, sol.objective, sol.plan.nfvo_count,
                       sol.vnfm_count, result.search.iterations, runtime, STATUS_OK)
    return record, sol


def _run_exact(config: ExperimentConfig, instance: ProblemInstance,
               instance_id: str, seed: int) -> tuple[RunRecord, Solution | None]:
    budget = OracleBudget(max_nodes=config.oracle_max_nodes,
                          time_limit_s=config.oracle_time_limit_s)
    start = time.perf_counter()
    result = solve_exact(instance, budget)
    runtime = (time.perf_counter() - start) * 1000 if config.wall_clock else 0.0
    if result.status is OracleStatus.OPTIMAL:
        sol = result.solution
        assert sol is not None
        record = RunRecord(instance_id, instance.pop_count, instance.vnf_count,
                           "exact", seed, sol.objective, sol.plan.nfvo_count,
                           sol.vnfm_count, result.nodes_explored, runtime, STATUS_OK)
        return record, sol
    record = RunRecord(instance_id, instance.pop_count, instance.vnf_count,
                       "exact", seed, None, None, None, result.nodes_explored,
                       runtime, result.status.value)
    return record, None


def run_experiment(config: ExperimentConfig) -> list[RunRecord]:
    """Execute the sweep, write the CSV, and return the per-run records."""
    base, instance_id = _base_instance(config)
    records: list[RunRecord] = []
    emitted: list[tuple[RunRecord, Solution]] = []

    for count in sorted(set(config.vnf_counts)):
        point = with_uniform_vnfs(
            base, count, seed=config.base_seed + count,
            vnfm_delay_bound=config.vnfm_delay_bound,
            nfvo_vnfm_delay_bound=config.nfvo_vnfm_delay_bound)
        for alg in sorted(set(config.algorithms)):
            if alg == "tsp":
                runs = [config.base_seed + r for r in range(config.runs_per_point)]
                runner = _run_tsp
            else:
                runs = [config.base_seed]  # deterministic: one run per point
                runner = _run_exact
            for seed in runs:
                record, sol = runner(config, point, instance_id, seed)
                records.append(record)
                if sol is not None and config.emit_solutions:
                    emitted.append((record, sol))

    out_path = Path(config.output)
    if out_path.parent != Path(""):
        out_path.parent.mkdir(parents=True, exist_ok=True)
    write_csv(records, out_path)

    if config.emit_solutions:
        sol_dir = Path(config.solutions_dir) if config.solutions_dir else out_path.parent
        sol_dir.mkdir(parents=True, exist_ok=True)
        for record, sol in emitted:
            name = (f"{record.instance}_v{record.vnfs}_{record.algorithm}"
                    f"_s{record.seed}.json")
            save_solution(sol, sol_dir / name)
    return records


def _fmt_runtime(x: float | None) -> str:
    return "" if x is None else f"{x:.3f}"


def write_csv(records: list[RunRecord], path: str | Path) -> None:
    """Write per-run rows plus one aggregate row per (point, algorithm) group.

    Records are sorted canonically (VNF count, algorithm, seed) before
    writing, so callers can batch runs in any order without changing the
    output bytes.
    """
    records = sorted(records, key=lambda r: (r.vnfs, r.algorithm, r.seed))
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        groups: list[tuple[tuple[int, str], list[RunRecord]]] = []
        for record in records:
            key = (record.vnfs, record.algorithm)
            if groups and groups[-1][0] == key:
                groups[-1][1].append(record)
            else:
                groups.append((key, [record]))
        for _key, group in groups:
            for r in group:
                writer.writerow([
                    r.instance, r.pops, r.vnfs, r.algorithm, r.seed,
                    "" if r.objective is None else r.objective,
                    "" if r.nfvo_count is None else r.nfvo_count,
                    "" if r.vnfm_count is None else r.vnfm_count,
                    "" if r.iterations is None else r.iterations,
                    _fmt_runtime(r.runtime_ms),
                    r.status,
                ])
            ok = [r for r in group if r.status == STATUS_OK]
            sample = group[0]
            if ok:
                def mean(get) -> str:
                    return f"{sum(get(r) for r in ok) / len(ok):.2f}"
                writer.writerow([
                    sample.instance, sample.pops, sample.vnfs,
                    f"{sample.algorithm}:mean", "",
                    mean(lambda r: r.objective), mean(lambda r: r.nfvo_count),
                    mean(lambda r: r.vnfm_count), mean(lambda r: r.iterations),
                    mean(lambda r: r.runtime_ms), STATUS_AGGREGATE,
                ])
            else:
                writer.writerow([sample.instance, sample.pops, sample.vnfs,
                                 f"{sample.algorithm}:mean", "", "", "", "", "", "",
                                 STATUS_AGGREGATE])
