"""Command line entry points.

Subcommands:

* ``gen``         generate a synthetic instance file
* ``validate``    check an instance file and report problems
* ``solve-tsp``   run the two-step heuristic on an instance
* ``solve-exact`` run the exact solver on an instance
* ``check``       verify a solution file against an instance
* ``export-lp``   write the ILP model in LP format
* ``experiment``  run a sweep from a configuration file

Exit codes: 0 on success, 1 for usage errors and unreadable input files,
2 when the input is valid but the request cannot be satisfied (validation
findings, infeasible instances, failed checks), 3 for internal errors.

Instance arguments accept plain paths or ``bundled:<name>`` references to
the topologies shipped with the package (``bundled:pop8``, ``bundled:pop16``).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from .errors import (
    InfeasibleDomain,
    InstanceFormatError,
    InstanceValidationError,
    NoFeasiblePlan,
    SolutionFormatError,
)
from .harness import load_experiment_config, run_experiment
from .lp_export import export_lp
from .model import check_feasibility, load_solution, save_solution
from .oracle import OracleBudget, OracleStatus, solve_exact
from .tabu import TabuParams
from .topology import (
    GeneratorConfig,
    generate_instance,
    load_problem,
    parse_problem,
    resolve_instance_path,
    save_problem,
    validate_instance,
)
from .vnfm import two_step_place_detailed

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_INTERNAL = 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with code 2 on bad flags; we reserve 2 for infeasibility."""

    def error(self, message):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="manoplace", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    gen = sub.add_parser("gen", help="generate a synthetic instance")
    gen.add_argument("--pops", type=int, help="number of PoPs")
    gen.add_argument("--vnfs", type=int, help="number of VNFs")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--area-km", type=float, default=GeneratorConfig.area_side_km)
    gen.add_argument("--delay-per-km", type=float,
                     default=GeneratorConfig.delay_per_km)
    gen.add_argument("--jitter", type=float,
                     default=GeneratorConfig.delay_jitter_fraction)
    gen.add_argument("--config", help="generator configuration file (JSON)")
    gen.add_argument("--output", required=True, help="instance file to write")

    val = sub.add_parser("validate", help="validate an instance file")
    val.add_argument("instance")

    tsp = sub.add_parser("solve-tsp", help="run the two-step heuristic")
    tsp.add_argument("instance")
    tsp.add_argument("--seed", type=int, default=0)
    tsp.add_argument("--patience", type=int, help="stop after this many stale iterations")
    tsp.add_argument("--tenure", type=int, help="tabu tenure in iterations")
    tsp.add_argument("--samples", type=int, help="candidate moves per iteration")
    tsp.add_argument("--output", help="solution file to write")

    exact = sub.add_parser("solve-exact", help="run the exact solver")
    exact.add_argument("instance")
    exact.add_argument("--max-nodes", type=int, default=1_000_000)
    exact.add_argument("--time-limit", type=float, default=60.0,
                       help="budget in seconds")
    exact.add_argument("--output", help="solution file to write")

    chk = sub.add_parser("check", help="check a solution against an instance")
    chk.add_argument("instance")
    chk.add_argument("solution")

    lp = sub.add_parser("export-lp", help="write the ILP model in LP format")
    lp.add_argument("instance")
    lp.add_argument("--output", help="LP file to write (default: <instance>.lp)")

    exp = sub.add_parser("experiment", help="run a sweep from a configuration file")
    exp.add_argument("--config", required=True, help="sweep configuration (JSON)")
    exp.add_argument("--output", help="override the configured CSV path")

    return parser


def _load_instance(ref: str):
    return load_problem(resolve_instance_path(ref))


def _cmd_gen(args) -> int:
    if args.config is not None:
        import json

        data = json.loads(Path(args.config).read_text())
        if not isinstance(data, dict):
            raise InstanceFormatError(f"{args.config}: expected an object")
        config = GeneratorConfig(**data)
        if args.seed != 0:
            config = replace(config, seed=args.seed)
    else:
        if args.pops is None or args.vnfs is None:
            raise _UsageError("gen requires --pops and --vnfs (or --config)")
        config = GeneratorConfig(pop_count=args.pops, vnf_count=args.vnfs,
                                 seed=args.seed, area_side_km=args.area_km,
                                 delay_per_km=args.delay_per_km,
                                 delay_jitter_fraction=args.jitter)
    instance = generate_instance(config)
    save_problem(instance, args.output)
    print(f"wrote {args.output}: {instance.pop_count} pops, "
          f"{instance.vnf_count} vnfs, gso at {instance.params.gso_location}")
    return EXIT_OK


def _cmd_validate(args) -> int:
    import json

    path = resolve_instance_path(args.instance)
    try:
        data = json.loads(path.read_text())
    except OSError as exc:
        raise InstanceFormatError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}: not valid JSON: {exc}") from exc
    instance = parse_problem(data)
    report = validate_instance(instance)
    if report.ok:
        print(f"{args.instance}: ok ({instance.pop_count} pops, "
              f"{instance.vnf_count} vnfs)")
        return EXIT_OK
    for entry in report.entries:
        print(entry)
    return EXIT_INFEASIBLE


def _print_solution(solution) -> None:
    plan = solution.plan
    print(f"objective={solution.objective} nfvos={plan.nfvo_count} "
          f"vnfms={solution.vnfm_count}")
    print(f"nfvo locations: {sorted(plan.active_pops)}")
    for vnfm in solution.vnfms:
        print(f"vnfm at pop {vnfm.location}: manages {list(vnfm.managed)}")


def _cmd_solve_tsp(args) -> int:
    instance = _load_instance(args.instance)
    params = TabuParams(stop_patience=args.patience, tabu_tenure=args.tenure,
                        neighborhood_samples=args.samples, seed=args.seed)
    result = two_step_place_detailed(instance, params)
    _print_solution(result.solution)
    print(f"iterations={result.search.iterations}")
    if args.output:
        save_solution(result.solution, args.output)
        print(f"wrote {args.output}")
    return EXIT_OK


def _cmd_solve_exact(args) -> int:
    instance = _load_instance(args.instance)
    budget = OracleBudget(max_nodes=args.max_nodes, time_limit_s=args.time_limit)
    result = solve_exact(instance, budget)
    print(f"status={result.status.value} nodes_explored={result.nodes_explored}")
    if result.solution is None:
        return EXIT_INFEASIBLE
    _print_solution(result.solution)
    if args.output:
        save_solution(result.solution, args.output,
                      extra={"status": result.status.value,
                             "nodes_explored": result.nodes_explored})
        print(f"wrote {args.output}")
    return EXIT_OK


def _cmd_check(args) -> int:
    instance = _load_instance(args.instance)
    solution = load_solution(args.solution)
    report = check_feasibility(instance, solution)
    if report.ok:
        print(f"{args.solution}: feasible (objective={solution.objective})")
        return EXIT_OK
    for entry in report.entries:
        print(entry)
    print(f"{len(report.entries)} violation(s)")
    return EXIT_INFEASIBLE


def _cmd_export_lp(args) -> int:
    path = resolve_instance_path(args.instance)
    instance = load_problem(path)
    output = args.output or str(path.with_suffix(".lp"))
    summary = export_lp(instance, output)
    print(summary.line())
    print(f"wrote {output}")
    return EXIT_OK


def _cmd_experiment(args) -> int:
    config = load_experiment_config(args.config)
    if args.output:
        config = replace(config, output=args.output)
    records = run_experiment(config)
    failed = sum(1 for r in records if r.status != "ok")
    print(f"wrote {config.output}: {len(records)} runs, {failed} failed")
    return EXIT_OK


_COMMANDS = {
    "gen": _cmd_gen,
    "validate": _cmd_validate,
    "solve-tsp": _cmd_solve_tsp,
    "solve-exact": _cmd_solve_exact,
    "check": _cmd_check,
    "export-lp": _cmd_export_lp,
    "experiment": _cmd_experiment,
}


def cli_main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_usage(sys.stderr)
            return EXIT_USAGE
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"manoplace: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InstanceFormatError, SolutionFormatError) as exc:
        print(f"manoplace: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InstanceValidationError as exc:
        print(f"manoplace: invalid instance: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except NoFeasiblePlan as exc:
        print(f"manoplace: no feasible plan: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except InfeasibleDomain as exc:
        print(f"manoplace: infeasible domain: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except OSError as exc:
        print(f"manoplace: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except Exception as exc:  # pragma: no cover - safety net
        print(f"manoplace: internal error: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
