"""Command-line surface for the package.

Subcommands: ``solve`` a single instance, ``bench`` a full experiment
config, ``topology`` a map, ``validate`` a plan JSON, ``roadmap`` a map's
connectivity graph. Machine-readable JSON goes to stdout (or ``--out``),
diagnostics go to stderr. Exit codes: 0 on success, 1 on a domain failure
(infeasible, timeout, conflicts found), 2 on usage or config errors.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys

from .bench import (ConfigError, aggregate, export, generate_scenario_pairs,
                    load_config, read_records, resolve_data_path,
                    run_experiment)
from .conflicts import (AgentPath, PlanValidationError, TeamPlan,
                        check_path_shape, iter_conflicts, validate_plan)
from .highlevel import Budget, Outcome, Strategy, solve
from .mapio import MapFormatError, ScenarioFormatError, load_map, load_scenario
from .roadmap import (DEFAULT_ROBOT_WIDTH, AgentTask, ProblemInstance,
                      build_roadmap, instance_from_cells)
from .topology import ClassifierConfig, betweenness, classify, emit_heatmap


class CliError(Exception):
    """User-facing failure; message goes to stderr, exit_code to the shell."""

    def __init__(self, message: str, exit_code: int = 2):
        super().__init__(message)
        self.exit_code = exit_code


def _map_name(path: str) -> str:
    return os.path.splitext(os.path.basename(path))[0]


def _load_grid(path: str):
    resolved = resolve_data_path(path)
    try:
        return load_map(resolved)
    except OSError as exc:
        raise CliError(f"cannot read map {path!r}: {exc.strerror or exc}")
    except MapFormatError as exc:
        raise CliError(f"bad map {path!r}: {exc}")


def _build_roadmap(grid, resolution: int, robot_width: float = DEFAULT_ROBOT_WIDTH):
    try:
        return build_roadmap(grid, resolution, robot_width)
    except ValueError as exc:
        raise CliError(str(exc))


def _emit(doc: dict, out: str | None) -> None:
    text = json.dumps(doc, indent=2)
    if out:
        with open(out, "w", encoding="ascii") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _parse_kv_or_json(text: str, source: str) -> dict:
    if text.lstrip().startswith("{"):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise CliError(f"{source}: malformed JSON: {exc}")
        if not isinstance(doc, dict):
            raise CliError(f"{source}: expected a JSON object")
        return doc
    doc = {}
    for idx, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{source} line {idx}: expected key=value")
        key, value = line.split("=", 1)
        doc[key.strip()] = value.strip()
    return doc


# ---------------------------------------------------------------- solve


def cmd_solve(args) -> int:
    if args.agents < 1:
        raise CliError("--agents must be at least 1")
    grid = _load_grid(args.map)
    roadmap = _build_roadmap(grid, args.resolution)
    if args.scen:
        scen_path = resolve_data_path(args.scen)
        try:
            pairs = load_scenario(scen_path, grid)
        except OSError as exc:
            raise CliError(f"cannot read scenario {args.scen!r}: "
                           f"{exc.strerror or exc}")
        except ScenarioFormatError as exc:
            raise CliError(f"bad scenario {args.scen!r}: {exc}")
    else:
        key = f"{args.seed}:{_map_name(args.map)}:0"
        pairs = generate_scenario_pairs(grid, args.agents, key)
    if args.agents > len(pairs):
        raise CliError(f"requested {args.agents} agents but only "
                       f"{len(pairs)} start/goal pairs are available")
    try:
        instance = instance_from_cells(roadmap, pairs[:args.agents])
    except ValueError as exc:
        raise CliError(f"unusable start/goal pairs: {exc}")

    result = solve(instance, args.strategy, Budget(time_limit=args.time_limit))
    doc = result.to_json()
    paths = doc.pop("paths", None)
    print(json.dumps(doc, indent=2))
    if result.plan is not None and args.out:
        full = dict(doc)
        full["paths"] = paths
        full.update({"map": _map_name(args.map),
                     "map_path": os.path.abspath(resolve_data_path(args.map)),
                     "resolution": args.resolution,
                     "agents": args.agents,
                     "scen": args.scen})
        with open(args.out, "w", encoding="ascii") as fh:
            json.dump(full, fh, indent=2)
            fh.write("\n")
        print(f"plan written to {args.out}", file=sys.stderr)
    return 0 if result.outcome is Outcome.SOLVED else 1


# ---------------------------------------------------------------- bench


def cmd_bench(args) -> int:
    try:
        config = load_config(args.config)
    except OSError as exc:
        raise CliError(f"cannot read config {args.config!r}: "
                       f"{exc.strerror or exc}")
    except ConfigError as exc:
        raise CliError(f"bad config {args.config!r}: {exc}")
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.time_limit is not None:
        overrides["time_limit"] = args.time_limit
    if overrides:
        try:
            config = dataclasses.replace(config, **overrides)
        except ConfigError as exc:
            raise CliError(str(exc))

    counts: dict[str, int] = {}
    total = 0
    try:
        for record in run_experiment(config, out_dir=args.out,
                                     workers=args.workers):
            total += 1
            counts[record.outcome] = counts.get(record.outcome, 0) + 1
            print(f"{record.map} r={record.resolution} s={record.scenario} "
                  f"{record.strategy} a={record.agents}: {record.outcome} "
                  f"({record.time_ms:.1f} ms)", file=sys.stderr)
    except (OSError, MapFormatError, ScenarioFormatError, ConfigError) as exc:
        raise CliError(f"benchmark aborted: {exc}")

    # The run stream is duplicate-free by construction, so this cannot raise.
    metrics = aggregate(_read_run_records(args.out))
    agg_path = os.path.join(args.out, "aggregate.json")
    export(metrics, "json", agg_path)
    print(json.dumps({"records": total, "outcomes": counts,
                      "out_dir": args.out, "aggregate": agg_path}, indent=2))
    return 0


def _read_run_records(out_dir: str):
    records = []
    for name in sorted(os.listdir(out_dir)):
        if name.startswith("records-") and name.endswith(".csv"):
            records.extend(read_records(os.path.join(out_dir, name)))
    return records


# ---------------------------------------------------------------- topology


def _thresholds(args) -> ClassifierConfig:
    doc: dict = {}
    if args.thresholds:
        try:
            with open(args.thresholds, encoding="ascii") as fh:
                text = fh.read()
        except OSError as exc:
            raise CliError(f"cannot read thresholds {args.thresholds!r}: "
                           f"{exc.strerror or exc}")
        doc.update(_parse_kv_or_json(text, args.thresholds))
    for item in args.set or []:
        if "=" not in item:
            raise CliError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        doc[key.strip()] = value.strip()

    defaults = ClassifierConfig()
    known = {f.name: type(getattr(defaults, f.name))
             for f in dataclasses.fields(ClassifierConfig)}
    kwargs = {}
    for key, raw in doc.items():
        if key not in known:
            raise CliError(f"unknown classifier threshold {key!r}")
        try:
            kwargs[key] = known[key](raw)
        except (TypeError, ValueError):
            raise CliError(f"threshold {key!r}: cannot read "
                           f"{raw!r} as {known[key].__name__}")
    return ClassifierConfig(**kwargs)


def cmd_topology(args) -> int:
    grid = _load_grid(args.map)
    roadmap = _build_roadmap(grid, args.resolution)
    config = _thresholds(args)
    try:
        field = betweenness(roadmap.adjacency, sample=args.sample,
                            seed=args.seed)
        label = classify(roadmap, field, config)
    except ValueError as exc:
        raise CliError(str(exc))
    doc = label.to_json()
    doc["map"] = _map_name(args.map)
    doc["resolution"] = args.resolution
    if args.out:
        doc["heatmap"] = args.out
        doc["heatmap_rows"] = emit_heatmap(roadmap, field, args.out)
    print(json.dumps(doc, indent=2))
    return 0


# ---------------------------------------------------------------- validate


def _paths_from_doc(doc, source: str) -> list[AgentPath]:
    if not isinstance(doc, dict) or "paths" not in doc:
        raise CliError(f"{source}: plan JSON needs a 'paths' array")
    raw = doc["paths"]
    if not isinstance(raw, list) or not raw:
        raise CliError(f"{source}: 'paths' must be a non-empty array")
    paths = []
    for i, entry in enumerate(raw):
        if (not isinstance(entry, dict) or "agent" not in entry
                or "states" not in entry):
            raise CliError(f"{source}: paths[{i}] needs 'agent' and 'states'")
        agent, states = entry["agent"], entry["states"]
        if not isinstance(agent, int):
            raise CliError(f"{source}: paths[{i}].agent must be an integer")
        if (not isinstance(states, list) or not states
                or not all(isinstance(s, int) for s in states)):
            raise CliError(f"{source}: paths[{i}].states must be a non-empty "
                           "array of vertex ids")
        paths.append(AgentPath(agent, tuple(states)))
    return paths


def cmd_validate(args) -> int:
    grid = _load_grid(args.map)
    roadmap = _build_roadmap(grid, args.resolution)
    try:
        with open(args.plan, encoding="utf-8") as fh:
            doc = json.load(fh)
    except OSError as exc:
        raise CliError(f"cannot read plan {args.plan!r}: "
                       f"{exc.strerror or exc}")
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise CliError(f"{args.plan}: malformed JSON: {exc}")
    paths = _paths_from_doc(doc, args.plan)
    plan = TeamPlan(tuple(paths))
    try:
        for path in paths:
            check_path_shape(path, roadmap)
        tasks = tuple(AgentTask(p.agent_id, p.states[0], p.states[-1])
                      for p in paths)
        try:
            instance = ProblemInstance(roadmap, tasks)
        except ValueError:
            # Endpoints overlap, so no well-formed instance exists; the
            # overlaps themselves surface below as vertex conflicts.
            conflicts = list(iter_conflicts(plan, roadmap))
        else:
            conflicts = validate_plan(plan, roadmap, instance)
    except PlanValidationError as exc:
        raise CliError(f"{args.plan}: invalid plan: {exc}")
    report = {
        "map": _map_name(args.map),
        "resolution": args.resolution,
        "agents": len(paths),
        "cost": plan.cost,
        "makespan": plan.makespan,
        "conflict_count": len(conflicts),
        "conflicts": [c.to_json() for c in conflicts],
    }
    print(json.dumps(report, indent=2))
    return 0 if not conflicts else 1


# ---------------------------------------------------------------- roadmap


def cmd_roadmap(args) -> int:
    grid = _load_grid(args.map)
    roadmap = _build_roadmap(grid, args.resolution, args.robot_width)
    _emit(roadmap.to_json_dict(), args.out)
    return 0


# ---------------------------------------------------------------- parser


def _add_map_flags(sub, resolution_default: int = 1) -> None:
    sub.add_argument("--map", required=True, help="map file (.map); bare "
                     "names also resolve under $MAPF_LAB_DATA")
    sub.add_argument("--resolution", type=int, default=resolution_default,
                     metavar="R", help="roadmap vertices per cell side "
                     "(default %(default)s)")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mapf-lab",
        description="Multi-agent pathfinding laboratory: solve instances, "
                    "run benchmark suites, analyze map topology, and audit "
                    "plans.")
    sub = parser.add_subparsers(dest="command", required=True,
                                metavar="command")

    p = sub.add_parser("solve", help="solve one instance and print the result")
    _add_map_flags(p)
    p.add_argument("--scen", help="scenario file (.scen); omit to sample "
                   "start/goal pairs with --seed")
    p.add_argument("--agents", type=int, required=True, metavar="N",
                   help="number of agents")
    p.add_argument("--strategy", choices=[s.value for s in Strategy],
                   default=Strategy.CBS.value,
                   help="conflict resolution strategy (default %(default)s)")
    p.add_argument("--time-limit", type=float, default=60.0, metavar="SEC",
                   help="wall-clock budget (default %(default)s)")
    p.add_argument("--seed", type=int, default=0,
                   help="pair-sampling seed when --scen is omitted")
    p.add_argument("--out", metavar="FILE",
                   help="write the full plan JSON here when solved")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("bench", help="run an experiment config end to end")
    p.add_argument("config", help="experiment config file (JSON or key=value)")
    p.add_argument("--out", required=True, metavar="DIR",
                   help="run directory for records, plans, and aggregate.json")
    p.add_argument("--workers", type=int, default=1, metavar="N",
                   help="parallel worker processes (default %(default)s)")
    p.add_argument("--seed", type=int, help="override the config seed")
    p.add_argument("--time-limit", type=float, metavar="SEC",
                   help="override the config per-attempt time limit")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("topology", help="label a map's structure from its "
                       "betweenness field")
    _add_map_flags(p)
    p.add_argument("--thresholds", metavar="FILE",
                   help="classifier thresholds (JSON or key=value)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override one classifier threshold (repeatable)")
    p.add_argument("--sample", type=int, metavar="N",
                   help="estimate betweenness from N sampled sources")
    p.add_argument("--seed", type=int, default=0, help="sampling seed")
    p.add_argument("--out", metavar="FILE", help="write an x,y,bc heatmap CSV")
    p.set_defaults(func=cmd_topology)

    p = sub.add_parser("validate", help="audit a plan JSON for conflicts")
    _add_map_flags(p)
    p.add_argument("plan", help="plan JSON produced by solve or bench")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("roadmap", help="emit a map's roadmap as JSON")
    _add_map_flags(p)
    p.add_argument("--robot-width", type=float, default=DEFAULT_ROBOT_WIDTH,
                   metavar="W", help="square body width in cell units "
                   "(default %(default)s)")
    p.add_argument("--out", metavar="FILE",
                   help="write JSON here instead of stdout")
    p.set_defaults(func=cmd_roadmap)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        code = exc.code
        return code if isinstance(code, int) else 2
    try:
        return args.func(args)
    except CliError as exc:
        print(f"mapf-lab: error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
