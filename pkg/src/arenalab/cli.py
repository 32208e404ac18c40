"""Command line interface.

    arenalab validate FILE [--spawn-check] [--seed S]
    arenalab run --config F --agent A [--episodes N] [--seed S] [--resolution K]
    arenalab gen maze --kind 2x2|3x3|scrambled|circular [--seed S] -o FILE
    arenalab gen curriculum [--levels N] [--seed S] -o DIR
    arenalab gen battery [--seed S] -o DIR
    arenalab curriculum --dir DIR --agent A [--threshold T] [--window W]
    arenalab eval --manifest F --agent A --report out.json
    arenalab serve [--port P] [--host H] [--max-sessions N]

Every command exits 0 on success and 1 on failure, with errors on stderr.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

from .agents import make_agent
from .configfile import ParseError, load_config, save_config
from .harness import load_manifest, run_battery, run_curriculum, run_episodes
from .model import validate_config
from .seeding import derive_seed
from .spawn import SpawnError, build_world
from .taskgen import (GenerationError, MAZE_KINDS, curriculum_levels,
                      gen_maze, gen_sample_battery, write_battery)


def _with_agent(spec: str, seed: int, fn):
    agent = make_agent(spec, seed=seed)
    try:
        return fn(agent)
    finally:
        close = getattr(agent, "close", None)
        if close is not None:
            close()


def _fmt_stat(value: float | None) -> str:
    return "null" if value is None else f"{value:.4f}"


def _cmd_validate(args) -> int:
    doc = load_config(args.file)
    violations = validate_config(doc)
    errors = [v for v in violations if v.severity == "error"]
    if not args.spawn_check:
        for violation in violations:
            print(violation)
        if errors:
            return 1
        n = len(doc.arenas)
        print(f"OK: {args.file} ({n} arena{'s' if n != 1 else ''})")
        return 0

    payload = {
        "file": args.file,
        "violations": [{"severity": v.severity, "message": str(v)}
                       for v in violations],
        "arenas": {},
    }
    failed = bool(errors)
    if not errors:
        for index, spec in sorted(doc.arenas.items()):
            try:
                report = build_world(spec, derive_seed(args.seed, index)).report
                payload["arenas"][str(index)] = {
                    "placed": report.placed,
                    "complete": report.complete,
                    "max_attempts": report.max_attempts,
                    "skipped": [{"item": s.item, "item_index": s.item_index,
                                 "instance_index": s.instance_index,
                                 "reason": s.reason} for s in report.skipped],
                }
            except SpawnError as exc:
                failed = True
                payload["arenas"][str(index)] = {"error": exc.reason,
                                                 "message": str(exc)}
    print(json.dumps(payload, indent=2))
    return 1 if failed else 0


def _cmd_run(args) -> int:
    doc = load_config(args.config)

    def go(agent):
        return run_episodes(agent, doc, episodes=args.episodes,
                            seed=args.seed, resolution=args.resolution,
                            json_path=args.json, csv_path=args.csv)

    stats = _with_agent(args.agent, args.seed, go)
    print(f"episodes: {stats.episodes}")
    print(f"average reward: {_fmt_stat(stats.average_reward)}")
    print(f"success rate: {_fmt_stat(stats.success_rate)}")
    return 0


def _cmd_gen_maze(args) -> int:
    save_config(gen_maze(args.kind, args.seed), args.out)
    print(args.out)
    return 0


def _cmd_gen_curriculum(args) -> int:
    levels = curriculum_levels(args.seed)
    if not 1 <= args.levels <= len(levels):
        raise ValueError(f"--levels must be 1..{len(levels)}, "
                         f"got {args.levels}")
    os.makedirs(args.out, exist_ok=True)
    for entry in levels[:args.levels]:
        path = os.path.join(args.out, f"level-{entry.level:02d}.yml")
        save_config(entry.doc, path)
        print(path)
    return 0


def _cmd_gen_battery(args) -> int:
    os.makedirs(args.out, exist_ok=True)
    manifest = write_battery(gen_sample_battery(args.seed), args.out)
    print(manifest)
    return 0


def _cmd_curriculum(args) -> int:
    names = sorted(name for name in os.listdir(args.dir)
                   if name.endswith((".yml", ".yaml")))
    if not names:
        raise ValueError(f"no level files (*.yml) in {args.dir}")
    levels = [load_config(os.path.join(args.dir, name)) for name in names]

    def go(agent):
        return run_curriculum(levels, agent, episodes=args.episodes,
                              seed=args.seed, threshold=args.threshold,
                              window=args.window,
                              resolution=args.resolution,
                              json_path=args.json)

    result = _with_agent(args.agent, args.seed, go)
    reached = [e.level for e in result.episodes]
    for level, name in enumerate(names):
        count = reached.count(level)
        if count:
            print(f"level {level} ({name}): {count} episodes")
    print(f"final level: {result.final_level} ({names[result.final_level]})")
    return 0


def _cmd_eval(args) -> int:
    entries = load_manifest(args.manifest)

    def go(agent):
        return run_battery(entries, agent, seed=args.seed,
                           resolution=args.resolution,
                           json_path=args.report, csv_path=args.csv)

    report = _with_agent(args.agent, args.seed, go)
    for category in report.categories:
        print(f"{category.category}: pass rate "
              f"{category.pass_rate:.2f}, average reward "
              f"{category.average_reward:.3f}")
    print(f"overall: {_fmt_stat(report.overall_score)}")
    if args.report:
        print(f"report: {args.report}")
    return 0


def _cmd_serve(args) -> int:
    from .server import Server
    server = Server(host=args.host, port=args.port,
                    max_sessions=args.max_sessions)
    server.start()
    print(f"AAIP/1 server on {args.host}:{server.port} "
          f"(max {args.max_sessions} sessions)")
    try:
        while True:
            time.sleep(3600)
    except KeyboardInterrupt:
        return 0
    finally:
        server.stop()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="arenalab",
        description="Deterministic food-retrieval arena: validate configs, "
                    "run agents, generate tasks, serve the wire protocol.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a config file")
    p.add_argument("file")
    p.add_argument("--spawn-check", action="store_true",
                   help="also build every arena and print a JSON spawn report")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("run", help="run episodes with one agent")
    p.add_argument("--config", required=True)
    p.add_argument("--agent", default="random",
                   help="null, random, greedy, or remote:HOST:PORT")
    p.add_argument("--episodes", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--resolution", type=int, default=84)
    p.add_argument("--json", metavar="FILE", help="write the episode log here")
    p.add_argument("--csv", metavar="FILE")
    p.set_defaults(func=_cmd_run)

    gen = sub.add_parser("gen", help="generate task configs")
    gen_sub = gen.add_subparsers(dest="generator", required=True)
    p = gen_sub.add_parser("maze", help="one maze config")
    p.add_argument("--kind", choices=MAZE_KINDS, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--out", required=True, metavar="FILE")
    p.set_defaults(func=_cmd_gen_maze)
    p = gen_sub.add_parser("curriculum", help="ordered wall-maze levels")
    p.add_argument("--levels", type=int, default=13)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--out", required=True, metavar="DIR")
    p.set_defaults(func=_cmd_gen_curriculum)
    p = gen_sub.add_parser("battery", help="sample test battery + manifest")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--out", required=True, metavar="DIR")
    p.set_defaults(func=_cmd_gen_battery)

    p = sub.add_parser("curriculum", help="train through ordered levels")
    p.add_argument("--dir", required=True,
                   help="directory of level configs, run in sorted order")
    p.add_argument("--agent", default="random")
    p.add_argument("--threshold", type=float, default=0.85)
    p.add_argument("--window", type=int, default=600)
    p.add_argument("--episodes", type=int, default=1000,
                   help="total episode budget")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--resolution", type=int, default=84)
    p.add_argument("--json", metavar="FILE")
    p.set_defaults(func=_cmd_curriculum)

    p = sub.add_parser("eval", help="score an agent on a battery manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--agent", default="random")
    p.add_argument("--report", metavar="FILE",
                   help="write the JSON report here")
    p.add_argument("--csv", metavar="FILE")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--resolution", type=int, default=84)
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("serve", help="run the AAIP/1 session server")
    p.add_argument("--port", type=int, default=7171)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--max-sessions", type=int, default=32)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ParseError, SpawnError, GenerationError, ValueError,
            ConnectionError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
