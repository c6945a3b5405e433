"""Command line entry point: ``subterra <command> [options]``."""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

from . import pipeline
from .config import ConfigError, RunConfig, load_config
from .kpi import format_comparison, load_report
from .scenario import ScenarioKind

COMMANDS = ("generate", "plan", "simulate", "shuttle", "report", "compare", "run")


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration")
    common.add_argument("--scenario", help="bc, shu, whu, whu-b, all, or a comma list")
    common.add_argument("--seed", type=int, help="master seed")
    common.add_argument("--replications", type=int, help="replications per scenario")
    common.add_argument("--out", help="output directory")
    common.add_argument("-q", "--quiet", action="store_true", help="only log warnings")

    ap = argparse.ArgumentParser(prog="subterra", description="Urban freight simulation with a tunnel shuttle stage.")
    sub = ap.add_subparsers(dest="command", required=True)
    helps = {
        "generate": "draw demand for each scenario and replication",
        "plan": "build carrier plans and route them",
        "simulate": "execute planned tours on the time-dependent network",
        "shuttle": "derive, route and execute shuttle shipments",
        "report": "compute indicators per run and replication means",
        "compare": "compare two scenarios' mean indicators",
        "run": "all stages end to end",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common], help=helps[name])
        if name == "compare":
            p.add_argument("base", help="base scenario, e.g. bc")
            p.add_argument("variant", help="variant scenario, e.g. whu-b")
    return ap


def _config(args) -> RunConfig:
    return load_config(args.config, {"seed": args.seed, "replications": args.replications,
                                     "scenarios": args.scenario, "out": args.out})


def _each(cfg: RunConfig, world, stage) -> None:
    for kind in cfg.scenarios:
        for rep in range(cfg.replications):
            stage(cfg, world, kind, rep)


def main(argv: Sequence[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING if args.quiet else logging.INFO, stream=sys.stderr,
                        format="%(levelname)s %(message)s")
    try:
        cfg = _config(args)
    except ConfigError as exc:
        print(f"error: stage config failed: {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "compare":
            base, variant = ScenarioKind.parse(args.base), ScenarioKind.parse(args.variant)
            root = Path(cfg.out)
            b = load_report(root / base.slug / "kpi_mean.json")
            v = load_report(root / variant.slug / "kpi_mean.json")
            print(format_comparison(b, v))
            return 0
        world = pipeline.load_world(cfg)
        if args.command == "run":
            means = pipeline.run(cfg, world)
            for kind, report in means.items():
                print(f"{kind.slug}: total_km={report.total_distance_km:.1f} "
                      f"co2_t={report.co2_total_t:.4f}")
            return 0
        stage = {"generate": pipeline.stage_generate, "plan": pipeline.stage_plan,
                 "simulate": pipeline.stage_simulate, "shuttle": pipeline.stage_shuttle,
                 "report": pipeline.stage_report}[args.command]
        _each(cfg, world, stage)
        if args.command == "report":
            pipeline.write_means(cfg, cfg.scenarios)
        return 0
    except pipeline.StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: stage setup failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
