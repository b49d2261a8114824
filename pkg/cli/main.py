"""
Command line entry point.

    python -m cli run scenario.yaml --out reports/
    python -m cli run --builtin hemisphere-doubling
    python -m cli builtins
    python -m cli describe disk-doubling
"""
import argparse
import logging
import sys
import time
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import pandas as pd
import yaml

from cdglue import __version__
from cdglue.config import get_settings, override_settings
from cdglue.errors import CdGlueError, ScenarioError

from cli.builtins import BUILTINS, list_builtins
from cli.models import Report, Scenario, TaskResult
from cli.tasks import RUNNERS, ScenarioContext
from cli.utils import load_scenario, parse_scenario, suggest, write_report, write_tables

logger = logging.getLogger(__name__)

EXIT_PASS = 0
EXIT_FAIL = 1
EXIT_INPUT = 2
EXIT_NUMERICAL = 3


def _run_task(index: int, task, ctx: ScenarioContext) -> Tuple[TaskResult, Dict[str, pd.DataFrame]]:
    logger.info("[TASK %d] %s", index, task.kind)
    try:
        outcome = RUNNERS[task.kind](task, ctx)
    except CdGlueError as e:
        logger.error("[TASK %d] %s failed with %s error: %s", index, task.kind, e.category, e)
        return TaskResult(kind=task.kind, status="error", error_category=e.category, error=str(e)), {}
    except (ValueError, KeyError) as e:
        # argument checks inside the engine
        logger.error("[TASK %d] %s rejected its input: %s", index, task.kind, e)
        return TaskResult(kind=task.kind, status="error", error_category="input", error=str(e)), {}
    status = "pass" if outcome.passed else "fail"
    logger.info("[TASK %d] %s: %s", index, task.kind, status)
    return TaskResult(kind=task.kind, status=status, result=outcome.result), outcome.tables


def run_scenario(scenario: Scenario) -> Tuple[Report, Dict[str, pd.DataFrame]]:
    """Run every task in order; a failing task never stops the ones after it."""
    results: List[TaskResult] = []
    tables: Dict[str, pd.DataFrame] = {}
    timing: Dict[str, float] = {}
    overrides = scenario.settings.model_dump(exclude_none=True)
    with override_settings(**overrides):
        ctx = ScenarioContext(scenario)
        for index, task in enumerate(scenario.tasks):
            started = time.perf_counter()
            result, task_tables = _run_task(index, task, ctx)
            timing[f"{index:02d}-{task.kind}"] = time.perf_counter() - started
            results.append(result)
            for name, frame in task_tables.items():
                tables[f"{index:02d}-{name}"] = frame
    report = Report(
        name=scenario.name,
        version=__version__,
        scenario=scenario.model_dump(mode="json"),
        tasks=results,
        passed=all(r.status == "pass" for r in results),
        timing=timing,
    )
    return report, tables


def exit_status(report: Report) -> int:
    categories = {r.error_category for r in report.tasks if r.status == "error"}
    if "input" in categories:
        return EXIT_INPUT
    if "numerical" in categories:
        return EXIT_NUMERICAL
    return EXIT_PASS if report.passed else EXIT_FAIL


def _print_summary(report: Report) -> None:
    print(f"{report.name} (cdglue {report.version})")
    for index, task in enumerate(report.tasks):
        line = f"  [{index:02d}] {task.kind:<14} {task.status.upper()}"
        if task.error:
            line += f"  {task.error_category}: {task.error.splitlines()[0]}"
        print(line)
    print("PASS" if report.passed else "FAIL")


def command_run(args) -> int:
    try:
        if args.builtin:
            scenario = parse_scenario({'name': args.builtin, 'builtin': args.builtin})
        elif args.file:
            scenario = load_scenario(Path(args.file))
        else:
            raise ScenarioError("Give a scenario file or --builtin")
    except ScenarioError as e:
        logger.error("%s", e)
        print(str(e), file=sys.stderr)
        return EXIT_INPUT
    if not scenario.tasks:
        logger.warning("Scenario %s has no tasks", scenario.name)

    report, tables = run_scenario(scenario)
    out = Path(args.out)
    write_report(report, out / f"{scenario.name}.json")
    for path in write_tables(tables, out, scenario.name):
        logger.info("Table written to %s", path)
    _print_summary(report)
    return exit_status(report)


def command_builtins(args) -> int:
    for name, description in list_builtins():
        print(f"{name:<22} {description}")
    return EXIT_PASS


def command_describe(args) -> int:
    if args.name not in BUILTINS:
        hint = suggest(args.name, BUILTINS)
        print(f"Unknown builtin '{args.name}'" + (f" (did you mean '{hint}'?)" if hint else ""), file=sys.stderr)
        return EXIT_INPUT
    description, body = BUILTINS[args.name]
    print(yaml.safe_dump({'name': args.name, 'description': description, **body}, sort_keys=False), end="")
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cdglue", description="Curvature-dimension checks for glued weighted manifolds")
    parser.add_argument("--verbose", action="store_true", help="debug logging for the engine")
    commands = parser.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help="run a scenario file")
    run.add_argument("file", nargs="?", help="YAML or JSON scenario")
    run.add_argument("--builtin", help="run a builtin scenario by name")
    run.add_argument("--out", default="reports", help="directory for the JSON report and CSV tables")
    run.set_defaults(handler=command_run)

    catalog = commands.add_parser("builtins", help="list builtin scenarios")
    catalog.set_defaults(handler=command_builtins)

    describe = commands.add_parser("describe", help="print a builtin scenario as YAML")
    describe.add_argument("name")
    describe.set_defaults(handler=command_describe)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=getattr(logging, get_settings().log_level.upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.StreamHandler(sys.stdout)
        ]
    )
    if args.verbose:
        logging.getLogger('cdglue').setLevel(logging.DEBUG)
    return args.handler(args)


if __name__ == "__main__":
    sys.exit(main())
