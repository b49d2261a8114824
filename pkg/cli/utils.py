"""
Scenario loading and report writing.
"""
import json
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Set

import pandas as pd
import yaml
from pydantic import BaseModel, ValidationError
from rapidfuzz import fuzz

from cdglue.errors import ScenarioError

from cli import models
from cli.builtins import BUILTINS, builtin_scenario
from cli.models import Report, Scenario

logger = logging.getLogger(__name__)

SUGGESTION_CUTOFF = 60.0


def _known_keys() -> Set[str]:
    keys = set()
    for value in vars(models).values():
        if isinstance(value, type) and issubclass(value, BaseModel):
            keys.update(value.model_fields)
    return keys


def suggest(word: str, candidates: Iterable[str]) -> Optional[str]:
    """Closest candidate by edit similarity, or None below the cutoff."""
    best, best_score = None, SUGGESTION_CUTOFF
    for candidate in sorted(candidates):
        score = fuzz.ratio(word, candidate)
        if score > best_score:
            best, best_score = candidate, score
    return best


def _scenario_error(error: ValidationError) -> ScenarioError:
    known = _known_keys()
    keys: List[str] = []
    lines = []
    for item in error.errors():
        path = ".".join(str(part) for part in item["loc"])
        keys.append(path)
        message = f"{path}: {item['msg']}"
        if item["type"] == "extra_forbidden":
            hint = suggest(str(item["loc"][-1]), known)
            if hint:
                message += f" (did you mean '{hint}'?)"
        lines.append(message)
    return ScenarioError("Invalid scenario:\n  " + "\n  ".join(lines), keys)


def parse_scenario(data) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("Scenario must be a mapping at the top level")
    try:
        scenario = Scenario.model_validate(data)
    except ValidationError as e:
        raise _scenario_error(e) from e
    return resolve_builtin(scenario)


def load_scenario(path: Path) -> Scenario:
    """Read a YAML or JSON scenario file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ScenarioError(f"Cannot read scenario file {path}: {e}") from e
    try:
        data = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise ScenarioError(f"Cannot parse {path}: {e}") from e
    logger.info("Loaded scenario file %s", path)
    return parse_scenario(data)


def resolve_builtin(scenario: Scenario) -> Scenario:
    """Fill empty sides and tasks from the named builtin."""
    if scenario.builtin is None:
        return scenario
    if scenario.builtin not in BUILTINS:
        hint = suggest(scenario.builtin, BUILTINS)
        message = f"Unknown builtin '{scenario.builtin}'"
        raise ScenarioError(message + (f" (did you mean '{hint}'?)" if hint else ""), ["builtin"])
    base = builtin_scenario(scenario.builtin)
    return scenario.model_copy(update={
        'description': scenario.description or base.description,
        'sides': scenario.sides or base.sides,
        'tasks': scenario.tasks or base.tasks,
    })


def write_report(report: Report, path: Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(report.model_dump_json(indent=2), encoding="utf-8")
    logger.info("Report written to %s", path)


def write_tables(tables: Dict[str, pd.DataFrame], directory: Path, prefix: str) -> List[Path]:
    """One CSV per table, named <prefix>-<table>.csv."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for name, frame in tables.items():
        target = directory / f"{prefix}-{name}.csv"
        frame.to_csv(target, index=False)
        written.append(target)
    return written
