"""
Shared state for the tasks of one scenario.
"""
import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List

import pandas as pd

from cdglue.curvature import WeightedManifold
from cdglue.errors import ScenarioError
from cdglue.gluing import CollarGluedSpace, assemble

from cli.models import Scenario

logger = logging.getLogger(__name__)


@dataclass
class TaskOutcome:
    """Verdict, JSON-ready details and optional tables written as CSV."""
    passed: bool
    result: Dict = field(default_factory=dict)
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)


class ScenarioContext:
    """Builds the sides and the glued space on first use."""

    def __init__(self, scenario: Scenario):
        self.scenario = scenario

    @cached_property
    def sides(self) -> List[WeightedManifold]:
        if not self.scenario.sides:
            raise ScenarioError("This task needs at least one side", ["sides"])
        return [spec.to_manifold() for spec in self.scenario.sides]

    def side(self, index: int) -> WeightedManifold:
        if index >= len(self.sides):
            raise ScenarioError(f"Scenario has no side {index}", ["side"])
        return self.sides[index]

    @cached_property
    def glued(self) -> CollarGluedSpace:
        if len(self.scenario.sides) != 2:
            raise ScenarioError("This task needs two sides to glue", ["sides"])
        logger.info("[ASSEMBLE] gluing the two sides of %s", self.scenario.name)
        return assemble(*self.sides)
