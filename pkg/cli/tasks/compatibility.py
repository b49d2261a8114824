"""
Interface compatibility and Bakry-Emery lower bounds of a single side.
"""
import logging

import pandas as pd

from cdglue.config import get_settings
from cdglue.curvature import positivity_check, ricci_bound_sweep
from cdglue.gluing import compatibility_report

from cli.models import CompatibilityTask, RicciBoundTask
from cli.tasks.base import ScenarioContext, TaskOutcome

logger = logging.getLogger(__name__)


def run_compatibility(task: CompatibilityTask, ctx: ScenarioContext) -> TaskOutcome:
    report = compatibility_report(ctx.glued, task.resolution)
    table = pd.DataFrame([
        {
            'y': ' '.join(f"{v:.6g}" for v in row.y),
            'sff_min_eigenvalue': row.sff_min_eigenvalue,
            'weighted_margin': row.weighted_margin,
            'mean_curvature_sum': row.mean_curvature_sum,
        }
        for row in report.rows
    ])
    return TaskOutcome(report.passed, report.to_dict(), {'compatibility': table})


def run_ricci_bound(task: RicciBoundTask, ctx: ScenarioContext) -> TaskOutcome:
    side = ctx.side(task.side)
    zeros = positivity_check(side, task.resolution)
    if zeros:
        logger.warning("Weight vanishes at %d interior grid points of side %d", len(zeros), task.side)
    result = ricci_bound_sweep(side, task.resolution)
    passed = result.value >= task.K - get_settings().tolerance
    logger.info("Side %d: min Ric_N eigenvalue %.8g against K=%g", task.side, result.value, task.K)
    return TaskOutcome(passed, {**result.to_dict(), 'K': task.K, 'weight_zeros': len(zeros)})
