"""
Smoothing of the glued metric and geodesics across the interface.
"""
import logging

import numpy as np
import pandas as pd

from cdglue.config import get_settings
from cdglue.geodesic import geodesic_integrate
from cdglue.smoothing import SmoothingProfile, SweepGrid, c1_matching_check, deform, smoothing_sweep

from cli.models import C1MatchingTask, GeodesicTask, SmoothSweepTask
from cli.tasks.base import ScenarioContext, TaskOutcome

logger = logging.getLogger(__name__)

SWEEP_COLUMNS = ['delta', 'sup_metric_distance', 'min_bakry_emery_eig', 'epsilon']


def run_smooth_sweep(task: SmoothSweepTask, ctx: ScenarioContext) -> TaskOutcome:
    gs = ctx.glued
    sweep = smoothing_sweep(gs, gs.N, task.K, task.deltas, SweepGrid(y_resolution=task.y_resolution),
                            C=task.C, sign=task.sign)
    failed = [row.delta for row in sweep.rows if row.error]
    final = sweep.rows[-1]
    within = task.epsilon_max is None or (np.isfinite(final.epsilon) and final.epsilon <= task.epsilon_max)
    close = task.distance_max is None or (
        np.isfinite(final.sup_metric_distance) and final.sup_metric_distance <= task.distance_max)
    passed = not failed and sweep.distance_nonincreasing and sweep.epsilon_decreasing and within and close
    if failed:
        logger.warning("[SWEEP] %d deltas failed: %s", len(failed), failed)
    table = pd.DataFrame([row.to_dict() for row in sweep.rows])[SWEEP_COLUMNS]
    result = {
        'K': task.K,
        'N': gs.N,
        'rows': [row.to_dict() for row in sweep.rows],
        'distance_nonincreasing': sweep.distance_nonincreasing,
        'epsilon_decreasing': sweep.epsilon_decreasing,
        'final_epsilon': final.epsilon,
        'epsilon_max': task.epsilon_max,
        'final_distance': final.sup_metric_distance,
        'distance_max': task.distance_max,
    }
    return TaskOutcome(passed, result, {'smooth-sweep': table})


def run_c1_matching(task: C1MatchingTask, ctx: ScenarioContext) -> TaskOutcome:
    settings = get_settings()
    sign = settings.profile_sign if task.sign is None else task.sign
    profile = SmoothingProfile(task.delta, settings.profile_constant, sign)
    report = c1_matching_check(deform(ctx.glued, profile), task.resolution)
    logger.info("[SWEEP] normal derivative jump %.3g -> %.3g", report.jump_before, report.jump_after)
    return TaskOutcome(report.passed, {**report.to_dict(), 'delta': task.delta})


def run_geodesic(task: GeodesicTask, ctx: ScenarioContext) -> TaskOutcome:
    metric = ctx.glued if len(ctx.scenario.sides) == 2 else ctx.side(0).chart
    path = geodesic_integrate(metric, task.start, task.velocity, task.length, task.step)
    result = path.to_dict()
    passed = not path.truncated
    if task.expected_end is not None:
        error = float(np.max(np.abs(path.endpoint - np.asarray(task.expected_end, dtype=float))))
        result['end_error'] = error
        passed = passed and error <= task.end_tolerance
    return TaskOutcome(passed, result)
