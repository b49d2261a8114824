"""
Needle densities across the interface, straight and tilted.
"""
import logging

import numpy as np
import pandas as pd

from cdglue.disintegration import disintegrate_signed_distance, logderiv_vs_meancurv, tilted_needle_check
from cdglue.needle import needle_jump_check

from cli.models import NeedleTask, TiltedNeedleTask
from cli.tasks.base import ScenarioContext, TaskOutcome

logger = logging.getLogger(__name__)


def run_needle(task: NeedleTask, ctx: ScenarioContext) -> TaskOutcome:
    """Disintegrate along the normal lines through a few interface points."""
    gs = ctx.glued
    N = gs.N if task.N is None else task.N
    ys = np.asarray(task.y, dtype=float) if task.y is not None else gs.y_grid(task.y_resolution)
    rows = []
    passed = True
    for y in ys:
        needle = disintegrate_signed_distance(gs, y)
        jump = needle_jump_check(needle, task.K, N, task.samples)
        logderiv = logderiv_vs_meancurv(gs, y, needle)
        passed = passed and jump.passed and logderiv.passed
        rows.append({
            'y': [float(v) for v in y],
            'h0': needle.value_at_zero,
            'jump': jump.to_dict(),
            'logderiv': logderiv.to_dict(),
        })
    table = pd.DataFrame([
        {
            'y': ' '.join(f"{v:.6g}" for v in row['y']),
            'h0': row['h0'],
            'd_minus': row['jump']['d_minus'],
            'd_plus': row['jump']['d_plus'],
            'left_violation': row['jump']['left']['max_violation'],
            'right_violation': row['jump']['right']['max_violation'],
            'logderiv_deviation': row['logderiv']['deviation'],
        }
        for row in rows
    ])
    return TaskOutcome(passed, {'K': task.K, 'N': N, 'needles': rows}, {'needle': table})


def run_tilted_needle(task: TiltedNeedleTask, ctx: ScenarioContext) -> TaskOutcome:
    report = tilted_needle_check(ctx.glued, task.y, task.v, task.b)
    return TaskOutcome(report.passed, report.to_dict())
