"""
Warped products over one side and the criteria on its warping function.
"""
import logging

from cdglue.curvature import albi_check, weight_concavity_check
from cdglue.expression import parse_field
from cdglue.warp import (
    WarpedProductSpec,
    collapse_identity_check,
    fiber_radius,
    ketterer_hypothesis_check,
    warped_interface_margin,
)

from cli.models import WarpTask
from cli.tasks.base import ScenarioContext, TaskOutcome

logger = logging.getLogger(__name__)


def run_warp(task: WarpTask, ctx: ScenarioContext) -> TaskOutcome:
    """
    Always checks the collapse identity; the other criteria run when their
    parameters are given:

    - kappa: concavity of f and the gradient bound on zero-set faces
    - kappa_bar, eta: weight concavity, plus the fiber radius when L is set
    - k, L: the upper bound and gradient criterion on f
    """
    base = ctx.side(task.side)
    warping = parse_field(task.warping, base.dim) if task.warping else None
    spec = WarpedProductSpec(base, task.radius, warping)
    result = {'fiber_dim': spec.fiber_dim}

    collapse = collapse_identity_check(spec, task.resolution)
    result['collapse'] = collapse.to_dict()
    verdicts = [collapse.passed]

    if task.kappa is not None:
        ketterer = ketterer_hypothesis_check(spec, task.kappa, task.K_F, task.resolution)
        result['ketterer'] = ketterer.to_dict()
        verdicts.append(ketterer.passed)

    if task.kappa_bar is not None and task.eta is not None:
        concavity = weight_concavity_check(base, task.kappa_bar, task.eta, task.resolution)
        result['weight_concavity'] = concavity.to_dict()
        verdicts.append(concavity.passed)
        if task.L is not None:
            result['fiber_radius'] = fiber_radius(base, task.kappa_bar, task.eta, task.L,
                                                  task.resolution).to_dict()

    if task.k is not None and task.L is not None:
        albi = albi_check(base, task.k, task.L, task.resolution)
        result['albi'] = albi.to_dict()
        verdicts.append(albi.passed)

    if len(ctx.scenario.sides) == 2 and warping is None:
        rows = warped_interface_margin(ctx.glued, task.resolution)
        result['interface_margin_deviation'] = max(row.deviation for row in rows)

    logger.info("[WARP] %d criteria checked, pass=%s", len(verdicts), all(verdicts))
    return TaskOutcome(all(verdicts), result)
