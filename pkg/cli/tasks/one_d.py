"""
One-dimensional tasks: (K,N)-concavity, gluing of intervals and the
entropy inequality along Wasserstein geodesics.
"""
import logging
from typing import Callable, Union

import numpy as np
import pandas as pd

from cdglue.expression import parse_field
from cdglue.needle import MmInterval, glue_1d, kn_concavity_check, mirror_density, one_d_bakry_emery_margin
from cdglue.wasserstein import wasserstein_1d_cd_check

from cli.models import Block, Glue1DTask, KnConcavityTask, OneDimensional, WassersteinTask
from cli.tasks.base import ScenarioContext, TaskOutcome

logger = logging.getLogger(__name__)


def _interval(task: OneDimensional) -> MmInterval:
    a, b = task.interval
    return MmInterval(a, b, parse_field(task.density, 1), task.K, task.N)


def _marginal(spec: Union[str, Block]) -> Callable[[np.ndarray], np.ndarray]:
    if isinstance(spec, str):
        field = parse_field(spec, 1)
        return lambda x: field.values(np.asarray(x, dtype=float).reshape(-1, 1))
    lo, hi = spec
    return lambda x: np.where((x >= lo) & (x <= hi), 1.0, 0.0)


def run_kn_concavity(task: KnConcavityTask, ctx: ScenarioContext) -> TaskOutcome:
    mm = _interval(task)
    scan = kn_concavity_check(mm, task.samples)
    margin = one_d_bakry_emery_margin(mm)
    return TaskOutcome(scan.passed, {**scan.to_dict(), 'differential_margin': margin.to_dict()})


def run_glue_1d(task: Glue1DTask, ctx: ScenarioContext) -> TaskOutcome:
    a, b = task.interval
    phi0 = parse_field(task.density, 1)
    if task.right_density is None:
        phi1, c = mirror_density(phi0, b), 2.0 * b - a
    else:
        phi1, c = parse_field(task.right_density, 1), task.right_end
    report = glue_1d(phi0, phi1, a, b, c, task.K, task.N, task.samples)
    return TaskOutcome(report.passed, report.to_dict())


def run_wasserstein(task: WassersteinTask, ctx: ScenarioContext) -> TaskOutcome:
    report = wasserstein_1d_cd_check(_interval(task), _marginal(task.mu0), _marginal(task.mu1), task.times)
    table = pd.DataFrame([{'t': r.t, 'entropy': r.entropy, 'bound': r.bound, 'violation': r.violation}
                          for r in report.rows])
    return TaskOutcome(report.passed, report.to_dict(), {'wasserstein': table})
