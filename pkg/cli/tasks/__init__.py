"""
Task runners, one module per task family.

A runner takes the validated task model and the scenario context and
returns a :class:`TaskOutcome`; engine errors propagate to the caller.
"""
from typing import Callable, Dict

from cli.tasks.base import ScenarioContext, TaskOutcome
from cli.tasks import compatibility, needle, one_d, smoothing, warp

RUNNERS: Dict[str, Callable[..., TaskOutcome]] = {
    "compatibility": compatibility.run_compatibility,
    "ricci-bound": compatibility.run_ricci_bound,
    "smooth-sweep": smoothing.run_smooth_sweep,
    "c1-matching": smoothing.run_c1_matching,
    "geodesic": smoothing.run_geodesic,
    "needle": needle.run_needle,
    "tilted-needle": needle.run_tilted_needle,
    "warp": warp.run_warp,
    "kn-concavity": one_d.run_kn_concavity,
    "glue-1d": one_d.run_glue_1d,
    "wasserstein": one_d.run_wasserstein,
}

__all__ = ["RUNNERS", "ScenarioContext", "TaskOutcome"]
