"""
Builtin scenarios.

All two-sided builtins are collars: the last coordinate is the distance to
the glue face x<n> = 0 and the first runs along the interface.
"""
import math
from typing import Dict, List, Tuple

from cli.models import Scenario

TWO_PI = 2 * math.pi


def _collar(metric: List[str], depth: float, weight: str = "1", N: float = 2.0) -> dict:
    return {
        "dim": 2,
        "domain": [[0.0, TWO_PI], [0.0, depth]],
        "metric": metric,
        "weight": weight,
        "N": N,
        "faces": [{"axis": 2, "side": "min", "role": "glue"}],
    }


def _doubled(metric: List[str], depth: float, weight: str = "1", N: float = 2.0) -> List[dict]:
    side = _collar(metric, depth, weight, N)
    return [side, dict(side)]


# Each entry: (one-line description, scenario body)
BUILTINS: Dict[str, Tuple[str, dict]] = {
    "disk-doubling": (
        "Two flat unit disks glued along the boundary circle (convex gluing, CD(0,2))",
        {
            "sides": _doubled(["(1-x2)^2", "0", "1"], 0.9),
            "tasks": [
                {"kind": "compatibility"},
                {"kind": "c1-matching", "delta": 0.1},
                {"kind": "smooth-sweep", "deltas": [0.2, 0.1, 0.05], "K": 0.0, "epsilon_max": 0.1,
                 "distance_max": 0.1},
                {"kind": "needle", "K": 0.0},
                {"kind": "tilted-needle", "y": [1.0], "v": [1.0], "b": 0.0},
                {"kind": "geodesic", "start": [1.0, 0.5], "velocity": [0.0, -1.0], "length": 1.0,
                 "expected_end": [1.0, -0.5]},
            ],
        },
    ),
    "annulus-doubling": (
        "Two flat annuli glued along the inner circle (concave gluing, fails)",
        {
            "sides": _doubled(["(1+x2)^2", "0", "1"], 0.9),
            "tasks": [
                {"kind": "compatibility"},
                {"kind": "needle", "K": 0.0},
            ],
        },
    ),
    "hemisphere-doubling": (
        "Two round hemispheres glued along the equator (the round sphere, CD(1,2))",
        {
            "sides": _doubled(["cos(x2)^2", "0", "1"], 1.2),
            "tasks": [
                {"kind": "compatibility"},
                {"kind": "ricci-bound", "K": 1.0},
                {"kind": "smooth-sweep", "deltas": [0.2, 0.1, 0.05], "K": 1.0, "epsilon_max": 0.2,
                 "distance_max": 0.1},
                {"kind": "needle", "K": 1.0},
                {"kind": "geodesic", "start": [1.0, 0.0],
                 "velocity": [math.sqrt(0.5), math.sqrt(0.5)], "length": math.pi / 2,
                 "expected_end": [1.0 + math.pi / 2, math.pi / 4]},
            ],
        },
    ),
    "weighted-disk": (
        "Doubled flat disk with weight Phi = 2 - r (weighted mean curvature zero at the boundary)",
        {
            "sides": _doubled(["(1-x2)^2", "0", "1"], 0.9, weight="1 + x2", N=3.0),
            "tasks": [
                {"kind": "compatibility"},
                {"kind": "needle", "K": 0.0},
            ],
        },
    ),
    "1d-sin-doubling": (
        "sin^2 on [0, pi/2] mirrored at pi/2 (the model space of CD(2,3))",
        {
            "tasks": [
                {"kind": "kn-concavity", "interval": [0.0, math.pi / 2], "density": "sin(x1)^2",
                 "K": 2.0, "N": 3.0},
                {"kind": "glue-1d", "interval": [0.0, math.pi / 2], "density": "sin(x1)^2",
                 "K": 2.0, "N": 3.0},
            ],
        },
    ),
    "1d-affine-fail": (
        "1 - t/2 on [0, 1] mirrored at 1: a valley kink, not CD(0,2)",
        {
            "tasks": [
                {"kind": "glue-1d", "interval": [0.0, 1.0], "density": "1 - x1/2", "K": 0.0, "N": 2.0},
            ],
        },
    ),
    "warped-sphere": (
        "Interval with weight sin^2 collapsed from the warped product (0, pi) x_sin S^2",
        {
            "sides": [{
                "dim": 1,
                "domain": [[0.05, math.pi - 0.05]],
                "metric": ["1"],
                "weight": "sin(x1)^2",
                "N": 3.0,
            }],
            "tasks": [
                {"kind": "ricci-bound", "K": 2.0},
                {"kind": "warp", "kappa": 1.0, "K_F": 1.0, "kappa_bar": -1.0, "eta": 1.0, "k": 1.0, "L": 1.0},
            ],
        },
    ),
    "sin-weight-interval": (
        "[0, pi] with sin^2 dt: (K,N)-concavity and the entropy inequality for CD(2,3)",
        {
            "tasks": [
                {"kind": "kn-concavity", "interval": [0.0, math.pi], "density": "sin(x1)^2",
                 "K": 2.0, "N": 3.0},
                {"kind": "wasserstein", "interval": [0.0, math.pi], "density": "sin(x1)^2",
                 "K": 2.0, "N": 3.0, "mu0": "1 + cos(x1)", "mu1": "1 - cos(x1)"},
            ],
        },
    ),
}


def list_builtins() -> List[Tuple[str, str]]:
    """(name, description) for every builtin, in catalog order."""
    return [(name, description) for name, (description, _) in BUILTINS.items()]


def builtin_scenario(name: str) -> Scenario:
    if name not in BUILTINS:
        raise KeyError(name)
    description, body = BUILTINS[name]
    return Scenario.model_validate({"name": name, "description": description, **body})
