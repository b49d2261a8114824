"""
Pydantic models for scenario files and reports.
"""
import math
from typing import Annotated, Any, Dict, List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from cdglue.chart import MetricChart
from cdglue.curvature import Face, WeightedManifold
from cdglue.expression import parse_field


class StrictModel(BaseModel):
    """Rejects unknown keys."""
    model_config = ConfigDict(extra="forbid")


class FaceSpec(StrictModel):
    """Boundary face; ``axis`` is 1-based like the x<k> coordinates."""
    axis: int = Field(ge=1)
    side: Literal["min", "max"] = "min"
    role: Literal["glue", "free", "zero-set"] = "glue"


class SideSpec(StrictModel):
    """One weighted chart: metric components in upper-triangular row-major order."""
    dim: int = Field(ge=1, le=4)
    domain: List[Tuple[float, float]]
    metric: List[str]
    weight: str = "1"
    N: float
    faces: List[FaceSpec] = []

    @model_validator(mode="after")
    def check_shapes(self):
        if len(self.domain) != self.dim:
            raise ValueError(f"domain needs {self.dim} intervals, got {len(self.domain)}")
        expected = self.dim * (self.dim + 1) // 2
        if len(self.metric) != expected:
            raise ValueError(f"metric needs {expected} components, got {len(self.metric)}")
        for face in self.faces:
            if face.axis > self.dim:
                raise ValueError(f"face axis {face.axis} exceeds dimension {self.dim}")
        return self

    def to_manifold(self) -> WeightedManifold:
        chart = MetricChart.from_strings(self.dim, self.domain, self.metric)
        faces = tuple(Face(f.axis - 1, f.side, f.role) for f in self.faces)
        return WeightedManifold(chart, parse_field(self.weight, self.dim), self.N, faces)


class ScenarioSettings(StrictModel):
    """Per-scenario overrides of the numeric settings."""
    grid_resolution: Optional[int] = Field(None, ge=3)
    tolerance: Optional[float] = Field(None, gt=0)
    mollifier_nodes: Optional[int] = Field(None, ge=8)
    mollifier_width_factor: Optional[float] = Field(None, gt=0, lt=0.5)
    profile_constant: Optional[float] = Field(None, gt=0)
    profile_fc_power: Optional[float] = Field(None, ge=2)
    transport_resolution: Optional[int] = Field(None, ge=4)
    albi_exponent: Optional[int] = Field(None, ge=1, le=2)
    seed: Optional[int] = None
    workers: Optional[int] = Field(None, ge=1)


# --- tasks ---------------------------------------------------------------------

class CompatibilityTask(StrictModel):
    kind: Literal["compatibility"]
    resolution: Optional[int] = Field(None, ge=1)


class RicciBoundTask(StrictModel):
    kind: Literal["ricci-bound"]
    side: int = Field(0, ge=0, le=1)
    K: float
    resolution: Optional[int] = Field(None, ge=1)


class SmoothSweepTask(StrictModel):
    kind: Literal["smooth-sweep"]
    deltas: List[float] = Field(min_length=1)
    K: float
    y_resolution: int = Field(5, ge=1)
    epsilon_max: Optional[float] = None
    distance_max: Optional[float] = Field(None, gt=0)
    C: Optional[float] = Field(None, ge=0)
    sign: Optional[Literal[-1, 0, 1]] = None

    @field_validator("deltas")
    @classmethod
    def decreasing(cls, deltas):
        if any(d <= 0 for d in deltas) or any(b >= a for a, b in zip(deltas, deltas[1:])):
            raise ValueError("deltas must be positive and strictly decreasing")
        return deltas


class C1MatchingTask(StrictModel):
    kind: Literal["c1-matching"]
    delta: float = Field(0.1, gt=0)
    sign: Optional[Literal[-1, 0, 1]] = None
    resolution: Optional[int] = Field(None, ge=1)


class GeodesicTask(StrictModel):
    kind: Literal["geodesic"]
    start: List[float]
    velocity: List[float]
    length: float = Field(gt=0)
    step: float = Field(1e-3, gt=0)
    expected_end: Optional[List[float]] = None
    end_tolerance: float = Field(1e-5, gt=0)


class NeedleTask(StrictModel):
    kind: Literal["needle"]
    K: float
    N: Optional[float] = None
    y: Optional[List[List[float]]] = None
    y_resolution: int = Field(3, ge=1)
    samples: int = Field(4096, ge=16)


class TiltedNeedleTask(StrictModel):
    kind: Literal["tilted-needle"]
    y: List[float]
    v: List[float]
    b: float = Field(ge=0, le=1)


class WarpTask(StrictModel):
    kind: Literal["warp"]
    side: int = Field(0, ge=0, le=1)
    warping: Optional[str] = None
    radius: float = Field(1.0, gt=0)
    kappa: Optional[float] = None
    K_F: float = 1.0
    kappa_bar: Optional[float] = None
    eta: Optional[float] = None
    k: Optional[float] = None
    L: Optional[float] = None
    resolution: Optional[int] = Field(None, ge=1)


class OneDimensional(StrictModel):
    interval: Tuple[float, float]
    density: str
    K: float
    N: float = Field(gt=1)

    @field_validator("interval")
    @classmethod
    def ordered(cls, interval):
        if not interval[0] < interval[1]:
            raise ValueError(f"empty interval {interval}")
        return interval


class KnConcavityTask(OneDimensional):
    kind: Literal["kn-concavity"]
    samples: int = Field(4096, ge=16)


class Glue1DTask(OneDimensional):
    """``density`` lives on ``interval`` = [a, b]; without ``right_density`` it is mirrored at b."""
    kind: Literal["glue-1d"]
    right_density: Optional[str] = None
    right_end: Optional[float] = None
    samples: int = Field(4096, ge=16)

    @model_validator(mode="after")
    def right_side(self):
        if (self.right_density is None) != (self.right_end is None):
            raise ValueError("right_density and right_end go together")
        if self.right_end is not None and self.right_end <= self.interval[1]:
            raise ValueError("right_end must exceed the gluing point")
        return self


Block = Tuple[float, float]


class WassersteinTask(OneDimensional):
    """Marginals are densities with respect to Phi dt: expressions or uniform blocks [lo, hi]."""
    kind: Literal["wasserstein"]
    mu0: Union[str, Block]
    mu1: Union[str, Block]
    times: Optional[List[float]] = None

    @field_validator("times")
    @classmethod
    def unit_times(cls, times):
        if times is not None and any(not 0 <= t <= 1 for t in times):
            raise ValueError("times must lie in [0, 1]")
        return times


Task = Annotated[
    Union[
        CompatibilityTask, RicciBoundTask, SmoothSweepTask, C1MatchingTask, GeodesicTask,
        NeedleTask, TiltedNeedleTask, WarpTask, KnConcavityTask, Glue1DTask, WassersteinTask,
    ],
    Field(discriminator="kind"),
]


class Scenario(StrictModel):
    """A verification scenario: sides (or a builtin) plus tasks."""
    name: str
    description: str = ""
    builtin: Optional[str] = None
    sides: List[SideSpec] = Field(default_factory=list, max_length=2)
    settings: ScenarioSettings = Field(default_factory=ScenarioSettings)
    tasks: List[Task] = Field(default_factory=list)


# --- reports -------------------------------------------------------------------

class TaskResult(BaseModel):
    """Outcome of one task."""
    kind: str
    status: Literal["pass", "fail", "error"]
    error_category: Optional[str] = None
    error: Optional[str] = None
    result: Dict[str, Any] = {}

    @field_validator("result")
    @classmethod
    def finite_json(cls, result):
        return _json_safe(result)


class Report(BaseModel):
    """Report for one scenario run; ``timing`` is the only nondeterministic field."""
    name: str
    version: str
    scenario: Dict[str, Any]
    tasks: List[TaskResult]
    passed: bool
    timing: Dict[str, float] = {}


def _json_safe(value):
    if isinstance(value, dict):
        return {k: _json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_json_safe(v) for v in value]
    if isinstance(value, float) and not math.isfinite(value):
        return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if hasattr(value, "tolist") and not isinstance(value, (str, bytes)):
        return _json_safe(value.tolist())
    return value
