"""
Sampling grids and the parallel point-wise map used by every sweep.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from contextvars import copy_context
from dataclasses import dataclass, field
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, TypeVar, Union

import numpy as np

from cdglue.config import get_settings

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def axis_samples(lo: float, hi: float, resolution: int, margin: bool = True) -> np.ndarray:
    """``resolution`` uniform samples; with ``margin`` the end points are pulled in one step."""
    if margin:
        return np.linspace(lo, hi, resolution + 2)[1:-1]
    return np.linspace(lo, hi, resolution)


def interior_grid(domain: Sequence[Tuple[float, float]], resolution: Optional[int] = None) -> np.ndarray:
    """Tensor-product grid (row-major) shrunk by one step from every face."""
    resolution = resolution or get_settings().grid_resolution
    axes = [axis_samples(lo, hi, resolution) for lo, hi in domain]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def face_grid(domain: Sequence[Tuple[float, float]], axis: int, value: float,
              resolution: Optional[int] = None) -> np.ndarray:
    """Grid on the face ``x[axis] = value``; tangential axes shrunk as in interior_grid."""
    resolution = resolution or get_settings().grid_resolution
    axes = [np.array([value]) if k == axis else axis_samples(lo, hi, resolution)
            for k, (lo, hi) in enumerate(domain)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def parallel_map(func: Callable[[T], R], items: Sequence[T], workers: Optional[int] = None) -> List[R]:
    """Order-preserving map; threads only when more than one worker is configured."""
    workers = workers or get_settings().workers
    if workers <= 1 or len(items) < 2:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(copy_context().run, func, item) for item in items]
        return [f.result() for f in futures]


@dataclass
class SweepResult:
    """Extremum of a point-wise quantity over a grid."""
    value: float
    point: Optional[Tuple[float, ...]]
    index: Optional[int]
    evaluated: int
    skipped: List[Tuple[float, ...]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            'value': self.value,
            'point': list(self.point) if self.point is not None else None,
            'evaluated': self.evaluated,
            'skipped': len(self.skipped),
        }


def reduce_minimum(points: np.ndarray, values: Iterable[Optional[float]]) -> SweepResult:
    """
    Deterministic minimum: None marks a skipped point, ties go to the
    lowest grid index.
    """
    best_value, best_index = np.inf, None
    skipped: List[Tuple[float, ...]] = []
    evaluated = 0
    for index, value in enumerate(values):
        if value is None:
            skipped.append(tuple(float(x) for x in points[index]))
            continue
        evaluated += 1
        if value < best_value:
            best_value, best_index = value, index
    point = tuple(float(x) for x in points[best_index]) if best_index is not None else None
    return SweepResult(float(best_value), point, best_index, evaluated, skipped)


def reduce_maximum(points: np.ndarray, values: Iterable[Optional[float]]) -> SweepResult:
    negated = [None if v is None else -v for v in values]
    result = reduce_minimum(points, negated)
    result.value = -result.value
    return result


def richardson(values: Sequence[Union[float, np.ndarray]], orders: Sequence[int] = (1, 2)) -> Union[float, np.ndarray]:
    """
    Extrapolate samples taken at steps h, h/2, h/4, ... to h -> 0.

    ``orders`` are the powers of h removed level by level; a one-sided
    limit has error terms h, h^2, ..., a second-order stencil h^2, h^3, ...
    Array samples are extrapolated element-wise.
    """
    table = [np.asarray(v, dtype=float) for v in values]
    for p in orders[:len(table) - 1]:
        factor = 2.0 ** p
        table = [(factor * fine - coarse) / (factor - 1.0) for coarse, fine in zip(table, table[1:])]
    result = table[0]
    return float(result) if result.ndim == 0 else result
