"""
Error hierarchy for the toolkit.

Every error carries a ``category``: ``"input"`` for problems with what the
caller supplied and ``"numerical"`` for failures of the computation itself.
The command line maps the two categories to distinct exit statuses.
"""
from typing import Optional, Sequence


class CdGlueError(Exception):
    """Base class for all toolkit errors."""
    category = "numerical"


class InputError(CdGlueError):
    """The caller supplied something the toolkit cannot work with."""
    category = "input"


class NumericalError(CdGlueError):
    """A computation failed (degenerate metric, focal point, ...)."""
    category = "numerical"


# --- expressions -----------------------------------------------------------

class ExpressionSyntaxError(InputError):
    """Malformed expression text; ``offset`` is the 0-based character index."""

    def __init__(self, message: str, text: str, offset: int):
        super().__init__(f"{message} at offset {offset} in {text!r}")
        self.text = text
        self.offset = offset


class UnknownIdentifierError(InputError):
    """An identifier that is neither a coordinate nor a known function."""

    def __init__(self, name: str, offset: int):
        super().__init__(f"Unknown identifier '{name}' at offset {offset}")
        self.name = name
        self.offset = offset


class CoordinateIndexError(InputError):
    """Coordinate x<k> referenced with k larger than the field arity."""

    def __init__(self, index: int, arity: int):
        super().__init__(f"Coordinate x{index} is out of range for arity {arity}")
        self.index = index
        self.arity = arity


class EvaluationDomainError(NumericalError):
    """An expression was evaluated (or differentiated) outside its domain."""

    def __init__(self, function: str, point: Optional[Sequence[float]] = None):
        where = f" at {tuple(float(p) for p in point)}" if point is not None else ""
        super().__init__(f"'{function}' is not defined or not differentiable{where}")
        self.function = function
        self.point = point


class DomainError(InputError):
    """A point lies outside a chart's coordinate box."""

    def __init__(self, point: Sequence[float], domain):
        super().__init__(f"Point {tuple(float(p) for p in point)} is outside the chart domain {domain}")
        self.point = point


# --- geometry ----------------------------------------------------------------

class DegenerateMetricError(NumericalError):
    """Metric (or induced metric) not positive definite or badly conditioned."""


class WeightError(InputError):
    """Weight is negative, vanishes where it must not, or N is out of range."""


class InterfaceMismatchError(InputError):
    """Induced metrics of the two sides disagree on the interface."""


class WeightMismatchError(InputError):
    """Weights of the two sides disagree on the interface."""


class CollarNormalizationError(InputError):
    """A side is not presented in collar (Fermi) coordinates."""


class ProfileError(InputError):
    """Invalid smoothing profile parameters or sweep ordering."""


class DeformationError(NumericalError):
    """The deformed tangential operator lost positive definiteness."""


class MollificationError(InputError):
    """Mollification width too large for the deformation scale."""


class QuadratureError(NumericalError):
    """A quadrature rule failed its own accuracy estimate."""


class FocalPointError(NumericalError):
    """A Jacobi determinant vanished inside the requested range."""

    def __init__(self, message: str, location: float):
        super().__init__(f"{message} (t = {location:.6g})")
        self.location = location


class StepSizeError(NumericalError):
    """Geodesic integration drifted in energy beyond tolerance."""


class ChartExitError(NumericalError):
    """A path left the chart before the requested length was reached."""


class SupportError(InputError):
    """A measure is not normalizable or its support reaches the endpoints."""


class ScenarioError(InputError):
    """Scenario file failed schema validation."""

    def __init__(self, message: str, keys: Sequence[str] = ()):
        super().__init__(message)
        self.keys = list(keys)
