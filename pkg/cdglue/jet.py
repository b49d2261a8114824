"""
Truncated Taylor jets (orders 0..3) propagated forward through expressions.

A :class:`Jet` holds a batch of points at once: ``value`` has shape (B,),
``first`` (B, n), ``second`` (B, n, n) and ``third`` (B, n, n, n).  Products
use the Leibniz rule and elementary functions use Faa di Bruno's formula up
to third order, so derivatives are exact to rounding.
"""
import logging
from functools import lru_cache
from typing import Callable, List, Optional, Sequence

import numpy as np

from cdglue.errors import DomainError, EvaluationDomainError
from cdglue.expression import (
    Call,
    Coordinate,
    Negate,
    Node,
    Number,
    ScalarField,
    evaluate_values,
    is_constant,
)

logger = logging.getLogger(__name__)

MAX_ORDER = 3


def _outer(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a[:, :, None] * b[:, None, :]


def _sym3(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    # T_ijk = A_ij b_k + A_ik b_j + A_jk b_i
    return (A[:, :, :, None] * b[:, None, None, :]
            + A[:, :, None, :] * b[:, None, :, None]
            + A[:, None, :, :] * b[:, :, None, None])


def _outer3(a: np.ndarray) -> np.ndarray:
    return a[:, :, None, None] * a[:, None, :, None] * a[:, None, None, :]


class Jet:
    """Batched truncated Taylor jet of a scalar function of n variables."""

    __slots__ = ("value", "first", "second", "third")

    def __init__(self, value, first=None, second=None, third=None):
        self.value = np.asarray(value, dtype=float)
        self.first = first
        self.second = second
        self.third = third

    # --- construction -------------------------------------------------------

    @property
    def order(self) -> int:
        if self.third is not None:
            return 3
        if self.second is not None:
            return 2
        if self.first is not None:
            return 1
        return 0

    @property
    def batch(self) -> int:
        return self.value.shape[0]

    @property
    def dim(self) -> int:
        return self.first.shape[1] if self.first is not None else 0

    @classmethod
    def constant(cls, value, batch: int, dim: int, order: int) -> "Jet":
        value = np.broadcast_to(np.asarray(value, dtype=float), (batch,)).copy()
        parts = [np.zeros((batch,) + (dim,) * k) for k in range(1, order + 1)]
        return cls(value, *parts)

    @classmethod
    def coordinate(cls, points: np.ndarray, index: int, order: int) -> "Jet":
        """Jet of x<index> (0-based here) at each point."""
        batch, dim = points.shape
        jet = cls.constant(0.0, batch, dim, order)
        jet.value = points[:, index].astype(float).copy()
        if order >= 1:
            jet.first[:, index] = 1.0
        return jet

    def _parts(self) -> List[Optional[np.ndarray]]:
        return [self.first, self.second, self.third]

    def take(self, index: int) -> "Jet":
        """Single-point jet (batch of one) at ``index``."""
        parts = [p[index:index + 1] if p is not None else None for p in self._parts()]
        return Jet(self.value[index:index + 1], *parts)

    # --- linear operations --------------------------------------------------

    def _lift(self, other) -> "Jet":
        if isinstance(other, Jet):
            return other
        return Jet.constant(other, self.batch, self.dim, self.order)

    def __add__(self, other) -> "Jet":
        other = self._lift(other)
        parts = [a + b if a is not None else None for a, b in zip(self._parts(), other._parts())]
        return Jet(self.value + other.value, *parts)

    __radd__ = __add__

    def __neg__(self) -> "Jet":
        return Jet(-self.value, *[-p if p is not None else None for p in self._parts()])

    def __sub__(self, other) -> "Jet":
        return self + (-self._lift(other))

    def __rsub__(self, other) -> "Jet":
        return self._lift(other) + (-self)

    def scale(self, factor) -> "Jet":
        f = np.asarray(factor, dtype=float)
        shaped = [f.reshape(f.shape + (1,) * k) if f.ndim else f for k in range(4)]
        parts = [p * shaped[k + 1] if p is not None else None for k, p in enumerate(self._parts())]
        return Jet(self.value * shaped[0], *parts)

    # --- products -----------------------------------------------------------

    def __mul__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return self.scale(other)
        a0, b0 = self.value, other.value
        order = min(self.order, other.order)
        first = second = third = None
        if order >= 1:
            a1, b1 = self.first, other.first
            first = a0[:, None] * b1 + b0[:, None] * a1
        if order >= 2:
            a2, b2 = self.second, other.second
            second = (a0[:, None, None] * b2 + b0[:, None, None] * a2
                      + _outer(a1, b1) + _outer(b1, a1))
        if order >= 3:
            a3, b3 = self.third, other.third
            third = (a0[:, None, None, None] * b3 + b0[:, None, None, None] * a3
                     + _sym3(a2, b1) + _sym3(b2, a1))
        return Jet(a0 * b0, first, second, third)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "Jet":
        if not isinstance(other, Jet):
            return self.scale(1.0 / np.asarray(other, dtype=float))
        return self * other.reciprocal()

    def __rtruediv__(self, other) -> "Jet":
        return self._lift(other) * self.reciprocal()

    def __pow__(self, exponent) -> "Jet":
        if isinstance(exponent, Jet):
            return (exponent * self.log()).exp()
        return self.power(float(exponent))

    # --- chain rule -----------------------------------------------------------

    def compose(self, derivatives: Sequence[np.ndarray]) -> "Jet":
        """Apply f given f, f', f'', f''' evaluated at ``self.value``."""
        d = list(derivatives) + [None] * (4 - len(derivatives))
        u1, u2, u3 = self.first, self.second, self.third
        first = second = third = None
        if u1 is not None:
            first = d[1][:, None] * u1
        if u2 is not None:
            second = d[1][:, None, None] * u2 + d[2][:, None, None] * _outer(u1, u1)
        if u3 is not None:
            third = (d[1][:, None, None, None] * u3
                     + d[2][:, None, None, None] * _sym3(u2, u1)
                     + d[3][:, None, None, None] * _outer3(u1))
        return Jet(d[0], first, second, third)

    def _check(self, name: str, bad: np.ndarray) -> None:
        if np.any(bad):
            error = EvaluationDomainError(name)
            error.index = int(np.flatnonzero(bad)[0])
            raise error

    def reciprocal(self) -> "Jet":
        u = self.value
        self._check("/", u == 0)
        return self.compose([1 / u, -1 / u**2, 2 / u**3, -6 / u**4])

    def power(self, p: float) -> "Jet":
        u = self.value
        order = self.order
        if p == 0.0:
            return Jet.constant(1.0, self.batch, self.dim, order)
        integral = float(p).is_integer()
        if integral and p > 0:
            pass
        elif integral:
            self._check("^", u == 0)
        else:
            self._check("^", u < 0)
            # 0^p is fine as long as every requested derivative stays finite
            if p - order < 0:
                self._check("^", u == 0)
        derivatives = []
        coefficient = 1.0
        for k in range(order + 1):
            if k > 0:
                coefficient *= (p - (k - 1))
            if coefficient == 0.0:
                derivatives.append(np.zeros_like(u))
            else:
                with np.errstate(divide="ignore", invalid="ignore"):
                    derivatives.append(coefficient * np.power(u, p - k))
        return self.compose(derivatives)

    def exp(self) -> "Jet":
        e = np.exp(self.value)
        return self.compose([e, e, e, e])

    def log(self) -> "Jet":
        u = self.value
        self._check("log", u <= 0)
        return self.compose([np.log(u), 1 / u, -1 / u**2, 2 / u**3])

    def sqrt(self) -> "Jet":
        u = self.value
        if self.order == 0:
            self._check("sqrt", u < 0)
            return Jet(np.sqrt(u))
        self._check("sqrt", u <= 0)
        s = np.sqrt(u)
        return self.compose([s, 0.5 / s, -0.25 / (u * s), 0.375 / (u * u * s)])

    def sin(self) -> "Jet":
        s, c = np.sin(self.value), np.cos(self.value)
        return self.compose([s, c, -s, -c])

    def cos(self) -> "Jet":
        s, c = np.sin(self.value), np.cos(self.value)
        return self.compose([c, -s, -c, s])

    def tan(self) -> "Jet":
        t = np.tan(self.value)
        sec2 = 1 + t * t
        return self.compose([t, sec2, 2 * t * sec2, 2 * sec2 * (1 + 3 * t * t)])

    def sinh(self) -> "Jet":
        s, c = np.sinh(self.value), np.cosh(self.value)
        return self.compose([s, c, s, c])

    def cosh(self) -> "Jet":
        s, c = np.sinh(self.value), np.cosh(self.value)
        return self.compose([c, s, c, s])

    # --- symmetry -----------------------------------------------------------

    def symmetrized(self) -> "Jet":
        """Copy whose derivative tensors are filled from sorted index tuples."""
        n = self.dim
        second = third = None
        if self.second is not None:
            second = self.second.reshape(self.batch, n * n)[:, _canonical(n, 2)].reshape(self.batch, n, n)
        if self.third is not None:
            third = self.third.reshape(self.batch, n ** 3)[:, _canonical(n, 3)].reshape(self.batch, n, n, n)
        return Jet(self.value, self.first, second, third)


@lru_cache(maxsize=None)
def _canonical(n: int, rank: int) -> np.ndarray:
    """Flat index of the sorted index tuple for every index tuple."""
    grids = np.indices((n,) * rank).reshape(rank, -1).T
    canon = np.sort(grids, axis=1)
    return np.ravel_multi_index(canon.T, (n,) * rank)


# --- evaluation ---------------------------------------------------------------

def _evaluate(node: Node, points: np.ndarray, order: int) -> Jet:
    batch, dim = points.shape
    if isinstance(node, Number):
        return Jet.constant(node.value, batch, dim, order)
    if isinstance(node, Coordinate):
        return Jet.coordinate(points, node.index - 1, order)
    if isinstance(node, Negate):
        return -_evaluate(node.operand, points, order)
    if isinstance(node, Call):
        return getattr(_evaluate(node.argument, points, order), node.name)()
    left = _evaluate(node.left, points, order)
    if node.op == "^" and is_constant(node.right):
        exponent = float(evaluate_values(node.right, points[:1])[0])
        return left.power(exponent)
    right = _evaluate(node.right, points, order)
    if node.op == "+":
        return left + right
    if node.op == "-":
        return left - right
    if node.op == "*":
        return left * right
    if node.op == "/":
        return left / right
    return left ** right


def evaluate_jets(field: ScalarField, points, order: int = 2) -> Jet:
    """Jets of ``field`` at a batch of points of shape (B, arity)."""
    if not 0 <= order <= MAX_ORDER:
        raise ValueError(f"Jet order must be between 0 and {MAX_ORDER}, got {order}")
    points = np.atleast_2d(np.asarray(points, dtype=float))
    if points.shape[1] != field.arity:
        raise ValueError(f"Points have {points.shape[1]} coordinates, field arity is {field.arity}")
    try:
        with np.errstate(all="ignore"):
            jet = _evaluate(field.expression, points, order)
    except EvaluationDomainError as e:
        index = getattr(e, "index", 0)
        raise EvaluationDomainError(e.function, points[index]) from None
    return jet.symmetrized()


def jet_eval(field: ScalarField, point: Sequence[float], order: int = 2,
             domain: Optional[Sequence[Sequence[float]]] = None) -> Jet:
    """
    Exact derivatives of ``field`` at one point.

    Args:
        field: Parsed scalar field
        point: Coordinates (length = field arity)
        order: Highest derivative order (1, 2 or 3)
        domain: Optional coordinate box the point must lie in

    Returns:
        Jet with a batch of one
    """
    if domain is not None and not _inside(point, domain):
        raise DomainError(point, domain)
    return evaluate_jets(field, [point], order)


def _inside(point: Sequence[float], domain: Sequence[Sequence[float]], slack: float = 1e-12) -> bool:
    return all(lo - slack <= x <= hi + slack for x, (lo, hi) in zip(point, domain))


# --- finite-difference oracle -----------------------------------------------

_STEPS = {1: 1e-3, 2: 5e-3, 3: 2e-2}


def _central(func: Callable[[np.ndarray], float], x: np.ndarray, axis: int, h: float) -> float:
    e = np.zeros_like(x)
    e[axis] = h
    return (-func(x + 2 * e) + 8 * func(x + e) - 8 * func(x - e) + func(x - 2 * e)) / (12 * h)


def _nested(func, axes: Sequence[int], h: float) -> Callable[[np.ndarray], float]:
    if not axes:
        return func
    inner = _nested(func, axes[1:], h)
    return lambda x: _central(inner, x, axes[0], h)


def finite_difference_derivative(func: Callable[[np.ndarray], float], point: Sequence[float],
                                 axes: Sequence[int], step: Optional[float] = None) -> float:
    """
    Partial derivative along ``axes`` by nested 4th-order central differences
    with one Richardson extrapolation step.
    """
    x = np.asarray(point, dtype=float)
    h = step or _STEPS[len(axes)] * max(1.0, float(np.max(np.abs(x))))
    coarse = _nested(func, list(axes), h)(x)
    fine = _nested(func, list(axes), h / 2)(x)
    return (16 * fine - coarse) / 15


def finite_difference_jet(func: Callable[[np.ndarray], float], point: Sequence[float], order: int) -> Jet:
    """Reference jet from finite differences (independent of the Taylor path)."""
    x = np.asarray(point, dtype=float)
    n = x.size
    parts = []
    for k in range(1, order + 1):
        tensor = np.zeros((n,) * k)
        for index in np.ndindex(*(n,) * k):
            if list(index) == sorted(index):
                tensor[index] = finite_difference_derivative(func, x, index)
        flat = tensor.reshape(-1)[_canonical(n, k)].reshape((n,) * k) if k > 1 else tensor
        parts.append(flat[None])
    return Jet(np.array([func(x)]), *parts)
