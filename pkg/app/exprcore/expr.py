import functools
import math
import typing as t
from abc import ABC, abstractmethod
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from app.config import GUARD_EPSILON
from app.errors import DimensionMismatch, GuardViolation

SMOOTH = math.inf

Number = int | float | Fraction


class Evaluation(dict):
    """Values computed during one top-level `evaluate` call.

    Keyed by node and point array identity. Entries keep the node and
    the points alive, so the ids cannot be reused while the call runs.
    """

    def value(
        self,
        node: object,
        points: np.ndarray,
        strict: bool,
        compute: t.Callable[[], np.ndarray],
    ) -> np.ndarray:
        key = (id(node), id(points), strict)
        hit = self.get(key)
        if hit is not None:
            return hit[2].copy()
        value = compute()
        self[key] = (node, points, value.copy())
        return value


class Substitution(dict):
    """Nodes already rewritten by one `substitute` or `compose` pass."""

    def value(self, node: object, build: t.Callable[[], t.Any]):
        hit = self.get(id(node))
        if hit is None:
            hit = self[id(node)] = (node, build())
        return hit[1]


class Expr(ABC):
    """Scalar expression over the point coordinates x0, x1, ...

    `evaluate` is vectorized: it takes an (N, n) array of points and
    returns N values. With `strict=False` guard failures produce NaN
    instead of raising, which is what set membership tests need.
    Subtrees shared between parents are computed once per call.
    """

    @property
    @abstractmethod
    def smoothness(self) -> float: ...

    @property
    @abstractmethod
    def children(self) -> tuple["Expr", ...]: ...

    @abstractmethod
    def _compute(
        self, points: np.ndarray, strict: bool, cache: Evaluation
    ) -> np.ndarray: ...

    @abstractmethod
    def _substitute(
        self, components: t.Sequence["Expr"], memo: Substitution
    ) -> "Expr": ...

    def evaluate(
        self,
        points: np.ndarray,
        strict: bool = True,
        cache: Evaluation | None = None,
    ) -> np.ndarray:
        if cache is None:
            cache = Evaluation()
        return cache.value(
            self, points, strict, lambda: self._compute(points, strict, cache)
        )

    def substitute(
        self,
        components: t.Sequence["Expr"],
        memo: Substitution | None = None,
    ) -> "Expr":
        if memo is None:
            memo = Substitution()
        return memo.value(self, lambda: self._substitute(components, memo))

    @functools.cached_property
    def _variables(self) -> int:
        return max((c.max_variable() for c in self.children), default=-1)

    def max_variable(self) -> int:
        return self._variables

    def is_polynomial(self) -> bool:
        return False

    def __add__(self, other) -> "Expr":
        return Add(self, as_expr(other))

    def __radd__(self, other) -> "Expr":
        return Add(as_expr(other), self)

    def __sub__(self, other) -> "Expr":
        return Sub(self, as_expr(other))

    def __rsub__(self, other) -> "Expr":
        return Sub(as_expr(other), self)

    def __mul__(self, other) -> "Expr":
        return Mul(self, as_expr(other))

    def __rmul__(self, other) -> "Expr":
        return Mul(as_expr(other), self)

    def __truediv__(self, other) -> "Expr":
        return Div(self, as_expr(other))

    def __rtruediv__(self, other) -> "Expr":
        return Div(as_expr(other), self)

    def __neg__(self) -> "Expr":
        return Mul(Const(Fraction(-1)), self)

    def __pow__(self, exponent: int) -> "Expr":
        return Pow(self, exponent)


def as_expr(value) -> Expr:
    if isinstance(value, Expr):
        return value
    if isinstance(value, (int, Fraction)):
        return Const(Fraction(value))
    if isinstance(value, (float, np.floating)):
        return Const(Fraction(float(value)).limit_denominator(10**12))
    raise TypeError(f"cannot convert {type(value).__name__} to Expr")


def _rows(points: np.ndarray) -> int:
    return points.shape[0]


def _fail(message: str, points: np.ndarray, bad: np.ndarray):
    index = int(np.flatnonzero(bad)[0])
    raise GuardViolation(message, points[index])


@dataclass(frozen=True)
class Const(Expr):
    value: Fraction

    @property
    def smoothness(self) -> float:
        return SMOOTH

    @property
    def children(self) -> tuple[Expr, ...]:
        return ()

    def _compute(self, points, strict, cache):
        return np.full(_rows(points), float(self.value))

    def _substitute(self, components, memo):
        return self

    def is_polynomial(self) -> bool:
        return True

    def __str__(self) -> str:
        if self.value.denominator == 1:
            text = str(self.value.numerator)
        else:
            text = f"{self.value.numerator}/{self.value.denominator}"
        return f"({text})" if self.value < 0 or "/" in text else text


@dataclass(frozen=True)
class Var(Expr):
    index: int

    @property
    def smoothness(self) -> float:
        return SMOOTH

    @property
    def children(self) -> tuple[Expr, ...]:
        return ()

    def _compute(self, points, strict, cache):
        if self.index >= points.shape[1]:
            raise DimensionMismatch(
                f"x{self.index} needs points of dimension > {self.index}, "
                f"got {points.shape[1]}"
            )
        return points[:, self.index].astype(float)

    def _substitute(self, components, memo):
        if self.index >= len(components):
            raise DimensionMismatch(
                f"substitution provides {len(components)} components, "
                f"x{self.index} is used"
            )
        return components[self.index]

    def max_variable(self) -> int:
        return self.index

    def is_polynomial(self) -> bool:
        return True

    def __str__(self) -> str:
        return f"x{self.index}"


@dataclass(frozen=True)
class Binary(Expr):
    lhs: Expr
    rhs: Expr

    symbol: t.ClassVar[str] = "?"

    @functools.cached_property
    def smoothness(self) -> float:
        return min(self.lhs.smoothness, self.rhs.smoothness)

    @property
    def children(self) -> tuple[Expr, ...]:
        return (self.lhs, self.rhs)

    def _compute(self, points, strict, cache):
        return self.combine(
            self.lhs.evaluate(points, strict, cache),
            self.rhs.evaluate(points, strict, cache),
        )

    def combine(self, lhs: np.ndarray, rhs: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def _substitute(self, components, memo):
        return type(self)(
            self.lhs.substitute(components, memo),
            self.rhs.substitute(components, memo),
        )

    @functools.cached_property
    def _polynomial(self) -> bool:
        return self.lhs.is_polynomial() and self.rhs.is_polynomial()

    def is_polynomial(self) -> bool:
        return self._polynomial

    def __str__(self) -> str:
        return f"({self.lhs} {self.symbol} {self.rhs})"


@dataclass(frozen=True)
class Add(Binary):
    symbol: t.ClassVar[str] = "+"

    def combine(self, lhs, rhs):
        return lhs + rhs


@dataclass(frozen=True)
class Sub(Binary):
    symbol: t.ClassVar[str] = "-"

    def combine(self, lhs, rhs):
        return lhs - rhs


@dataclass(frozen=True)
class Mul(Binary):
    symbol: t.ClassVar[str] = "*"

    def combine(self, lhs, rhs):
        return lhs * rhs


@dataclass(frozen=True)
class Div(Expr):
    """Guarded quotient: the denominator must stay away from zero."""

    numerator: Expr
    denominator: Expr
    eps: float = GUARD_EPSILON

    @functools.cached_property
    def smoothness(self) -> float:
        return min(self.numerator.smoothness, self.denominator.smoothness)

    @property
    def children(self) -> tuple[Expr, ...]:
        return (self.numerator, self.denominator)

    def _compute(self, points, strict, cache):
        num = self.numerator.evaluate(points, strict, cache)
        den = self.denominator.evaluate(points, strict, cache)
        bad = ~(np.abs(den) > self.eps)
        if strict and bad.any():
            _fail(f"denominator of {self} vanishes", points, bad)
        out = np.full(num.shape, np.nan)
        np.divide(num, den, out=out, where=~bad)
        return out

    def _substitute(self, components, memo):
        return Div(
            self.numerator.substitute(components, memo),
            self.denominator.substitute(components, memo),
            self.eps,
        )

    def __str__(self) -> str:
        return f"({self.numerator} / {self.denominator})"


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int

    def __post_init__(self) -> None:
        if not isinstance(self.exponent, int) or self.exponent < 0:
            raise ValueError(
                f"integer powers must be >= 0, got {self.exponent!r}"
            )

    @functools.cached_property
    def smoothness(self) -> float:
        return self.base.smoothness

    @property
    def children(self) -> tuple[Expr, ...]:
        return (self.base,)

    def _compute(self, points, strict, cache):
        return self.base.evaluate(points, strict, cache) ** self.exponent

    def _substitute(self, components, memo):
        return Pow(self.base.substitute(components, memo), self.exponent)

    def is_polynomial(self) -> bool:
        return self.base.is_polynomial()

    def __str__(self) -> str:
        return f"({self.base} ^ {self.exponent})"


@dataclass(frozen=True)
class Sqrt(Expr):
    """Square root of a nonnegative argument.

    `positive` declares the argument bounded away from zero where the
    node is used, in which case the root keeps the argument's smoothness.
    """

    arg: Expr
    positive: bool = False

    @functools.cached_property
    def smoothness(self) -> float:
        if self.positive:
            return self.arg.smoothness
        return min(self.arg.smoothness, 0)

    @property
    def children(self) -> tuple[Expr, ...]:
        return (self.arg,)

    def _compute(self, points, strict, cache):
        value = self.arg.evaluate(points, strict, cache)
        bad = value < -GUARD_EPSILON
        if strict and bad.any():
            _fail(f"negative argument of {self}", points, bad)
        out = np.sqrt(np.clip(value, 0.0, None))
        out[bad] = np.nan
        return out

    def _substitute(self, components, memo):
        return Sqrt(self.arg.substitute(components, memo), self.positive)

    def __str__(self) -> str:
        return f"sqrt({self.arg})"


@dataclass(frozen=True)
class Abs(Expr):
    arg: Expr

    @functools.cached_property
    def smoothness(self) -> float:
        return min(self.arg.smoothness, 0)

    @property
    def children(self) -> tuple[Expr, ...]:
        return (self.arg,)

    def _compute(self, points, strict, cache):
        return np.abs(self.arg.evaluate(points, strict, cache))

    def _substitute(self, components, memo):
        return Abs(self.arg.substitute(components, memo))

    def __str__(self) -> str:
        return f"abs({self.arg})"


@dataclass(frozen=True)
class Max(Binary):
    @functools.cached_property
    def smoothness(self) -> float:
        return min(self.lhs.smoothness, self.rhs.smoothness, 0)

    def combine(self, lhs, rhs):
        return np.maximum(lhs, rhs)

    def is_polynomial(self) -> bool:
        return False

    def __str__(self) -> str:
        return f"max({self.lhs}, {self.rhs})"


@dataclass(frozen=True)
class Min(Binary):
    @functools.cached_property
    def smoothness(self) -> float:
        return min(self.lhs.smoothness, self.rhs.smoothness, 0)

    def combine(self, lhs, rhs):
        return np.minimum(lhs, rhs)

    def is_polynomial(self) -> bool:
        return False

    def __str__(self) -> str:
        return f"min({self.lhs}, {self.rhs})"


@dataclass(frozen=True)
class Clamp(Expr):
    """max(arg, 0) ** power, a C^(power - 1) function of its argument."""

    arg: Expr
    power: int = 1

    def __post_init__(self) -> None:
        if not isinstance(self.power, int) or self.power < 1:
            raise ValueError(f"clamp power must be >= 1, got {self.power!r}")

    @functools.cached_property
    def smoothness(self) -> float:
        return min(self.arg.smoothness, self.power - 1)

    @property
    def children(self) -> tuple[Expr, ...]:
        return (self.arg,)

    def _compute(self, points, strict, cache):
        value = self.arg.evaluate(points, strict, cache)
        return np.maximum(value, 0.0) ** self.power

    def _substitute(self, components, memo):
        return Clamp(self.arg.substitute(components, memo), self.power)

    def __str__(self) -> str:
        if self.power == 1:
            return f"clamp({self.arg})"
        return f"clamp({self.arg}, {self.power})"


def const(value: Number) -> Const:
    return Const(Fraction(value))


def var(index: int) -> Var:
    return Var(index)


ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))


def total(terms: t.Iterable[Expr]) -> Expr:
    terms = list(terms)
    if not terms:
        return ZERO
    result = terms[0]
    for term in terms[1:]:
        result = Add(result, term)
    return result


def product(factors: t.Iterable[Expr]) -> Expr:
    factors = list(factors)
    if not factors:
        return ONE
    result = factors[0]
    for factor in factors[1:]:
        result = Mul(result, factor)
    return result


def evaluate(e: Expr, point) -> float:
    """Value of `e` at a single point."""
    point = np.asarray(point, dtype=float).reshape(-1)
    if e.max_variable() >= point.size:
        raise DimensionMismatch(
            f"expression uses x{e.max_variable()}, point has dimension "
            f"{point.size}"
        )
    return float(e.evaluate(point.reshape(1, -1))[0])
