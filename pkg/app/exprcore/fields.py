"""Matrix-valued fields over points.

Transition functions, frames, projectors, forms and witnesses are all
`MatrixField`s. The literal kind is an `ExprMatrix`; everything the
library constructs (inverses, products, guarded solves, glued fields)
is a derived field over other fields, so outputs stay composable with
maps and readable entry-wise through `MatrixEntry` expression nodes.
"""

import functools
import typing as t
from abc import ABC, abstractmethod
from dataclasses import dataclass

import numpy as np

from app.config import GUARD_EPSILON
from app.errors import DimensionMismatch, GuardViolation

from .expr import SMOOTH, Evaluation, Expr, Substitution, as_expr


class MatrixField(ABC):
    @property
    @abstractmethod
    def shape(self) -> tuple[int, int]: ...

    @property
    @abstractmethod
    def smoothness(self) -> float: ...

    @abstractmethod
    def _compute(
        self, points: np.ndarray, strict: bool, cache: Evaluation
    ) -> np.ndarray: ...

    @abstractmethod
    def max_variable(self) -> int: ...

    def evaluate(
        self,
        points: np.ndarray,
        strict: bool = True,
        cache: Evaluation | None = None,
    ) -> np.ndarray:
        """Values at (N, n) points as an (N, rows, cols) array."""
        if cache is None:
            cache = Evaluation()
        return cache.value(
            self, points, strict, lambda: self._compute(points, strict, cache)
        )

    def compose(
        self,
        components: t.Sequence[Expr],
        memo: Substitution | None = None,
    ) -> "MatrixField":
        if memo is None:
            memo = Substitution()
        return memo.value(self, lambda: self._compose(components, memo))

    def _compose(
        self, components: t.Sequence[Expr], memo: Substitution
    ) -> "MatrixField":
        return Composed(self, tuple(components))

    def entry(self, row: int, col: int) -> Expr:
        return MatrixEntry(self, row, col)

    @property
    def T(self) -> "MatrixField":
        return Transpose(self)

    def __matmul__(self, other: "MatrixField") -> "MatrixField":
        return Product(self, other)

    def __add__(self, other: "MatrixField") -> "MatrixField":
        return Sum(self, other)

    def __sub__(self, other: "MatrixField") -> "MatrixField":
        return Sum(self, Scaled(other, as_expr(-1)))

    def __neg__(self) -> "MatrixField":
        return Scaled(self, as_expr(-1))


def _empty(points: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    return np.zeros((points.shape[0],) + tuple(shape))


@dataclass(frozen=True, eq=False)
class ExprMatrix(MatrixField):
    entries: tuple[tuple[Expr, ...], ...]

    @classmethod
    def of(cls, rows) -> "ExprMatrix":
        return cls(tuple(tuple(as_expr(v) for v in row) for row in rows))

    @property
    def shape(self) -> tuple[int, int]:
        rows = len(self.entries)
        return (rows, len(self.entries[0]) if rows else 0)

    @functools.cached_property
    def smoothness(self) -> float:
        return min(
            (e.smoothness for row in self.entries for e in row),
            default=SMOOTH,
        )

    def _compute(self, points, strict, cache):
        out = _empty(points, self.shape)
        for i, row in enumerate(self.entries):
            for j, e in enumerate(row):
                out[:, i, j] = e.evaluate(points, strict, cache)
        return out

    def max_variable(self) -> int:
        return max(
            (e.max_variable() for row in self.entries for e in row),
            default=-1,
        )

    def _compose(self, components, memo):
        return ExprMatrix(
            tuple(
                tuple(e.substitute(components, memo) for e in row)
                for row in self.entries
            )
        )

    def entry(self, row: int, col: int) -> Expr:
        return self.entries[row][col]

    def __str__(self) -> str:
        rows = ", ".join(
            "[" + ", ".join(str(e) for e in row) + "]" for row in self.entries
        )
        return f"[{rows}]"


@dataclass(frozen=True, eq=False)
class ConstantMatrix(MatrixField):
    values: np.ndarray

    @property
    def shape(self) -> tuple[int, int]:
        return tuple(self.values.shape)

    @property
    def smoothness(self) -> float:
        return SMOOTH

    def _compute(self, points, strict, cache):
        return np.broadcast_to(
            self.values, (points.shape[0],) + self.values.shape
        ).copy()

    def max_variable(self) -> int:
        return -1

    def _compose(self, components, memo):
        return self


def constant(values) -> ConstantMatrix:
    values = np.atleast_2d(np.asarray(values, dtype=float))
    return ConstantMatrix(values)


def identity(n: int) -> ConstantMatrix:
    return ConstantMatrix(np.eye(n))


def zeros(rows: int, cols: int) -> ConstantMatrix:
    return ConstantMatrix(np.zeros((rows, cols)))


@dataclass(frozen=True, eq=False)
class Derived(MatrixField):
    """Base of fields computed from other fields."""

    @property
    def inputs(self) -> tuple[MatrixField, ...]:
        return ()

    @property
    def scalars(self) -> tuple[Expr, ...]:
        return ()

    @functools.cached_property
    def smoothness(self) -> float:
        return min(
            [f.smoothness for f in self.inputs]
            + [e.smoothness for e in self.scalars],
            default=SMOOTH,
        )

    @functools.cached_property
    def _variables(self) -> int:
        return max(
            [f.max_variable() for f in self.inputs]
            + [e.max_variable() for e in self.scalars],
            default=-1,
        )

    def max_variable(self) -> int:
        return self._variables


@dataclass(frozen=True, eq=False)
class Product(Derived):
    left: MatrixField
    right: MatrixField

    def __post_init__(self) -> None:
        if self.left.shape[1] != self.right.shape[0]:
            raise DimensionMismatch(
                f"cannot multiply {self.left.shape} by {self.right.shape}"
            )

    @property
    def shape(self):
        return (self.left.shape[0], self.right.shape[1])

    @property
    def inputs(self):
        return (self.left, self.right)

    def _compute(self, points, strict, cache):
        left = self.left.evaluate(points, strict, cache)
        return left @ self.right.evaluate(points, strict, cache)


@dataclass(frozen=True, eq=False)
class Sum(Derived):
    left: MatrixField
    right: MatrixField

    def __post_init__(self) -> None:
        if self.left.shape != self.right.shape:
            raise DimensionMismatch(
                f"cannot add {self.left.shape} and {self.right.shape}"
            )

    @property
    def shape(self):
        return self.left.shape

    @property
    def inputs(self):
        return (self.left, self.right)

    def _compute(self, points, strict, cache):
        left = self.left.evaluate(points, strict, cache)
        return left + self.right.evaluate(points, strict, cache)


@dataclass(frozen=True, eq=False)
class Scaled(Derived):
    field: MatrixField
    factor: Expr

    @property
    def shape(self):
        return self.field.shape

    @property
    def inputs(self):
        return (self.field,)

    @property
    def scalars(self):
        return (self.factor,)

    def _compute(self, points, strict, cache):
        factor = self.factor.evaluate(points, strict, cache)
        values = self.field.evaluate(points, strict, cache)
        return factor[:, None, None] * values


@dataclass(frozen=True, eq=False)
class Transpose(Derived):
    field: MatrixField

    @property
    def shape(self):
        rows, cols = self.field.shape
        return (cols, rows)

    @property
    def inputs(self):
        return (self.field,)

    def _compute(self, points, strict, cache):
        return np.swapaxes(self.field.evaluate(points, strict, cache), 1, 2)


@dataclass(frozen=True, eq=False)
class Inverse(Derived):
    """Guarded inverse: the smallest singular value must exceed `eps`."""

    field: MatrixField
    eps: float = GUARD_EPSILON

    def __post_init__(self) -> None:
        rows, cols = self.field.shape
        if rows != cols:
            raise DimensionMismatch(f"cannot invert {self.field.shape}")

    @property
    def shape(self):
        return self.field.shape

    @property
    def inputs(self):
        return (self.field,)

    def _compute(self, points, strict, cache):
        values = self.field.evaluate(points, strict, cache)
        n = self.shape[0]
        if n == 0 or values.shape[0] == 0:
            return values.copy()
        finite = np.isfinite(values).reshape(values.shape[0], -1).all(axis=1)
        smallest = np.zeros(values.shape[0])
        if finite.any():
            smallest[finite] = np.linalg.svd(
                values[finite], compute_uv=False
            )[:, -1]
        bad = ~(smallest > self.eps)
        if strict and bad.any():
            index = int(np.flatnonzero(bad)[0])
            raise GuardViolation("inverted matrix is singular", points[index])
        out = np.full(values.shape, np.nan)
        if (~bad).any():
            out[~bad] = np.linalg.inv(values[~bad])
        return out


@dataclass(frozen=True, eq=False)
class BlockDiagonal(Derived):
    blocks: tuple[MatrixField, ...]

    @property
    def shape(self):
        return (
            sum(b.shape[0] for b in self.blocks),
            sum(b.shape[1] for b in self.blocks),
        )

    @property
    def inputs(self):
        return self.blocks

    def _compute(self, points, strict, cache):
        out = _empty(points, self.shape)
        row = col = 0
        for block in self.blocks:
            rows, cols = block.shape
            if rows and cols:
                out[:, row : row + rows, col : col + cols] = block.evaluate(
                    points, strict, cache
                )
            row += rows
            col += cols
        return out


@dataclass(frozen=True, eq=False)
class Stack(Derived):
    """Concatenation along rows (axis 0) or columns (axis 1)."""

    parts: tuple[MatrixField, ...]
    axis: int = 0

    def __post_init__(self) -> None:
        other = 1 - self.axis
        sizes = {p.shape[other] for p in self.parts}
        if len(sizes) > 1:
            raise DimensionMismatch(f"cannot stack shapes {sizes}")

    @property
    def shape(self):
        other = 1 - self.axis
        along = sum(p.shape[self.axis] for p in self.parts)
        across = self.parts[0].shape[other] if self.parts else 0
        return (along, across) if self.axis == 0 else (across, along)

    @property
    def inputs(self):
        return self.parts

    def _compute(self, points, strict, cache):
        if not self.parts:
            return _empty(points, self.shape)
        return np.concatenate(
            [p.evaluate(points, strict, cache) for p in self.parts],
            axis=self.axis + 1,
        )


@dataclass(frozen=True, eq=False)
class Kronecker(Derived):
    left: MatrixField
    right: MatrixField

    @property
    def shape(self):
        return (
            self.left.shape[0] * self.right.shape[0],
            self.left.shape[1] * self.right.shape[1],
        )

    @property
    def inputs(self):
        return (self.left, self.right)

    def _compute(self, points, strict, cache):
        a = self.left.evaluate(points, strict, cache)
        b = self.right.evaluate(points, strict, cache)
        n = points.shape[0]
        out = np.einsum("nij,nkl->nikjl", a, b)
        return out.reshape((n,) + self.shape)


@dataclass(frozen=True, eq=False)
class Supported(Derived):
    """`weight * field`, with `field` only read where the weight is nonzero.

    The field may be undefined (guards failing) off the support of the
    weight; partition-of-unity gluing relies on that.
    """

    weight: Expr
    field: MatrixField

    @property
    def shape(self):
        return self.field.shape

    @property
    def inputs(self):
        return (self.field,)

    @property
    def scalars(self):
        return (self.weight,)

    def _compute(self, points, strict, cache):
        weight = self.weight.evaluate(points, strict, cache)
        out = _empty(points, self.shape)
        support = np.isfinite(weight) & (weight != 0)
        if support.any():
            values = self.field.evaluate(points[support], strict, cache)
            out[support] = weight[support, None, None] * values
        out[~np.isfinite(weight)] = np.nan
        return out


@dataclass(frozen=True, eq=False)
class Glued(Derived):
    """Sum of `Supported` terms, typically one per chart."""

    terms: tuple[Supported, ...]

    @property
    def shape(self):
        return self.terms[0].shape

    @property
    def inputs(self):
        return self.terms

    def _compute(self, points, strict, cache):
        out = _empty(points, self.shape)
        for term in self.terms:
            out += term.evaluate(points, strict, cache)
        return out


def glue(weights: t.Sequence[Expr], fields: t.Sequence[MatrixField]) -> Glued:
    return Glued(tuple(Supported(w, f) for w, f in zip(weights, fields)))


@dataclass(frozen=True, eq=False)
class Composed(Derived):
    """`field` read at the image of the points under a map."""

    field: MatrixField
    components: tuple[Expr, ...]

    @property
    def shape(self):
        return self.field.shape

    @property
    def inputs(self):
        return (self.field,)

    @property
    def scalars(self):
        return self.components

    def _compute(self, points, strict, cache):
        inner = image(self.components, points, strict, cache)
        return self.field.evaluate(inner, strict, cache)

    def _compose(self, components, memo):
        inner = tuple(c.substitute(components, memo) for c in self.components)
        return Composed(self.field, inner)


def image(
    components: t.Sequence[Expr],
    points: np.ndarray,
    strict: bool = True,
    cache: Evaluation | None = None,
) -> np.ndarray:
    if not components:
        return np.zeros((points.shape[0], 0))
    if cache is None:
        cache = Evaluation()
    return np.stack(
        [c.evaluate(points, strict, cache) for c in components], axis=1
    )


Kernel = t.Callable[..., np.ndarray]


@dataclass(frozen=True, eq=False)
class Pointwise(Derived):
    """A numeric kernel applied sample by sample to input field values.

    The kernel receives the points followed by the (N, r, c) values of
    each input and returns (N, rows, cols), with NaN rows where its own
    guard fails. Strict evaluation turns such rows into `GuardViolation`.
    """

    kernel: Kernel
    sources: tuple[MatrixField, ...]
    size: tuple[int, int]
    name: str = "pointwise"
    weights: tuple[Expr, ...] = ()

    @property
    def shape(self):
        return self.size

    @property
    def inputs(self):
        return self.sources

    @property
    def scalars(self):
        return self.weights

    def _compute(self, points, strict, cache):
        values = [s.evaluate(points, strict, cache) for s in self.sources]
        values += [
            w.evaluate(points, strict, cache)[:, None, None]
            for w in self.weights
        ]
        out = self.kernel(points, *values)
        if strict and out.size:
            bad = ~np.isfinite(out).reshape(out.shape[0], -1).all(axis=1)
            if bad.any():
                index = int(np.flatnonzero(bad)[0])
                raise GuardViolation(f"{self.name} guard fails", points[index])
        return out


@dataclass(frozen=True)
class MatrixEntry(Expr):
    field: MatrixField
    row: int
    col: int

    @property
    def smoothness(self) -> float:
        return self.field.smoothness

    @property
    def children(self) -> tuple[Expr, ...]:
        return ()

    def _compute(self, points, strict, cache):
        values = self.field.evaluate(points, strict, cache)
        return values[:, self.row, self.col]

    def _substitute(self, components, memo):
        return MatrixEntry(
            self.field.compose(components, memo), self.row, self.col
        )

    def max_variable(self) -> int:
        return self.field.max_variable()

    def __str__(self) -> str:
        return f"entry[{self.row},{self.col}]"


@dataclass(frozen=True)
class Determinant(Expr):
    field: MatrixField

    @property
    def smoothness(self) -> float:
        return self.field.smoothness

    @property
    def children(self) -> tuple[Expr, ...]:
        return ()

    def _compute(self, points, strict, cache):
        values = self.field.evaluate(points, strict, cache)
        if values.shape[1] == 0:
            return np.ones(points.shape[0])
        out = np.full(points.shape[0], np.nan)
        finite = np.isfinite(values).reshape(values.shape[0], -1).all(axis=1)
        if finite.any():
            out[finite] = np.linalg.det(values[finite])
        return out

    def _substitute(self, components, memo):
        return Determinant(self.field.compose(components, memo))

    def max_variable(self) -> int:
        return self.field.max_variable()

    def __str__(self) -> str:
        return "det[...]"


def _smallest_singular(values: np.ndarray) -> np.ndarray:
    smallest = np.zeros(values.shape[0])
    finite = np.isfinite(values).reshape(values.shape[0], -1).all(axis=1)
    if finite.any() and min(values.shape[1:]) > 0:
        smallest[finite] = np.linalg.svd(values[finite], compute_uv=False)[
            :, -1
        ]
    return smallest


def projector_onto(frame: MatrixField, eps: float = 1e-9) -> Pointwise:
    """Orthogonal projector F (F^T F)^-1 F^T onto the columns of a frame.

    Guarded by the smallest singular value of F exceeding `eps`.
    """
    n = frame.shape[0]

    def kernel(points, values):
        out = np.full((values.shape[0], n, n), np.nan)
        if values.shape[2] == 0:
            out[:] = 0.0
            return out
        good = _smallest_singular(values) > eps
        if good.any():
            f = values[good]
            gram = np.swapaxes(f, 1, 2) @ f
            out[good] = f @ np.linalg.solve(gram, np.swapaxes(f, 1, 2))
        return out

    return Pointwise(kernel, (frame,), (n, n), "projector")


def least_norm_solve(
    matrix: MatrixField, rhs: MatrixField, eps: float = 1e-9
) -> Pointwise:
    """c = A^T (A A^T)^-1 b, guarded by the smallest singular value of A.

    The guard is read after scaling the columns of A to unit length.
    """
    rows, cols = matrix.shape

    def kernel(points, a, b):
        out = np.full((a.shape[0], cols, b.shape[2]), np.nan)
        if rows == 0:
            out[:] = 0.0
            return out
        norms = np.linalg.norm(a, axis=1, keepdims=True)
        scaled = a / np.where(norms > 0, norms, 1.0)
        good = _smallest_singular(scaled) > eps
        if good.any():
            at = np.swapaxes(a[good], 1, 2)
            out[good] = at @ np.linalg.solve(a[good] @ at, b[good])
        return out

    return Pointwise(kernel, (matrix, rhs), (cols, rhs.shape[1]), "solve")


@dataclass(frozen=True, eq=False)
class Select(Derived):
    """Sub-matrix of chosen rows and columns."""

    field: MatrixField
    rows: tuple[int, ...]
    cols: tuple[int, ...]

    @property
    def shape(self):
        return (len(self.rows), len(self.cols))

    @property
    def inputs(self):
        return (self.field,)

    def _compute(self, points, strict, cache):
        values = self.field.evaluate(points, strict, cache)
        return values[:, self.rows, :][:, :, self.cols]


def columns(field: MatrixField, cols: t.Sequence[int]) -> Select:
    return Select(field, tuple(range(field.shape[0])), tuple(cols))


@dataclass(frozen=True, eq=False)
class Undefined(MatrixField):
    """Placeholder for a field on an empty domain, e.g. disjoint charts."""

    size: tuple[int, int]
    reason: str = "field is undefined here"

    @property
    def shape(self):
        return self.size

    @property
    def smoothness(self) -> float:
        return SMOOTH

    def max_variable(self) -> int:
        return -1

    def _compute(self, points, strict, cache):
        if strict and points.shape[0]:
            raise GuardViolation(self.reason, points[0])
        return np.full((points.shape[0],) + tuple(self.size), np.nan)

    def _compose(self, components, memo):
        return self
