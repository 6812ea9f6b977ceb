import enum
import itertools
import typing as t
from dataclasses import dataclass

import numpy as np

from app.config import EQUALITY_TOLERANCE
from app.errors import NotPolynomial

from .expr import Expr, Substitution, as_expr


class Relation(enum.Enum):
    POSITIVE = ">"
    NONNEGATIVE = ">="
    ZERO = "="

    @property
    def strict(self) -> bool:
        return self is Relation.POSITIVE


@dataclass(frozen=True)
class Condition:
    expr: Expr
    relation: Relation

    def holds(
        self,
        points: np.ndarray,
        margin: float = 0.0,
        tol: float = EQUALITY_TOLERANCE,
    ) -> np.ndarray:
        value = self.expr.evaluate(points, strict=False)
        with np.errstate(invalid="ignore"):
            if self.relation is Relation.POSITIVE:
                return value > margin
            if self.relation is Relation.NONNEGATIVE:
                return value >= -tol
            return np.abs(value) <= tol

    def closure(self) -> "Condition":
        if self.relation is Relation.POSITIVE:
            return Condition(self.expr, Relation.NONNEGATIVE)
        return self

    def compose(
        self,
        components: t.Sequence[Expr],
        memo: Substitution | None = None,
    ) -> "Condition":
        return Condition(
            self.expr.substitute(components, memo), self.relation
        )

    def __str__(self) -> str:
        return f"{self.expr} {self.relation.value} 0"


def positive(expr) -> Condition:
    return Condition(as_expr(expr), Relation.POSITIVE)


def nonnegative(expr) -> Condition:
    return Condition(as_expr(expr), Relation.NONNEGATIVE)


def zero(expr) -> Condition:
    return Condition(as_expr(expr), Relation.ZERO)


Piece = tuple[Condition, ...]


@dataclass(frozen=True)
class SemialgebraicSet:
    """Finite union of pieces, each a conjunction of sign conditions.

    No pieces is the empty set; a piece without conditions is the whole
    ambient space R^dim.
    """

    dim: int
    pieces: tuple[Piece, ...]

    @classmethod
    def whole(cls, dim: int) -> "SemialgebraicSet":
        return cls(dim, ((),))

    @classmethod
    def empty(cls, dim: int) -> "SemialgebraicSet":
        return cls(dim, ())

    @classmethod
    def basic(cls, dim: int, *conditions: Condition) -> "SemialgebraicSet":
        return cls(dim, (tuple(conditions),))

    @property
    def is_open(self) -> bool:
        return all(c.relation.strict for piece in self.pieces for c in piece)

    @property
    def is_closed(self) -> bool:
        return not any(
            c.relation.strict for piece in self.pieces for c in piece
        )

    @property
    def conditions(self) -> t.Iterator[Condition]:
        for piece in self.pieces:
            yield from piece

    def contains(
        self,
        points: np.ndarray,
        margin: float = 0.0,
        tol: float = EQUALITY_TOLERANCE,
    ) -> np.ndarray:
        """Membership mask; conditions are read left to right per piece.

        Later conditions of a piece are only evaluated on points that
        passed the earlier ones, so a chart may guard its own thresholds.
        """
        points = np.asarray(points, dtype=float)
        inside = np.zeros(points.shape[0], dtype=bool)
        for piece in self.pieces:
            alive = ~inside
            for condition in piece:
                if not alive.any():
                    break
                index = np.flatnonzero(alive)
                ok = condition.holds(points[index], margin, tol)
                alive[index[~ok]] = False
            inside |= alive
        return inside

    def closure(self) -> "SemialgebraicSet":
        return SemialgebraicSet(
            self.dim,
            tuple(tuple(c.closure() for c in piece) for piece in self.pieces),
        )

    def intersect(self, other: "SemialgebraicSet") -> "SemialgebraicSet":
        dim = max(self.dim, other.dim)
        return SemialgebraicSet(
            dim,
            tuple(
                a + b
                for a, b in itertools.product(self.pieces, other.pieces)
            ),
        )

    def union(self, other: "SemialgebraicSet") -> "SemialgebraicSet":
        return SemialgebraicSet(
            max(self.dim, other.dim), self.pieces + other.pieces
        )

    def complement(self) -> "SemialgebraicSet":
        """Closed complement of an open set, expanded back into pieces."""
        if not self.is_open:
            raise ValueError("complement is only formed for open sets")
        negated = [
            [Condition(-c.expr, Relation.NONNEGATIVE) for c in piece]
            for piece in self.pieces
        ]
        if any(not choices for choices in negated):
            return SemialgebraicSet.empty(self.dim)
        return SemialgebraicSet(
            self.dim, tuple(tuple(p) for p in itertools.product(*negated))
        )

    def compose(
        self, components: t.Sequence[Expr], dim: int
    ) -> "SemialgebraicSet":
        """Preimage under the map given by `components` from R^dim."""
        memo = Substitution()
        return SemialgebraicSet(
            dim,
            tuple(
                tuple(c.compose(components, memo) for c in piece)
                for piece in self.pieces
            ),
        )

    def lifted(self, dim: int) -> "SemialgebraicSet":
        return SemialgebraicSet(dim, self.pieces)

    def refined(self, *conditions: Condition) -> "SemialgebraicSet":
        return SemialgebraicSet(
            self.dim, tuple(piece + conditions for piece in self.pieces)
        )

    def require_polynomial(self, what: str = "set") -> None:
        for condition in self.conditions:
            if not condition.expr.is_polynomial():
                raise NotPolynomial(
                    f"{what} condition {condition} is not polynomial"
                )

    def __str__(self) -> str:
        if not self.pieces:
            return "{}"
        parts = []
        for piece in self.pieces:
            parts.append(" and ".join(str(c) for c in piece) or "true")
        return " or ".join(f"({p})" for p in parts)
