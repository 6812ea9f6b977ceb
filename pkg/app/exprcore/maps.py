import typing as t

import numpy as np

from app.errors import DimensionMismatch

from .expr import Expr, Substitution, as_expr, var
from .fields import MatrixField, image
from .semialgebraic import SemialgebraicSet


class Map:
    """A map R^source_dim -> R^target_dim."""

    source_dim: int
    target_dim: int

    def apply(self, points: np.ndarray, strict: bool = True) -> np.ndarray:
        raise NotImplementedError

    @property
    def components(self) -> tuple[Expr, ...]:
        raise NotImplementedError

    @property
    def smoothness(self) -> float:
        return min((c.smoothness for c in self.components), default=np.inf)

    def preimage(self, s: SemialgebraicSet) -> SemialgebraicSet:
        return s.compose(self.components, self.source_dim)

    def pull(self, field: MatrixField) -> MatrixField:
        return field.compose(self.components)

    def __rshift__(self, obj):
        left_maps = []
        right_maps = []
        if isinstance(self, Composition):
            left_maps = list(self.maps)
        elif isinstance(self, Map):
            left_maps = [self]
        if isinstance(obj, Composition):
            right_maps = list(obj.maps)
        elif isinstance(obj, Map):
            right_maps = [obj]
        maps = left_maps + right_maps
        return Composition(*maps)


class ExprMap(Map):
    def __init__(self, components: t.Sequence, source_dim: int) -> None:
        self._components = tuple(as_expr(c) for c in components)
        self.source_dim = source_dim
        self.target_dim = len(self._components)
        used = max((c.max_variable() for c in self._components), default=-1)
        if used >= source_dim:
            raise DimensionMismatch(
                f"map from R^{source_dim} uses x{used}"
            )

    @property
    def components(self) -> tuple[Expr, ...]:
        return self._components

    def apply(self, points, strict=True):
        return image(self._components, np.asarray(points, float), strict)

    def __repr__(self) -> str:
        inner = ", ".join(str(c) for c in self._components)
        return f"ExprMap(R^{self.source_dim} -> ({inner}))"


class Composition(Map):
    """`a >> b` applies `a` first, then `b`."""

    def __init__(self, *maps: Map) -> None:
        for a, b in zip(maps, maps[1:]):
            if a.target_dim != b.source_dim:
                raise DimensionMismatch(
                    f"cannot follow a map into R^{a.target_dim} by one "
                    f"from R^{b.source_dim}"
                )
        self.maps = maps
        self.source_dim = maps[0].source_dim
        self.target_dim = maps[-1].target_dim

    def apply(self, points, strict=True):
        for m in self.maps:
            points = m.apply(points, strict)
        return points

    @property
    def components(self) -> tuple[Expr, ...]:
        components = self.maps[0].components
        for m in self.maps[1:]:
            memo = Substitution()
            components = tuple(
                c.substitute(components, memo) for c in m.components
            )
        return components


def identity_map(dim: int) -> ExprMap:
    return ExprMap([var(i) for i in range(dim)], dim)


def constant_map(point: t.Sequence[float], source_dim: int) -> ExprMap:
    return ExprMap([as_expr(float(v)) for v in point], source_dim)


def projection(source_dim: int, keep: t.Sequence[int]) -> ExprMap:
    return ExprMap([var(i) for i in keep], source_dim)


def at_parameter(dim: int, value: float) -> ExprMap:
    """x -> (x, value): the slice of a cylinder over R^dim."""
    return ExprMap([var(i) for i in range(dim)] + [as_expr(value)], dim)
