import numpy as np


class CocycleError(Exception):
    """Root of every error raised by the library.

    `point` is the sample (base point, or matrix for pointwise
    routines) that witnesses the failure, when there is one.
    """

    def __init__(self, message: str, point=None) -> None:
        self.message = message
        self.point = None if point is None else np.asarray(point, dtype=float)
        super().__init__(self._render())

    def _render(self) -> str:
        if self.point is None:
            return self.message
        witness = np.array2string(self.point, precision=6, separator=", ")
        return f"{self.message} (at {witness})"


class GuardViolation(CocycleError):
    pass


class DimensionMismatch(CocycleError):
    pass


class NotPolynomial(CocycleError):
    pass


class OpenSetRejected(CocycleError):
    pass


class NotDisjoint(CocycleError):
    pass


class CoverageFailure(CocycleError):
    pass


class ContainmentFailure(CocycleError):
    pass


class BaseMismatch(CocycleError):
    pass


class ImageEscapesBase(CocycleError):
    pass


class GeneratorsDegenerate(CocycleError):
    pass


class RankDrop(CocycleError):
    pass


class NoChartFound(CocycleError):
    pass


class NotCatalogBase(CocycleError):
    pass


class NearSingular(CocycleError):
    pass


class InconsistentSignature(CocycleError):
    def __init__(self, message: str, types=(), points=()) -> None:
        self.types = tuple(types)
        self.points = tuple(np.asarray(p, dtype=float) for p in points)
        super().__init__(message, self.points[0] if self.points else None)


class OmegaViolation(CocycleError):
    pass


class NotPositive(CocycleError):
    pass


class TCoverGap(CocycleError):
    def __init__(self, message: str, point=None, t: float | None = None):
        self.t = t
        super().__init__(message, point)


class BandMismatch(CocycleError):
    pass


class ContractionEscapesBase(CocycleError):
    pass


class EndpointMismatch(CocycleError):
    pass


class WitnessRejected(CocycleError):
    pass


class ParseError(CocycleError):
    def __init__(
        self,
        message: str,
        line: int | None = None,
        column: int | None = None,
        path: str | None = None,
    ) -> None:
        self.line = line
        self.column = column
        self.path = path
        super().__init__(message)

    def _render(self) -> str:
        where = []
        if self.path:
            where.append(self.path)
        if self.line is not None:
            where.append(f"line {self.line}")
        if self.column is not None:
            where.append(f"column {self.column}")
        if not where:
            return self.message
        return f"{', '.join(where)}: {self.message}"


class UnresolvedReference(ParseError):
    pass
