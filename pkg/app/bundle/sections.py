import logging
from dataclasses import dataclass

import numpy as np

from app.certificate import CheckReport, matrix_residuals, upper_check
from app.config import DEFAULT_SMOOTHNESS, IDENTITY_TOLERANCE
from app.errors import GeneratorsDegenerate, GuardViolation
from app.exprcore import Expr, MatrixField, SamplePlan, partition_of_unity
from app.exprcore.fields import (
    ConstantMatrix,
    MatrixEntry,
    Stack,
    Supported,
    glue,
    least_norm_solve,
)

from .cocycle import BundleRep

logger = logging.getLogger(__name__)

DEFAULT_PLAN = SamplePlan()


@dataclass(frozen=True, eq=False)
class SectionRep:
    """Per-chart coordinate columns (d x 1 fields) of a section."""

    bundle: BundleRep
    values: tuple[MatrixField, ...]
    name: str = "section"

    def __post_init__(self) -> None:
        if len(self.values) != self.bundle.cover.size:
            raise ValueError("one value field per chart expected")
        for v in self.values:
            if v.shape != (self.bundle.rank, 1):
                raise ValueError(
                    f"section value of shape {v.shape}, expected "
                    f"{(self.bundle.rank, 1)}"
                )


def evaluate_section(
    s: SectionRep, chart: int, points: np.ndarray
) -> np.ndarray:
    """(N, d) coordinates of `s` in `chart` at points of that chart."""
    return s.values[chart].evaluate(np.asarray(points, float))[:, :, 0]


def validate_section(
    s: SectionRep,
    plan: SamplePlan = DEFAULT_PLAN,
    tol: float = IDENTITY_TOLERANCE,
) -> CheckReport:
    """v_i = g_ij v_j on sampled overlaps."""
    b = s.bundle
    residuals, where = [], []
    for i, j in b.pairs():
        points = b.cover.samples(plan, i, j).points
        if len(points) == 0:
            continue
        v_i = s.values[i].evaluate(points, strict=False)
        g_ij = b.transition(i, j).evaluate(points, strict=False)
        v_j = s.values[j].evaluate(points, strict=False)
        residuals.append(matrix_residuals(v_i, g_ij @ v_j))
        where.append(points)
    check = upper_check(
        "transformation",
        np.concatenate(residuals) if residuals else np.zeros(0),
        np.concatenate(where) if where else np.zeros((0, 0)),
        tol,
    )
    return CheckReport(s.name, (check,))


def _unit(rank: int, j: int) -> ConstantMatrix:
    column = np.zeros((rank, 1))
    column[j, 0] = 1.0
    return ConstantMatrix(column)


def generating_sections(
    b: BundleRep,
    r: int = DEFAULT_SMOOTHNESS,
    plan: SamplePlan = DEFAULT_PLAN,
) -> list[SectionRep]:
    """The q*d sections lambda_i e_j, read in chart k as g_ki lambda_i e_j."""
    weights = partition_of_unity(b.cover, r, plan)
    sections = []
    for i, weight in enumerate(weights):
        for j in range(b.rank):
            values = tuple(
                Supported(weight, b.transition(k, i) @ _unit(b.rank, j))
                for k in range(b.cover.size)
            )
            sections.append(
                SectionRep(b, values, f"s[{b.cover.names[i]},{j}]")
            )
    logger.debug("%d generating sections of %s", len(sections), b.name)
    return sections


def generator_matrix(gens: list[SectionRep], chart: int) -> MatrixField:
    """d x m field whose columns are the generators read in `chart`."""
    return Stack(tuple(g.values[chart] for g in gens), axis=1)


def coefficients(
    s: SectionRep,
    gens: list[SectionRep],
    r: int = DEFAULT_SMOOTHNESS,
    plan: SamplePlan = DEFAULT_PLAN,
) -> list[Expr]:
    """c with s = sum_j c_j gens_j, the least-norm solution per chart.

    The least-norm solution does not depend on the chart it is computed
    in, so the chart-wise solves glue by the partition of unity.
    """
    b = s.bundle
    if not gens:
        raise GeneratorsDegenerate("no generators given")
    if b.rank == 0:
        zero = _zero_column(len(gens))
        return [MatrixEntry(zero, j, 0) for j in range(len(gens))]
    weights = partition_of_unity(b.cover, r, plan)
    solves = [
        least_norm_solve(generator_matrix(gens, k), s.values[k])
        for k in range(b.cover.size)
    ]
    glued = glue(weights, solves)
    points = b.cover.samples(plan).points
    try:
        glued.evaluate(points)
    except GuardViolation as error:
        raise GeneratorsDegenerate(
            "generators do not span the fiber", error.point
        ) from error
    return [MatrixEntry(glued, j, 0) for j in range(len(gens))]


def _zero_column(size: int) -> ConstantMatrix:
    return ConstantMatrix(np.zeros((size, 1)))


def reconstruct(
    coefficients: list[Expr], gens: list[SectionRep], chart: int, points
) -> np.ndarray:
    """(N, d) values of sum_j c_j gens_j in `chart`."""
    points = np.asarray(points, float)
    total = 0.0
    for c, g in zip(coefficients, gens):
        total = total + c.evaluate(points)[:, None] * evaluate_section(
            g, chart, points
        )
    return np.asarray(total)
