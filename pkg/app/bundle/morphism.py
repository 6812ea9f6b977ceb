import logging
from dataclasses import dataclass

import numpy as np

from app.certificate import (
    CheckReport,
    determinants,
    lower_check,
    matrix_residuals,
    upper_check,
)
from app.config import WITNESS_TOLERANCE
from app.errors import BaseMismatch
from app.exprcore import MatrixField, SamplePlan, identity

from .cocycle import BundleRep, refine, reindexed

logger = logging.getLogger(__name__)

DEFAULT_PLAN = SamplePlan()


@dataclass(frozen=True, eq=False)
class MorphismField:
    """Chart-wise matrices u_i from `source` to `target` on one cover."""

    source: BundleRep
    target: BundleRep
    maps: tuple[MatrixField, ...]
    name: str = "morphism"

    def __post_init__(self) -> None:
        if self.source.cover != self.target.cover:
            raise BaseMismatch("source and target live on different covers")
        if len(self.maps) != self.source.cover.size:
            raise ValueError("one matrix field per chart expected")
        shape = (self.target.rank, self.source.rank)
        for u in self.maps:
            if u.shape != shape:
                raise ValueError(f"morphism field {u.shape}, expected {shape}")

    @property
    def cover(self):
        return self.source.cover

    def then(self, other: "MorphismField") -> "MorphismField":
        """`other` after `self`, on the common refinement of the covers."""
        first, second = self, other
        if self.cover != other.cover:
            first, second = _on_common_cover(self, other)
        maps = tuple(v @ u for u, v in zip(first.maps, second.maps))
        return MorphismField(
            first.source, second.target, maps, f"{other.name}.{self.name}"
        )


def _on_common_cover(u: MorphismField, v: MorphismField):
    mid_u, mid_v, refinement = refine(u.target, v.source)
    left = [p[0] for p in refinement.pairs]
    right = [p[1] for p in refinement.pairs]
    cover = refinement.cover
    u2 = MorphismField(
        reindexed(u.source, cover, left),
        mid_u,
        tuple(u.maps[i] for i in left),
        u.name,
    )
    v2 = MorphismField(
        mid_v,
        reindexed(v.target, cover, right),
        tuple(v.maps[k] for k in right),
        v.name,
    )
    return u2, v2


def identity_morphism(b: BundleRep) -> MorphismField:
    return MorphismField(
        b, b, tuple(identity(b.rank) for _ in range(b.cover.size)), "id"
    )


def check_isomorphism(
    u: MorphismField,
    plan: SamplePlan = DEFAULT_PLAN,
    tol: float = WITNESS_TOLERANCE,
) -> CheckReport:
    """Intertwining u_i g_ij = g'_ij u_j and invertibility of every u_i."""
    source, target, cover = u.source, u.target, u.cover
    residuals, where = [], []
    for i, j in source.pairs():
        points = cover.samples(plan, i, j).points
        if len(points) == 0:
            continue
        lhs = u.maps[i].evaluate(points, strict=False) @ source.transition(
            i, j
        ).evaluate(points, strict=False)
        rhs = target.transition(i, j).evaluate(points, strict=False) @ (
            u.maps[j].evaluate(points, strict=False)
        )
        residuals.append(matrix_residuals(lhs, rhs))
        where.append(points)
    dets, det_points = [], []
    square = source.rank == target.rank
    for i in range(cover.size):
        points = cover.samples(plan, i).points
        if len(points) == 0 or not square:
            continue
        values = u.maps[i].evaluate(points, strict=False)
        dets.append(np.abs(determinants(values)))
        det_points.append(points)
    checks = [
        upper_check(
            "intertwining",
            np.concatenate(residuals) if residuals else np.zeros(0),
            np.concatenate(where) if where else np.zeros((0, 0)),
            tol,
        ),
        lower_check(
            "determinant",
            np.concatenate(dets) if dets else np.zeros(0),
            np.concatenate(det_points) if det_points else np.zeros((0, 0)),
            tol,
        ),
    ]
    if not square:
        checks.append(
            upper_check("rank", [abs(source.rank - target.rank)], [[0]], 0.5)
        )
    report = CheckReport(
        u.name,
        tuple(checks),
        {"source rank": source.rank, "target rank": target.rank},
    )
    logger.info(
        "isomorphism %s: %s (residual %.3g, min |det| %.3g)",
        u.name,
        "pass" if report.passed else "fail",
        report.max_residual,
        report["determinant"].max_residual,
    )
    return report
