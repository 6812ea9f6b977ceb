"""Bundles inside trivial bundles, as idempotent matrix fields.

`gauss_embedding` sends a cocycle bundle to the orthogonal projector onto
its fibers inside R^n; `bundle_from_projector` reads a cocycle back off
a projector field by choosing, around each point, d columns of P that
stay independent.
"""

import itertools
import logging
from dataclasses import dataclass

import numpy as np

from app.certificate import CheckReport, matrix_residuals, upper_check
from app.config import (
    DEFAULT_SMOOTHNESS,
    GRAM_SCHMIDT_TOLERANCE,
    MINOR_THRESHOLD,
    RANK_THRESHOLD,
)
from app.errors import GuardViolation, NoChartFound, RankDrop
from app.exprcore import (
    Cover,
    Determinant,
    MatrixField,
    SamplePlan,
    SemialgebraicSet,
    identity,
    partition_of_unity,
    positive,
)
from app.exprcore.fields import (
    ConstantMatrix,
    Inverse,
    Stack,
    Supported,
    Transpose,
    columns,
    glue,
    projector_onto,
)

from .cocycle import BundleRep, refine, trivial_bundle, whitney_sum
from .morphism import MorphismField

logger = logging.getLogger(__name__)

DEFAULT_PLAN = SamplePlan()


@dataclass(frozen=True, eq=False)
class ProjectorField:
    """An n x n projector field over the base of `cover`.

    `frames`, when known, are per-chart n x d fields whose columns span
    the range of P on that chart.
    """

    cover: Cover
    field: MatrixField
    frames: tuple[MatrixField, ...] | None = None
    name: str = "P"

    @property
    def dim(self) -> int:
        return self.field.shape[0]

    def complement(self) -> "ProjectorField":
        return ProjectorField(
            self.cover, identity(self.dim) - self.field, None, f"I-{self.name}"
        )


def _traces(values: np.ndarray) -> np.ndarray:
    return np.trace(values, axis1=1, axis2=2)


def validate_projector(
    p: ProjectorField,
    plan: SamplePlan = DEFAULT_PLAN,
    tol: float = GRAM_SCHMIDT_TOLERANCE,
) -> CheckReport:
    points = p.cover.samples(plan).points
    values = p.field.evaluate(points, strict=False)
    traces = _traces(values) if len(points) else np.zeros(0)
    rank = 0
    if len(traces) and np.isfinite(traces[0]):
        rank = int(np.rint(traces[0]))
    checks = (
        upper_check(
            "symmetry",
            matrix_residuals(values, np.swapaxes(values, 1, 2)),
            points,
            tol,
        ),
        upper_check(
            "idempotency",
            matrix_residuals(values @ values, values),
            points,
            tol,
        ),
        upper_check(
            "trace", np.abs(traces - rank), points, RANK_THRESHOLD
        ),
    )
    return CheckReport(p.name, checks, {"rank": rank, "ambient": p.dim})


def projector_rank(
    p: ProjectorField,
    plan: SamplePlan = DEFAULT_PLAN,
    tol: float = RANK_THRESHOLD,
) -> int:
    """The constant integer trace of P at the base samples, each within
    `tol` of it."""
    points = p.cover.samples(plan).points
    if len(points) == 0:
        return 0
    try:
        traces = _traces(p.field.evaluate(points))
    except GuardViolation as error:
        raise RankDrop("projector undefined", error.point) from error
    rank = int(np.rint(traces[0]))
    off = np.abs(traces - rank) > tol
    if off.any():
        index = int(np.flatnonzero(off)[0])
        raise RankDrop(
            f"trace {traces[index]:.6g} differs from rank {rank}",
            points[index],
        )
    return rank


def gauss_embedding(
    b: BundleRep,
    r: int = DEFAULT_SMOOTHNESS,
    plan: SamplePlan = DEFAULT_PLAN,
) -> ProjectorField:
    """Projector onto psi(E) in R^(q d), psi_k(v) = (lambda_i g_ik v)_i."""
    weights = partition_of_unity(b.cover, r, plan)
    frames = tuple(
        Stack(
            tuple(
                Supported(weights[i], b.transition(i, k))
                for i in range(b.cover.size)
            ),
            axis=0,
        )
        for k in range(b.cover.size)
    )
    field = glue(weights, [projector_onto(f) for f in frames])
    p = ProjectorField(b.cover, field, frames, f"P({b.name})")
    rank = projector_rank(p, plan)
    if rank != b.rank:
        raise RankDrop(f"embedding of {b.name} has rank {rank}, not {b.rank}")
    logger.info(
        "embedded %s of rank %d into R^%d", b.name, b.rank, p.dim
    )
    return p


def _gram(frame: MatrixField) -> MatrixField:
    return Transpose(frame) @ frame


def _first_subsets(values: np.ndarray, rank: int, threshold: float):
    """Index of the lexicographically first good column subset per point."""
    n = values.shape[1]
    subsets = list(itertools.combinations(range(n), rank))
    choice = np.full(values.shape[0], -1)
    for index, subset in enumerate(subsets):
        open_rows = np.flatnonzero(choice < 0)
        if len(open_rows) == 0:
            break
        f = values[open_rows][:, :, list(subset)]
        dets = np.linalg.det(np.swapaxes(f, 1, 2) @ f)
        choice[open_rows[dets > threshold]] = index
    return subsets, choice


def bundle_from_projector(
    p: ProjectorField,
    plan: SamplePlan = DEFAULT_PLAN,
    threshold: float = MINOR_THRESHOLD,
) -> BundleRep:
    """Cocycle of the range of P, one chart per column subset in use.

    Chart U_I is where the Gram determinant of the columns I of P exceeds
    the threshold; the chosen subsets are the lexicographically first
    good ones at the base samples.
    """
    base = p.cover.base
    rank = projector_rank(p, plan)
    n = p.dim
    if rank == 0:
        cover = Cover.single(base, "P[]")
        frame = ConstantMatrix(np.zeros((n, 0)))
        return BundleRep(cover, 0, {}, f"range({p.name})", (frame,))
    points = p.cover.samples(plan).points
    values = p.field.evaluate(points)
    subsets, choice = _first_subsets(values, rank, threshold)
    if (choice < 0).any():
        index = int(np.flatnonzero(choice < 0)[0])
        raise NoChartFound(
            "no column subset of P is independent", points[index]
        )
    used = sorted(set(choice.tolist()))
    frames = tuple(columns(p.field, subsets[k]) for k in used)
    charts = tuple(
        SemialgebraicSet.basic(
            base.dim, positive(Determinant(_gram(f)) - threshold)
        )
        for f in frames
    )
    names = tuple(
        "P[" + ",".join(str(c) for c in subsets[k]) + "]" for k in used
    )
    cover = Cover(base, charts, names)
    cover.certify(plan)
    transitions = {}
    for a, fa in enumerate(frames):
        for c, fc in enumerate(frames):
            if a != c:
                transitions[(a, c)] = (
                    Inverse(_gram(fa)) @ Transpose(fa) @ fc
                )
    logger.info(
        "bundle of rank %d from %s on %d charts", rank, p.name, len(frames)
    )
    return BundleRep(cover, rank, transitions, f"range({p.name})", frames)


def complement(
    b: BundleRep,
    r: int = DEFAULT_SMOOTHNESS,
    plan: SamplePlan = DEFAULT_PLAN,
) -> BundleRep:
    p = gauss_embedding(b, r, plan)
    result = bundle_from_projector(p.complement(), plan)
    return result.renamed(f"{b.name}'")


def _coordinates(target_frame: MatrixField, source_frame: MatrixField):
    """Coordinates in `target_frame` of vectors given in `source_frame`."""
    return (
        Inverse(_gram(target_frame)) @ Transpose(target_frame) @ source_frame
    )


def projector_isomorphism(
    b: BundleRep,
    r: int = DEFAULT_SMOOTHNESS,
    plan: SamplePlan = DEFAULT_PLAN,
) -> MorphismField:
    """b -> bundle_from_projector(gauss_embedding(b)) through R^n."""
    p = gauss_embedding(b, r, plan)
    image = bundle_from_projector(p, plan)
    source, target, refinement = refine(b, image, plan)
    maps = tuple(
        _coordinates(image.frames[j], p.frames[k])
        for k, j in refinement.pairs
    )
    return MorphismField(source, target, maps, f"psi({b.name})")


def splitting_isomorphism(
    b: BundleRep,
    r: int = DEFAULT_SMOOTHNESS,
    plan: SamplePlan = DEFAULT_PLAN,
) -> MorphismField:
    """b + complement(b) -> eps^n, (v, w) -> F_k v + F'_J w."""
    p = gauss_embedding(b, r, plan)
    other = bundle_from_projector(p.complement(), plan)
    first, second, refinement = refine(b, other, plan)
    total = whitney_sum(first, second, plan)
    maps = tuple(
        Stack((p.frames[k], other.frames[j]), axis=1)
        for k, j in refinement.pairs
    )
    target = trivial_bundle(total.cover, p.dim)
    return MorphismField(total, target, maps, f"split({b.name})")
