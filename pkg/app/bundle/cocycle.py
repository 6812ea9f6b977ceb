import itertools
import logging
import typing as t
from dataclasses import dataclass, field

import numpy as np

from app.certificate import (
    CheckReport,
    determinants,
    lower_check,
    matrix_residuals,
    upper_check,
)
from app.config import IDENTITY_TOLERANCE
from app.errors import BaseMismatch, ImageEscapesBase
from app.exprcore import Base, Cover, MatrixField, SamplePlan, identity
from app.exprcore.fields import (
    BlockDiagonal,
    Inverse,
    Kronecker,
    Transpose,
    Undefined,
)
from app.exprcore.maps import Map

logger = logging.getLogger(__name__)

DEFAULT_PLAN = SamplePlan()

Pair = tuple[int, int]


@dataclass(frozen=True, eq=False)
class BundleRep:
    """A vector bundle given by transition fields on a cover.

    `transitions[(i, j)]` is g_ij, defined on the overlap of charts i and
    j: a fiber vector with coordinates v_j in chart j has coordinates
    g_ij v_j in chart i. g_ii is the identity and is never stored; a
    missing g_ij is read as the inverse of g_ji, and as undefined when
    neither is given (the charts do not meet).

    `frames` holds, for bundles built inside a trivial bundle, the
    per-chart ambient frames whose columns span the fibers.
    """

    cover: Cover
    rank: int
    transitions: dict[Pair, MatrixField]
    name: str = "bundle"
    frames: tuple[MatrixField, ...] | None = field(default=None, repr=False)

    def __post_init__(self) -> None:
        for (i, j), g in self.transitions.items():
            if i == j:
                raise ValueError(f"transition g_{i}{i} is the identity")
            if g.shape != (self.rank, self.rank):
                raise ValueError(
                    f"transition {(i, j)} has shape {g.shape}, "
                    f"expected {(self.rank, self.rank)}"
                )

    @property
    def base(self) -> Base:
        return self.cover.base

    def transition(self, i: int, j: int) -> MatrixField:
        if i == j:
            return identity(self.rank)
        if (i, j) in self.transitions:
            return self.transitions[(i, j)]
        if (j, i) in self.transitions:
            return Inverse(self.transitions[(j, i)])
        return Undefined(
            (self.rank, self.rank),
            f"charts {self.cover.names[i]} and {self.cover.names[j]} "
            "do not meet",
        )

    def pairs(self) -> t.Iterator[Pair]:
        for i in range(self.cover.size):
            for j in range(self.cover.size):
                if i != j:
                    yield (i, j)

    def renamed(self, name: str) -> "BundleRep":
        return BundleRep(
            self.cover, self.rank, self.transitions, name, self.frames
        )


def trivial_bundle(cover: Cover, rank: int, name: str = "") -> BundleRep:
    transitions = {
        (i, j): identity(rank)
        for i in range(cover.size)
        for j in range(cover.size)
        if i != j
    }
    return BundleRep(cover, rank, transitions, name or f"eps{rank}")


def zero_bundle(cover: Cover) -> BundleRep:
    return trivial_bundle(cover, 0, "zero")


def validate_cocycle(
    b: BundleRep,
    plan: SamplePlan = DEFAULT_PLAN,
    tol: float = IDENTITY_TOLERANCE,
) -> CheckReport:
    """Sampled identity, cocycle and invertibility checks of a bundle."""
    cover = b.cover
    eye = np.eye(b.rank)
    inverse_res, inverse_pts = [], []
    cocycle_res, cocycle_pts = [], []
    det_values, det_pts = [], []
    for i, j in b.pairs():
        points = cover.samples(plan, i, j).points
        if len(points) == 0:
            continue
        g_ij = b.transition(i, j).evaluate(points, strict=False)
        g_ji = b.transition(j, i).evaluate(points, strict=False)
        inverse_res.append(matrix_residuals(g_ij @ g_ji, eye[None]))
        inverse_pts.append(points)
        with np.errstate(invalid="ignore"):
            dets = np.abs(determinants(g_ij))
        det_values.append(dets)
        det_pts.append(points)
    for i, j, k in itertools.permutations(range(cover.size), 3):
        points = cover.samples(plan, i, j, k).points
        if len(points) == 0:
            continue
        g_ij = b.transition(i, j).evaluate(points, strict=False)
        g_jk = b.transition(j, k).evaluate(points, strict=False)
        g_ik = b.transition(i, k).evaluate(points, strict=False)
        cocycle_res.append(matrix_residuals(g_ij @ g_jk, g_ik))
        cocycle_pts.append(points)
    checks = (
        upper_check(
            "inverse", _cat(inverse_res), _cat_points(inverse_pts), tol
        ),
        upper_check(
            "cocycle", _cat(cocycle_res), _cat_points(cocycle_pts), tol
        ),
        lower_check(
            "invertibility",
            _cat(det_values),
            _cat_points(det_pts),
            IDENTITY_TOLERANCE if b.rank else -1.0,
        ),
    )
    report = CheckReport(
        b.name, checks, {"rank": b.rank, "charts": cover.size}
    )
    logger.info(
        "cocycle of %s: %s (max residual %.3g)",
        b.name,
        "pass" if report.passed else "fail",
        report.max_residual,
    )
    return report


def _cat(parts: list[np.ndarray]) -> np.ndarray:
    return np.concatenate(parts) if parts else np.zeros(0)


def _cat_points(parts: list[np.ndarray]) -> np.ndarray:
    return np.concatenate(parts) if parts else np.zeros((0, 0))


@dataclass(frozen=True)
class Refinement:
    """Common refinement of two covers of one base.

    Chart `a` of `cover` is the intersection of chart `pairs[a][0]` of
    the first cover and chart `pairs[a][1]` of the second.
    """

    cover: Cover
    pairs: tuple[Pair, ...]


def common_cover(
    c1: Cover, c2: Cover, plan: SamplePlan = DEFAULT_PLAN
) -> Refinement:
    if c1.base != c2.base:
        raise BaseMismatch(
            f"bases {c1.base.name!r} and {c2.base.name!r} differ"
        )
    if c1 == c2:
        return Refinement(c1, tuple((i, i) for i in range(c1.size)))
    if c2.size == 1 and c2.charts[0].pieces == ((),):
        return Refinement(c1, tuple((i, 0) for i in range(c1.size)))
    if c1.size == 1 and c1.charts[0].pieces == ((),):
        return Refinement(c2, tuple((0, k) for k in range(c2.size)))
    charts, names, pairs = [], [], []
    for i, k in itertools.product(range(c1.size), range(c2.size)):
        chart = c1.charts[i].intersect(c2.charts[k])
        single = Cover(c1.base, (chart,))
        if len(single.samples(plan, 0)) == 0:
            continue
        charts.append(chart)
        names.append(f"{c1.names[i]}&{c2.names[k]}")
        pairs.append((i, k))
    cover = Cover(c1.base, tuple(charts), tuple(names))
    cover.certify(plan)
    logger.debug(
        "refined covers of %s: %d x %d -> %d charts",
        c1.base.name,
        c1.size,
        c2.size,
        cover.size,
    )
    return Refinement(cover, tuple(pairs))


def reindexed(
    b: BundleRep, cover: Cover, index: t.Sequence[int]
) -> BundleRep:
    """`b` on a finer cover whose chart a lies in chart index[a] of b."""
    transitions = {}
    for a in range(cover.size):
        for c in range(cover.size):
            if a != c:
                transitions[(a, c)] = b.transition(index[a], index[c])
    frames = None
    if b.frames is not None:
        frames = tuple(b.frames[i] for i in index)
    return BundleRep(cover, b.rank, transitions, b.name, frames)


def refine(
    b1: BundleRep, b2: BundleRep, plan: SamplePlan = DEFAULT_PLAN
) -> tuple[BundleRep, BundleRep, Refinement]:
    refinement = common_cover(b1.cover, b2.cover, plan)
    if refinement.cover is b1.cover and refinement.cover == b2.cover:
        return b1, b2, refinement
    first = reindexed(b1, refinement.cover, [p[0] for p in refinement.pairs])
    second = reindexed(
        b2, refinement.cover, [p[1] for p in refinement.pairs]
    )
    return first, second, refinement


def _combine(b1, b2, rank, combine, name, plan) -> BundleRep:
    b1, b2, _ = refine(b1, b2, plan)
    transitions = {
        (i, j): combine(b1.transition(i, j), b2.transition(i, j))
        for i, j in b1.pairs()
    }
    return BundleRep(b1.cover, rank, transitions, name)


def whitney_sum(
    b1: BundleRep, b2: BundleRep, plan: SamplePlan = DEFAULT_PLAN
) -> BundleRep:
    return _combine(
        b1,
        b2,
        b1.rank + b2.rank,
        lambda g, h: BlockDiagonal((g, h)),
        f"({b1.name}+{b2.name})",
        plan,
    )


def tensor(
    b1: BundleRep, b2: BundleRep, plan: SamplePlan = DEFAULT_PLAN
) -> BundleRep:
    return _combine(
        b1,
        b2,
        b1.rank * b2.rank,
        Kronecker,
        f"({b1.name}*{b2.name})",
        plan,
    )


def dual(b: BundleRep) -> BundleRep:
    transitions = {
        (i, j): Transpose(Inverse(b.transition(i, j))) for i, j in b.pairs()
    }
    return BundleRep(b.cover, b.rank, transitions, f"{b.name}^")


def hom(
    b1: BundleRep, b2: BundleRep, plan: SamplePlan = DEFAULT_PLAN
) -> BundleRep:
    result = tensor(dual(b1), b2, plan)
    return result.renamed(f"Hom({b1.name},{b2.name})")


def pullback(
    b: BundleRep,
    f: Map,
    base: Base,
    plan: SamplePlan = DEFAULT_PLAN,
    product=None,
) -> BundleRep:
    """f*b over `base`, for f mapping `base` into the base of b."""
    if f.source_dim != base.dim or f.target_dim != b.base.dim:
        raise BaseMismatch(
            f"map R^{f.source_dim} -> R^{f.target_dim} does not go from "
            f"{base.name} to {b.base.name}"
        )
    points = base.sample(plan).points
    if len(points):
        inside = b.base.contains(f.apply(points, strict=False))
        if not inside.all():
            index = int(np.flatnonzero(~inside)[0])
            raise ImageEscapesBase(
                f"image leaves {b.base.name}", points[index]
            )
    charts = tuple(f.preimage(chart) for chart in b.cover.charts)
    cover = Cover(base, charts, b.cover.names, product)
    transitions = {
        (i, j): f.pull(b.transition(i, j)) for i, j in b.pairs()
    }
    frames = None
    if b.frames is not None:
        frames = tuple(f.pull(frame) for frame in b.frames)
    return BundleRep(cover, b.rank, transitions, f"f*{b.name}", frames)
