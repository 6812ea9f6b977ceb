"""Zero sets, separation, shrinking, partitions of unity, retractions.

Every construction returns expressions built from `Clamp` powers and
guarded quotients, so vanishing loci are exact: a function said to be
zero off a set evaluates to 0.0, not to something small.
"""

import logging

import numpy as np

from app.certificate import CheckReport, upper_check
from app.config import DEFAULT_SMOOTHNESS, IDENTITY_TOLERANCE
from app.errors import (
    ContainmentFailure,
    CoverageFailure,
    NotDisjoint,
    OpenSetRejected,
)

from .cover import Cover
from .expr import ONE, Clamp, Div, Expr, Pow, product, total, var
from .maps import ExprMap
from .sampling import SamplePlan, sample
from .semialgebraic import Relation, SemialgebraicSet, positive

logger = logging.getLogger(__name__)

DEFAULT_PLAN = SamplePlan()


def zero_function(closed: SemialgebraicSet, r: int = DEFAULT_SMOOTHNESS):
    """Nonnegative C^r function vanishing exactly on `closed`."""
    if not closed.is_closed:
        raise OpenSetRejected(f"{closed} uses strict conditions")
    factors = []
    for piece in closed.pieces:
        terms = []
        for c in piece:
            if c.relation is Relation.ZERO:
                terms.append(Pow(c.expr, 2))
            else:
                terms.append(Clamp(-c.expr, r + 1))
        factors.append(total(terms))
    return product(factors) if factors else ONE


def support_function(open_set: SemialgebraicSet, r: int = DEFAULT_SMOOTHNESS):
    """Nonnegative C^r function positive exactly on `open_set`."""
    if not open_set.is_open:
        raise OpenSetRejected(f"{open_set} is not open")
    return total(
        product(Clamp(c.expr, r + 1) for c in piece)
        for piece in open_set.pieces
    )


def _check_disjoint(x, y, plan, box) -> None:
    for a, b in ((x, y), (y, x)):
        points = sample(a, plan, box=box).points
        if len(points) == 0:
            continue
        shared = b.contains(points)
        if shared.any():
            index = int(np.flatnonzero(shared)[0])
            raise NotDisjoint("closed sets meet", points[index])


def separating_function(
    x: SemialgebraicSet,
    y: SemialgebraicSet,
    r: int = DEFAULT_SMOOTHNESS,
    plan: SamplePlan | None = DEFAULT_PLAN,
    box=None,
) -> Expr:
    """g^2 / (g^2 + h^2): exactly 0 on `x`, exactly 1 on `y`.

    `plan=None` skips the sampled disjointness check.
    """
    g = zero_function(x, r)
    h = zero_function(y, r)
    if plan is not None:
        _check_disjoint(x, y, plan, box)
    g2 = Pow(g, 2)
    return Div(g2, g2 + Pow(h, 2), eps=0.0)


def _separated_chart(base, chart, others, r) -> SemialgebraicSet:
    outside_others = SemialgebraicSet.empty(base.dim)
    for other in others:
        outside_others = outside_others.union(other)
    inner = outside_others.complement()
    outer = chart.complement()
    if base.region.is_closed:
        inner = inner.intersect(base.region)
        outer = outer.intersect(base.region)
    h = separating_function(inner, outer, r, plan=None)
    return chart.refined(positive(0.5 - h))


def shrink_cover(
    c: Cover, r: int = DEFAULT_SMOOTHNESS, plan: SamplePlan = DEFAULT_PLAN
) -> Cover:
    """Cover by V_i with closure(V_i) inside U_i.

    Charts are shrunk one at a time against the current versions of the
    others, so the result keeps covering the base.
    """

    def build() -> Cover:
        c.certify(plan)
        current = list(c.charts)
        for i in range(c.size):
            others = current[:i] + current[i + 1 :]
            current[i] = _separated_chart(c.base, c.charts[i], others, r)
        shrunk = Cover(c.base, tuple(current), c.names)
        points = c.samples(plan).points
        if len(points):
            covered = shrunk.membership(points).any(axis=1)
            if not covered.all():
                index = int(np.flatnonzero(~covered)[0])
                raise CoverageFailure(
                    "shrunk charts lost a point", points[index]
                )
        for i in range(c.size):
            inside = sample(
                shrunk.overlap_set(i).closure(), plan, box=c.base.box
            ).points
            if len(inside) == 0:
                continue
            escaped = ~c.charts[i].contains(inside)
            if escaped.any():
                index = int(np.flatnonzero(escaped)[0])
                raise CoverageFailure(
                    f"closure of shrunk chart {c.names[i]} leaves the chart",
                    inside[index],
                )
        logger.debug("shrunk %d charts over %s", c.size, c.base.name)
        return shrunk

    return c.cached(("shrink", r, plan), build)


def partition_of_unity(
    c: Cover, r: int = DEFAULT_SMOOTHNESS, plan: SamplePlan = DEFAULT_PLAN
) -> list[Expr]:
    """lambda_i = f_i^2 / sum f_j^2 with f_i supported on the shrunk V_i."""

    def build() -> list[Expr]:
        shrunk = shrink_cover(c, r, plan)
        squares = [Pow(support_function(v, r), 2) for v in shrunk.charts]
        denominator = total(squares)
        points = c.samples(plan).points
        if len(points):
            values = denominator.evaluate(points)
            if not (values > 0).all():
                index = int(np.flatnonzero(~(values > 0))[0])
                raise CoverageFailure(
                    "partition of unity denominator vanishes", points[index]
                )
        weights = [Div(f, denominator, eps=0.0) for f in squares]
        logger.info(
            "partition of unity with %d functions over %s",
            len(weights),
            c.base.name,
        )
        return weights

    return c.cached(("partition", r, plan), build)


def validate_partition(
    c: Cover,
    r: int = DEFAULT_SMOOTHNESS,
    plan: SamplePlan = DEFAULT_PLAN,
    tol: float = IDENTITY_TOLERANCE,
) -> CheckReport:
    """Sum 1, values in [0, 1] and exact zeros off each chart."""
    weights = partition_of_unity(c, r, plan)
    points = c.samples(plan).points
    if len(points) == 0:
        return CheckReport(f"partition({c.base.name})", ())
    values = np.stack([w.evaluate(points) for w in weights], axis=1)
    outside = ~c.membership(points)
    spill = np.where(outside, np.abs(values), 0.0).max(axis=1)
    below = np.clip(-values, 0.0, None).max(axis=1)
    above = np.clip(values - 1.0, 0.0, None).max(axis=1)
    checks = (
        upper_check("sum", np.abs(values.sum(axis=1) - 1.0), points, tol),
        upper_check("range", np.maximum(below, above), points, tol),
        upper_check("support", spill, points, np.finfo(float).tiny),
    )
    return CheckReport(
        f"partition({c.base.name})", checks, {"functions": len(weights)}
    )


def vertical_retraction(
    u: SemialgebraicSet,
    v: SemialgebraicSet,
    r: int = DEFAULT_SMOOTHNESS,
    plan: SamplePlan = DEFAULT_PLAN,
    box=None,
) -> ExprMap:
    """(x, t) -> (x, tau(x, t)) with tau = 1 over U and tau = t off V."""
    closure = u.closure()
    points = sample(closure, plan, box=box).points
    if len(points):
        outside = ~v.contains(points)
        if outside.any():
            index = int(np.flatnonzero(outside)[0])
            raise ContainmentFailure(
                "closure(U) is not inside V", points[index]
            )
    n = u.dim
    f2 = Pow(zero_function(closure, r), 2)
    g2 = Pow(support_function(v, r), 2)
    tau = Div(f2 * var(n) + g2, f2 + g2, eps=0.0)
    return ExprMap([var(i) for i in range(n)] + [tau], n + 1)
