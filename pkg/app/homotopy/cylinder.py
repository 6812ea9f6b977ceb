"""Cylinders X x R over a base and slices of bundles over them.

The last coordinate of a cylinder is the homotopy parameter t.
"""

import logging
import math
import typing as t

import numpy as np

from app.bilinear import FormField
from app.bundle import BundleRep, pullback, reindexed
from app.errors import CoverageFailure
from app.exprcore import (
    Base,
    Cover,
    ProductChart,
    SamplePlan,
    at_parameter,
    projection,
)
from app.exprcore.maps import Map

logger = logging.getLogger(__name__)

DEFAULT_PLAN = SamplePlan()
T_BOX = (-0.25, 1.25)


def cylinder_base(x: Base, t_box: tuple[float, float] = T_BOX) -> Base:
    return Base(
        name=f"{x.name}xR",
        region=x.region.lifted(x.dim + 1),
        box=tuple(x.box) + (tuple(t_box),),
        connected=x.connected,
        slice=x,
    )


def product_cover(
    cylinder: Base,
    charts: t.Sequence[tuple[int, float, float]],
    slice_cover: Cover,
) -> Cover:
    """Charts U_i x (a, b) given as (i, a, b) over a cover of the slice."""
    products = tuple(
        ProductChart(slice_cover.charts[i], lower, upper)
        for i, lower, upper in charts
    )
    names = tuple(
        f"{slice_cover.names[i]}x({_bound(lower)},{_bound(upper)})"
        for i, lower, upper in charts
    )
    return Cover.of_products(cylinder, products, names)


def _bound(value: float) -> str:
    if math.isinf(value):
        return "-inf" if value < 0 else "inf"
    return f"{value:g}"


def cylinder_pullback(
    b: BundleRep,
    intervals: t.Sequence[tuple[float, float]] = ((-math.inf, math.inf),),
) -> BundleRep:
    """pi*b for the projection X x R -> X, on charts U_i x interval."""
    cylinder = cylinder_base(b.base)
    pairs = [
        (i, lower, upper)
        for i in range(b.cover.size)
        for lower, upper in intervals
    ]
    cover = product_cover(cylinder, pairs, b.cover)
    index = [i for i, _, _ in pairs]
    pi = projection(cylinder.dim, range(b.base.dim))
    transitions = {
        (a, c): pi.pull(b.transition(index[a], index[c]))
        for a in range(cover.size)
        for c in range(cover.size)
        if a != c
    }
    return BundleRep(cover, b.rank, transitions, f"pi*{b.name}")


def pullback_to_cylinder(
    b: BundleRep,
    homotopy: Map,
    source: Base,
    plan: SamplePlan = DEFAULT_PLAN,
) -> BundleRep:
    """H*b over source x R for a homotopy H: source x R -> base of b."""
    return pullback(b, homotopy, cylinder_base(source), plan)


def occupied_pullback(
    b: BundleRep, m: Map, base: Base, plan: SamplePlan = DEFAULT_PLAN
) -> tuple[BundleRep, list[int]]:
    """m*b without the charts whose preimage has no samples.

    Also returns, per remaining chart, the chart of b it comes from.
    """
    pulled = pullback(b, m, base, plan)
    keep = [
        i
        for i in range(pulled.cover.size)
        if len(pulled.cover.samples(plan, i))
    ]
    if not keep:
        raise CoverageFailure(f"no chart of {b.name} meets the image")
    if len(keep) == pulled.cover.size:
        return pulled, keep
    return reindexed(pulled, pulled.cover.restricted(keep), keep), keep


def restrict_with_index(
    b: BundleRep, t_value: float, plan: SamplePlan = DEFAULT_PLAN
) -> tuple[BundleRep, list[int]]:
    """b over X x {t}, with the cylinder chart behind each slice chart."""
    slice_base = b.base.slice
    if slice_base is None:
        raise ValueError(f"{b.base.name} is not a cylinder")
    lift = at_parameter(slice_base.dim, t_value)
    result, keep = occupied_pullback(b, lift, slice_base, plan)
    logger.debug(
        "slice of %s at t=%g has %d charts", b.name, t_value, len(keep)
    )
    return result.renamed(f"{b.name}|t={t_value:g}"), keep


def restrict(
    b: BundleRep, t_value: float, plan: SamplePlan = DEFAULT_PLAN
) -> BundleRep:
    return restrict_with_index(b, t_value, plan)[0]


def restrict_form(
    f: FormField, t_value: float, plan: SamplePlan = DEFAULT_PLAN
) -> FormField:
    bundle, keep = restrict_with_index(f.bundle, t_value, plan)
    lift = at_parameter(bundle.base.dim, t_value)
    matrices = tuple(lift.pull(f.matrices[i]) for i in keep)
    return FormField(bundle, matrices, f"{f.name}|t={t_value:g}", f.origin)


def slice_points(points: np.ndarray, t_value: float) -> np.ndarray:
    column = np.full((points.shape[0], 1), float(t_value))
    return np.hstack([points, column])
