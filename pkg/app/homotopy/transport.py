"""Isomorphisms and isometries carried along homotopies.

A homotopy H: M x [0, 1] -> N moves the fiber of a bundle over H(x, 0)
to the one over H(x, 1). Inside the Gauss embedding every fiber is the
range of the projector P, and we carry vectors across by the product
P(H(x, s_K)) ... P(H(x, s_1)) over a slice chain fine enough that
consecutive fibers are graphs over each other. The map does not depend
on charts, so read in chart frames it intertwines the transitions on the
nose.
"""

import logging
from dataclasses import dataclass

import numpy as np

from app.bundle import (
    BundleRep,
    MorphismField,
    Refinement,
    check_isomorphism,
    gauss_embedding,
    refine,
    trivial_bundle,
)
from app.config import DEFAULT_SMOOTHNESS, EQUALITY_TOLERANCE
from app.errors import (
    ContractionEscapesBase,
    EndpointMismatch,
    ImageEscapesBase,
    WitnessRejected,
)
from app.exprcore import (
    Base,
    ExprMap,
    Max,
    Min,
    SamplePlan,
    const,
    at_parameter,
    constant,
    constant_map,
    identity_map,
    var,
)
from app.exprcore.fields import Pointwise
from app.exprcore.maps import Map

from .cylinder import occupied_pullback, slice_points

logger = logging.getLogger(__name__)

DEFAULT_PLAN = SamplePlan()
FIRST_SLICES = 8
MAX_SLICES = 1024
STEP_GAP = 0.5
PATH_STEPS = 9


def _transport_kernel(d: int):
    def kernel(points, *values):
        *projectors, source, target = values
        chain = source
        for p in projectors:
            chain = p @ chain
        out = np.full((len(points), d, d), np.nan)
        if d == 0:
            out[:] = 0.0
            return out
        ok = np.isfinite(chain).reshape(len(points), -1).all(axis=1)
        ok &= np.isfinite(target).reshape(len(points), -1).all(axis=1)
        if ok.any():
            frame = target[ok]
            gram = np.swapaxes(frame, 1, 2) @ frame
            out[ok] = np.linalg.solve(
                gram, np.swapaxes(frame, 1, 2) @ chain[ok]
            )
        return out

    return kernel


@dataclass(frozen=True, eq=False)
class Transport:
    """A transport witness with the slice bundles it connects.

    `morphism` lives on `refinement.cover`; chart e there lies in chart
    pairs[e][0] of `source` and pairs[e][1] of `target`.
    """

    morphism: MorphismField
    source: BundleRep
    target: BundleRep
    refinement: Refinement
    slices: int


def _at(path: Map, s: float) -> Map:
    return at_parameter(path.source_dim - 1, s) >> path


def _slice_count(p, path: Map, points: np.ndarray) -> int:
    if len(points) == 0:
        return FIRST_SLICES
    slices = FIRST_SLICES
    while slices <= MAX_SLICES:
        values = [
            _at(path, k / slices).pull(p.field).evaluate(points, strict=False)
            for k in range(slices + 1)
        ]
        # Frobenius norms bound the operator norms from above
        steps = [
            np.sqrt(((b - a) ** 2).sum(axis=(1, 2)))
            for a, b in zip(values, values[1:])
        ]
        worst = max(float(np.max(step)) for step in steps)
        if worst < STEP_GAP:
            return slices
        slices *= 2
    raise WitnessRejected(
        f"fibers along the path move too fast for {MAX_SLICES} slices"
    )


def _check_path(xi: BundleRep, path: Map, base: Base, plan) -> None:
    points = base.sample(plan).points
    for s in np.linspace(0.0, 1.0, PATH_STEPS):
        image = path.apply(slice_points(points, s), strict=False)
        inside = xi.base.contains(image)
        if not inside.all():
            index = int(np.flatnonzero(~inside)[0])
            raise ImageEscapesBase(
                f"path leaves {xi.base.name} at s = {s:g}",
                slice_points(points[index : index + 1], s)[0],
            )


def transport_along(
    xi: BundleRep,
    path: Map,
    source_map: Map,
    target_map: Map,
    base: Base,
    r: int = DEFAULT_SMOOTHNESS,
    plan: SamplePlan = DEFAULT_PLAN,
) -> Transport:
    """Isomorphism source_map*xi -> target_map*xi along `path`.

    `path` maps base x R into the base of xi and runs from source_map at
    s = 0 to target_map at s = 1.
    """
    _check_path(xi, path, base, plan)
    p = gauss_embedding(xi, r, plan)
    source, source_keep = occupied_pullback(xi, source_map, base, plan)
    target, target_keep = occupied_pullback(xi, target_map, base, plan)
    first, second, refinement = refine(source, target, plan)
    slices = _slice_count(p, path, base.sample(plan).points)
    projectors = tuple(
        _at(path, k / slices).pull(p.field) for k in range(1, slices + 1)
    )
    d = xi.rank
    maps = []
    for a, c in refinement.pairs:
        start = source_map.pull(p.frames[source_keep[a]])
        end = target_map.pull(p.frames[target_keep[c]])
        maps.append(
            Pointwise(
                _transport_kernel(d),
                projectors + (start, end),
                (d, d),
                "transport",
            )
        )
    morphism = MorphismField(first, second, tuple(maps), f"T({xi.name})")
    report = check_isomorphism(morphism, plan)
    if not report.passed:
        worst = report.witnesses[0] if report.witnesses else None
        raise WitnessRejected(
            f"transport of {xi.name} fails its check "
            f"(residual {report.max_residual:.3g})",
            worst,
        )
    logger.info(
        "transported %s over %d slices (residual %.3g)",
        xi.name,
        slices,
        report.max_residual,
    )
    return Transport(morphism, source, target, refinement, slices)


def _check_endpoints(f: Map, g: Map, h: Map, base: Base, plan) -> None:
    points = base.sample(plan).points
    if len(points) == 0:
        return
    for s, m in ((0.0, f), (1.0, g)):
        gap = np.abs(
            h.apply(slice_points(points, s), strict=False)
            - m.apply(points, strict=False)
        ).max(axis=1)
        bad = ~(gap <= EQUALITY_TOLERANCE)
        if bad.any():
            index = int(np.flatnonzero(bad)[0])
            raise EndpointMismatch(
                f"homotopy at s = {s:g} misses its endpoint map by "
                f"{gap[index]:.3g}",
                points[index],
            )


def induced_iso_from_homotopy(
    xi: BundleRep,
    f: Map,
    g: Map,
    homotopy: Map,
    source: Base,
    r: int = DEFAULT_SMOOTHNESS,
    plan: SamplePlan = DEFAULT_PLAN,
) -> MorphismField:
    """Certified isomorphism f*xi -> g*xi for a homotopy from f to g."""
    _check_endpoints(f, g, homotopy, source, plan)
    return transport_along(xi, homotopy, f, g, source, r, plan).morphism


def contraction(base: Base) -> ExprMap:
    """(x, t) -> c + clamp(t, 0, 1) (x - c) about the star center c."""
    if base.star_center is None:
        raise ContractionEscapesBase(
            f"{base.name} has no declared star center"
        )
    n = base.dim
    weight = Min(Max(var(n), const(0)), const(1))
    components = [
        c + weight * (var(i) - c) for i, c in enumerate(base.star_center)
    ]
    return ExprMap(components, n + 1)


def trivialize_contractible(
    b: BundleRep,
    r: int = DEFAULT_SMOOTHNESS,
    plan: SamplePlan = DEFAULT_PLAN,
) -> MorphismField:
    """Certified isomorphism b -> eps^d over a star-shaped base.

    Fibers are carried to the fiber over the center along straight
    lines, where the cocycle is constant and the first chart holding the
    center trivializes it.
    """
    base = b.base
    h = contraction(base)
    n = base.dim
    flip = [var(i) for i in range(n)] + [1 - var(n)]
    backwards = ExprMap([c.substitute(flip) for c in h.components], n + 1)
    try:
        _check_path(b, backwards, base, plan)
    except ImageEscapesBase as error:
        raise ContractionEscapesBase(
            f"straight-line contraction leaves {base.name}", error.point
        ) from error
    center = constant_map(base.star_center, n)
    moved = transport_along(
        b, backwards, identity_map(n), center, base, r, plan
    )
    at_center = np.asarray(base.star_center, dtype=float).reshape(1, -1)
    frames = [
        constant(moved.target.transition(0, c).evaluate(at_center)[0])
        for c in range(moved.target.cover.size)
    ]
    maps = tuple(
        frames[c] @ u
        for (_, c), u in zip(moved.refinement.pairs, moved.morphism.maps)
    )
    source = moved.morphism.source
    witness = MorphismField(
        source,
        trivial_bundle(source.cover, b.rank),
        maps,
        f"triv({b.name})",
    )
    report = check_isomorphism(witness, plan)
    if not report.passed:
        raise WitnessRejected(
            f"trivialization of {b.name} fails its check "
            f"(residual {report.max_residual:.3g})"
        )
    return witness


