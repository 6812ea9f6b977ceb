"""Isomorphisms and isometries between the ends of a cylinder.

Over X x [0, 1] with a product cover, the slice cover {U_i} of X is
shrunk to {V_i} and each U_i gets a vertical retraction r_i that lifts
V_i x [0, 1] to the top and leaves everything off U_i where it is. Over
U_i x R the strips of the cover clutch into one trivialization h_i, and
r_i carries a fiber vector from (x, t) to (x, tau) by
h_i(x, tau)^-1 h_i(x, t). Following r_1, ..., r_q from the bottom ends
every point on the top, since the V_i cover X.
"""

import logging
from dataclasses import dataclass

import numpy as np

from app.bilinear import (
    FormField,
    IsometryWitness,
    check_isometry,
    decompose,
    positive_isometry,
    reindexed_form,
)
from app.bundle import (
    BundleRep,
    MorphismField,
    Refinement,
    check_isomorphism,
    refine,
)
from app.config import (
    DEFAULT_SMOOTHNESS,
    EQUALITY_TOLERANCE,
    GUARD_EPSILON,
    WITNESS_TOLERANCE,
)
from app.errors import NotPositive, WitnessRejected
from app.exprcore import (
    Cover,
    Expr,
    ExprMap,
    MatrixField,
    SamplePlan,
    as_expr,
    at_parameter,
    shrink_cover,
    vertical_retraction,
)
from app.exprcore.fields import Pointwise, Scaled, Transpose

from .cylinder import restrict_form, restrict_with_index
from .strips import Trivialization, clutch, strip_subdivision

logger = logging.getLogger(__name__)

DEFAULT_PLAN = SamplePlan()


@dataclass(frozen=True, eq=False)
class CylinderIsomorphism:
    """b|t0 -> b|t1 together with what it was assembled from.

    `morphism` lives on `refinement.cover`; chart e there lies in chart
    pairs[e][0] of `source` and pairs[e][1] of `target`.
    """

    morphism: MorphismField
    source: BundleRep
    target: BundleRep
    refinement: Refinement
    retractions: tuple[ExprMap, ...]
    trivializations: tuple[Trivialization, ...]


def _levels(retractions: tuple[ExprMap, ...], dim: int) -> tuple[Expr, ...]:
    """0, then the height after each of r_1, r_2, ... as functions of x."""
    chain = at_parameter(dim, 0.0)
    levels = [chain.components[-1]]
    for r in retractions:
        chain = ExprMap((chain >> r).components, dim)
        levels.append(chain.components[-1])
    return tuple(levels)


def _lift(points: np.ndarray, t_values: np.ndarray) -> np.ndarray:
    return np.column_stack([points, t_values])


def _transitions(b: BundleRep, into, out_of, lifted) -> np.ndarray:
    values = np.full((len(lifted), b.rank, b.rank), np.nan)
    for a, c in sorted(set(zip(into.tolist(), out_of.tolist()))):
        rows = (into == a) & (out_of == c)
        values[rows] = b.transition(a, c).evaluate(lifted[rows], strict=False)
    return values


def _solve(matrices: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    out = np.full(rhs.shape, np.nan)
    ok = np.isfinite(matrices).reshape(len(matrices), -1).all(axis=1)
    ok &= np.isfinite(rhs).reshape(len(rhs), -1).all(axis=1)
    if ok.any():
        ok[ok] = np.abs(np.linalg.det(matrices[ok])) > GUARD_EPSILON
    if ok.any():
        out[ok] = np.linalg.solve(matrices[ok], rhs[ok])
    return out


def _chain_kernel(
    b: BundleRep,
    trivializations: tuple[Trivialization, ...],
    t0: float,
    t1: float,
    start: int,
    end: int,
):
    d = b.rank

    def height(s: np.ndarray) -> np.ndarray:
        return t0 + s * (t1 - t0)

    def kernel(points, *levels):
        n = len(points)
        if d == 0:
            return np.zeros((n, 0, 0))
        s = [level[:, 0, 0] for level in levels]
        frame = np.broadcast_to(np.eye(d), (n, d, d)).copy()
        chart = np.full(n, start)
        alive = np.isfinite(s[0])
        for h, low, high in zip(trivializations, s, s[1:]):
            alive &= np.isfinite(high)
            rows = np.flatnonzero(alive & h.strips.region.contains(points))
            if len(rows) == 0:
                continue
            here = _lift(points[rows], height(low[rows]))
            there = _lift(points[rows], height(high[rows]))
            inside = h.strips.chart_at(here[:, -1])
            local = _transitions(b, inside, chart[rows], here) @ frame[rows]
            frame[rows] = _solve(
                h.evaluate(there, strict=False),
                h.evaluate(here, strict=False) @ local,
            )
            chart[rows] = h.strips.chart_at(there[:, -1])
        alive &= np.abs(s[-1] - 1.0) <= EQUALITY_TOLERANCE
        out = np.full((n, d, d), np.nan)
        rows = np.flatnonzero(alive)
        if len(rows):
            top = _lift(points[rows], np.full(len(rows), float(t1)))
            ends = np.full(len(rows), end)
            out[rows] = _transitions(b, ends, chart[rows], top) @ frame[rows]
        return out

    return kernel


def cylinder_isomorphism(
    b: BundleRep,
    t0: float = 0.0,
    t1: float = 1.0,
    r: int = DEFAULT_SMOOTHNESS,
    plan: SamplePlan = DEFAULT_PLAN,
) -> CylinderIsomorphism:
    for value in (t0, t1):
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"t = {value:g} is outside [0, 1]")
    strips = strip_subdivision(b, plan)
    x = b.base.slice
    slices = Cover(x, tuple(s.region for s in strips))
    shrunk = shrink_cover(slices, r, plan)
    retractions = tuple(
        vertical_retraction(v, u, r, plan, x.box)
        for v, u in zip(shrunk.charts, slices.charts)
    )
    trivializations = []
    for s in strips:
        h = clutch(b, s, None, plan)
        if not h.report.passed:
            witnesses = h.report.witnesses
            raise WitnessRejected(
                f"strips of {b.name} over {s.region} do not clutch",
                witnesses[0] if witnesses else None,
            )
        trivializations.append(h)
    trivializations = tuple(trivializations)
    source, source_keep = restrict_with_index(b, t0, plan)
    target, target_keep = restrict_with_index(b, t1, plan)
    first, second, refinement = refine(source, target, plan)
    levels = _levels(retractions, x.dim)
    d = b.rank
    maps = tuple(
        Pointwise(
            _chain_kernel(
                b, trivializations, t0, t1, source_keep[a], target_keep[c]
            ),
            (),
            (d, d),
            "retraction",
            levels,
        )
        for a, c in refinement.pairs
    )
    morphism = MorphismField(
        first, second, maps, f"iso({b.name};{t0:g}->{t1:g})"
    )
    report = check_isomorphism(morphism, plan)
    if not report.passed:
        witnesses = report.witnesses
        raise WitnessRejected(
            f"retraction isomorphism of {b.name} fails its check "
            f"(residual {report.max_residual:.3g})",
            witnesses[0] if witnesses else None,
        )
    logger.info(
        "moved %s from t=%g to t=%g by %d retractions (residual %.3g)",
        b.name,
        t0,
        t1,
        len(retractions),
        report.max_residual,
    )
    return CylinderIsomorphism(
        morphism, source, target, refinement, retractions, trivializations
    )


def homotopy_isomorphism(
    b: BundleRep,
    t0: float = 0.0,
    t1: float = 1.0,
    r: int = DEFAULT_SMOOTHNESS,
    plan: SamplePlan = DEFAULT_PLAN,
) -> MorphismField:
    """Certified isomorphism b|t0 -> b|t1 for b over a product cover."""
    return cylinder_isomorphism(b, t0, t1, r, plan).morphism


def _symmetric(m: MatrixField) -> MatrixField:
    return Scaled(m + m.T, as_expr(0.5))


def homotopy_isometry(
    f: FormField,
    t0: float = 0.0,
    t1: float = 1.0,
    r: int = DEFAULT_SMOOTHNESS,
    plan: SamplePlan = DEFAULT_PLAN,
) -> IsometryWitness:
    """Certified isometry f|t0 -> f|t1 for a form over a cylinder.

    The end isomorphism u is bent to w = P1+ u P0+ + P1- u P0- so that
    it keeps the positive and negative parts apart. The positive
    isometry v from |s0| to |w^T s1 w| keeps them apart as well, and
    w v is the isometry.
    """
    iso = cylinder_isomorphism(f.bundle, t0, t1, r, plan)
    start = restrict_form(f, t0, plan)
    end = restrict_form(f, t1, plan)
    low = decompose(start, r, plan)
    high = decompose(end, r, plan)
    pairs = iso.refinement.pairs
    first, second = iso.morphism.source, iso.morphism.target
    bent, absolute, pulled = [], [], []
    for (a, c), u in zip(pairs, iso.morphism.maps):
        w = (
            high.fiber_positive[c] @ u @ low.fiber_positive[a]
            + high.fiber_negative[c] @ u @ low.fiber_negative[a]
        )
        sign = low.fiber_positive[a] - low.fiber_negative[a]
        bent.append(w)
        absolute.append(_symmetric(start.matrices[a] @ sign))
        pulled.append(
            _symmetric(Transpose(w) @ end.matrices[c] @ w @ sign)
        )
    try:
        v = positive_isometry(
            FormField(first, tuple(absolute), f"|{start.name}|"),
            FormField(first, tuple(pulled), f"|{end.name}|"),
            plan,
        )
    except NotPositive as error:
        raise WitnessRejected(
            f"positive and negative parts of {f.name} do not line up "
            f"between t={t0:g} and t={t1:g}",
            error.point,
        ) from error
    maps = tuple(w @ m for w, m in zip(bent, v.morphism.maps))
    morphism = MorphismField(
        first, second, maps, f"isometry({f.name};{t0:g}->{t1:g})"
    )
    witness = IsometryWitness(
        morphism,
        reindexed_form(start, first, [p[0] for p in pairs]),
        reindexed_form(end, second, [p[1] for p in pairs]),
    )
    report = check_isometry(witness, plan, WITNESS_TOLERANCE)
    if not report.passed:
        raise WitnessRejected(
            f"isometry along {f.name} fails its check "
            f"(residual {report.max_residual:.3g})"
        )
    logger.info("isometry along %s from t=%g to t=%g", f.name, t0, t1)
    return witness
