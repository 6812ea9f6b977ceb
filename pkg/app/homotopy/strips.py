"""Strips of a product cover of X x [0, 1] and clutching along them."""

import logging
import typing as t
from dataclasses import dataclass

import numpy as np

from app.bundle import BundleRep
from app.certificate import (
    CheckReport,
    determinants,
    lower_check,
    matrix_residuals,
    upper_check,
)
from app.config import GRAM_SCHMIDT_TOLERANCE, WITNESS_TOLERANCE
from app.errors import BandMismatch, TCoverGap
from app.exprcore import (
    MatrixField,
    SamplePlan,
    SemialgebraicSet,
    at_parameter,
    identity,
    projection,
    sample,
)
from app.exprcore.fields import Inverse

from .cylinder import slice_points

logger = logging.getLogger(__name__)

DEFAULT_PLAN = SamplePlan()
BAND_OFFSET = 1e-10
BAND_RESIDUAL = 1e-8

Interval = tuple[int, float, float]


@dataclass(frozen=True)
class StripDecomposition:
    """Strips phi_(k-1) <= t <= phi_k over one slice chart.

    `charts[k]` is the cylinder chart holding strip k.
    """

    region: SemialgebraicSet
    breakpoints: tuple[float, ...]
    charts: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.charts)

    def strip_at(self, t_values: np.ndarray) -> np.ndarray:
        """Strip index per parameter value; the end strips are unbounded."""
        inner = np.asarray(self.breakpoints[1:-1], dtype=float)
        return np.searchsorted(inner, t_values, side="right")

    def chart_at(self, t_values: np.ndarray) -> np.ndarray:
        return np.asarray(self.charts)[self.strip_at(t_values)]


class _Gap(Exception):
    def __init__(self, t_value: float) -> None:
        self.t = t_value


def _gap_after(intervals: list[Interval], upper: float) -> float:
    ahead = [lower for _, lower, _ in intervals if lower >= upper]
    return 0.5 * (upper + min(ahead)) if ahead else upper


def _chain(intervals: list[Interval]):
    """Greedy chain of open intervals across [0, 1]."""
    breakpoints, charts = [0.0], []
    position = 0.0
    while True:
        holding = [
            (upper, index)
            for index, lower, upper in intervals
            if lower < position < upper
        ]
        if not holding:
            raise _Gap(position)
        upper, index = max(holding)
        charts.append(index)
        if upper > 1.0:
            breakpoints.append(1.0)
            return tuple(breakpoints), tuple(charts)
        following = [
            (next_upper, lower)
            for _, lower, next_upper in intervals
            if lower < upper < next_upper
        ]
        if not following:
            raise _Gap(min(_gap_after(intervals, upper), 1.0))
        _, lower = max(following)
        position = 0.5 * (lower + upper)
        breakpoints.append(position)


def _region_samples(b: BundleRep, region, plan: SamplePlan) -> np.ndarray:
    slice_base = b.base.slice
    band = slice_base.region.intersect(region)
    return sample(band, plan, plan.per_chart, slice_base.box).points


def strip_subdivision(
    b: BundleRep, plan: SamplePlan = DEFAULT_PLAN
) -> list[StripDecomposition]:
    """One strip chain per slice chart of a product cover.

    Breakpoints sit at the midpoints of consecutive interval overlaps.
    """
    cover = b.cover
    if cover.product is None:
        raise ValueError(f"cover of {b.name} is not a product cover")
    regions: list[SemialgebraicSet] = []
    for chart in cover.product:
        if chart.region not in regions:
            regions.append(chart.region)
    result = []
    for region in regions:
        intervals = [
            (i, chart.lower, chart.upper)
            for i, chart in enumerate(cover.product)
            if chart.region == region
        ]
        points = _region_samples(b, region, plan)
        try:
            breakpoints, charts = _chain(intervals)
        except _Gap as gap:
            witness = np.append(points[0], gap.t) if len(points) else None
            raise TCoverGap(
                f"t = {gap.t:g} is in no chart over {region}", witness, gap.t
            ) from None
        strips = StripDecomposition(region, breakpoints, charts)
        _certify_strips(b, strips, points)
        result.append(strips)
    logger.info(
        "strip subdivision of %s: %s strips",
        b.name,
        "/".join(str(s.size) for s in result),
    )
    return result


def _certify_strips(
    b: BundleRep, strips: StripDecomposition, points: np.ndarray
) -> None:
    if len(points) == 0:
        return
    for k, chart in enumerate(strips.charts):
        low, high = strips.breakpoints[k], strips.breakpoints[k + 1]
        for value in (low, 0.5 * (low + high), high):
            lifted = slice_points(points, value)
            inside = b.cover.charts[chart].contains(lifted)
            if not inside.all():
                index = int(np.flatnonzero(~inside)[0])
                raise TCoverGap(
                    f"strip {k} leaves chart {b.cover.names[chart]}",
                    lifted[index],
                    value,
                )


@dataclass(frozen=True, eq=False)
class Trivialization:
    """Maps from chart coordinates to R^d, one per strip, agreeing on
    the breakpoint bands."""

    bundle: BundleRep
    strips: StripDecomposition
    maps: tuple[MatrixField, ...]
    report: CheckReport

    def evaluate(
        self, points: np.ndarray, strict: bool = True
    ) -> np.ndarray:
        """(N, d, d) values at cylinder points, each read in its strip."""
        points = np.asarray(points, float)
        d = self.bundle.rank
        out = np.full((len(points), d, d), np.nan)
        index = self.strips.strip_at(points[:, -1])
        for k, u in enumerate(self.maps):
            rows = np.flatnonzero(index == k)
            if len(rows):
                out[rows] = u.evaluate(points[rows], strict)
        return out


def _on_band(field: MatrixField, dim: int, t_value: float) -> MatrixField:
    """`field` frozen at t = t_value, as a field on the cylinder."""
    slice_dim = dim - 1
    down = projection(dim, range(slice_dim))
    up = at_parameter(slice_dim, t_value)
    return field.compose((down >> up).components)


def clutch(
    b: BundleRep,
    strips: StripDecomposition,
    trivializations: t.Sequence[MatrixField] | None = None,
    plan: SamplePlan = DEFAULT_PLAN,
) -> Trivialization:
    """Glue strip trivializations into one over the whole strip chain.

    Strip k + 1 is corrected by gamma(x) = u_k g h_(k+1)^-1 read on the
    band t = phi_k, so the glued maps agree across every band.
    """
    d = b.rank
    if trivializations is None:
        trivializations = [identity(d) for _ in strips.charts]
    if len(trivializations) != strips.size:
        raise ValueError("one trivialization per strip expected")
    points = _region_samples(b, strips.region, plan)
    maps = [trivializations[0]]
    band_residuals, band_points = [], []
    for k in range(1, strips.size):
        phi = strips.breakpoints[k]
        g = b.transition(strips.charts[k - 1], strips.charts[k])
        h = trivializations[k]
        gamma = maps[k - 1] @ g @ Inverse(h)
        if len(points):
            below, above = (
                gamma.evaluate(
                    slice_points(points, phi + offset), strict=False
                )
                for offset in (-BAND_OFFSET, BAND_OFFSET)
            )
            jump = matrix_residuals(below, above)
            bad = ~(jump < BAND_RESIDUAL)
            if bad.any():
                index = int(np.flatnonzero(bad)[0])
                raise BandMismatch(
                    f"frame change jumps by {jump[index]:.3g} across "
                    f"t = {phi:g}",
                    np.append(points[index], phi),
                )
        maps.append(_on_band(gamma, b.base.dim, phi) @ h)
        if len(points):
            lifted = slice_points(points, phi)
            left = maps[k - 1].evaluate(lifted, strict=False) @ g.evaluate(
                lifted, strict=False
            )
            band_residuals.append(
                matrix_residuals(left, maps[k].evaluate(lifted, strict=False))
            )
            band_points.append(lifted)
    dets, det_points = [], []
    for k, u in enumerate(maps):
        middle = 0.5 * (strips.breakpoints[k] + strips.breakpoints[k + 1])
        lifted = slice_points(points, middle)
        if len(lifted):
            dets.append(np.abs(determinants(u.evaluate(lifted, strict=False))))
            det_points.append(lifted)
    checks = (
        upper_check(
            "band",
            np.concatenate(band_residuals) if band_residuals else np.zeros(0),
            np.concatenate(band_points) if band_points else np.zeros((0, 0)),
            GRAM_SCHMIDT_TOLERANCE,
        ),
        lower_check(
            "determinant",
            np.concatenate(dets) if dets else np.zeros(0),
            np.concatenate(det_points) if det_points else np.zeros((0, 0)),
            WITNESS_TOLERANCE if d else -1.0,
        ),
    )
    report = CheckReport(f"clutch({b.name})", checks, {"strips": strips.size})
    logger.info(
        "clutched %d strips of %s: %s",
        strips.size,
        b.name,
        "pass" if report.passed else "fail",
    )
    return Trivialization(b, strips, tuple(maps), report)
