import collections
import logging
import math
import typing as t
from dataclasses import dataclass, field

import numpy as np

from app.config import COVER_MEMO_SIZE
from app.errors import CoverageFailure, OpenSetRejected

from .expr import var
from .sampling import SamplePlan, SampleSet, sample
from .semialgebraic import SemialgebraicSet, positive

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Base:
    """A base space: a region of R^n plus the attributes we cannot compute.

    `box` bounds the sampling of the region. `slice` is set for cylinders
    X x R, whose last coordinate is the cylinder parameter t.
    """

    name: str
    region: SemialgebraicSet
    box: tuple[tuple[float, float], ...]
    connected: bool = True
    star_center: tuple[float, ...] | None = None
    circle: bool = False
    slice: "Base | None" = None

    @property
    def dim(self) -> int:
        return self.region.dim

    @property
    def is_cylinder(self) -> bool:
        return self.slice is not None

    def contains(self, points: np.ndarray) -> np.ndarray:
        return self.region.contains(points)

    def sample(self, plan: SamplePlan, count: int | None = None) -> SampleSet:
        return sample(self.region, plan, count, self.box)


@dataclass(frozen=True)
class ProductChart:
    """Chart U x (lower, upper) of a cylinder; U lives on the slice."""

    region: SemialgebraicSet
    lower: float = -math.inf
    upper: float = math.inf

    def as_set(self, dim: int) -> SemialgebraicSet:
        tvar = var(dim - 1)
        conditions = []
        if math.isfinite(self.lower):
            conditions.append(positive(tvar - self.lower))
        if math.isfinite(self.upper):
            conditions.append(positive(self.upper - tvar))
        return self.region.lifted(dim).refined(*conditions)

    def interval_contains(self, value: float) -> bool:
        return self.lower < value < self.upper


@dataclass(frozen=True)
class Cover:
    base: Base
    charts: tuple[SemialgebraicSet, ...]
    names: tuple[str, ...] = ()
    product: tuple[ProductChart, ...] | None = None
    _memo: collections.OrderedDict = field(
        default_factory=collections.OrderedDict,
        compare=False,
        hash=False,
        repr=False,
    )

    def __post_init__(self) -> None:
        if not self.charts:
            raise CoverageFailure("a cover needs at least one chart")
        for index, chart in enumerate(self.charts):
            if not chart.is_open:
                raise OpenSetRejected(f"chart {index} ({chart}) is not open")
        if not self.names:
            names = tuple(f"U{i}" for i in range(len(self.charts)))
            object.__setattr__(self, "names", names)
        if len(self.names) != len(self.charts):
            raise ValueError("one name per chart expected")

    @classmethod
    def of_products(
        cls,
        base: Base,
        charts: t.Sequence[ProductChart],
        names: t.Sequence[str] = (),
    ) -> "Cover":
        sets = tuple(c.as_set(base.dim) for c in charts)
        return cls(base, sets, tuple(names), tuple(charts))

    @classmethod
    def single(cls, base: Base, name: str = "U0") -> "Cover":
        return cls(base, (SemialgebraicSet.whole(base.dim),), (name,))

    @property
    def size(self) -> int:
        return len(self.charts)

    @property
    def dim(self) -> int:
        return self.base.dim

    def index(self, name: str) -> int:
        return self.names.index(name)

    def overlap_set(self, *indices: int) -> SemialgebraicSet:
        s = self.base.region
        for i in indices:
            s = s.intersect(self.charts[i])
        return s

    def cached(self, key, builder):
        """Memoized `builder()`, keeping the latest `COVER_MEMO_SIZE` keys."""
        if key in self._memo:
            self._memo.move_to_end(key)
            return self._memo[key]
        value = builder()
        self._memo[key] = value
        while len(self._memo) > COVER_MEMO_SIZE:
            self._memo.popitem(last=False)
        return value

    def samples(
        self, plan: SamplePlan, *indices: int, count: int | None = None
    ) -> SampleSet:
        """Points of the base (no indices) or of an overlap of charts."""
        if count is None:
            if len(indices) <= 1:
                count = plan.per_chart
            elif len(indices) == 2:
                count = plan.per_overlap
            else:
                count = plan.per_triple
        key = (plan, tuple(indices), count)
        return self.cached(
            key,
            lambda: sample(
                self.overlap_set(*indices), plan, count, self.base.box
            ),
        )

    def membership(self, points: np.ndarray) -> np.ndarray:
        """(N, q) mask of chart membership."""
        return np.stack([c.contains(points) for c in self.charts], axis=1)

    def overlapping_pairs(self, plan: SamplePlan) -> list[tuple[int, int]]:
        pairs = []
        for i in range(self.size):
            for j in range(i + 1, self.size):
                if len(self.samples(plan, i, j)):
                    pairs.append((i, j))
        return pairs

    def certify(self, plan: SamplePlan) -> SampleSet:
        """Check every base sample lies in some chart; returns the samples."""
        points = self.samples(plan)
        if len(points):
            covered = self.membership(points.points).any(axis=1)
            if not covered.all():
                index = int(np.flatnonzero(~covered)[0])
                raise CoverageFailure(
                    "base point outside every chart", points[index]
                )
        logger.debug(
            "cover of %s with %d charts certified on %d samples",
            self.base.name,
            self.size,
            len(points),
        )
        return points

    def restricted(self, indices: t.Sequence[int]) -> "Cover":
        return Cover(
            self.base,
            tuple(self.charts[i] for i in indices),
            tuple(self.names[i] for i in indices),
            (
                None
                if self.product is None
                else tuple(self.product[i] for i in indices)
            ),
        )
