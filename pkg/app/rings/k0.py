"""Classes [B+] - [B-] of the Grothendieck ring over a catalog base."""

import logging
from dataclasses import dataclass, field
from functools import cached_property

from app.bundle import (
    BundleRep,
    s1_line_class,
    tensor,
    whitney_sum,
    zero_bundle,
)
from app.errors import BaseMismatch
from app.exprcore import SamplePlan
from app.homotopy import restrict

logger = logging.getLogger(__name__)

DEFAULT_PLAN = SamplePlan()


def circle_bundle(b: BundleRep, plan: SamplePlan = DEFAULT_PLAN):
    """`b` itself over the circle, its t = 0 slice over the circle
    cylinder, None elsewhere."""
    base = b.base
    if base.circle:
        return b
    if base.slice is not None and base.slice.circle:
        return restrict(b, 0.0, plan)
    return None


def det_class(b: BundleRep, plan: SamplePlan = DEFAULT_PLAN) -> int | None:
    loop = circle_bundle(b, plan)
    return None if loop is None else s1_line_class(loop)


@dataclass(frozen=True, eq=False)
class K0Class:
    positive: BundleRep
    negative: BundleRep
    plan: SamplePlan = field(default=DEFAULT_PLAN, repr=False)

    def __post_init__(self) -> None:
        if self.positive.base != self.negative.base:
            raise BaseMismatch(
                f"[{self.positive.name}] and [{self.negative.name}] live "
                "over different bases"
            )

    @classmethod
    def of(cls, b: BundleRep, plan: SamplePlan = DEFAULT_PLAN) -> "K0Class":
        return cls(b, zero_bundle(b.cover), plan)

    @property
    def base(self):
        return self.positive.base

    @property
    def name(self) -> str:
        if self.negative.rank == 0:
            return f"[{self.positive.name}]"
        return f"[{self.positive.name}]-[{self.negative.name}]"

    @property
    def rank(self) -> int:
        return self.positive.rank - self.negative.rank

    @cached_property
    def det_class(self) -> int | None:
        first = det_class(self.positive, self.plan)
        if first is None:
            return None
        return (first + det_class(self.negative, self.plan)) % 2

    def invariants(self) -> dict:
        result = {"rank": self.rank}
        if self.det_class is not None:
            result["det-class"] = self.det_class
        return result


def k0_add(a: K0Class, b: K0Class) -> K0Class:
    plan = a.plan
    return K0Class(
        whitney_sum(a.positive, b.positive, plan),
        whitney_sum(a.negative, b.negative, plan),
        plan,
    )


def k0_neg(a: K0Class) -> K0Class:
    return K0Class(a.negative, a.positive, a.plan)


def k0_mul(a: K0Class, b: K0Class) -> K0Class:
    """(P+ - P-)(Q+ - Q-) = (P+Q+ + P-Q-) - (P+Q- + P-Q+)."""
    plan = a.plan

    def product(x: BundleRep, y: BundleRep) -> BundleRep:
        return tensor(x, y, plan)

    positive = whitney_sum(
        product(a.positive, b.positive),
        product(a.negative, b.negative),
        plan,
    )
    negative = whitney_sum(
        product(a.positive, b.negative),
        product(a.negative, b.positive),
        plan,
    )
    result = K0Class(positive, negative, plan)
    logger.debug("%s * %s has rank %d", a.name, b.name, result.rank)
    return result
