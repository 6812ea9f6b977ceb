import logging

import numpy as np

from app.certificate import determinants
from app.errors import CoverageFailure, NotCatalogBase

from .cocycle import BundleRep

logger = logging.getLogger(__name__)

LOOP_STEPS = 2048


def circle_loop(steps: int = LOOP_STEPS) -> np.ndarray:
    angles = 2 * np.pi * np.arange(steps + 1) / steps
    return np.stack([np.cos(angles), np.sin(angles)], axis=1)


def s1_line_class(b: BundleRep, steps: int = LOOP_STEPS) -> int:
    """Monodromy of det-signs of the transitions once around the circle.

    The walk keeps its chart while it can and, before leaving it, moves
    to the first chart holding both the current and the next point.
    """
    if not b.base.circle:
        raise NotCatalogBase(f"{b.base.name} is not the catalog circle")
    if b.rank == 0:
        return 0
    loop = circle_loop(steps)
    member = b.cover.membership(loop)
    if not member[0].any():
        raise CoverageFailure("loop start outside every chart", loop[0])
    start = current = int(np.flatnonzero(member[0])[0])
    sign = 1.0
    for m in range(steps):
        if member[m + 1, current]:
            continue
        both = np.flatnonzero(member[m] & member[m + 1])
        if len(both) == 0:
            raise CoverageFailure("loop step leaves every chart", loop[m])
        following = int(both[0])
        sign *= _det_sign(b, current, following, loop[m])
        current = following
    if current != start:
        sign *= _det_sign(b, current, start, loop[steps])
    bit = 0 if sign > 0 else 1
    logger.debug("det-class of %s is %d", b.name, bit)
    return bit


def _det_sign(b: BundleRep, i: int, j: int, point: np.ndarray) -> float:
    value = b.transition(i, j).evaluate(point.reshape(1, -1))
    return float(np.sign(determinants(value)[0]))
