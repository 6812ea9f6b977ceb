import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import qmc

from app.config import DEFAULT_SAMPLES, DEFAULT_SEED

from .semialgebraic import Relation, SemialgebraicSet

logger = logging.getLogger(__name__)

DEFAULT_BOX_RADIUS = 4.0
DEFAULT_MARGIN = 1e-6
MAX_ROUNDS = 12
MIN_BATCH = 256

PROJECTION_STEPS = 60
PROJECTION_TOLERANCE = 1e-13
DIFFERENCE_STEP = 1e-6


@dataclass(frozen=True)
class SamplePlan:
    seed: int = DEFAULT_SEED
    per_chart: int = DEFAULT_SAMPLES
    per_overlap: int = DEFAULT_SAMPLES
    per_triple: int = DEFAULT_SAMPLES // 2
    margin: float = DEFAULT_MARGIN

    def with_count(self, count: int) -> "SamplePlan":
        return replace(
            self,
            per_chart=count,
            per_overlap=count,
            per_triple=max(count // 2, 1),
        )


@dataclass(frozen=True)
class SampleSet:
    points: np.ndarray
    warning: str | None = None

    def __len__(self) -> int:
        return self.points.shape[0]

    def __iter__(self):
        return iter(self.points)

    def __getitem__(self, index):
        return self.points[index]


def _equalities(piece):
    return [c.expr for c in piece if c.relation is Relation.ZERO]


def _jacobian(exprs, x: np.ndarray) -> np.ndarray:
    n = x.shape[1]
    jac = np.zeros((x.shape[0], len(exprs), n))
    for k in range(n):
        step = np.zeros(n)
        step[k] = DIFFERENCE_STEP
        for m, e in enumerate(exprs):
            up = e.evaluate(x + step, strict=False)
            down = e.evaluate(x - step, strict=False)
            jac[:, m, k] = (up - down) / (2 * DIFFERENCE_STEP)
    return jac


def project(points: np.ndarray, exprs) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Newton projection onto {e = 0 for e in exprs}.

    Returns the moved points and the mask of those that converged.
    """
    x = points.copy()
    values = np.zeros((x.shape[0], len(exprs)))
    for _ in range(PROJECTION_STEPS):
        values = np.stack([e.evaluate(x, strict=False) for e in exprs], axis=1)
        if np.all(np.abs(values) < PROJECTION_TOLERANCE):
            break
        jac = _jacobian(exprs, x)
        with np.errstate(all="ignore"):
            step = np.einsum("nkm,nm->nk", np.linalg.pinv(jac), values)
        x = x - np.nan_to_num(step, nan=0.0, posinf=0.0, neginf=0.0)
    values = np.stack([e.evaluate(x, strict=False) for e in exprs], axis=1)
    converged = np.all(np.abs(values) < 1e3 * PROJECTION_TOLERANCE, axis=1)
    converged &= np.all(np.isfinite(x), axis=1)
    return x, converged


def default_box(dim: int) -> np.ndarray:
    return np.array([[-DEFAULT_BOX_RADIUS, DEFAULT_BOX_RADIUS]] * dim)


def sample(
    s: SemialgebraicSet,
    plan: SamplePlan,
    count: int | None = None,
    box=None,
) -> SampleSet:
    """Deterministic points of `s`.

    Candidates come from an unscrambled Halton grid over the box,
    refined with uniform draws from a generator seeded by the plan.
    Pieces with equations are reached by projecting candidates onto
    the equations before the remaining conditions are tested.
    """
    count = plan.per_chart if count is None else count
    dim = s.dim
    if dim == 0:
        origin = np.zeros((1, 0))
        if count > 0 and s.contains(origin).all():
            return SampleSet(origin)
        return SampleSet(np.zeros((0, 0)), f"{s} has no points")
    bounds = default_box(dim) if box is None else np.asarray(box, float)
    low, high = bounds[:, 0], bounds[:, 1]
    halton = qmc.Halton(d=dim, scramble=False)
    rng = np.random.default_rng(plan.seed)
    batch = max(2 * count, MIN_BATCH)
    found: list[np.ndarray] = []
    total = 0
    for _ in range(MAX_ROUNDS):
        if total >= count or not s.pieces:
            break
        unit = np.concatenate([halton.random(batch), rng.random((batch, dim))])
        candidates = low + (high - low) * unit
        order = []
        accepted = []
        taken = np.zeros(candidates.shape[0], dtype=bool)
        for piece in s.pieces:
            single = SemialgebraicSet(dim, (piece,))
            moved = candidates
            usable = ~taken
            eqs = _equalities(piece)
            if eqs:
                moved = candidates.copy()
                index = np.flatnonzero(usable)
                moved[index], converged = project(candidates[index], eqs)
                usable[index[~converged]] = False
            index = np.flatnonzero(usable)
            keep = single.contains(moved[index], margin=plan.margin)
            index = index[keep]
            taken[index] = True
            order.append(index)
            accepted.append(moved[index])
        if order:
            index = np.concatenate(order)
            points = np.concatenate(accepted)
            points = points[np.argsort(index, kind="stable")]
            found.append(points)
            total += points.shape[0]
    if not found or total == 0:
        warning = f"no points of {s} in the sampling box"
        logger.warning(warning)
        return SampleSet(np.zeros((0, dim)), warning)
    points = np.concatenate(found)[:count]
    logger.debug(
        "sampled %d/%d points in dimension %d", len(points), count, dim
    )
    return SampleSet(points)


def scan(box, per_axis: int) -> np.ndarray:
    """Regular grid over a box, per_axis points per coordinate."""
    bounds = np.asarray(box, dtype=float)
    axes = [np.linspace(lo, hi, per_axis) for lo, hi in bounds]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.reshape(-1) for m in mesh], axis=1)
