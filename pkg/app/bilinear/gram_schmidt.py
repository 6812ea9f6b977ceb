"""Congruence Gram-Schmidt: frames g with g^T S g = diag(I, -I).

A run of the elimination is described by its pivot pattern, the list of
pivot choices it made. Replaying a fixed pattern gives a frame that
depends smoothly on S wherever the replayed pivots keep their signs, which
is how `local_trivializing_cover` turns the point-wise routine into
frame fields on charts.
"""

import logging
from dataclasses import dataclass

import numpy as np

from app.certificate import CheckReport, matrix_residuals, upper_check
from app.config import (
    DEFAULT_TOLERANCES,
    GRAM_SCHMIDT_TOLERANCE,
    PIVOT_FACTOR,
    Tolerances,
)
from app.errors import InconsistentSignature, NearSingular
from app.exprcore import Cover, MatrixField, SamplePlan, positive
from app.exprcore.fields import MatrixEntry, Pointwise

from .form import DEFAULT_PLAN, FormField, reindex_on

logger = logging.getLogger(__name__)

REFINEMENT_STEPS = 2


@dataclass(frozen=True, order=True)
class SignatureType:
    positive: int
    negative: int

    @property
    def rank(self) -> int:
        return self.positive + self.negative

    @property
    def difference(self) -> int:
        return self.positive - self.negative

    def __add__(self, other: "SignatureType") -> "SignatureType":
        return SignatureType(
            self.positive + other.positive, self.negative + other.negative
        )

    def __mul__(self, other: "SignatureType") -> "SignatureType":
        a, b = self.positive, self.negative
        c, d = other.positive, other.negative
        return SignatureType(a * c + b * d, a * d + b * c)

    def __str__(self) -> str:
        return f"({self.positive},{self.negative})"


@dataclass(frozen=True)
class PivotStep:
    """Pivot on remaining column `index`, after adding `sign` times column
    `partner` to it when `partner` is not -1."""

    index: int
    partner: int = -1
    sign: int = 1


Pattern = tuple[tuple[PivotStep, ...], tuple[int, ...]]


def signature_matrix(signs) -> np.ndarray:
    return np.diag(np.asarray(signs, dtype=float))


def _choose(m: np.ndarray, norm: float, pivot: float) -> PivotStep:
    """Largest diagonal entry; a hyperbolic pair only when every diagonal
    entry is below `pivot` times the norm of S."""
    diagonal = np.abs(np.diag(m))
    a = int(np.argmax(diagonal))
    if m.shape[0] == 1 or diagonal[a] >= pivot * norm:
        return PivotStep(a)
    off = np.abs(m - np.diag(np.diag(m)))
    i, j = np.unravel_index(int(np.argmax(off)), off.shape)
    i, j = int(min(i, j)), int(max(i, j))
    plus = m[i, i] + m[j, j] + 2 * m[i, j]
    minus = m[i, i] + m[j, j] - 2 * m[i, j]
    return PivotStep(i, j, 1 if abs(plus) >= abs(minus) else -1)


def _eliminate(s: np.ndarray, steps=None, pivot: float = PIVOT_FACTOR):
    """One elimination run; returns vectors, signs, steps and pivots.

    With `steps` given the pivots are replayed rather than chosen, and a
    zero pivot yields None.
    """
    d = s.shape[0]
    norm = float(np.linalg.norm(s, ord=2)) if d else 0.0
    remaining = [np.eye(d)[:, k] for k in range(d)]
    vectors, signs, chosen, pivots = [], [], [], []
    for position in range(d):
        r = np.column_stack(remaining)
        m = r.T @ s @ r
        step = _choose(m, norm, pivot) if steps is None else steps[position]
        if step.partner >= 0:
            remaining[step.index] = (
                remaining[step.index] + step.sign * remaining[step.partner]
            )
            r = np.column_stack(remaining)
            m = r.T @ s @ r
        a = step.index
        value = m[a, a]
        if value == 0 or not np.isfinite(value):
            return None
        w = remaining[a]
        vectors.append(w / np.sqrt(abs(value)))
        signs.append(1 if value > 0 else -1)
        chosen.append(step)
        pivots.append(value)
        remaining = [
            remaining[c] - (m[c, a] / value) * w
            for c in range(len(remaining))
            if c != a
        ]
    return vectors, signs, tuple(chosen), pivots


def _ordered(vectors, signs, d: int):
    """Positive directions first, each group in elimination order."""
    order = sorted(range(len(signs)), key=lambda k: signs[k] < 0)
    if not vectors:
        return np.zeros((d, 0)), []
    g = np.column_stack([vectors[k] for k in order])
    return g, [signs[k] for k in order]


def _polish(s, g, j, tol: float = GRAM_SCHMIDT_TOLERANCE) -> np.ndarray:
    for _ in range(REFINEMENT_STEPS):
        error = g.T @ s @ g - j
        if np.abs(error).max(initial=0.0) < tol * 1e-3:
            break
        g = g @ (np.eye(len(j)) - 0.5 * j @ error)
    return g


def _check_invertible(s: np.ndarray, singular: float, point=None) -> None:
    det = np.linalg.det(s) if s.shape[0] else 1.0
    if abs(det) <= singular:
        raise NearSingular(
            f"|det S| = {abs(det):.3g} is below {singular:g}",
            s.ravel() if point is None else point,
        )


def frame_with_pattern(
    s, point=None, tolerances: Tolerances = DEFAULT_TOLERANCES
):
    """(g, type, pattern) for one symmetric matrix."""
    s = np.asarray(s, dtype=float)
    s = 0.5 * (s + s.T)
    _check_invertible(s, tolerances.singular, point)
    vectors, signs, steps, _ = _eliminate(s, None, tolerances.pivot)
    g, ordered = _ordered(vectors, signs, s.shape[0])
    j = signature_matrix(ordered)
    g = _polish(s, g, j, tolerances.gram_schmidt)
    residual = np.abs(g.T @ s @ g - j).max(initial=0.0)
    if residual >= tolerances.gram_schmidt:
        raise NearSingular(
            f"frame residual {residual:.3g} after refinement",
            s.ravel() if point is None else point,
        )
    kind = SignatureType(ordered.count(1), ordered.count(-1))
    return g, kind, (steps, tuple(signs))


def gram_schmidt_frame(
    s, tolerances: Tolerances = DEFAULT_TOLERANCES
) -> tuple[np.ndarray, SignatureType]:
    g, kind, _ = frame_with_pattern(s, None, tolerances)
    return g, kind


def matrix_signature(s) -> SignatureType:
    return gram_schmidt_frame(s)[1]


def _replay(s: np.ndarray, pattern: Pattern):
    """Frame and signed pivots for a fixed pattern, or None."""
    steps, expected = pattern
    run = _eliminate(0.5 * (s + s.T), steps)
    if run is None:
        return None
    vectors, signs, _, pivots = run
    if tuple(signs) != expected:
        return None
    g, ordered = _ordered(vectors, signs, s.shape[0])
    g = _polish(s, g, signature_matrix(ordered))
    signed = [sign * value for sign, value in zip(expected, pivots)]
    return g, np.asarray(signed)


def _frames_kernel(pattern: Pattern, d: int):
    def kernel(points, s):
        out = np.full((len(points), d, d), np.nan)
        for n in range(len(points)):
            if not np.isfinite(s[n]).all():
                continue
            run = _replay(s[n], pattern)
            if run is not None:
                out[n] = run[0]
        return out

    return kernel


def _pivots_kernel(pattern: Pattern, d: int):
    def kernel(points, s):
        out = np.full((len(points), d, 1), np.nan)
        for n in range(len(points)):
            if not np.isfinite(s[n]).all():
                continue
            run = _replay(s[n], pattern)
            if run is not None:
                out[n, :, 0] = run[1]
        return out

    return kernel


def pattern_frame(s: MatrixField, pattern: Pattern) -> MatrixField:
    """Frame field replaying `pattern`; NaN where the replay breaks."""
    d = s.shape[0]
    return Pointwise(_frames_kernel(pattern, d), (s,), (d, d), "frame")


def pattern_pivots(s: MatrixField, pattern: Pattern) -> MatrixField:
    d = s.shape[0]
    return Pointwise(_pivots_kernel(pattern, d), (s,), (d, 1), "pivots")


def _sample_types(
    f: FormField, plan: SamplePlan, tolerances: Tolerances = DEFAULT_TOLERANCES
):
    for i in range(f.cover.size):
        points = f.cover.samples(plan, i).points
        if len(points) == 0:
            continue
        values = f.matrices[i].evaluate(points)
        for point, s in zip(points, values):
            _, kind, pattern = frame_with_pattern(s, point, tolerances)
            yield i, point, kind, pattern


def signature(f: FormField, plan: SamplePlan = DEFAULT_PLAN) -> SignatureType:
    """The common Gram-Schmidt type over all chart samples."""
    if f.rank == 0:
        return SignatureType(0, 0)
    if not f.cover.base.connected:
        logger.warning(
            "%s is not declared connected; types may differ per component",
            f.cover.base.name,
        )
    first = None
    for _, point, kind, _ in _sample_types(f, plan):
        if first is None:
            first = (kind, point)
        elif kind != first[0]:
            raise InconsistentSignature(
                f"form {f.name} has types {first[0]} and {kind}",
                (first[0], kind),
                (first[1], point),
            )
    if first is None:
        return SignatureType(f.rank, 0)
    logger.info("signature of %s is %s", f.name, first[0])
    return first[0]


@dataclass(frozen=True, eq=False)
class LocalTrivialization:
    """A form on a cover where each chart carries a frame g with
    g^T s g = J of its type."""

    form: FormField
    frames: tuple[MatrixField, ...]
    types: tuple[SignatureType, ...]
    parents: tuple[int, ...]
    report: CheckReport

    @property
    def cover(self) -> Cover:
        return self.form.cover


def local_trivializing_cover(
    f: FormField,
    plan: SamplePlan = DEFAULT_PLAN,
    tolerances: Tolerances = DEFAULT_TOLERANCES,
) -> LocalTrivialization:
    """Split every chart by the pivot patterns met at its samples.

    The chart for pattern p inside chart U_i is where every replayed pivot
    keeps its sign with margin: sign_k * pivot_k > threshold.
    """
    patterns: dict[int, list[Pattern]] = {}
    kinds: dict[Pattern, SignatureType] = {}
    for i, _, kind, pattern in _sample_types(f, plan, tolerances):
        seen = patterns.setdefault(i, [])
        if pattern not in seen:
            seen.append(pattern)
            kinds[pattern] = kind
    charts, names, parents, frames, types = [], [], [], [], []
    for i in range(f.cover.size):
        for k, pattern in enumerate(patterns.get(i, [])):
            s = f.matrices[i]
            pivots = pattern_pivots(s, pattern)
            conditions = [
                positive(MatrixEntry(pivots, row, 0) - tolerances.minor)
                for row in range(f.rank)
            ]
            charts.append(f.cover.charts[i].refined(*conditions))
            names.append(f"{f.cover.names[i]}/{k}")
            parents.append(i)
            frames.append(pattern_frame(s, pattern))
            types.append(kinds[pattern])
    if not charts:
        charts, names, parents = [f.cover.charts[0]], [f.cover.names[0]], [0]
        frames.append(f.matrices[0])
        types.append(SignatureType(0, 0))
    cover = Cover(f.cover.base, tuple(charts), tuple(names))
    cover.certify(plan)
    form = reindex_on(f, cover, parents)
    report = _frame_report(
        form, frames, types, plan, tolerances.gram_schmidt
    )
    logger.info(
        "local trivialization of %s: %d charts from %d",
        f.name,
        cover.size,
        f.cover.size,
    )
    return LocalTrivialization(
        form, tuple(frames), tuple(types), tuple(parents), report
    )


def _frame_report(form, frames, types, plan, tol) -> CheckReport:
    residuals, where = [], []
    for a, (g, kind) in enumerate(zip(frames, types)):
        points = form.cover.samples(plan, a).points
        if len(points) == 0 or form.rank == 0:
            continue
        gv = g.evaluate(points, strict=False)
        sv = form.matrices[a].evaluate(points, strict=False)
        j = signature_matrix([1] * kind.positive + [-1] * kind.negative)
        residuals.append(
            matrix_residuals(np.swapaxes(gv, 1, 2) @ sv @ gv, j[None])
        )
        where.append(points)
    check = upper_check(
        "frame",
        np.concatenate(residuals) if residuals else np.zeros(0),
        np.concatenate(where) if where else np.zeros((0, 0)),
        tol,
    )
    return CheckReport(form.name, (check,), {"charts": form.cover.size})
