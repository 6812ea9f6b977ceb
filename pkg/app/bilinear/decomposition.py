"""Splitting a form into its positive and negative parts.

`decompose` takes the eigen-decomposition of the pencil (s, G) against
the standard positive form G; the G-orthogonal spectral projectors do not
depend on the chart, so they glue. `blend_positive_subbundle` builds a
positive subbundle over a two-chart cover by sliding the graph of a
contraction, and is kept as an independent route to the same answer.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from app.bundle import ProjectorField, gauss_embedding
from app.certificate import (
    CheckReport,
    lower_check,
    matrix_residuals,
    upper_check,
)
from app.config import (
    DEFAULT_SMOOTHNESS,
    GRAM_SCHMIDT_TOLERANCE,
    RANK_THRESHOLD,
)
from app.errors import OmegaViolation
from app.exprcore import MatrixField, SamplePlan, identity, partition_of_unity
from app.exprcore.fields import (
    Inverse,
    Pointwise,
    Select,
    Stack,
    Supported,
    Transpose,
    glue,
)

from .form import DEFAULT_PLAN, FormField
from .gram_schmidt import SignatureType, signature

logger = logging.getLogger(__name__)


def pencil(s: np.ndarray, g: np.ndarray):
    """Eigenvalues (descending) and G-orthonormal eigenvectors of (s, g)."""
    values, vectors = linalg.eigh(0.5 * (s + s.T), 0.5 * (g + g.T))
    order = np.argsort(-values, kind="stable")
    return values[order], vectors[:, order]


def _part(values: np.ndarray, vectors: np.ndarray, sign: int) -> np.ndarray:
    keep = values > 0 if sign > 0 else values < 0
    return vectors[:, keep]


def _fiber_kernel(sign: int, d: int):
    def kernel(points, s, g):
        out = np.full((len(points), d, d), np.nan)
        for n in range(len(points)):
            if not (np.isfinite(s[n]).all() and np.isfinite(g[n]).all()):
                continue
            values, vectors = pencil(s[n], g[n])
            v = _part(values, vectors, sign)
            out[n] = v @ v.T @ g[n]
        return out

    return kernel


def _ambient_kernel(sign: int, n_ambient: int):
    def kernel(points, s, frame):
        out = np.full((len(points), n_ambient, n_ambient), np.nan)
        for n in range(len(points)):
            f = frame[n]
            if not (np.isfinite(s[n]).all() and np.isfinite(f).all()):
                continue
            values, vectors = pencil(s[n], f.T @ f)
            w = f @ _part(values, vectors, sign)
            out[n] = w @ w.T
        return out

    return kernel


@dataclass(frozen=True, eq=False)
class Decomposition:
    """Positive and negative parts of `form`.

    `positive` and `negative` are ambient projectors summing to
    `embedding`; the per-chart fiber projectors sum to the identity.
    """

    form: FormField
    reference: tuple[MatrixField, ...]
    embedding: ProjectorField
    positive: ProjectorField
    negative: ProjectorField
    fiber_positive: tuple[MatrixField, ...]
    fiber_negative: tuple[MatrixField, ...]
    signature: SignatureType


def decompose(
    f: FormField,
    r: int = DEFAULT_SMOOTHNESS,
    plan: SamplePlan = DEFAULT_PLAN,
) -> Decomposition:
    b = f.bundle
    d = f.rank
    p = gauss_embedding(b, r, plan)
    weights = partition_of_unity(b.cover, r, plan)
    reference = tuple(Transpose(frame) @ frame for frame in p.frames)
    kind = signature(f, plan)

    def ambient(sign: int, label: str) -> ProjectorField:
        fields = [
            Pointwise(
                _ambient_kernel(sign, p.dim), (s, frame), (p.dim, p.dim), label
            )
            for s, frame in zip(f.matrices, p.frames)
        ]
        return ProjectorField(b.cover, glue(weights, fields), None, label)

    def fiber(sign: int, label: str) -> tuple[MatrixField, ...]:
        return tuple(
            Pointwise(_fiber_kernel(sign, d), (s, g), (d, d), label)
            for s, g in zip(f.matrices, reference)
        )

    result = Decomposition(
        form=f,
        reference=reference,
        embedding=p,
        positive=ambient(1, f"P+({f.name})"),
        negative=ambient(-1, f"P-({f.name})"),
        fiber_positive=fiber(1, "fiber+"),
        fiber_negative=fiber(-1, "fiber-"),
        signature=kind,
    )
    logger.info("decomposed %s of type %s", f.name, kind)
    return result


def restricted_eigenvalues(
    s: np.ndarray, projectors: np.ndarray, rank: int
) -> np.ndarray:
    """(N, rank) eigenvalues of s on the range of each projector."""
    out = np.full((s.shape[0], rank), np.nan)
    if rank == 0:
        return out
    for n in range(s.shape[0]):
        if not (np.isfinite(s[n]).all() and np.isfinite(projectors[n]).all()):
            continue
        u, _, _ = np.linalg.svd(projectors[n])
        basis = u[:, :rank]
        out[n] = np.linalg.eigvalsh(basis.T @ s[n] @ basis)
    return out


def validate_decomposition(
    dec: Decomposition, plan: SamplePlan = DEFAULT_PLAN
) -> CheckReport:
    f = dec.form
    kind = dec.signature
    eye = np.eye(f.rank)
    sums, smallest, largest, traces, where = [], [], [], [], []
    for i in range(f.cover.size):
        points = f.cover.samples(plan, i).points
        if len(points) == 0:
            continue
        s = f.matrices[i].evaluate(points, strict=False)
        plus = dec.fiber_positive[i].evaluate(points, strict=False)
        minus = dec.fiber_negative[i].evaluate(points, strict=False)
        sums.append(matrix_residuals(plus + minus, eye[None]))
        low = restricted_eigenvalues(s, plus, kind.positive)
        high = restricted_eigenvalues(s, minus, kind.negative)
        smallest.append(low.min(axis=1, initial=np.inf))
        largest.append(-high.max(axis=1, initial=-np.inf))
        traces.append(np.abs(np.trace(plus, axis1=1, axis2=2) - kind.positive))
        where.append(points)
    base_points = f.cover.samples(plan).points
    total = dec.positive.field.evaluate(
        base_points, strict=False
    ) + dec.negative.field.evaluate(base_points, strict=False)
    embedding = dec.embedding.field.evaluate(base_points, strict=False)
    chart_points = np.concatenate(where) if where else np.zeros((0, 0))

    def cat(parts):
        return np.concatenate(parts) if parts else np.zeros(0)

    checks = (
        upper_check(
            "fiber sum", cat(sums), chart_points, GRAM_SCHMIDT_TOLERANCE
        ),
        upper_check(
            "ambient sum",
            matrix_residuals(total, embedding),
            base_points,
            GRAM_SCHMIDT_TOLERANCE,
        ),
        lower_check("positive part", cat(smallest), chart_points, 0.0),
        lower_check("negative part", cat(largest), chart_points, 0.0),
        upper_check("trace", cat(traces), chart_points, RANK_THRESHOLD),
    )
    return CheckReport(
        f"decompose({f.name})",
        checks,
        {"positive": kind.positive, "negative": kind.negative},
    )


def _blend_kernel(n_ambient: int):
    def kernel(points, inner, outer, weight):
        out = np.full((len(points), n_ambient, n_ambient), np.nan)
        inside = weight[:, 0, 0] > 0
        frames = np.where(inside[:, None, None], inner, outer)
        for n in range(len(points)):
            frame = frames[n]
            if not np.isfinite(frame).all():
                continue
            q, _ = np.linalg.qr(frame)
            out[n] = q @ q.T
        return out

    return kernel


def blend_positive_subbundle(
    f: FormField,
    frame_u: MatrixField,
    positive_v: MatrixField,
    weights=None,
    r: int = DEFAULT_SMOOTHNESS,
    plan: SamplePlan = DEFAULT_PLAN,
) -> ProjectorField:
    """Positive subbundle over the two charts U (index 0) and V (index 1).

    `frame_u` is h with h^T s_U h = diag(I, -I) on U; `positive_v` spans
    a positive subbundle on V in chart-V coordinates. On the overlap the
    V-side subspace, read in the frame h, is the graph of a contraction
    sigma; the result is the graph of mu * sigma, which stays positive
    because contractions form a convex set.
    """
    if f.cover.size != 2:
        raise ValueError("blending needs a cover with exactly two charts")
    b = f.bundle
    d, plus = f.rank, positive_v.shape[1]
    if weights is None:
        weights = partition_of_unity(b.cover, r, plan)
    lam, mu = weights
    p = gauss_embedding(b, r, plan)
    top, bottom = tuple(range(plus)), tuple(range(plus, d))
    every = tuple(range(plus))
    moved = Inverse(frame_u) @ b.transition(0, 1) @ positive_v
    sigma = Select(moved, bottom, every) @ Inverse(Select(moved, top, every))
    _check_contraction(f, sigma, plan)
    graph = Stack((identity(plus), Supported(mu, sigma)), axis=0)
    inner = Supported(lam, p.frames[0] @ frame_u @ graph)
    outer = Supported(mu, p.frames[1] @ positive_v)
    field = Pointwise(
        _blend_kernel(p.dim), (inner, outer), (p.dim, p.dim), "blend", (lam,)
    )
    logger.info("blended positive subbundle of %s", f.name)
    return ProjectorField(b.cover, field, None, f"blend({f.name})")


def _check_contraction(f: FormField, sigma: MatrixField, plan) -> None:
    points = f.cover.samples(plan, 0, 1).points
    if len(points) == 0 or 0 in sigma.shape:
        return
    values = sigma.evaluate(points, strict=False)
    norms = np.array(
        [
            np.linalg.norm(v, ord=2) if np.isfinite(v).all() else np.inf
            for v in values
        ]
    )
    bad = norms >= 1.0
    if bad.any():
        index = int(np.flatnonzero(bad)[0])
        raise OmegaViolation(
            f"graph operator norm {norms[index]:.6g} is not below 1",
            points[index],
        )
