import logging
import typing as t
from dataclasses import dataclass, field

import numpy as np

from app.bundle import (
    BundleRep,
    dual,
    gauss_embedding,
    pullback,
    refine,
    reindexed,
    tensor,
    whitney_sum,
)
from app.certificate import (
    CheckReport,
    determinants,
    lower_check,
    matrix_residuals,
    upper_check,
)
from app.config import DEFAULT_SMOOTHNESS, IDENTITY_TOLERANCE
from app.exprcore import (
    Base,
    ExprMatrix,
    MatrixField,
    SamplePlan,
    as_expr,
    constant,
)
from app.exprcore.fields import BlockDiagonal, Kronecker, Transpose
from app.exprcore.maps import Map

logger = logging.getLogger(__name__)

DEFAULT_PLAN = SamplePlan()


@dataclass(frozen=True, eq=False)
class FormField:
    """A symmetric bilinear form on a bundle, one matrix field per chart.

    `origin` records how the form was built (`("hyperbolic", b)`,
    `("orthogonal_sum", f1, f2)`, `("negate", f)`, ...) so that witness
    searches can reuse the defining construction.
    """

    bundle: BundleRep
    matrices: tuple[MatrixField, ...]
    name: str = "form"
    origin: tuple = field(default=(), repr=False)

    def __post_init__(self) -> None:
        if len(self.matrices) != self.bundle.cover.size:
            raise ValueError("one matrix field per chart expected")
        d = self.bundle.rank
        for s in self.matrices:
            if s.shape != (d, d):
                raise ValueError(f"form field {s.shape}, expected {(d, d)}")

    @property
    def cover(self):
        return self.bundle.cover

    @property
    def rank(self) -> int:
        return self.bundle.rank

    def renamed(self, name: str) -> "FormField":
        return FormField(self.bundle, self.matrices, name, self.origin)


def symmetric(upper: t.Sequence[t.Sequence]) -> ExprMatrix:
    """Symmetric expression matrix from the rows of its upper triangle.

    Row i holds the entries (i, i), (i, i + 1), ..., (i, d - 1).
    """
    d = len(upper)
    entries = [[None] * d for _ in range(d)]
    for i, row in enumerate(upper):
        if len(row) != d - i:
            raise ValueError(
                f"upper-triangle row {i} needs {d - i} entries, got {len(row)}"
            )
        for offset, value in enumerate(row):
            j = i + offset
            entries[i][j] = entries[j][i] = as_expr(value)
    return ExprMatrix(tuple(tuple(row) for row in entries))


def constant_form(b: BundleRep, matrix, name: str = "") -> FormField:
    """The same constant matrix on every chart (needs constant transitions
    preserving it to be compatible)."""
    value = constant(matrix)
    return FormField(
        b,
        tuple(value for _ in range(b.cover.size)),
        name or f"<{np.array2string(np.asarray(matrix))}>",
    )


def reindexed_form(
    f: FormField, bundle: BundleRep, index: t.Sequence[int]
) -> FormField:
    return FormField(
        bundle, tuple(f.matrices[i] for i in index), f.name, f.origin
    )


def on_common_cover(
    f1: FormField, f2: FormField, plan: SamplePlan = DEFAULT_PLAN
) -> tuple[FormField, FormField]:
    b1, b2, refinement = refine(f1.bundle, f2.bundle, plan)
    if b1 is f1.bundle and b2 is f2.bundle:
        return f1, f2
    return (
        reindexed_form(f1, b1, [p[0] for p in refinement.pairs]),
        reindexed_form(f2, b2, [p[1] for p in refinement.pairs]),
    )


def validate_form(
    f: FormField,
    plan: SamplePlan = DEFAULT_PLAN,
    tol: float = IDENTITY_TOLERANCE,
) -> CheckReport:
    """Symmetry, compatibility g_ji^T s_j g_ji = s_i and nondegeneracy."""
    b = f.bundle
    compat, compat_pts = [], []
    for i, j in b.pairs():
        points = b.cover.samples(plan, i, j).points
        if len(points) == 0:
            continue
        g = b.transition(j, i).evaluate(points, strict=False)
        s_j = f.matrices[j].evaluate(points, strict=False)
        s_i = f.matrices[i].evaluate(points, strict=False)
        compat.append(
            matrix_residuals(np.swapaxes(g, 1, 2) @ s_j @ g, s_i)
        )
        compat_pts.append(points)
    sym, degeneracy, chart_pts = [], [], []
    for i in range(b.cover.size):
        points = b.cover.samples(plan, i).points
        if len(points) == 0:
            continue
        s = f.matrices[i].evaluate(points, strict=False)
        sym.append(matrix_residuals(s, np.swapaxes(s, 1, 2)))
        degeneracy.append(_relative_det(s))
        chart_pts.append(points)
    checks = (
        upper_check("symmetry", _cat(sym), _cat_pts(chart_pts), tol),
        upper_check(
            "compatibility", _cat(compat), _cat_pts(compat_pts), tol
        ),
        lower_check(
            "nondegeneracy",
            _cat(degeneracy),
            _cat_pts(chart_pts),
            IDENTITY_TOLERANCE if f.rank else -1.0,
        ),
    )
    report = CheckReport(f.name, checks, {"rank": f.rank})
    logger.info(
        "form %s: %s", f.name, "pass" if report.passed else "fail"
    )
    return report


def _relative_det(s: np.ndarray) -> np.ndarray:
    """|det s| / max(1, |s|_2)^d per sample."""
    d = s.shape[1]
    if d == 0:
        return np.ones(s.shape[0])
    dets = np.abs(determinants(s))
    finite = np.isfinite(s).reshape(s.shape[0], -1).all(axis=1)
    norms = np.ones(s.shape[0])
    if finite.any():
        norms[finite] = np.linalg.norm(s[finite], ord=2, axis=(1, 2))
    return dets / np.maximum(1.0, norms) ** d


def _cat(parts):
    return np.concatenate(parts) if parts else np.zeros(0)


def _cat_pts(parts):
    return np.concatenate(parts) if parts else np.zeros((0, 0))


def standard_positive_form(
    b: BundleRep,
    r: int = DEFAULT_SMOOTHNESS,
    plan: SamplePlan = DEFAULT_PLAN,
) -> FormField:
    """s_k = F_k^T F_k, the ambient inner product read in chart frames."""
    p = gauss_embedding(b, r, plan)
    matrices = tuple(Transpose(frame) @ frame for frame in p.frames)
    return FormField(b, matrices, f"<{b.name}>", ("standard", b))


def negate(f: FormField) -> FormField:
    return FormField(
        f.bundle, tuple(-s for s in f.matrices), f"-{f.name}", ("negate", f)
    )


def orthogonal_sum(
    f1: FormField, f2: FormField, plan: SamplePlan = DEFAULT_PLAN
) -> FormField:
    a, b = on_common_cover(f1, f2, plan)
    bundle = whitney_sum(a.bundle, b.bundle, plan)
    matrices = tuple(
        BlockDiagonal((s1, s2)) for s1, s2 in zip(a.matrices, b.matrices)
    )
    return FormField(
        bundle,
        matrices,
        f"({f1.name} _|_ {f2.name})",
        ("orthogonal_sum", a, b),
    )


def tensor_form(
    f1: FormField, f2: FormField, plan: SamplePlan = DEFAULT_PLAN
) -> FormField:
    a, b = on_common_cover(f1, f2, plan)
    bundle = tensor(a.bundle, b.bundle, plan)
    matrices = tuple(
        Kronecker(s1, s2) for s1, s2 in zip(a.matrices, b.matrices)
    )
    return FormField(
        bundle, matrices, f"({f1.name} x {f2.name})", ("tensor", a, b)
    )


def hyperbolic_matrix(d: int) -> np.ndarray:
    return np.block(
        [[np.zeros((d, d)), np.eye(d)], [np.eye(d), np.zeros((d, d))]]
    )


def hyperbolic_space(
    b: BundleRep, plan: SamplePlan = DEFAULT_PLAN
) -> FormField:
    """[[0, I], [I, 0]] on b + dual(b), pairing each frame with its dual."""
    bundle = whitney_sum(b, dual(b), plan)
    value = constant(hyperbolic_matrix(b.rank))
    matrices = tuple(value for _ in range(bundle.cover.size))
    return FormField(bundle, matrices, f"H({b.name})", ("hyperbolic", b))


def pullback_form(
    f: FormField,
    m: Map,
    base: Base,
    plan: SamplePlan = DEFAULT_PLAN,
    product=None,
) -> FormField:
    bundle = pullback(f.bundle, m, base, plan, product)
    matrices = tuple(m.pull(s) for s in f.matrices)
    return FormField(bundle, matrices, f"f*{f.name}", ("pullback", f))


def reindex_on(f: FormField, cover, index) -> FormField:
    """`f` on a finer cover whose chart a lies in chart index[a]."""
    bundle = reindexed(f.bundle, cover, index)
    return reindexed_form(f, bundle, index)
