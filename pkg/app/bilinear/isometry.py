import logging
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from app.bundle import MorphismField, check_isomorphism, identity_morphism
from app.certificate import CheckReport, matrix_residuals, upper_check
from app.config import DEFAULT_SMOOTHNESS, WITNESS_TOLERANCE
from app.errors import BaseMismatch, NotPositive
from app.exprcore import SamplePlan
from app.exprcore.fields import Pointwise

from .decomposition import pencil
from .form import (
    DEFAULT_PLAN,
    FormField,
    on_common_cover,
    standard_positive_form,
)

logger = logging.getLogger(__name__)

TRANSVERSALITY = 1e-9


@dataclass(frozen=True, eq=False)
class IsometryWitness:
    """u from (E, s) to (E', s') with u^T s' u = s chart by chart."""

    morphism: MorphismField
    source_form: FormField
    target_form: FormField

    def __post_init__(self) -> None:
        if self.source_form.bundle.cover != self.morphism.cover:
            raise BaseMismatch("source form lives on another cover")
        if self.target_form.bundle.cover != self.morphism.cover:
            raise BaseMismatch("target form lives on another cover")

    @property
    def name(self) -> str:
        return self.morphism.name


def identity_isometry(f: FormField) -> IsometryWitness:
    return IsometryWitness(identity_morphism(f.bundle), f, f)


def check_isometry(
    w: IsometryWitness,
    plan: SamplePlan = DEFAULT_PLAN,
    tol: float = WITNESS_TOLERANCE,
) -> CheckReport:
    """Morphism checks plus u_i^T s'_i u_i = s_i at chart samples."""
    u, cover = w.morphism, w.morphism.cover
    residuals, where = [], []
    for i in range(cover.size):
        points = cover.samples(plan, i).points
        if len(points) == 0:
            continue
        ui = u.maps[i].evaluate(points, strict=False)
        target = w.target_form.matrices[i].evaluate(points, strict=False)
        source = w.source_form.matrices[i].evaluate(points, strict=False)
        residuals.append(
            matrix_residuals(np.swapaxes(ui, 1, 2) @ target @ ui, source)
        )
        where.append(points)
    form_check = upper_check(
        "form",
        np.concatenate(residuals) if residuals else np.zeros(0),
        np.concatenate(where) if where else np.zeros((0, 0)),
        tol,
    )
    report = check_isomorphism(u, plan, tol)
    report = CheckReport(
        w.name, report.checks + (form_check,), report.invariants
    )
    logger.info(
        "isometry %s: %s (form residual %.3g)",
        w.name,
        "pass" if report.passed else "fail",
        form_check.max_residual,
    )
    return report


def _require_positive(f: FormField, plan: SamplePlan) -> None:
    for i in range(f.cover.size):
        points = f.cover.samples(plan, i).points
        if len(points) == 0 or f.rank == 0:
            continue
        values = f.matrices[i].evaluate(points)
        lowest = np.linalg.eigvalsh(0.5 * (values + np.swapaxes(values, 1, 2)))
        bad = lowest[:, 0] <= 0
        if bad.any():
            index = int(np.flatnonzero(bad)[0])
            raise NotPositive(
                f"form {f.name} has eigenvalue {lowest[index, 0]:.6g}",
                points[index],
            )


def _root_kernel(d: int):
    def kernel(points, s, target):
        out = np.full((len(points), d, d), np.nan)
        for n in range(len(points)):
            if not (np.isfinite(s[n]).all() and np.isfinite(target[n]).all()):
                continue
            try:
                out[n] = canonical_root(s[n], target[n])
            except np.linalg.LinAlgError:
                continue
        return out

    return kernel


def canonical_root(s: np.ndarray, target: np.ndarray) -> np.ndarray:
    """u = C'^-1 (C'^-T s C'^-1)^(1/2) C' with target = C'^T C'.

    u is the square root of target^-1 s with positive spectrum, so
    u^T target u = s and it commutes with every congruence of the pair.
    """
    c = np.linalg.cholesky(target).T
    c_inv = np.linalg.inv(c)
    middle = c_inv.T @ s @ c_inv
    values, vectors = np.linalg.eigh(0.5 * (middle + middle.T))
    root = vectors @ np.diag(np.sqrt(values)) @ vectors.T
    return c_inv @ root @ c


def positive_isometry(
    f: FormField, target: FormField, plan: SamplePlan = DEFAULT_PLAN
) -> IsometryWitness:
    f, target = on_common_cover(f, target, plan)
    _require_positive(f, plan)
    _require_positive(target, plan)
    d = f.rank
    maps = tuple(
        Pointwise(_root_kernel(d), (s, t), (d, d), "root")
        for s, t in zip(f.matrices, target.matrices)
    )
    u = MorphismField(f.bundle, target.bundle, maps, f"root({f.name})")
    return IsometryWitness(u, f, target)


def _orthonormal(values, vectors, sign: int):
    """Pencil eigenvectors of one sign scaled to s(a, a) = sign * I."""
    keep = values > 0 if sign > 0 else values < 0
    return vectors[:, keep] / np.sqrt(np.abs(values[keep]))


def transversal_map(
    s: np.ndarray, target: np.ndarray, g: np.ndarray
) -> np.ndarray:
    """Isometry (s) -> (target) sending positive parts to positive parts.

    Each part of s is carried onto the matching part of target by the
    orthogonal polar factor of their G-pairing.
    """
    values, vectors = pencil(s, g)
    values_t, vectors_t = pencil(target, g)
    if np.sum(values > 0) != np.sum(values_t > 0):
        raise np.linalg.LinAlgError("signatures differ")
    source_parts, target_parts = [], []
    for sign in (1, -1):
        a = _orthonormal(values, vectors, sign)
        b = _orthonormal(values_t, vectors_t, sign)
        if a.shape[1] == 0:
            continue
        pairing = b.T @ g @ a
        if np.linalg.svd(pairing, compute_uv=False).min() <= TRANSVERSALITY:
            raise np.linalg.LinAlgError("parts are not transversal")
        q, _ = linalg.polar(pairing)
        source_parts.append(a)
        target_parts.append(b @ q)
    d = s.shape[0]
    if not source_parts:
        return np.zeros((d, d))
    return np.hstack(target_parts) @ np.linalg.inv(np.hstack(source_parts))


def _transversal_kernel(d: int):
    def kernel(points, s, target, g):
        out = np.full((len(points), d, d), np.nan)
        for n in range(len(points)):
            stack = (s[n], target[n], g[n])
            if not all(np.isfinite(m).all() for m in stack):
                continue
            try:
                out[n] = transversal_map(*stack)
            except np.linalg.LinAlgError:
                continue
        return out

    return kernel


def transversal_isometry(
    f: FormField,
    target: FormField,
    r: int = DEFAULT_SMOOTHNESS,
    plan: SamplePlan = DEFAULT_PLAN,
) -> IsometryWitness:
    """Isometry between two forms of one signature on the same bundle.

    Undefined (NaN, and a failing check) where the positive part of one
    form meets the negative part of the other.
    """
    f, target = on_common_cover(f, target, plan)
    reference = standard_positive_form(f.bundle, r, plan)
    d = f.rank
    maps = tuple(
        Pointwise(_transversal_kernel(d), (s, t, g), (d, d), "transversal")
        for s, t, g in zip(f.matrices, target.matrices, reference.matrices)
    )
    u = MorphismField(
        f.bundle, target.bundle, maps, f"{f.name}~{target.name}"
    )
    return IsometryWitness(u, f, target)
