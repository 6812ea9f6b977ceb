"""Witt classes, the maps Delta: K0 -> W and Nabla: W -> K0, and the
catalog-only decision of Witt zero."""

import enum
import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from app.bilinear import (
    FormField,
    IsometryWitness,
    SignatureType,
    check_isometry,
    constant_form,
    decompose,
    hyperbolic_space,
    identity_isometry,
    negate,
    orthogonal_sum,
    signature,
    standard_positive_form,
    tensor_form,
    transversal_isometry,
)
from app.bundle import (
    MorphismField,
    bundle_from_projector,
    check_isomorphism,
    projector_isomorphism,
    zero_bundle,
)
from app.certificate import CheckReport, matrix_residuals, upper_check
from app.config import DEFAULT_SMOOTHNESS, GRAM_SCHMIDT_TOLERANCE
from app.errors import CocycleError, NotCatalogBase
from app.exprcore import SamplePlan, as_expr, identity
from app.exprcore.fields import BlockDiagonal, Scaled, Stack

from .k0 import DEFAULT_PLAN, K0Class, det_class

logger = logging.getLogger(__name__)

MAX_WITNESS_RANK = 4


@dataclass(frozen=True, eq=False)
class WittClass:
    form: FormField
    plan: SamplePlan = field(default=DEFAULT_PLAN, repr=False)
    r: int = field(default=DEFAULT_SMOOTHNESS, repr=False)

    @property
    def base(self):
        return self.form.cover.base

    @property
    def name(self) -> str:
        return f"[{self.form.name}]"

    @cached_property
    def signature(self) -> SignatureType:
        return signature(self.form, self.plan)

    @property
    def difference(self) -> int:
        return self.signature.difference

    @property
    def rank_parity(self) -> int:
        return self.form.rank % 2

    @cached_property
    def det_classes(self) -> tuple[int, int] | None:
        """det-classes of the positive and negative parts."""
        if det_class(self.form.bundle, self.plan) is None:
            return None
        if self.form.rank == 0:
            return (0, 0)
        parts = nabla(self)
        return (
            det_class(parts.positive, self.plan),
            det_class(parts.negative, self.plan),
        )

    @property
    def det_class(self) -> int | None:
        """det-class of the virtual bundle xi+ - xi-; zero on hyperbolics."""
        if self.det_classes is None:
            return None
        return sum(self.det_classes) % 2

    def invariants(self) -> dict:
        result = {
            "signature": self.difference,
            "type": str(self.signature),
            "rank parity": self.rank_parity,
        }
        if self.det_classes is not None:
            result["det-classes"] = list(self.det_classes)
            result["det-class"] = self.det_class
        return result


def witt_add(a: WittClass, b: WittClass) -> WittClass:
    return WittClass(orthogonal_sum(a.form, b.form, a.plan), a.plan, a.r)


def witt_neg(a: WittClass) -> WittClass:
    return WittClass(negate(a.form), a.plan, a.r)


def witt_mul(a: WittClass, b: WittClass) -> WittClass:
    return WittClass(tensor_form(a.form, b.form, a.plan), a.plan, a.r)


def delta(k: K0Class, r: int = DEFAULT_SMOOTHNESS) -> WittClass:
    """[(B+, <B+>)] - [(B-, <B->)] with the standard positive forms."""
    plan = k.plan
    if k.positive.rank == 0 and k.negative.rank == 0:
        empty = constant_form(zero_bundle(k.positive.cover), np.zeros((0, 0)))
        return WittClass(empty, plan, r)
    parts = []
    if k.positive.rank:
        positive = standard_positive_form(k.positive, r, plan)
        parts.append(WittClass(positive, plan, r))
    if k.negative.rank:
        negative = standard_positive_form(k.negative, r, plan)
        parts.append(witt_neg(WittClass(negative, plan, r)))
    result = parts[0] if len(parts) == 1 else witt_add(*parts)
    logger.info("Delta(%s) has signature %d", k.name, result.difference)
    return result


def nabla(w: WittClass) -> K0Class:
    """[range P+] - [range P-] of the spectral decomposition of the form."""
    dec = decompose(w.form, w.r, w.plan)
    positive = bundle_from_projector(dec.positive, w.plan)
    negative = bundle_from_projector(dec.negative, w.plan)
    result = K0Class(
        positive.renamed(f"xi+({w.form.name})"),
        negative.renamed(f"xi-({w.form.name})"),
        w.plan,
    )
    logger.info("Nabla(%s) has rank %d", w.name, result.rank)
    return result


def cancellation_witness(
    f: FormField, plan: SamplePlan = DEFAULT_PLAN
) -> IsometryWitness:
    """(P, b) _|_ (P, -b) -> H(P), (x, y) -> (x + y, b(x - y, .) / 2)."""
    source = orthogonal_sum(f, negate(f), plan)
    target = hyperbolic_space(f.bundle, plan)
    eye = identity(f.rank)
    maps = tuple(
        _cancellation_map(eye, Scaled(s, as_expr(0.5)))
        for s in f.matrices
    )
    u = MorphismField(
        source.bundle, target.bundle, maps, f"cancel({f.name})"
    )
    return IsometryWitness(u, source, target)


def _cancellation_map(eye, half):
    return Stack(
        (Stack((eye, eye), axis=1), Stack((half, -half), axis=1)), axis=0
    )


def _exact(name: str, left, right, dim: int):
    residual = 0.0 if left == right else 1.0
    return upper_check(name, [residual], np.zeros((1, dim)), 0.5)


def roundtrip_check(
    item: K0Class | WittClass, r: int = DEFAULT_SMOOTHNESS
) -> CheckReport:
    """Nabla(Delta(k)) for a K0 class, Delta(Nabla(w)) for a Witt class.

    Never raises for a failed comparison; construction errors do
    propagate.
    """
    if isinstance(item, K0Class):
        return _k0_roundtrip(item, r)
    return _witt_roundtrip(item)


def _k0_roundtrip(k: K0Class, r: int) -> CheckReport:
    dim = k.base.dim
    w = delta(k, r)
    back = nabla(w)
    checks = [
        _exact("signature", w.difference, k.rank, dim),
        _exact("rank", back.rank, k.rank, dim),
    ]
    if k.det_class is not None:
        checks.append(_exact("det-class", back.det_class, k.det_class, dim))
    report = CheckReport(
        f"roundtrip({k.name})",
        tuple(checks),
        {"before": k.invariants(), "after": back.invariants()},
    )
    if k.negative.rank == 0 and k.positive.rank:
        report = report.merged(_positive_part_witness(w, k, r), "witness ")
    return report


def _positive_part_witness(w: WittClass, k: K0Class, r: int) -> CheckReport:
    """B ~ range of its embedding projector, which is P+ of <B>."""
    dec = decompose(w.form, r, k.plan)
    psi = projector_isomorphism(k.positive, r, k.plan)
    report = check_isomorphism(psi, k.plan)
    points = k.base.sample(k.plan).points
    gap = matrix_residuals(
        dec.positive.field.evaluate(points, strict=False),
        dec.embedding.field.evaluate(points, strict=False),
    )
    return report.merged(
        CheckReport(
            psi.name,
            (
                upper_check(
                    "positive part", gap, points, GRAM_SCHMIDT_TOLERANCE
                ),
            ),
        )
    )


def _witt_roundtrip(w: WittClass) -> CheckReport:
    dim = w.base.dim
    k = nabla(w)
    back = delta(k, w.r)
    checks = [
        _exact("rank", k.rank, w.difference, dim),
        _exact("signature", back.difference, w.difference, dim),
        _exact("rank parity", k.rank % 2, w.rank_parity, dim),
    ]
    if w.det_class is not None:
        checks.append(_exact("det-class", back.det_class, w.det_class, dim))
    report = CheckReport(
        f"roundtrip({w.name})",
        tuple(checks),
        {"before": w.invariants(), "after": back.invariants()},
    )
    if w.form.rank:
        cancel = cancellation_witness(w.form, w.plan)
        report = report.merged(
            check_isometry(cancel, w.plan, GRAM_SCHMIDT_TOLERANCE),
            "cancellation ",
        )
    return report


class Truth(enum.Enum):
    TRUE = "true"
    FALSE = "false"
    UNKNOWN = "unknown"


@dataclass(frozen=True, eq=False)
class Verdict:
    value: Truth
    reason: str
    invariants: dict
    witness: IsometryWitness | None = None
    report: CheckReport | None = None

    def __bool__(self) -> bool:
        return self.value is Truth.TRUE


def _require_catalog(w: WittClass) -> None:
    base = w.base
    if base.star_center is not None or base.circle:
        return
    if base.slice is not None and base.slice.circle:
        return
    raise NotCatalogBase(
        f"{base.name} is neither contractible nor the catalog circle"
    )


def witt_is_zero(w: WittClass) -> Verdict:
    """True only with a certified isometry onto a hyperbolic space.

    Vanishing invariants without a witness give UNKNOWN, never FALSE.
    """
    _require_catalog(w)
    invariants = w.invariants()
    if w.difference != 0:
        return Verdict(
            Truth.FALSE, f"signature {w.difference} is not 0", invariants
        )
    if w.det_class:
        return Verdict(
            Truth.FALSE, "det-classes of the parts differ", invariants
        )
    if w.form.rank > MAX_WITNESS_RANK:
        logger.warning(
            "%s: invariants vanish, no witness search above rank %d",
            w.name,
            MAX_WITNESS_RANK,
        )
        return Verdict(
            Truth.UNKNOWN, "rank above the witness search", invariants
        )
    witness = _hyperbolic_witness(w.form, w.plan, w.r)
    if witness is None:
        logger.warning("%s: invariants vanish but no witness", w.name)
        return Verdict(Truth.UNKNOWN, "no hyperbolic witness", invariants)
    report = check_isometry(witness, w.plan)
    if not report.passed:
        logger.warning("%s: witness %s rejected", w.name, witness.name)
        return Verdict(
            Truth.UNKNOWN,
            "hyperbolic witness rejected",
            invariants,
            witness,
            report,
        )
    return Verdict(
        Truth.TRUE,
        f"isometric to {witness.target_form.name}",
        invariants,
        witness,
        report,
    )


def _hyperbolic_witness(
    f: FormField, plan: SamplePlan, r: int
) -> IsometryWitness | None:
    if f.origin and f.origin[0] == "hyperbolic":
        return identity_isometry(f)
    if not f.origin or f.origin[0] != "orthogonal_sum":
        return None
    a, c = f.origin[1], f.origin[2]
    u = _onto_negative(c, a, plan, r)
    if u is None:
        return None
    cancel = cancellation_witness(a, plan)
    eye = identity(a.rank)
    maps = tuple(
        v @ BlockDiagonal((eye, ui))
        for v, ui in zip(cancel.morphism.maps, u)
    )
    morphism = MorphismField(
        f.bundle, cancel.target_form.bundle, maps, f"cancel({f.name})"
    )
    return IsometryWitness(morphism, f, cancel.target_form)


def _onto_negative(c: FormField, a: FormField, plan: SamplePlan, r: int):
    """Chart maps of an isometry (E, c) -> (E, -a), or None."""
    if c.origin and c.origin[0] == "negate" and c.origin[1] is a:
        return tuple(identity(a.rank) for _ in range(a.cover.size))
    if c.rank != a.rank or c.cover != a.cover:
        return None
    same = MorphismField(
        c.bundle, a.bundle, tuple(identity(a.rank) for _ in a.matrices)
    )
    if not check_isomorphism(same, plan).passed:
        return None
    moved = FormField(a.bundle, c.matrices, c.name)
    try:
        witness = transversal_isometry(moved, negate(a), r, plan)
    except CocycleError as error:
        logger.debug("no isometry %s -> -%s: %s", c.name, a.name, error)
        return None
    if witness.morphism.cover != a.cover:
        return None
    return witness.morphism.maps
