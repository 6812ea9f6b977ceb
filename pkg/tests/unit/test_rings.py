import numpy as np
import pytest

from app import catalog
from app.bilinear import (
    check_isometry,
    constant_form,
    hyperbolic_space,
    orthogonal_sum,
)
from app.errors import BaseMismatch, NotCatalogBase
from app.exprcore import Cover, SemialgebraicSet, positive, var
from app.exprcore.cover import Base
from app.rings import (
    K0Class,
    Truth,
    WittClass,
    cancellation_witness,
    circle_bundle,
    delta,
    det_class,
    k0_add,
    k0_mul,
    k0_neg,
    nabla,
    roundtrip_check,
    witt_add,
    witt_is_zero,
    witt_mul,
    witt_neg,
)

x0 = var(0)


@pytest.fixture(scope="module")
def m_class(plan):
    return K0Class.of(catalog.moebius(), plan)


@pytest.fixture(scope="module")
def point_units(plan):
    cover = catalog.point_cover()
    return (
        catalog.unit_form(cover),
        catalog.unit_form(cover, -1),
    )


def test_k0_class_of_moebius(m_class):
    assert m_class.rank == 1
    assert m_class.det_class == 1
    assert m_class.invariants() == {"rank": 1, "det-class": 1}
    assert m_class.name == "[moebius]"


@pytest.mark.parametrize(
    "combine, rank, det",
    [
        (lambda a: k0_add(a, a), 2, 0),
        (lambda a: k0_mul(a, a), 1, 0),
        (lambda a: k0_neg(a), -1, 1),
        (lambda a: k0_add(a, k0_neg(a)), 0, 0),
        (lambda a: k0_mul(a, k0_neg(a)), -1, 0),
    ],
)
def test_k0_arithmetic(combine, rank, det, m_class):
    result = combine(m_class)
    assert result.rank == rank
    assert result.det_class == det


def test_k0_without_det_class(plan):
    k = K0Class.of(catalog.epsilon(catalog.line_cover(), 2), plan)
    assert k.det_class is None
    assert k.invariants() == {"rank": 2}


def test_k0_bases_must_agree(moebius):
    with pytest.raises(BaseMismatch):
        K0Class(moebius, catalog.epsilon(catalog.line_cover(), 1))


def test_det_class_reads_cylinders_at_zero(plan):
    b = catalog.moebius_cylinder()
    assert circle_bundle(b, plan).base is catalog.circle()
    assert det_class(b, plan) == 1
    assert det_class(catalog.scrambled_plane_bundle(), plan) is None


def test_witt_class_of_a_unit(point_units, plan):
    one, _ = point_units
    w = WittClass(one, plan)
    assert w.difference == 1
    assert w.invariants() == {
        "signature": 1,
        "type": "(1,0)",
        "rank parity": 1,
    }


def test_witt_arithmetic(point_units, plan):
    one, minus = point_units
    a, b = WittClass(one, plan), WittClass(minus, plan)
    assert witt_add(a, b).difference == 0
    assert witt_mul(b, b).difference == 1
    assert witt_neg(a).difference == -1
    assert witt_add(a, a).rank_parity == 0


def test_witt_det_class_of_moebius_unit(plan):
    w = WittClass(catalog.moebius_unit_form(), plan)
    assert w.det_classes == (1, 0)
    assert w.invariants()["det-class"] == 1


def test_hyperbolic_det_class_vanishes(plan):
    w = WittClass(hyperbolic_space(catalog.moebius()), plan)
    assert w.difference == 0
    assert w.det_class == 0


def test_delta_of_moebius(m_class):
    w = delta(m_class)
    assert w.difference == 1
    back = nabla(w)
    assert back.rank == 1
    assert back.det_class == 1


def test_delta_of_a_difference(m_class, plan):
    eps = K0Class.of(catalog.epsilon(catalog.circle_cover(), 2), plan)
    w = delta(k0_add(m_class, k0_neg(eps)))
    assert w.difference == -1
    assert w.form.rank == 3


def test_delta_of_zero(plan):
    k = K0Class.of(catalog.epsilon(catalog.circle_cover(), 0), plan)
    w = delta(k)
    assert w.form.rank == 0
    assert w.difference == 0


def test_nabla_of_indefinite_form(plan):
    cover = catalog.circle_cover()
    f = orthogonal_sum(catalog.unit_form(cover), catalog.unit_form(cover, -1))
    k = nabla(WittClass(f, plan))
    assert (k.positive.rank, k.negative.rank) == (1, 1)
    assert k.rank == 0


def test_k0_roundtrip(m_class):
    report = roundtrip_check(m_class)
    assert report.passed
    assert report.invariants["before"] == report.invariants["after"]


def test_witt_roundtrip(plan):
    w = WittClass(hyperbolic_space(catalog.moebius()), plan)
    report = roundtrip_check(w)
    assert report.passed
    assert report["cancellation form"].passed


def test_cancellation_witness(unit_circle, plan):
    w = cancellation_witness(unit_circle, plan)
    report = check_isometry(w, plan)
    assert report.passed
    assert report.max_residual < 1e-12


def test_hyperbolic_is_zero(plan):
    h = hyperbolic_space(catalog.epsilon(catalog.point_cover(), 1))
    verdict = witt_is_zero(WittClass(h, plan))
    assert verdict.value is Truth.TRUE
    assert verdict
    assert verdict.report.passed


def test_unit_is_not_zero(point_units, plan):
    one, _ = point_units
    verdict = witt_is_zero(WittClass(one, plan))
    assert verdict.value is Truth.FALSE
    assert not verdict
    assert verdict.witness is None


def test_unit_plus_minus_unit_is_zero(point_units, plan):
    one, minus = point_units
    verdict = witt_is_zero(WittClass(orthogonal_sum(one, minus), plan))
    assert verdict.value is Truth.TRUE
    assert verdict.witness.target_form.origin[0] == "hyperbolic"


def test_moebius_unit_is_not_zero_on_circle(plan):
    minus = catalog.unit_form(catalog.circle_cover(), -1)
    f = orthogonal_sum(catalog.moebius_unit_form(), minus)
    verdict = witt_is_zero(WittClass(f, plan))
    assert verdict.value is Truth.FALSE
    assert verdict.invariants["det-class"] == 1


def test_vanishing_invariants_without_witness_is_unknown(plan):
    b = catalog.epsilon(catalog.point_cover(), 2)
    f = constant_form(b, np.diag([1.0, -1.0]), "<1,-1>")
    verdict = witt_is_zero(WittClass(f, plan))
    assert verdict.value is Truth.UNKNOWN
    assert verdict.witness is None


def test_witt_zero_needs_a_catalog_base(plan):
    interval = Base(
        "I",
        SemialgebraicSet.basic(1, positive(x0), positive(1 - x0)),
        ((0.0, 1.0),),
    )
    b = catalog.epsilon(Cover.single(interval), 1)
    f = constant_form(b, [[1.0]], "<1>")
    with pytest.raises(NotCatalogBase):
        witt_is_zero(WittClass(f, plan))
