import numpy as np
import pytest

from app import catalog
from app.bundle import (
    BundleRep,
    MorphismField,
    SectionRep,
    bundle_from_projector,
    check_isomorphism,
    coefficients,
    common_cover,
    complement,
    dual,
    evaluate_section,
    gauss_embedding,
    generating_sections,
    hom,
    identity_morphism,
    projector_isomorphism,
    projector_rank,
    pullback,
    reconstruct,
    s1_line_class,
    splitting_isomorphism,
    tensor,
    trivial_bundle,
    validate_cocycle,
    validate_projector,
    validate_section,
    whitney_sum,
)
from app.errors import BaseMismatch, NotCatalogBase, RankDrop
from app.exprcore import ExprMatrix, identity, var

x0, x1 = var(0), var(1)


def test_moebius_cocycle_is_exact(moebius, plan):
    report = validate_cocycle(moebius, plan)
    assert report.passed
    assert report.max_residual == 0.0
    assert report.invariants == {"rank": 1, "charts": 2}


def test_corrupted_moebius_fails_on_lower_arc(plan):
    report = validate_cocycle(catalog.corrupted_moebius(), plan)
    assert not report.passed
    inverse = report["inverse"]
    assert not inverse.passed
    assert inverse.max_residual == pytest.approx(2.0)
    assert inverse.witness[1] < 0


def test_trivial_bundle_cocycle(plan):
    b = trivial_bundle(catalog.circle_arcs(4), 3)
    assert validate_cocycle(b, plan).passed


def test_transition_shape_is_checked():
    with pytest.raises(ValueError):
        BundleRep(catalog.circle_cover(), 2, {(0, 1): identity(1)})


def test_missing_transition_reads_inverse(moebius):
    point = np.array([[0.0, -1.0]])
    g = moebius.transition(1, 0).evaluate(point)
    assert g.tolist() == [[[-1.0]]]


@pytest.mark.parametrize(
    "build, rank",
    [
        (lambda m: whitney_sum(m, m), 2),
        (lambda m: tensor(m, m), 1),
        (lambda m: dual(m), 1),
        (lambda m: hom(m, whitney_sum(m, m)), 2),
    ],
)
def test_operation_ranks_and_cocycles(build, rank, moebius, plan):
    b = build(moebius)
    assert b.rank == rank
    assert validate_cocycle(b, plan).passed


@pytest.mark.parametrize(
    "build, expected",
    [
        (catalog.moebius, 1),
        (lambda: catalog.epsilon(catalog.circle_cover(), 1), 0),
        (catalog.moebius_sum, 0),
        (lambda: catalog.moebius_arcs(3), 1),
        (lambda: tensor(catalog.moebius(), catalog.moebius()), 0),
        (lambda: dual(catalog.moebius()), 1),
    ],
)
def test_s1_line_class(build, expected):
    assert s1_line_class(build()) == expected


def test_s1_line_class_needs_the_circle():
    b = catalog.epsilon(catalog.line_cover(), 1)
    with pytest.raises(NotCatalogBase):
        s1_line_class(b)


def test_pullback_along_antipodal_map(moebius, plan):
    b = pullback(moebius, catalog.antipodal_map(), catalog.circle(), plan)
    assert validate_cocycle(b, plan).passed
    assert s1_line_class(b) == 1


def test_pullback_checks_dimensions(moebius, plan):
    with pytest.raises(BaseMismatch):
        pullback(moebius, catalog.antipodal_map(), catalog.real_line(), plan)


def test_common_cover_of_different_bases(plan):
    with pytest.raises(BaseMismatch):
        common_cover(catalog.circle_cover(), catalog.line_cover(), plan)


def test_generating_sections(moebius, plan):
    gens = generating_sections(moebius, 1, plan)
    assert len(gens) == moebius.cover.size * moebius.rank
    for s in gens:
        assert validate_section(s, plan).passed


def test_coefficients_reconstruct_a_section(eps2_circle, plan):
    column = ExprMatrix.of([[x0], [x1]])
    s = SectionRep(eps2_circle, (column, column), "position")
    assert validate_section(s, plan).passed
    gens = generating_sections(eps2_circle, 1, plan)
    coeffs = coefficients(s, gens, 1, plan)
    points = eps2_circle.cover.samples(plan, 0).points
    rebuilt = reconstruct(coeffs, gens, 0, points)
    assert np.abs(rebuilt - evaluate_section(s, 0, points)).max() < 1e-8


def test_broken_section_fails(moebius, plan):
    one = ExprMatrix.of([[1]])
    s = SectionRep(moebius, (one, one), "one")
    report = validate_section(s, plan)
    assert not report.passed
    assert report["transformation"].witness[1] < 0


def test_gauss_embedding_of_moebius(moebius, plan):
    p = gauss_embedding(moebius, 1, plan)
    assert p.dim == 2
    assert projector_rank(p, plan) == 1
    report = validate_projector(p, plan)
    assert report.passed
    assert report.invariants == {"rank": 1, "ambient": 2}


def test_projector_complement_rank(moebius, plan):
    p = gauss_embedding(moebius, 1, plan)
    assert projector_rank(p.complement(), plan) == 1


def test_projector_rank_tolerance_is_configurable(moebius, plan):
    p = gauss_embedding(moebius, 1, plan)
    assert projector_rank(p, plan, tol=1e-3) == 1
    with pytest.raises(RankDrop):
        projector_rank(p, plan, tol=-1.0)


def test_bundle_from_projector_recovers_class(moebius, plan):
    b = bundle_from_projector(gauss_embedding(moebius, 1, plan), plan)
    assert b.rank == 1
    assert validate_cocycle(b, plan).passed
    assert s1_line_class(b) == 1


def test_projector_isomorphism(moebius, plan):
    u = projector_isomorphism(moebius, 1, plan)
    assert check_isomorphism(u, plan).passed


def test_complement_of_moebius(moebius, plan):
    other = complement(moebius, 1, plan)
    assert other.rank == 1
    assert s1_line_class(other) == 1


def test_splitting_isomorphism(moebius, plan):
    u = splitting_isomorphism(moebius, 1, plan)
    report = check_isomorphism(u, plan)
    assert report.passed
    assert report.invariants == {"source rank": 2, "target rank": 2}


def test_identity_is_an_isomorphism(moebius, plan):
    assert check_isomorphism(identity_morphism(moebius), plan).passed


def test_moebius_sum_witness(plan):
    witness = catalog.moebius_sum_witness()
    report = check_isomorphism(witness.morphism, plan)
    assert report.passed
    assert report.max_residual < 1e-8


def test_moebius_is_not_trivial(moebius, eps1_circle, plan):
    maps = (identity(1), identity(1))
    u = MorphismField(moebius, eps1_circle, maps, "naive")
    report = check_isomorphism(u, plan)
    assert not report["intertwining"].passed


def test_composition_on_one_cover(moebius, plan):
    u = identity_morphism(moebius)
    assert check_isomorphism(u.then(u), plan).passed
