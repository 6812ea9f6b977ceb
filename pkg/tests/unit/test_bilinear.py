import numpy as np
import pytest
from hypothesis import given, reject, seed
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from app import catalog
from app.bilinear import (
    FormField,
    SignatureType,
    canonical_root,
    check_isometry,
    constant_form,
    decompose,
    gram_schmidt_frame,
    hyperbolic_space,
    identity_isometry,
    local_trivializing_cover,
    matrix_signature,
    negate,
    orthogonal_sum,
    positive_isometry,
    signature,
    standard_positive_form,
    symmetric,
    tensor_form,
    transversal_isometry,
    transversal_map,
    validate_decomposition,
    validate_form,
)
from app.bilinear.gram_schmidt import _eliminate, frame_with_pattern
from app.config import Tolerances
from app.errors import (
    CoverageFailure,
    InconsistentSignature,
    NearSingular,
    NotPositive,
)
from app.exprcore import var

from ..helpers import (
    diagonal_with,
    eigen_signature,
    random_invertible,
    random_symmetric,
)

x0, x1 = var(0), var(1)

MAX_DIMENSION = 4
MIN_EIGENVALUE = 0.1


def _frame_residual(s, g, kind):
    j = diagonal_with(kind.positive, kind.negative)
    return np.abs(g.T @ s @ g - j).max(initial=0.0)


def test_gram_schmidt_diagonal():
    g, kind = gram_schmidt_frame(np.diag([4.0, -9.0]))
    assert kind == SignatureType(1, 1)
    assert np.allclose(np.abs(g), np.diag([0.5, 1 / 3]), atol=1e-12)


def test_gram_schmidt_hyperbolic_plane():
    s = np.array([[0.0, 1.0], [1.0, 0.0]])
    g, kind = gram_schmidt_frame(s)
    assert kind == SignatureType(1, 1)
    assert _frame_residual(s, g, kind) < 1e-12


def test_gram_schmidt_identity():
    g, kind = gram_schmidt_frame(np.eye(5))
    assert kind == SignatureType(5, 0)
    assert np.allclose(g, np.eye(5), atol=1e-12)


def test_gram_schmidt_empty():
    g, kind = gram_schmidt_frame(np.zeros((0, 0)))
    assert g.shape == (0, 0)
    assert kind == SignatureType(0, 0)


def test_gram_schmidt_rejects_singular():
    with pytest.raises(NearSingular):
        gram_schmidt_frame(np.diag([1.0, 0.0]))


def test_singular_tolerance_is_configurable():
    s = np.diag([1.0, 1e-6])
    assert gram_schmidt_frame(s)[1] == SignatureType(2, 0)
    with pytest.raises(NearSingular):
        gram_schmidt_frame(s, Tolerances(singular=1e-3))


def test_small_diagonal_is_still_a_pivot():
    _, signs, steps, _ = _eliminate(np.array([[0.05, 1.0], [1.0, 0.05]]))
    assert steps[0].partner == -1
    assert sorted(signs) == [-1, 1]


def test_zero_diagonal_takes_a_hyperbolic_pair():
    _, _, steps, _ = _eliminate(np.array([[0.0, 1.0], [1.0, 0.0]]))
    assert (steps[0].index, steps[0].partner) == (0, 1)


def test_pivot_tolerance_is_configurable():
    s = np.array([[0.05, 1.0], [1.0, 0.05]])
    g, kind, (steps, _) = frame_with_pattern(s, None, Tolerances(pivot=1.0))
    assert steps[0].partner == 1
    assert kind == SignatureType(1, 1)
    assert _frame_residual(s, g, kind) < 1e-12


@pytest.mark.parametrize("d", [1, 2, 3, 5])
def test_gram_schmidt_random(d, rng):
    s = random_symmetric(rng, d)
    g, kind = gram_schmidt_frame(s)
    assert kind == eigen_signature(s)
    assert _frame_residual(s, g, kind) < 1e-8


@pytest.mark.parametrize("d", [2, 3])
def test_type_is_a_congruence_invariant(d, rng):
    s = random_symmetric(rng, d)
    t = random_invertible(rng, d)
    assert matrix_signature(t.T @ s @ t) == matrix_signature(s)


@seed(1)
@given(
    entries=arrays(
        np.float64,
        (MAX_DIMENSION, MAX_DIMENSION),
        elements=st.floats(min_value=-5.0, max_value=5.0),
    ),
    d=st.integers(min_value=1, max_value=MAX_DIMENSION),
)
def test_gram_schmidt_matches_eigenvalue_signs(entries, d):
    s = entries[:d, :d] + entries[:d, :d].T
    if np.abs(np.linalg.eigvalsh(s)).min() < MIN_EIGENVALUE:
        reject()
    top = np.abs(np.diag(s)).max()
    if 0.0 < top < MIN_EIGENVALUE * 1e-3:
        reject()
    g, kind = gram_schmidt_frame(s)
    assert kind == eigen_signature(s)
    assert _frame_residual(s, g, kind) < 1e-8


def test_signature_arithmetic():
    a, b = SignatureType(2, 1), SignatureType(1, 1)
    assert a + b == SignatureType(3, 2)
    assert a * b == SignatureType(3, 3)
    assert (a * b).rank == a.rank * b.rank
    assert (a * b).difference == a.difference * b.difference
    assert str(a) == "(2,1)"


def test_symmetric_from_upper_rows():
    m = symmetric([[1, x0], [2]])
    value = m.evaluate(np.array([[3.0, 0.0]]))[0]
    assert value.tolist() == [[1.0, 3.0], [3.0, 2.0]]


def test_symmetric_checks_row_lengths():
    with pytest.raises(ValueError):
        symmetric([[1, 2, 3], [4]])


def test_unit_form_on_moebius_is_valid(plan):
    report = validate_form(catalog.moebius_unit_form(), plan)
    assert report.passed
    assert report.max_residual == 0.0


def test_incompatible_form_fails(moebius, plan):
    f = FormField(
        moebius, (symmetric([[1]]), symmetric([[2]])), "mismatched"
    )
    report = validate_form(f, plan)
    assert not report["compatibility"].passed


def test_degenerate_form_fails(eps2_circle, plan):
    f = constant_form(eps2_circle, np.diag([1.0, 0.0]))
    assert not validate_form(f, plan)["nondegeneracy"].passed


@pytest.mark.parametrize(
    "build, expected",
    [
        (lambda c: catalog.unit_form(c), (1, 0)),
        (lambda c: negate(catalog.unit_form(c)), (0, 1)),
        (lambda c: hyperbolic_space(catalog.epsilon(c, 2)), (2, 2)),
        (
            lambda c: orthogonal_sum(
                catalog.unit_form(c), catalog.unit_form(c, -1)
            ),
            (1, 1),
        ),
        (
            lambda c: tensor_form(
                hyperbolic_space(catalog.epsilon(c, 1)),
                catalog.unit_form(c, -1),
            ),
            (1, 1),
        ),
    ],
)
def test_signature_of_constructions(build, expected, plan):
    f = build(catalog.circle_cover())
    assert validate_form(f, plan).passed
    assert signature(f, plan) == SignatureType(*expected)


def test_hyperbolic_moebius(plan):
    f = hyperbolic_space(catalog.moebius())
    assert validate_form(f, plan).passed
    assert signature(f, plan) == SignatureType(1, 1)


def test_inconsistent_signature_lists_both_types(plan):
    cover = catalog.line_cover()
    b = catalog.epsilon(cover, 1)
    moving = symmetric([[x0**3 + 2 * x0 - 1]])
    f = FormField(b, tuple(moving for _ in range(cover.size)), "cubic")
    with pytest.raises(InconsistentSignature) as info:
        signature(f, plan.with_count(50))
    kinds = set(info.value.types)
    assert kinds == {SignatureType(1, 0), SignatureType(0, 1)}


def test_local_trivializing_cover(plan):
    f = catalog.sheared_cylinder_form()
    local = local_trivializing_cover(f, plan)
    assert local.report.passed
    assert set(local.types) == {SignatureType(1, 1)}


def test_minor_tolerance_bounds_the_local_charts(plan):
    f = catalog.sheared_cylinder_form()
    with pytest.raises(CoverageFailure):
        local_trivializing_cover(f, plan, Tolerances(minor=1e6))


def test_standard_positive_form(moebius, plan):
    f = standard_positive_form(moebius, 1, plan)
    assert validate_form(f, plan, tol=1e-8).passed
    assert signature(f, plan) == SignatureType(1, 0)


def test_decompose_indefinite_form(plan):
    f = orthogonal_sum(
        catalog.unit_form(catalog.circle_cover()),
        catalog.unit_form(catalog.circle_cover(), -1),
    )
    dec = decompose(f, 1, plan)
    assert dec.signature == SignatureType(1, 1)
    report = validate_decomposition(dec, plan)
    assert report.passed
    assert report.invariants == {"positive": 1, "negative": 1}


def test_decompose_hyperbolic_moebius(plan):
    dec = decompose(hyperbolic_space(catalog.moebius()), 1, plan)
    assert validate_decomposition(dec, plan).passed


def test_canonical_root():
    u = canonical_root(np.eye(2), 4 * np.eye(2))
    assert np.allclose(u, 0.5 * np.eye(2), atol=1e-12)


def test_canonical_root_is_an_isometry():
    s = np.array([[2.0, 0.5], [0.5, 1.0]])
    target = np.array([[3.0, -1.0], [-1.0, 2.0]])
    u = canonical_root(s, target)
    assert np.abs(u.T @ target @ u - s).max() < 1e-12


def test_positive_isometry(eps2_circle, plan):
    f = constant_form(eps2_circle, np.eye(2), "I")
    target = constant_form(eps2_circle, 4 * np.eye(2), "4I")
    w = positive_isometry(f, target, plan)
    assert check_isometry(w, plan).passed
    point = eps2_circle.cover.samples(plan, 0).points[:1]
    assert np.allclose(w.morphism.maps[0].evaluate(point)[0], 0.5 * np.eye(2))


def test_positive_isometry_needs_positive_forms(eps2_circle, plan):
    f = constant_form(eps2_circle, np.eye(2))
    target = constant_form(eps2_circle, np.diag([1.0, -1.0]))
    with pytest.raises(NotPositive):
        positive_isometry(f, target, plan)


def test_transversal_map_preserves_forms():
    s = np.diag([1.0, -1.0])
    target = np.array([[1.0, 0.5], [0.5, -1.0]])
    u = transversal_map(s, target, np.eye(2))
    assert np.abs(u.T @ target @ u - s).max() < 1e-10


def test_transversal_isometry(plan):
    cover = catalog.circle_cover()
    b = catalog.epsilon(cover, 2)
    f = constant_form(b, np.diag([1.0, -1.0]), "J")
    target = FormField(
        b, tuple(symmetric([[1, 0.5 * x0], [-1]]) for _ in range(2)), "S"
    )
    w = transversal_isometry(f, target, 1, plan)
    assert check_isometry(w, plan).passed


def test_identity_isometry(unit_circle, plan):
    assert check_isometry(identity_isometry(unit_circle), plan).passed


def test_moebius_sum_witness_is_an_isometry(plan):
    report = check_isometry(catalog.moebius_sum_witness(), plan)
    assert report.passed
    assert report["form"].max_residual < 1e-8
