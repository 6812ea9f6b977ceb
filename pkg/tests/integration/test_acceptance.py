import time

import numpy as np
import pytest
from scipy.linalg import block_diag

from app import catalog
from app.bilinear import (
    blend_positive_subbundle,
    check_isometry,
    decompose,
    gram_schmidt_frame,
    matrix_signature,
    orthogonal_sum,
    validate_decomposition,
)
from app.bundle import check_isomorphism, s1_line_class, validate_cocycle
from app.cli import load_spec, render_machine, run_spec
from app.exprcore import ConstantMatrix, identity, validate_partition
from app.homotopy import (
    homotopy_isometry,
    homotopy_isomorphism,
    restrict,
    trivialize_contractible,
)
from app.rings import (
    K0Class,
    WittClass,
    cancellation_witness,
    delta,
    nabla,
    roundtrip_check,
)

from ..helpers import (
    diagonal_with,
    eigen_signature,
    random_invertible,
    random_symmetric,
)

GRID = 1000
MAX_DIMENSION = 6

FORMS = [
    "unit_point",
    "minus_unit_point",
    "unit_S1",
    "minus_unit_S1",
    "diag_1_1_-1",
    "hyperbolic1",
    "hyperbolic1_S1",
    "hyperbolic_moebius",
    "moebius_unit",
]

K0_BUNDLES = ["eps1_point", "eps2_R2", "eps1_S1", "eps2_S1", "moebius"]


def test_cocycle_soundness(full_plan):
    report = validate_cocycle(catalog.moebius(), full_plan)
    assert report.passed
    assert report.max_residual == 0.0
    assert report["inverse"].samples >= GRID
    corrupted = validate_cocycle(catalog.corrupted_moebius(), full_plan)
    assert not corrupted.passed
    assert corrupted.witnesses


@pytest.mark.parametrize("build", [catalog.circle_cover, catalog.line_cover])
def test_partition_of_unity(build, full_plan):
    report = validate_partition(build(), 1, full_plan.with_count(10_000))
    assert report.passed


def test_sylvester_agreement():
    rng = np.random.default_rng(1)
    for n in range(GRID):
        s = random_symmetric(rng, 1 + n % MAX_DIMENSION)
        g, kind = gram_schmidt_frame(s)
        j = diagonal_with(kind.positive, kind.negative)
        assert np.abs(g.T @ s @ g - j).max() < 1e-8
        assert kind == eigen_signature(s)


def test_congruence_invariance():
    rng = np.random.default_rng(2)
    s = random_symmetric(rng, 4)
    kind = matrix_signature(s)
    for _ in range(GRID):
        t = random_invertible(rng, 4)
        assert matrix_signature(t.T @ s @ t) == kind


def test_signature_laws():
    kinds = [(p, n) for p in range(5) for n in range(5) if 0 < p + n <= 4]
    for a, b in kinds:
        left = diagonal_with(a, b)
        for c, d in kinds:
            right = diagonal_with(c, d)
            perp = matrix_signature(block_diag(left, right))
            assert perp == eigen_signature(block_diag(left, right))
            assert (perp.positive, perp.negative) == (a + c, b + d)
            product = matrix_signature(np.kron(left, right))
            assert product == eigen_signature(np.kron(left, right))
            assert (product.positive, product.negative) == (
                a * c + b * d,
                a * d + b * c,
            )


@pytest.mark.slow
@pytest.mark.parametrize("name", FORMS)
def test_decomposition_soundness(name, plan):
    dec = decompose(catalog.lookup(name), 1, plan)
    report = validate_decomposition(dec, plan)
    assert report.passed
    assert report["fiber sum"].max_residual < 1e-8


@pytest.mark.slow
def test_blend_agrees_with_decompose(plan):
    cover = catalog.circle_cover()
    minus = catalog.unit_form(cover, -1)
    f = orthogonal_sum(catalog.moebius_unit_form(), minus)
    first = ConstantMatrix(np.array([[1.0], [0.0]]))
    blended = blend_positive_subbundle(f, identity(2), first, None, 1, plan)
    dec = decompose(f, 1, plan)
    points = cover.samples(plan).points
    ours = blended.field.evaluate(points, strict=False)
    theirs = dec.positive.field.evaluate(points, strict=False)
    assert np.abs(ours - theirs).max() < 1e-6


@pytest.mark.slow
def test_homotopy_theorem_for_bundles(full_plan):
    b = catalog.moebius_cylinder()
    u = homotopy_isomorphism(b, plan=full_plan)
    report = check_isomorphism(u, full_plan)
    assert report.passed
    assert report["intertwining"].max_residual < 1e-6
    assert report["determinant"].max_residual > 1e-6
    for t_value in (0.0, 1.0):
        assert s1_line_class(restrict(b, t_value, full_plan)) == 1


@pytest.mark.slow
def test_moebius_cylinder_isomorphism_is_fast(full_plan):
    started = time.perf_counter()
    u = homotopy_isomorphism(catalog.moebius_cylinder(), plan=full_plan)
    elapsed = time.perf_counter() - started
    assert check_isomorphism(u, full_plan).passed
    assert elapsed < 5.0


@pytest.mark.slow
def test_homotopy_theorem_for_forms(plan):
    w = homotopy_isometry(catalog.spd_family(), plan=plan)
    report = check_isometry(w, plan)
    assert report.passed
    assert report.max_residual < 1e-8
    indefinite = homotopy_isometry(
        catalog.indefinite_cylinder_form(), plan=plan
    )
    assert check_isometry(indefinite, plan).passed


def test_non_triviality_and_stabilization(full_plan):
    assert s1_line_class(catalog.moebius()) == 1
    assert s1_line_class(catalog.epsilon(catalog.circle_cover(), 1)) == 0
    witness = catalog.moebius_sum_witness()
    report = check_isomorphism(witness.morphism, full_plan)
    assert report.passed
    assert report.max_residual < 1e-8


@pytest.mark.slow
def test_contractible_trivialization(full_plan):
    b = catalog.scrambled_plane_bundle()
    u = trivialize_contractible(b, plan=full_plan)
    report = check_isomorphism(u, full_plan)
    assert report.passed
    assert report.max_residual < 1e-6


@pytest.mark.parametrize("name", K0_BUNDLES)
def test_delta_and_nabla_keep_invariants(name, plan):
    k = K0Class.of(catalog.lookup(name), plan)
    w = delta(k)
    assert w.difference == k.rank
    assert w.rank_parity == k.rank % 2
    if k.det_class is not None:
        assert w.det_class == k.det_class
    back = nabla(w)
    assert back.invariants() == k.invariants()
    assert roundtrip_check(k).passed
    assert roundtrip_check(w).passed


@pytest.mark.parametrize(
    "build",
    [
        lambda: catalog.unit_form(catalog.circle_cover()),
        catalog.moebius_unit_form,
    ],
)
def test_cancellation_witness(build, full_plan):
    f = build()
    report = check_isometry(cancellation_witness(f, full_plan), full_plan)
    assert report.passed
    assert report.max_residual < 1e-8
    assert WittClass(orthogonal_sum(f, f), full_plan).difference == 2


@pytest.mark.slow
def test_determinism(fixtures_dir, full_plan):
    for name in ("moebius.json", "point.json"):
        doc = load_spec(str(fixtures_dir / name))
        first = render_machine(run_spec(doc, plan=full_plan))
        second = render_machine(run_spec(doc, plan=full_plan))
        assert first == second
