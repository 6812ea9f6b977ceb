import inspect
import math

import numpy as np
import pytest

from app import catalog
from app.bilinear import SignatureType, check_isometry, signature
from app.bundle import check_isomorphism, s1_line_class, validate_cocycle
from app.errors import ContractionEscapesBase, EndpointMismatch, TCoverGap
from app.exprcore import identity_map
from app.homotopy import (
    clutch,
    contraction,
    cylinder_base,
    cylinder_isomorphism,
    cylinder_pullback,
    homotopy_isometry,
    homotopy_isomorphism,
    induced_iso_from_homotopy,
    restrict,
    restrict_form,
    retraction,
    slice_points,
    strip_subdivision,
    transport,
    transport_along,
    trivialize_contractible,
)


def test_cylinder_base():
    base = cylinder_base(catalog.circle())
    assert base.dim == 3
    assert base.slice is catalog.circle()
    assert base.box[-1] == (-0.25, 1.25)


def test_slice_points():
    points = slice_points(np.array([[1.0, 0.0], [0.0, 1.0]]), 0.5)
    assert points.tolist() == [[1.0, 0.0, 0.5], [0.0, 1.0, 0.5]]


def test_cylinder_pullback_is_a_cocycle(plan):
    b = catalog.moebius_cylinder()
    assert b.cover.size == 4
    assert validate_cocycle(b, plan).passed


def test_strip_breakpoints(plan):
    strips = strip_subdivision(catalog.moebius_cylinder(), plan)
    assert len(strips) == 2
    for s in strips:
        assert s.breakpoints == (0.0, 0.5, 1.0)
        assert s.size == 2


def test_strips_need_a_product_cover(moebius, plan):
    with pytest.raises(ValueError):
        strip_subdivision(moebius, plan)


def test_gap_in_the_t_cover(moebius, plan):
    b = cylinder_pullback(moebius, ((-math.inf, 0.4), (0.6, math.inf)))
    with pytest.raises(TCoverGap) as info:
        strip_subdivision(b, plan)
    assert info.value.t == 0.5


def test_clutching_agrees_on_bands(plan):
    b = catalog.moebius_cylinder()
    (strips, _) = strip_subdivision(b, plan)
    glued = clutch(b, strips, plan=plan)
    assert glued.report.passed
    assert len(glued.maps) == strips.size


@pytest.mark.parametrize("t_value, charts", [(0.2, 2), (0.5, 4), (0.9, 2)])
def test_restriction_keeps_occupied_charts(t_value, charts, plan):
    b = restrict(catalog.moebius_cylinder(), t_value, plan)
    assert b.cover.size == charts
    assert b.base is catalog.circle()
    assert validate_cocycle(b, plan).passed
    assert s1_line_class(b) == 1


def test_restrict_needs_a_cylinder(moebius, plan):
    with pytest.raises(ValueError):
        restrict(moebius, 0.0, plan)


def test_homotopy_isomorphism_of_moebius_cylinder(plan):
    u = homotopy_isomorphism(catalog.moebius_cylinder(), plan=plan)
    report = check_isomorphism(u, plan)
    assert report.passed
    assert report.max_residual < 1e-6


def test_trivialize_contractible(plan):
    u = trivialize_contractible(catalog.scrambled_plane_bundle(), plan=plan)
    assert u.target.rank == 2
    assert check_isomorphism(u, plan).passed


def test_circle_is_not_contractible():
    with pytest.raises(ContractionEscapesBase):
        contraction(catalog.circle())


def test_contraction_is_clamped():
    h = contraction(catalog.plane())
    points = np.array([[2.0, -2.0, -1.0], [2.0, -2.0, 0.5], [2.0, -2.0, 3.0]])
    assert h.apply(points).tolist() == [[0.0, 0.0], [1.0, -1.0], [2.0, -2.0]]


def test_induced_isomorphism_along_antipodal_homotopy(moebius, plan):
    u = induced_iso_from_homotopy(
        moebius,
        identity_map(2),
        catalog.antipodal_map(),
        catalog.antipodal_homotopy(),
        catalog.circle(),
        plan=plan,
    )
    assert check_isomorphism(u, plan).passed


def test_induced_isomorphism_checks_endpoints(moebius, plan):
    with pytest.raises(EndpointMismatch):
        induced_iso_from_homotopy(
            moebius,
            identity_map(2),
            identity_map(2),
            catalog.antipodal_homotopy(),
            catalog.circle(),
            plan=plan,
        )


def test_restricted_form_keeps_its_type(plan):
    f = restrict_form(catalog.sheared_cylinder_form(), 1.0, plan)
    assert signature(f, plan) == SignatureType(1, 1)


@pytest.mark.slow
@pytest.mark.parametrize(
    "build", [catalog.spd_family, catalog.sheared_cylinder_form]
)
def test_homotopy_isometry(build, plan):
    w = homotopy_isometry(build(), plan=plan)
    report = check_isometry(w, plan)
    assert report.passed
    assert report.max_residual < 1e-6


def test_retractions_lift_the_bottom_to_the_top(plan):
    iso = cylinder_isomorphism(catalog.moebius_cylinder(), plan=plan)
    assert len(iso.retractions) == 2
    assert all(h.report.passed for h in iso.trivializations)
    points = slice_points(catalog.circle().sample(plan).points, 0.0)
    for r in iso.retractions:
        points = r.apply(points)
    assert np.abs(points[:, -1] - 1.0).max() < 1e-12


def test_retraction_isomorphism_between_inner_slices(plan):
    iso = cylinder_isomorphism(catalog.moebius_cylinder(), 0.2, 0.9, 1, plan)
    assert iso.source.cover.size == 2
    assert check_isomorphism(iso.morphism, plan).passed


@pytest.mark.parametrize("t_value", [-0.5, 1.5])
def test_homotopy_isomorphism_stays_in_the_unit_interval(t_value, plan):
    with pytest.raises(ValueError):
        homotopy_isomorphism(catalog.moebius_cylinder(), t_value, plan=plan)


@pytest.mark.slow
def test_homotopy_isometry_matches_absolute_values(monkeypatch, plan):
    calls = []
    original = retraction.positive_isometry

    def recording(f, target, plan):
        calls.append((f, target))
        return original(f, target, plan)

    monkeypatch.setattr(retraction, "positive_isometry", recording)
    w = homotopy_isometry(catalog.sheared_cylinder_form(), plan=plan)
    assert check_isometry(w, plan).passed
    ((absolute, pulled),) = calls
    for form in (absolute, pulled):
        points = form.cover.samples(plan, 0).points
        values = form.matrices[0].evaluate(points)
        assert (np.linalg.eigvalsh(values) > 0).all()


def test_transport_submodule_is_reachable():
    assert inspect.ismodule(transport)
    assert transport.transport_along is transport_along
