import numpy as np
import pytest

from app import catalog
from app.bilinear import FormField, IsometryWitness, validate_form
from app.bundle import (
    BundleRep,
    MorphismField,
    check_isomorphism,
    validate_cocycle,
)
from app.exprcore import Base, Cover, Map

KINDS = (
    Base,
    Cover,
    BundleRep,
    FormField,
    MorphismField,
    IsometryWitness,
    Map,
)

BUNDLES = [
    "eps1_point",
    "eps1_R",
    "eps2_R2",
    "eps1_S1",
    "eps2_S1",
    "moebius",
    "moebius3",
    "moebius_sum",
    "moebius_cylinder",
    "scrambled",
]

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
    "spd_family",
    "indefinite_cylinder",
    "sheared_cylinder",
]


@pytest.mark.parametrize("name", sorted(catalog.CATALOG))
def test_every_item_builds(name):
    assert isinstance(catalog.lookup(name), KINDS)


def test_unknown_name():
    with pytest.raises(KeyError):
        catalog.lookup("torus")


def test_builders_are_cached():
    assert catalog.moebius() is catalog.moebius()
    assert catalog.circle_cover() is catalog.circle_cover()


@pytest.mark.parametrize("name", BUNDLES)
def test_catalog_bundles_are_cocycles(name, plan):
    assert validate_cocycle(catalog.lookup(name), plan).passed


def test_corrupted_moebius_is_not(plan):
    assert not validate_cocycle(catalog.lookup("moebius!"), plan).passed


@pytest.mark.parametrize("name", FORMS)
def test_catalog_forms_are_valid(name, plan):
    assert validate_form(catalog.lookup(name), plan).passed


@pytest.mark.parametrize("n", [3, 4, 6])
def test_circle_arcs_cover_the_circle(n, plan):
    cover = catalog.circle_arcs(n)
    assert cover.size == n
    points = cover.base.sample(plan).points
    assert cover.membership(points).any(axis=1).all()


def test_too_few_arcs():
    with pytest.raises(ValueError):
        catalog.circle_arcs(1)
    with pytest.raises(ValueError):
        catalog.moebius_arcs(2)


def test_spd_pair_is_positive():
    for s in catalog.spd_pair():
        assert (s == s.T).all()
        assert np.linalg.eigvalsh(s).min() > 0


def test_scrambled_trivialization_charts(plan):
    u = catalog.scrambled_trivialization()
    assert u.source is catalog.scrambled_plane_bundle()
    assert u.target.rank == 2
    assert check_isomorphism(u, plan).passed
