import pathlib

import numpy as np
import pytest

from app import catalog
from app.exprcore import SamplePlan

FIXTURES = pathlib.Path(__file__).parent / "fixtures"

SMALL_SAMPLES = 200


@pytest.fixture(scope="session")
def plan():
    return SamplePlan(seed=0).with_count(SMALL_SAMPLES)


@pytest.fixture(scope="session")
def full_plan():
    return SamplePlan(seed=0)


@pytest.fixture
def rng():
    return np.random.default_rng(0xC0C1C1E)


@pytest.fixture(scope="session")
def fixtures_dir():
    return FIXTURES


@pytest.fixture(scope="session")
def moebius():
    return catalog.moebius()


@pytest.fixture(scope="session")
def eps1_circle():
    return catalog.epsilon(catalog.circle_cover(), 1)


@pytest.fixture(scope="session")
def eps2_circle():
    return catalog.epsilon(catalog.circle_cover(), 2)


@pytest.fixture(scope="session")
def unit_point():
    return catalog.unit_form(catalog.point_cover())


@pytest.fixture(scope="session")
def unit_circle():
    return catalog.unit_form(catalog.circle_cover())
