"""Shared fixtures: a coarse lollipop dataset and models built from it."""

import numpy as np
import pytest

from app.ml import gpm
from app.ml.pipeline import DataLoader
from app.ml.synthetic import generate_joint
from app.ml.synthetic.lollipop import training_specs
from app.services.dataset_service import SMALL_SHAPES
from app.utils.helpers import set_verbose

# Coarsest mesh level keeps every object at 16 tet vertices
RESOLUTION = 0


@pytest.fixture(autouse=True, scope="session")
def quiet():
    set_verbose(False)
    yield


@pytest.fixture(scope="session")
def joints():
    """3 shapes x 4 paired poses with analytic intensities"""
    specs = [s for s in training_specs(RESOLUTION) if s.r1 in SMALL_SHAPES]
    return [generate_joint(s) for s in specs]


@pytest.fixture(scope="session")
def reference(joints):
    return DataLoader.build_reference(joints, "template")


@pytest.fixture(scope="session")
def training_set(joints, reference):
    return DataLoader.assemble(joints, reference, "edr")


@pytest.fixture(scope="session")
def model(training_set):
    return gpm.build(training_set)


@pytest.fixture(scope="session")
def unit_model(training_set):
    """Model with unit class weights, so feature and weighted units coincide"""
    return gpm.build(training_set, class_weights=(1.0, 1.0, 1.0))


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture(scope="session")
def data_dir(tmp_path_factory):
    """Small dataset on disk with rendered volumes and held-out joints"""
    from app.services import DatasetService

    directory = tmp_path_factory.mktemp("dataset")
    DatasetService(str(directory)).generate("small", RESOLUTION, "volume", spacing=1.0, held_out=True)
    return str(directory)
