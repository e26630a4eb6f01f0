"""Tests for correlations, surface distances and the evaluation metrics."""

import numpy as np
import pytest

from app.exceptions import DataError, UndefinedCorrelationError
from app.ml import gpm
from app.ml.config import PUBLISHED_MODEL, CORRELATION_PAIRS, pair_name
from app.ml.metrics import (
    correlation_report,
    generality,
    hausdorff,
    instance_quantities,
    intensity_rms,
    pearson,
    rms_surface_distance,
    specificity,
    training_quantities,
)
from app.ml.synthetic import render_instance, render_volume
from app.models.geometry import Volume3


class TestPearson:

    def test_perfect_correlation(self):
        x = np.arange(10.0)
        assert pearson(x, 3 * x + 1) == pytest.approx(1.0)
        assert pearson(x, -x) == pytest.approx(-1.0)

    def test_constant_vector(self):
        with pytest.raises(UndefinedCorrelationError):
            pearson(np.ones(5), np.arange(5.0))

    def test_too_short(self):
        with pytest.raises(DataError):
            pearson([1.0, 2.0], [2.0, 1.0])

    def test_length_mismatch(self):
        with pytest.raises(DataError):
            pearson(np.arange(4.0), np.arange(5.0))


class TestSurfaceDistances:

    def test_identical_sets(self, rng):
        points = rng.normal(size=(30, 3))
        assert rms_surface_distance(points, points) == 0.0
        assert hausdorff(points, points) == 0.0

    def test_translation(self, rng):
        points = rng.normal(size=(30, 3)) * 0.01
        shifted = points + [5.0, 0.0, 0.0]
        assert rms_surface_distance(points, shifted) == pytest.approx(5.0, abs=0.05)
        assert hausdorff(points, shifted) == pytest.approx(5.0, abs=0.05)

    def test_hausdorff_bounds_rms(self, rng):
        a, b = rng.normal(size=(40, 3)), rng.normal(size=(25, 3))
        assert rms_surface_distance(a, b) <= hausdorff(a, b)

    def test_empty(self):
        with pytest.raises(DataError):
            hausdorff(np.zeros((0, 3)), np.zeros((3, 3)))


class TestQuantities:

    def test_training_quantities_recover_the_ground_truth(self, joints, reference):
        # joints 4 and 5 share a shape, so the alignment offset cancels
        joint, other = joints[5], joints[4]
        q = training_quantities(joint, reference)
        delta = q["theta2"] - training_quantities(other, reference)["theta2"]
        assert delta == pytest.approx(joint.spec.theta2 - other.spec.theta2, abs=1e-6)
        for j, name in enumerate(("r1", "r2", "r3")):
            obj = joint.volumes[j]
            pole, junction = joint.landmarks[j]
            assert q[name] == pytest.approx(np.linalg.norm(obj.vertices[pole] - obj.vertices[junction]))

    def test_instance_quantities_of_the_mean(self, model):
        q = instance_quantities(gpm.sample(model, [0.0]), model.reference)
        assert set(q) == {"r1", "r2", "r3", "d1", "d2", "d3", "theta2", "theta3"}
        assert all(np.isfinite(list(q.values())))

    def test_intensity_rms_of_own_rendering(self, model):
        instance = gpm.sample(model, [0.5])
        volume = render_instance(instance, spacing=0.5)
        blank = Volume3(volume.dims, volume.spacing, volume.origin, np.zeros(volume.voxels.size))
        assert intensity_rms(instance, volume, 0) < intensity_rms(instance, blank, 0)


class TestReports:

    def test_correlation_report_layout(self, model, joints):
        table = correlation_report(model, n_samples=20, seed=1, training=joints)
        assert list(table.index) == ["model", "training", "published_model", "published_training"]
        assert list(table.columns) == [pair_name(p) for p in CORRELATION_PAIRS]
        assert table.loc["published_model"].tolist() == list(PUBLISHED_MODEL)
        values = table.loc[["model", "training"]].to_numpy()
        assert np.all((values >= 0) & (values <= 1))

    def test_correlation_report_is_seeded(self, model):
        a = correlation_report(model, n_samples=10, seed=4)
        b = correlation_report(model, n_samples=10, seed=4)
        assert a.equals(b)

    def test_correlation_report_needs_samples(self, model):
        with pytest.raises(DataError):
            correlation_report(model, n_samples=2)

    def test_specificity(self, model, joints):
        volumes = [render_volume(j, spacing=1.0) for j in joints[:2]]
        errors = specificity(model, volumes, n_samples=5, seed=0)
        assert len(errors) == 5
        assert all(e >= 0 for e in errors)

    def test_generality_reports_every_object(self, model, joints):
        volumes = [render_volume(joints[0], spacing=1.0)]
        errors = generality(model, volumes, n_iterations=10, seed=0)
        assert set(errors) == set(model.reference.names)
        assert all(len(v) == 1 for v in errors.values())

    def test_generality_from_the_mean(self, model, joints):
        volumes = [render_volume(joints[0], spacing=1.0)]
        errors = generality(model, volumes, n_iterations=10, seed=0, start="mean")
        assert all(e >= 0 for v in errors.values() for e in v)
        with pytest.raises(DataError):
            generality(model, volumes, n_iterations=3, start="median")

    def test_empty_observations(self, model):
        with pytest.raises(DataError):
            specificity(model, [], n_samples=3)
        with pytest.raises(DataError):
            generality(model, [], n_iterations=3)
