"""Tests for lollipop generation, rendering and volume sampling."""

import math

import numpy as np
import pytest

from app.exceptions import DataError
from app.ml.config import HEAD_RADIUS, STICK_LENGTH, THETA2_ANGLES, THETA3_ANGLES
from app.ml.synthetic import (
    drr_project,
    generate_joint,
    held_out_specs,
    lollipop_mesh,
    training_specs,
    reference_spec,
    render_volume,
    sample_joint_intensities,
    sample_volume,
    tet_intensity_correspondence,
)
from app.ml.synthetic.lollipop import (
    head_centre,
    lollipop_landmarks,
    surface_vertex_count,
    tet_vertex_count,
)
from app.models.synthetic import JointSpec, LollipopSpec


def enclosed_volume(surface):
    v = surface.vertices[surface.triangles]
    return abs(np.einsum("ij,ij->i", v[:, 0], np.cross(v[:, 1], v[:, 2])).sum()) / 6.0


@pytest.fixture(scope="module")
def joint():
    return generate_joint(JointSpec.from_shape(6.0, THETA2_ANGLES[1], THETA3_ANGLES[1], resolution=0))


@pytest.fixture(scope="module")
def volume(joint):
    return render_volume(joint, spacing=1.0)


class TestLollipopMesh:

    @pytest.mark.parametrize("level", [0, 1, 2])
    def test_vertex_and_face_counts(self, level):
        surface, tets = lollipop_mesh(LollipopSpec(8.0, level))
        assert surface.n_vertices == surface_vertex_count(level) == 2 + 12 * 4 ** level
        assert len(surface.triangles) == 2 * surface.n_vertices - 4
        assert tets.n_vertices == tet_vertex_count(level)

    def test_counts_at_level_one(self):
        assert surface_vertex_count(1) == 50
        assert tet_vertex_count(1) == 55

    @pytest.mark.parametrize("r", [1.0, 8.0, 15.0])
    def test_tets_fill_the_surface(self, r):
        surface, tets = lollipop_mesh(LollipopSpec(r, 1))
        volumes = tets.tet_volumes()
        assert np.all(np.abs(volumes) > 1e-12)
        assert np.abs(volumes).sum() == pytest.approx(enclosed_volume(surface), rel=1e-9)

    def test_surface_vertices_come_first(self):
        surface, tets = lollipop_mesh(LollipopSpec(8.0, 1))
        np.testing.assert_array_equal(tets.vertices[:surface.n_vertices], surface.vertices)

    def test_head_extent(self):
        r = 9.0
        surface, _ = lollipop_mesh(LollipopSpec(r, 2))
        top = surface.vertices[:, 2].max()
        assert top == pytest.approx(head_centre(r)[2] + r / 2.0)
        assert surface.vertices[:, 2].min() == 0.0

    def test_head_width_does_not_depend_on_r(self):
        widths, heights = [], []
        for r in (1.0, 3.0, 15.0):
            surface, _ = lollipop_mesh(LollipopSpec(r, 2))
            head = surface.vertices[surface.vertices[:, 2] > STICK_LENGTH]
            widths.append(np.linalg.norm(head[:, :2], axis=1).max())
            heights.append(np.ptp(surface.vertices[:, 2]) - STICK_LENGTH)
        np.testing.assert_allclose(widths, widths[0], rtol=1e-12)
        assert widths[0] <= HEAD_RADIUS + 1e-12
        # the oblate r=1 head is wider than it is tall
        assert heights[0] < 2 * widths[0]
        assert heights[0] < heights[1] < heights[2]

    def test_landmarks_are_pole_and_junction(self):
        r = 8.0
        _, tets = lollipop_mesh(LollipopSpec(r, 1))
        pole, junction = lollipop_landmarks(1)
        np.testing.assert_allclose(tets.vertices[pole], [0.0, 0.0, head_centre(r)[2] + r / 2.0])
        np.testing.assert_allclose(tets.vertices[junction], [0.0, 0.0, STICK_LENGTH])

    def test_topology_is_shared_across_shapes(self):
        a, _ = lollipop_mesh(LollipopSpec(2.0, 1))
        b, _ = lollipop_mesh(LollipopSpec(12.0, 1))
        np.testing.assert_array_equal(a.triangles, b.triangles)

    def test_invalid_radius(self):
        with pytest.raises(DataError):
            LollipopSpec(-1.0)


class TestJointSpecs:

    def test_training_dataset(self):
        specs = training_specs(0)
        assert len(specs) == 60
        for s in specs:
            assert s.r2 == 31.0 - s.r1 and s.r3 == 17.0 - s.r1
        pairs = {(s.theta2, s.theta3) for s in specs}
        assert pairs == set(zip(THETA2_ANGLES, THETA3_ANGLES))

    def test_held_out_poses_are_new(self):
        training = {(s.theta2, s.theta3) for s in training_specs(0)}
        specs = held_out_specs(0)
        assert len(specs) == 6
        assert all((s.theta2, s.theta3) not in training for s in specs)

    def test_reference_uses_mean_angles(self):
        spec = reference_spec(0)
        assert spec.r1 == 8.0
        assert spec.theta2 == pytest.approx(np.mean(THETA2_ANGLES))
        assert spec.theta3 == pytest.approx(np.mean(THETA3_ANGLES))

    def test_shape_outside_span(self):
        with pytest.raises(DataError):
            JointSpec.from_shape(16.0)


class TestGenerateJoint:

    def test_articulation(self, joint):
        first, second, third = joint.transforms
        np.testing.assert_allclose(first.matrix(), np.eye(4))
        np.testing.assert_allclose(second.translation, head_centre(joint.spec.r1))
        np.testing.assert_allclose(third.translation, second.apply([0.0, 0.0, STICK_LENGTH]))
        relative = second.inverse().compose(third)
        assert math.atan2(relative.rotation[2, 1], relative.rotation[1, 1]) == pytest.approx(joint.spec.theta3)

    def test_intensity_is_distance_to_anchor(self, joint):
        for mesh, anchor in zip(joint.volumes, joint.anchors):
            np.testing.assert_allclose(mesh.intensity, np.linalg.norm(mesh.vertices - anchor, axis=1))

    def test_ground_truth_record(self, joint):
        record = joint.to_dict()
        assert record["objects"] == ["lollipop1", "lollipop2", "lollipop3"]
        assert record["spec"]["r1"] == 6.0


class TestRendering:

    def test_voxels_hold_distance_to_an_anchor(self, joint, volume):
        centers = volume.voxel_centers()
        inside = volume.voxels > 0
        assert inside.any() and not inside.all()
        distances = np.linalg.norm(centers[inside][:, None, :] - joint.anchors[None], axis=2)
        assert np.all(np.abs(distances - volume.voxels[inside][:, None]).min(axis=1) < 1e-9)

    def test_margin_voxels_are_empty(self, volume):
        assert volume.grid()[0, 0, 0] == 0.0
        assert volume.grid()[-1, -1, -1] == 0.0

    def test_drr(self, volume):
        raw = drr_project(volume, "z", normalize=False)
        np.testing.assert_allclose(raw, volume.grid().sum(axis=2) * volume.spacing[2])
        image = drr_project(volume, "z")
        assert image.shape == volume.dims[:2]
        assert image.max() == pytest.approx(1.0)
        assert image.min() >= 0.0

    def test_drr_unknown_axis(self, volume):
        with pytest.raises(DataError):
            drr_project(volume, "w")

    def test_trilinear_sampling_at_voxel_centers(self, volume):
        centers = volume.voxel_centers()[::97]
        np.testing.assert_allclose(sample_volume(volume, centers), volume.voxels[::97], atol=1e-9)

    def test_sampling_outside_is_zero(self, volume):
        far = np.asarray(volume.origin) - 100.0
        assert sample_volume(volume, far[None])[0] == 0.0

    def test_nearest_voxel_correspondence(self, joint, volume):
        sampled = sample_joint_intensities(joint, volume)
        for before, after in zip(joint.volumes, sampled.volumes):
            np.testing.assert_array_equal(before.vertices, after.vertices)
            np.testing.assert_array_equal(after.intensity, tet_intensity_correspondence(volume, before))

    def test_correspondence_outside_the_volume(self, joint, volume):
        moved = joint.volumes[0].with_vertices(joint.volumes[0].vertices + 1000.0)
        with pytest.raises(DataError):
            tet_intensity_correspondence(volume, moved)
