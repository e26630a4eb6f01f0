"""Tests for meshes, rigid transforms, volumes and field interpolation."""

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from app.exceptions import CorrespondenceError, DataError, OutOfDomainError
from app.ml.geometry import (
    apply_rigid,
    centroid,
    compose_fields,
    interpolate_field,
    locate_in_tets,
)
from app.models.geometry import (
    FeatureField,
    RigidTransform,
    TetMesh,
    Volume3,
    class_mask,
    vector_rows,
)

UNIT_TET = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])


class TestRigidTransform:

    def test_inverse_composes_to_identity(self, rng):
        for _ in range(20):
            h = RigidTransform(Rotation.from_rotvec(rng.normal(size=3)).as_matrix(), rng.normal(size=3) * 10)
            identity = h.compose(h.inverse())
            np.testing.assert_allclose(identity.rotation, np.eye(3), atol=1e-12)
            np.testing.assert_allclose(identity.translation, 0.0, atol=1e-12)

    def test_array_roundtrip(self, rng):
        h = RigidTransform(Rotation.from_rotvec(rng.normal(size=3)).as_matrix(), [1.0, -2.0, 3.0])
        back = RigidTransform.from_array(h.to_array())
        np.testing.assert_array_equal(back.rotation, h.rotation)
        np.testing.assert_array_equal(back.translation, h.translation)

    def test_apply_matches_homogeneous_matrix(self, rng):
        h = RigidTransform.from_euler([0.3, -0.2, 1.1], [4.0, 5.0, 6.0])
        points = rng.normal(size=(10, 3))
        homogeneous = np.column_stack([points, np.ones(10)]) @ h.matrix().T
        np.testing.assert_allclose(apply_rigid(h, points), homogeneous[:, :3], atol=1e-12)

    def test_about_pivot_fixes_the_pivot(self):
        pivot = np.array([1.0, 2.0, 3.0])
        h = RigidTransform.about_pivot(Rotation.from_euler("x", 0.7).as_matrix(), pivot)
        np.testing.assert_allclose(h.apply(pivot), pivot, atol=1e-12)

    def test_rejects_reflection(self):
        with pytest.raises(DataError):
            RigidTransform(np.diag([1.0, 1.0, -1.0]), np.zeros(3))

    def test_rejects_non_orthonormal(self):
        with pytest.raises(DataError):
            RigidTransform(np.eye(3) * 2.0, np.zeros(3))


class TestMeshes:

    def test_centroid(self):
        np.testing.assert_allclose(centroid(UNIT_TET), [0.25, 0.25, 0.25])

    def test_centroid_of_empty_mesh(self):
        with pytest.raises(DataError):
            centroid(np.zeros((0, 3)))

    def test_tet_index_out_of_range(self):
        with pytest.raises(DataError):
            TetMesh(UNIT_TET, [[0, 1, 2, 4]])

    def test_intensity_length_checked(self):
        with pytest.raises(DataError):
            TetMesh(UNIT_TET, [[0, 1, 2, 3]], np.zeros(3))

    def test_non_finite_vertex(self):
        vertices = UNIT_TET.copy()
        vertices[0, 0] = np.nan
        with pytest.raises(DataError):
            TetMesh(vertices, [[0, 1, 2, 3]])


class TestLocateInTets:

    def test_centroid_has_equal_weights(self):
        owner, weights = locate_in_tets(UNIT_TET, np.array([[0, 1, 2, 3]]), np.array([[0.25, 0.25, 0.25]]))
        assert owner[0] == 0
        np.testing.assert_allclose(weights[0], 0.25)

    def test_weights_reproduce_the_query(self, rng):
        queries = rng.dirichlet(np.ones(4), size=50) @ UNIT_TET
        owner, weights = locate_in_tets(UNIT_TET, np.array([[0, 1, 2, 3]]), queries)
        assert np.all(owner == 0)
        np.testing.assert_allclose(weights @ UNIT_TET, queries, atol=1e-12)
        np.testing.assert_allclose(weights.sum(axis=1), 1.0)

    def test_outside_point(self):
        owner, _ = locate_in_tets(UNIT_TET, np.array([[0, 1, 2, 3]]), np.array([[1.0, 1.0, 1.0]]))
        assert owner[0] == -1


class TestVolume:

    def test_grid_roundtrip(self, rng):
        grid = rng.normal(size=(4, 3, 2))
        volume = Volume3.from_grid(grid, 0.5, (1.0, 2.0, 3.0))
        np.testing.assert_array_equal(volume.grid(), grid)
        assert volume.dims == (4, 3, 2)

    def test_storage_is_x_fastest(self):
        grid = np.arange(24, dtype=float).reshape(4, 3, 2)
        volume = Volume3.from_grid(grid, 1.0, (0.0, 0.0, 0.0))
        assert volume.voxels[1] == grid[1, 0, 0]
        assert volume.voxels[4] == grid[0, 1, 0]

    def test_voxel_centers(self):
        volume = Volume3((2, 2, 2), 2.0, (1.0, 1.0, 1.0), np.zeros(8))
        centers = volume.voxel_centers()
        np.testing.assert_allclose(centers[0], [1.0, 1.0, 1.0])
        np.testing.assert_allclose(centers[1], [3.0, 1.0, 1.0])
        np.testing.assert_allclose(centers[-1], [3.0, 3.0, 3.0])

    def test_voxel_count_checked(self):
        with pytest.raises(DataError):
            Volume3((2, 2, 2), 1.0, (0.0, 0.0, 0.0), np.zeros(7))


class TestFeatureLayout:

    def test_vector_rows(self):
        n = 5
        np.testing.assert_array_equal(vector_rows(n, [2], "shape"), [6, 7, 8])
        np.testing.assert_array_equal(vector_rows(n, [2], "pose"), [21, 22, 23])
        np.testing.assert_array_equal(vector_rows(n, [2], "intensity"), [32])
        assert len(vector_rows(n, [0, 4])) == 14

    def test_class_mask_partitions_the_vector(self):
        n = 4
        masks = [class_mask(n, [c]) for c in ("shape", "pose", "intensity")]
        np.testing.assert_array_equal(np.sum(masks, axis=0), np.ones(7 * n))

    def test_vector_roundtrip(self, reference, rng):
        n = reference.n_points
        field = FeatureField(reference, rng.normal(size=(n, 3)), rng.normal(size=(n, 3)), rng.normal(size=n))
        back = FeatureField.from_vector(reference, field.to_vector())
        np.testing.assert_array_equal(back.to_vector(), field.to_vector())
        np.testing.assert_array_equal(field.values_at(3)[:3], field.shape[3])

    def test_wrong_length(self, reference):
        with pytest.raises(CorrespondenceError):
            FeatureField.from_vector(reference, np.zeros(7 * reference.n_points + 1))


class TestInterpolation:

    def test_exact_at_domain_points(self, reference, rng):
        n = reference.n_points
        field = FeatureField(reference, rng.normal(size=(n, 3)), rng.normal(size=(n, 3)), rng.normal(size=n))
        for scheme in ("nearest", "barycentric"):
            values = interpolate_field(field, reference.points[:5], scheme)
            expected = np.column_stack([field.shape, field.pose, field.intensity])[:5]
            np.testing.assert_allclose(values, expected, atol=1e-9)

    def test_linear_field_is_reproduced_inside(self, reference):
        points = reference.points
        linear = points @ np.array([0.5, -1.0, 2.0])
        field = FeatureField(reference, np.zeros_like(points), np.zeros_like(points), linear)
        obj = reference.objects[0]
        query = obj.points[obj.volume.tets[:10]].mean(axis=1)
        values = interpolate_field(field, query)
        np.testing.assert_allclose(values[:, 6], query @ np.array([0.5, -1.0, 2.0]), atol=1e-9)

    def test_far_query_is_rejected(self, reference):
        field = FeatureField.zeros(reference)
        with pytest.raises(OutOfDomainError):
            interpolate_field(field, [1e6, 0.0, 0.0])

    def test_unknown_scheme(self, reference):
        with pytest.raises(DataError):
            interpolate_field(FeatureField.zeros(reference), [0.0, 0.0, 0.0], "cubic")


class TestComposeFields:

    def test_identity_poses_return_the_reference(self, reference):
        poses = [RigidTransform.identity()] * reference.n_objects
        posed = compose_fields(reference, np.zeros((reference.n_points, 3)), poses)
        np.testing.assert_allclose(posed, reference.points)

    def test_posed_points_follow_each_object_transform(self, reference, rng):
        shape = 0.3 * rng.standard_normal((reference.n_points, 3))
        poses = [RigidTransform(Rotation.from_rotvec(rng.normal(size=3)).as_matrix(), rng.normal(size=3) * 5.0)
                 for _ in range(reference.n_objects)]
        posed = compose_fields(reference, shape, poses)
        owners = np.concatenate([np.full(o.n_points, j) for j, o in enumerate(reference.objects)])
        for i, (x, s, j) in enumerate(zip(reference.points, shape, owners)):
            expected = poses[j].rotation @ (x + s) + poses[j].translation
            np.testing.assert_allclose(posed[i], expected, atol=1e-10)

    def test_pose_count_checked(self, reference):
        with pytest.raises(CorrespondenceError):
            compose_fields(reference, np.zeros((reference.n_points, 3)), [RigidTransform.identity()])
