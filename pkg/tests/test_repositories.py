"""Tests for model containers, PLY meshes, raw volumes and dataset directories."""

import os
import zipfile

import numpy as np
import pytest

from app.exceptions import DataError
from app.ml.synthetic import render_volume
from app.repositories import DatasetRepository, MeshRepository, ModelRepository


class TestModelRepository:

    def test_roundtrip_is_bit_exact(self, model, tmp_path):
        repo = ModelRepository(str(tmp_path))
        repo.save("model.dmfc", model)
        loaded = repo.load("model.dmfc")
        assert loaded.rank == model.rank
        assert loaded.class_weights == model.class_weights
        assert loaded.pose_mode == model.pose_mode
        assert loaded.reference.names == model.reference.names
        np.testing.assert_array_equal(loaded.eigenvalues, model.eigenvalues)
        np.testing.assert_array_equal(loaded.basis, model.basis)
        np.testing.assert_array_equal(loaded.mean.to_vector(), model.mean.to_vector())
        for a, b in zip(loaded.reference.objects, model.reference.objects):
            np.testing.assert_array_equal(a.volume.vertices, b.volume.vertices)
            np.testing.assert_array_equal(a.volume.tets, b.volume.tets)
            np.testing.assert_array_equal(a.surface.triangles, b.surface.triangles)
            assert list(a.landmarks) == list(b.landmarks)

    def test_resave_gives_identical_bytes(self, model, tmp_path):
        repo = ModelRepository(str(tmp_path))
        repo.save("a.dmfc", model)
        repo.save("b.dmfc", repo.load("a.dmfc"))
        assert (tmp_path / "a.dmfc").read_bytes() == (tmp_path / "b.dmfc").read_bytes()

    def test_missing_file(self, tmp_path):
        with pytest.raises(DataError):
            ModelRepository(str(tmp_path)).load("absent.dmfc")

    def test_not_a_zip(self, tmp_path):
        (tmp_path / "bad.dmfc").write_bytes(b"not a model")
        with pytest.raises(DataError):
            ModelRepository(str(tmp_path)).load("bad.dmfc")

    def test_missing_section(self, model, tmp_path):
        repo = ModelRepository(str(tmp_path))
        repo.save("model.dmfc", model)
        with zipfile.ZipFile(tmp_path / "model.dmfc") as source, \
                zipfile.ZipFile(tmp_path / "partial.dmfc", "w") as target:
            for name in source.namelist():
                if name != "basis.npy":
                    target.writestr(name, source.read(name))
        with pytest.raises(DataError):
            repo.load("partial.dmfc")


class TestMeshRepository:

    def test_object_roundtrip(self, joints, tmp_path):
        repo = MeshRepository(str(tmp_path))
        joint = joints[0]
        surface, volume = joint.surfaces[0], joint.volumes[0]
        repo.save_object("object.ply", surface, volume, np.arange(surface.n_vertices))
        loaded_surface, loaded_volume, index = repo.load_object("object.ply")
        np.testing.assert_array_equal(loaded_volume.vertices, volume.vertices)
        np.testing.assert_array_equal(loaded_volume.tets, volume.tets)
        np.testing.assert_array_equal(loaded_volume.intensity, volume.intensity)
        np.testing.assert_array_equal(loaded_surface.triangles, surface.triangles)
        np.testing.assert_array_equal(index, np.arange(surface.n_vertices))

    def test_surface_file_is_a_plain_triangle_ply(self, joints, tmp_path):
        repo = MeshRepository(str(tmp_path))
        surface = joints[0].surfaces[1]
        repo.save_surface("surface.ply", surface)
        lines = (tmp_path / "surface.ply").read_text().splitlines()
        header = lines[: lines.index("end_header")]
        assert [line.split()[1] for line in header if line.startswith("element")] == ["vertex", "face"]
        assert "property double intensity" not in header
        loaded = repo.load_surface("surface.ply")
        # repr-formatted doubles read back exactly
        np.testing.assert_array_equal(loaded.vertices, surface.vertices)
        np.testing.assert_array_equal(loaded.triangles, surface.triangles)

    def test_truncated_ply(self, joints, tmp_path):
        repo = MeshRepository(str(tmp_path))
        repo.save_surface("surface.ply", joints[0].surfaces[0])
        text = (tmp_path / "surface.ply").read_text()
        (tmp_path / "surface.ply").write_text(text[: len(text) // 2])
        with pytest.raises(DataError):
            repo.load_surface("surface.ply")

    def test_not_a_ply(self, tmp_path):
        (tmp_path / "mesh.ply").write_text("solid cube\n")
        with pytest.raises(DataError):
            MeshRepository(str(tmp_path)).load_surface("mesh.ply")

    def test_volume_roundtrip(self, joints, tmp_path):
        repo = MeshRepository(str(tmp_path))
        volume = render_volume(joints[0], spacing=2.0)
        repo.save_volume("volume", volume)
        loaded = repo.load_volume("volume.raw")
        assert loaded.dims == volume.dims
        assert loaded.spacing == volume.spacing
        np.testing.assert_array_equal(loaded.origin, volume.origin)
        np.testing.assert_array_equal(loaded.voxels, volume.voxels)

    def test_truncated_raw(self, joints, tmp_path):
        repo = MeshRepository(str(tmp_path))
        repo.save_volume("volume", render_volume(joints[0], spacing=2.0))
        data = (tmp_path / "volume.raw").read_bytes()
        (tmp_path / "volume.raw").write_bytes(data[:-8])
        with pytest.raises(DataError):
            repo.load_volume("volume")

    def test_instance_files(self, model, tmp_path):
        from app.ml import gpm

        files = MeshRepository(str(tmp_path)).save_instance("out", gpm.sample(model, [0.0]), model.reference)
        assert set(files) == set(model.reference.names)
        assert os.path.exists(tmp_path / "out" / "instance.json")


class TestDatasetRepository:

    def test_joint_roundtrip(self, joints, tmp_path):
        repo = DatasetRepository(str(tmp_path))
        joint = joints[3]
        entry = repo.save_joint("train", "joint_003", joint)
        assert entry["has_volume"] is False
        loaded = repo.load_joint("train", "joint_003")
        assert loaded.spec == joint.spec
        assert loaded.names == joint.names
        np.testing.assert_array_equal(loaded.anchors, joint.anchors)
        for a, b in zip(loaded.volumes, joint.volumes):
            np.testing.assert_array_equal(a.vertices, b.vertices)
            np.testing.assert_array_equal(a.intensity, b.intensity)
        for a, b in zip(loaded.transforms, joint.transforms):
            np.testing.assert_allclose(a.rotation, b.rotation)
            np.testing.assert_allclose(a.translation, b.translation)

    def test_missing_manifest(self, tmp_path):
        with pytest.raises(DataError):
            DatasetRepository(str(tmp_path)).load_manifest()

    def test_labels_by_group(self, data_dir):
        repo = DatasetRepository(data_dir)
        train, held_out = repo.labels("train"), repo.labels("held_out")
        assert len(train) == 12
        assert held_out
        assert train[0] == "joint_000"
