"""
Geometry Models
Immutable meshes, rigid transforms, volumes and feature fields over a multi-object reference
"""
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.transform import Rotation

from app.exceptions import CorrespondenceError, DataError

ORTHONORMAL_TOL = 1e-10


def frozen_array(values, dtype=np.float64, shape_tail: Tuple[int, ...] = ()) -> np.ndarray:
    """Copy values into a read-only array, checking the trailing shape"""
    array = np.array(values, dtype=dtype, copy=True)
    if shape_tail:
        if array.size == 0:
            array = array.reshape((0,) + shape_tail)
        if array.shape[1:] != shape_tail:
            raise DataError(f'Expected array of shape (n, {", ".join(map(str, shape_tail))}), got {array.shape}')
    if array.dtype.kind == 'f' and not np.all(np.isfinite(array)):
        raise DataError('Non-finite value in geometry array')
    array.setflags(write=False)
    return array


def _check_indices(indices: np.ndarray, n_vertices: int, what: str):
    if indices.size and (indices.min() < 0 or indices.max() >= n_vertices):
        raise DataError(f'{what} index out of range for {n_vertices} vertices')


@dataclass(frozen=True, eq=False)
class TriMesh:
    """Triangulated surface"""
    vertices: np.ndarray
    triangles: np.ndarray = field(default_factory=lambda: np.zeros((0, 3), dtype=np.int64))

    def __post_init__(self):
        object.__setattr__(self, 'vertices', frozen_array(self.vertices, shape_tail=(3,)))
        object.__setattr__(self, 'triangles', frozen_array(self.triangles, np.int64, (3,)))
        if len(self.triangles) and len(self.vertices) < 3:
            raise DataError('A triangle mesh needs at least 3 vertices')
        _check_indices(self.triangles, len(self.vertices), 'Triangle')

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def triangle_areas(self) -> np.ndarray:
        """Area of every triangle"""
        a, b, c = (self.vertices[self.triangles[:, k]] for k in range(3))
        return 0.5 * np.linalg.norm(np.cross(b - a, c - a), axis=1)

    def with_vertices(self, vertices) -> 'TriMesh':
        """Same topology, new vertex positions"""
        return TriMesh(vertices, self.triangles)

    def __repr__(self):
        return f'<TriMesh {self.n_vertices} vertices, {len(self.triangles)} triangles>'


@dataclass(frozen=True, eq=False)
class TetMesh:
    """Tetrahedral volume mesh carrying one intensity per vertex"""
    vertices: np.ndarray
    tets: np.ndarray = field(default_factory=lambda: np.zeros((0, 4), dtype=np.int64))
    intensity: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, 'vertices', frozen_array(self.vertices, shape_tail=(3,)))
        object.__setattr__(self, 'tets', frozen_array(self.tets, np.int64, (4,)))
        intensity = np.zeros(len(self.vertices)) if self.intensity is None else self.intensity
        object.__setattr__(self, 'intensity', frozen_array(intensity))
        if self.intensity.shape != (len(self.vertices),):
            raise DataError('Intensity array length must equal the vertex count')
        _check_indices(self.tets, len(self.vertices), 'Tetrahedron')

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    def tet_volumes(self) -> np.ndarray:
        """Signed volume of every tetrahedron"""
        v = self.vertices[self.tets]
        edges = v[:, 1:] - v[:, :1]
        return np.linalg.det(edges) / 6.0

    def with_vertices(self, vertices, intensity=None) -> 'TetMesh':
        """Same topology, new vertex positions (and optionally intensities)"""
        return TetMesh(vertices, self.tets, self.intensity if intensity is None else intensity)

    def __repr__(self):
        return f'<TetMesh {self.n_vertices} vertices, {len(self.tets)} tets>'


@dataclass(frozen=True, eq=False)
class RigidTransform:
    """Element of SE(3): x -> R x + t"""
    rotation: np.ndarray = field(default_factory=lambda: np.eye(3))
    translation: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        rotation = frozen_array(self.rotation)
        translation = frozen_array(self.translation)
        if rotation.shape != (3, 3) or translation.shape != (3,):
            raise DataError('Rigid transform needs a 3x3 rotation and a 3-vector translation')
        if np.abs(rotation.T @ rotation - np.eye(3)).max() > ORTHONORMAL_TOL:
            raise DataError('Rotation matrix is not orthonormal')
        if abs(np.linalg.det(rotation) - 1.0) > ORTHONORMAL_TOL:
            raise DataError('Rotation matrix must have determinant +1')
        object.__setattr__(self, 'rotation', rotation)
        object.__setattr__(self, 'translation', translation)

    @classmethod
    def identity(cls) -> 'RigidTransform':
        return cls()

    @classmethod
    def from_translation(cls, translation) -> 'RigidTransform':
        return cls(np.eye(3), translation)

    @classmethod
    def about_pivot(cls, rotation, pivot) -> 'RigidTransform':
        """Rotation R about a pivot p: x -> R (x - p) + p"""
        rotation = np.asarray(rotation, dtype=np.float64)
        pivot = np.asarray(pivot, dtype=np.float64)
        return cls(rotation, pivot - rotation @ pivot)

    @classmethod
    def from_euler(cls, angles, translation=(0.0, 0.0, 0.0)) -> 'RigidTransform':
        """Extrinsic XYZ Euler angles (radians) plus translation"""
        return cls(Rotation.from_euler('xyz', angles).as_matrix(), translation)

    @classmethod
    def from_array(cls, values) -> 'RigidTransform':
        """Inverse of to_array: row-major R followed by t"""
        values = np.asarray(values, dtype=np.float64)
        if values.shape != (12,):
            raise DataError('Serialized rigid transform needs 12 values')
        return cls(values[:9].reshape(3, 3), values[9:])

    def to_array(self) -> np.ndarray:
        return np.concatenate([self.rotation.ravel(), self.translation])

    def as_euler(self) -> np.ndarray:
        return Rotation.from_matrix(self.rotation).as_euler('xyz')

    def matrix(self) -> np.ndarray:
        out = np.eye(4)
        out[:3, :3] = self.rotation
        out[:3, 3] = self.translation
        return out

    def apply(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=np.float64)
        return points @ self.rotation.T + self.translation

    def inverse(self) -> 'RigidTransform':
        rt = self.rotation.T
        return RigidTransform(rt, -rt @ self.translation)

    def compose(self, other: 'RigidTransform') -> 'RigidTransform':
        """self o other (other is applied first)"""
        return RigidTransform(self.rotation @ other.rotation,
                              self.rotation @ other.translation + self.translation)

    def distance(self, other: 'RigidTransform') -> Tuple[float, float]:
        """(rotation Frobenius distance, translation Euclidean distance)"""
        return (float(np.linalg.norm(self.rotation - other.rotation)),
                float(np.linalg.norm(self.translation - other.translation)))

    def to_dict(self):
        return {'rotation': self.rotation.tolist(), 'translation': self.translation.tolist()}

    def __repr__(self):
        angles = np.round(self.as_euler(), 4).tolist()
        return f'<RigidTransform euler={angles} t={np.round(self.translation, 4).tolist()}>'


@dataclass(frozen=True, eq=False)
class PoseField:
    """Pose displacement at every reference point of one object"""
    values: np.ndarray
    object_id: int = 0

    def __post_init__(self):
        object.__setattr__(self, 'values', frozen_array(self.values, shape_tail=(3,)))

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True, eq=False)
class Volume3:
    """Scalar voxel grid, x-fastest storage order"""
    dims: Tuple[int, int, int]
    spacing: Tuple[float, float, float]
    origin: Tuple[float, float, float]
    voxels: np.ndarray

    def __post_init__(self):
        dims = tuple(int(d) for d in self.dims)
        spacing = tuple(float(s) for s in np.broadcast_to(self.spacing, (3,)))
        origin = tuple(float(o) for o in self.origin)
        if len(dims) != 3 or min(dims) < 1:
            raise DataError(f'Invalid volume dims {dims}')
        if min(spacing) <= 0:
            raise DataError('Voxel spacing must be positive')
        voxels = frozen_array(np.ravel(self.voxels))
        if voxels.size != dims[0] * dims[1] * dims[2]:
            raise DataError(f'Voxel count {voxels.size} does not match dims {dims}')
        object.__setattr__(self, 'dims', dims)
        object.__setattr__(self, 'spacing', spacing)
        object.__setattr__(self, 'origin', origin)
        object.__setattr__(self, 'voxels', voxels)

    @classmethod
    def from_grid(cls, grid: np.ndarray, spacing, origin) -> 'Volume3':
        """Build from an array indexed [ix, iy, iz]"""
        grid = np.asarray(grid, dtype=np.float64)
        return cls(grid.shape, spacing, origin, grid.transpose(2, 1, 0).ravel())

    def grid(self) -> np.ndarray:
        """Voxel values indexed [ix, iy, iz]"""
        nx, ny, nz = self.dims
        return self.voxels.reshape(nz, ny, nx).transpose(2, 1, 0)

    def voxel_centers(self) -> np.ndarray:
        """(nx*ny*nz, 3) centers in storage order"""
        nx, ny, nz = self.dims
        iz, iy, ix = np.meshgrid(np.arange(nz), np.arange(ny), np.arange(nx), indexing='ij')
        index = np.stack([ix.ravel(), iy.ravel(), iz.ravel()], axis=1)
        return np.asarray(self.origin) + index * np.asarray(self.spacing)

    def continuous_index(self, points) -> np.ndarray:
        return (np.asarray(points, dtype=np.float64) - np.asarray(self.origin)) / np.asarray(self.spacing)

    def header(self) -> Dict:
        return {'dims': list(self.dims), 'spacing': list(self.spacing), 'origin': list(self.origin)}

    def __repr__(self):
        return f'<Volume3 dims={self.dims} spacing={self.spacing}>'


@dataclass(frozen=True, eq=False)
class ReferenceObject:
    """One object of the reference joint: surface, tet mesh and reference intensity"""
    name: str
    surface: TriMesh
    volume: TetMesh
    surface_index: np.ndarray
    landmarks: Tuple[int, ...] = ()

    def __post_init__(self):
        index = frozen_array(self.surface_index, np.int64)
        if index.shape != (self.surface.n_vertices,):
            raise DataError(f'{self.name}: surface index must map every surface vertex')
        _check_indices(index, self.volume.n_vertices, 'Surface')
        if not np.allclose(self.volume.vertices[index], self.surface.vertices, atol=1e-9):
            raise CorrespondenceError(f'{self.name}: surface vertices are not a subset of the tet vertices')
        object.__setattr__(self, 'surface_index', index)
        object.__setattr__(self, 'landmarks', tuple(int(i) for i in self.landmarks))
        _check_indices(np.asarray(self.landmarks, dtype=np.int64), self.volume.n_vertices, 'Landmark')

    @property
    def points(self) -> np.ndarray:
        return self.volume.vertices

    @property
    def n_points(self) -> int:
        return self.volume.n_vertices

    def validate(self):
        """Reference meshes must not contain zero-area triangles"""
        if len(self.surface.triangles) and self.surface.triangle_areas().min() <= 1e-14:
            raise DataError(f'{self.name}: degenerate triangle in reference surface')
        return self

    def posed(self, points, intensity=None) -> Tuple[TriMesh, TetMesh]:
        """Meshes with the reference topology at new domain positions"""
        volume = self.volume.with_vertices(points, intensity)
        return self.surface.with_vertices(volume.vertices[self.surface_index]), volume


@dataclass(frozen=True, eq=False)
class MultiObjectReference:
    """Reference joint: union of per-object domains, concatenated in object order"""
    objects: Tuple[ReferenceObject, ...]

    def __post_init__(self):
        objects = tuple(self.objects)
        if not objects:
            raise DataError('Reference needs at least one object')
        names = [o.name for o in objects]
        if len(set(names)) != len(names):
            raise DataError('Object names must be unique')
        object.__setattr__(self, 'objects', objects)

    @property
    def names(self) -> List[str]:
        return [o.name for o in self.objects]

    @property
    def sizes(self) -> List[int]:
        return [o.n_points for o in self.objects]

    @property
    def offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.sizes)]).astype(np.int64)

    @property
    def n_objects(self) -> int:
        return len(self.objects)

    @property
    def n_points(self) -> int:
        return int(sum(self.sizes))

    @property
    def points(self) -> np.ndarray:
        return np.concatenate([o.points for o in self.objects])

    @property
    def intensity(self) -> np.ndarray:
        return np.concatenate([o.volume.intensity for o in self.objects])

    def index(self, name_or_index) -> int:
        if isinstance(name_or_index, (int, np.integer)):
            if not 0 <= name_or_index < self.n_objects:
                raise DataError(f'Object index {name_or_index} out of range')
            return int(name_or_index)
        try:
            return self.names.index(name_or_index)
        except ValueError:
            raise DataError(f'Unknown object {name_or_index!r}') from None

    def slice(self, j) -> slice:
        j = self.index(j)
        offsets = self.offsets
        return slice(int(offsets[j]), int(offsets[j + 1]))

    def object_ids(self, j) -> np.ndarray:
        s = self.slice(j)
        return np.arange(s.start, s.stop)

    def object_of(self, point_ids) -> np.ndarray:
        return np.searchsorted(self.offsets, np.asarray(point_ids), side='right') - 1

    def landmark_ids(self, j) -> np.ndarray:
        """Global point ids of an object's landmarks"""
        j = self.index(j)
        return np.asarray(self.objects[j].landmarks, dtype=np.int64) + self.offsets[j]

    def restrict(self, point_ids: Iterable[int]) -> 'MultiObjectReference':
        """Sub-reference over a subset of domain points (sorted, objects kept in order)"""
        ids = np.unique(np.asarray(list(point_ids), dtype=np.int64))
        if ids.size == 0:
            raise DataError('Cannot restrict a reference to an empty domain')
        if ids.min() < 0 or ids.max() >= self.n_points:
            raise DataError('Point id out of range')
        kept = []
        for j, obj in enumerate(self.objects):
            s = self.slice(j)
            local = ids[(ids >= s.start) & (ids < s.stop)] - s.start
            if local.size:
                kept.append(_restrict_object(obj, local))
        return MultiObjectReference(tuple(kept))

    def to_dict(self):
        return {'objects': self.names, 'sizes': self.sizes}

    def __repr__(self):
        return f'<MultiObjectReference {dict(zip(self.names, self.sizes))}>'


def _restrict_object(obj: ReferenceObject, local: np.ndarray) -> ReferenceObject:
    remap = np.full(obj.n_points, -1, dtype=np.int64)
    remap[local] = np.arange(local.size)
    tets = remap[obj.volume.tets]
    tets = tets[(tets >= 0).all(axis=1)]
    volume = TetMesh(obj.volume.vertices[local], tets, obj.volume.intensity[local])

    surface_keep = np.flatnonzero(remap[obj.surface_index] >= 0)
    surface_remap = np.full(obj.surface.n_vertices, -1, dtype=np.int64)
    surface_remap[surface_keep] = np.arange(surface_keep.size)
    triangles = surface_remap[obj.surface.triangles]
    triangles = triangles[(triangles >= 0).all(axis=1)]
    surface = TriMesh(obj.surface.vertices[surface_keep], triangles)

    landmarks = tuple(int(remap[i]) for i in obj.landmarks)
    if any(i < 0 for i in landmarks):
        landmarks = ()
    return ReferenceObject(obj.name, surface, volume, remap[obj.surface_index[surface_keep]], landmarks)


def vector_rows(n_points: int, point_ids: Sequence[int], channel: str = 'all') -> np.ndarray:
    """Rows of the stacked 7N data vector holding the given points and channel.

    Layout: [shape (3N, point-major), pose (3N, point-major), intensity (N)].
    """
    ids = np.asarray(point_ids, dtype=np.int64).reshape(-1, 1)
    xyz = np.arange(3).reshape(1, 3)
    blocks = {
        'shape': (3 * ids + xyz).ravel(),
        'pose': (3 * n_points + 3 * ids + xyz).ravel(),
        'intensity': (6 * n_points + ids).ravel(),
    }
    if channel == 'all':
        return np.concatenate([blocks['shape'], blocks['pose'], blocks['intensity']])
    if channel not in blocks:
        raise DataError(f'Unknown channel {channel!r}')
    return blocks[channel]


def class_mask(n_points: int, classes: Iterable[str]) -> np.ndarray:
    """Boolean mask over the 7N data vector selecting whole feature classes"""
    mask = np.zeros(7 * n_points, dtype=bool)
    for name in classes:
        mask[vector_rows(n_points, np.arange(n_points), name)] = True
    return mask


def class_scale_vector(n_points: int, class_weights: Sequence[float]) -> np.ndarray:
    """Per-row scale factor of the 7N data vector"""
    shape_w, pose_w, intensity_w = (float(w) for w in class_weights)
    return np.concatenate([np.full(3 * n_points, shape_w),
                           np.full(3 * n_points, pose_w),
                           np.full(n_points, intensity_w)])


@dataclass(frozen=True, eq=False)
class FeatureField:
    """Shape displacement, pose displacement and intensity offset at every domain point"""
    reference: MultiObjectReference
    shape: np.ndarray
    pose: np.ndarray
    intensity: np.ndarray

    def __post_init__(self):
        n = self.reference.n_points
        shape = frozen_array(self.shape, shape_tail=(3,))
        pose = frozen_array(self.pose, shape_tail=(3,))
        intensity = frozen_array(np.ravel(self.intensity))
        if shape.shape[0] != n or pose.shape[0] != n or intensity.shape[0] != n:
            raise CorrespondenceError(f'Feature field channels must have {n} values')
        object.__setattr__(self, 'shape', shape)
        object.__setattr__(self, 'pose', pose)
        object.__setattr__(self, 'intensity', intensity)

    @classmethod
    def zeros(cls, reference: MultiObjectReference) -> 'FeatureField':
        n = reference.n_points
        return cls(reference, np.zeros((n, 3)), np.zeros((n, 3)), np.zeros(n))

    @classmethod
    def from_vector(cls, reference: MultiObjectReference, vector) -> 'FeatureField':
        n = reference.n_points
        vector = np.asarray(vector, dtype=np.float64)
        if vector.shape != (7 * n,):
            raise CorrespondenceError(f'Expected a {7 * n}-vector, got {vector.shape}')
        return cls(reference, vector[:3 * n].reshape(n, 3), vector[3 * n:6 * n].reshape(n, 3), vector[6 * n:])

    @property
    def n_points(self) -> int:
        return self.reference.n_points

    def to_vector(self) -> np.ndarray:
        return np.concatenate([self.shape.ravel(), self.pose.ravel(), self.intensity])

    def values_at(self, point_id: int) -> np.ndarray:
        """The 7-tuple (shape xyz, pose xyz, intensity) at one domain point"""
        return np.concatenate([self.shape[point_id], self.pose[point_id], [self.intensity[point_id]]])

    def object_slice(self, j) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        s = self.reference.slice(j)
        return self.shape[s], self.pose[s], self.intensity[s]

    def replace(self, shape=None, pose=None, intensity=None) -> 'FeatureField':
        return FeatureField(self.reference,
                            self.shape if shape is None else shape,
                            self.pose if pose is None else pose,
                            self.intensity if intensity is None else intensity)

    def __repr__(self):
        return f'<FeatureField {self.n_points} points>'
