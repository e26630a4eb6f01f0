"""
Volume Rendering
Voxelization of posed joints, orthographic DRR projection and volume-to-mesh intensity sampling
"""
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy.ndimage import map_coordinates

from app.exceptions import DataError
from app.ml.config import TARGET_VOXELS_PER_AXIS, VOLUME_MARGIN
from app.ml.geometry import locate_in_tets
from app.ml.synthetic.lollipop import intensity_at
from app.models.geometry import TetMesh, Volume3
from app.models.gpm import JointInstance
from app.models.synthetic import SyntheticJoint

AXES = {'x': 0, 'y': 1, 'z': 2}


def grid_for(points: np.ndarray, spacing: Optional[float] = None,
             margin: float = VOLUME_MARGIN) -> Tuple[Tuple[int, int, int], Tuple[float, float, float], np.ndarray]:
    """(dims, spacing, origin) of an isotropic grid around the points' bounding box"""
    low = points.min(axis=0) - margin
    high = points.max(axis=0) + margin
    extent = high - low
    if spacing is None:
        spacing = float(extent.max()) / TARGET_VOXELS_PER_AXIS
    if not np.isfinite(spacing) or spacing <= 0:
        raise DataError('Voxel spacing must be positive')
    dims = tuple(int(d) for d in np.ceil(extent / spacing).astype(int) + 1)
    return dims, (float(spacing),) * 3, low


def _rasterize(tetmeshes: Sequence[TetMesh], values_fn, dims, spacing, origin) -> Volume3:
    """Fill voxels object by object; the first object containing a voxel center wins"""
    empty = Volume3(dims, spacing, origin, np.zeros(int(np.prod(dims))))
    centers = empty.voxel_centers()
    voxels = np.zeros(len(centers))
    filled = np.zeros(len(centers), dtype=bool)
    for j, mesh in enumerate(tetmeshes):
        low, high = mesh.vertices.min(axis=0), mesh.vertices.max(axis=0)
        candidates = np.flatnonzero(~filled & np.all((centers >= low) & (centers <= high), axis=1))
        if candidates.size == 0:
            continue
        owner, weights = locate_in_tets(mesh.vertices, mesh.tets, centers[candidates])
        hit = owner >= 0
        ids = candidates[hit]
        voxels[ids] = values_fn(j, mesh, centers[ids], owner[hit], weights[hit])
        filled[ids] = True
    return Volume3(dims, spacing, origin, voxels)


def render_volume(joint: SyntheticJoint, spacing: Optional[float] = None, grid=None) -> Volume3:
    """Distance-to-anchor intensity inside each object, 0 elsewhere"""
    dims, spacing, origin = grid if grid is not None else grid_for(joint.points, spacing)

    def distance(j, mesh, centers, owner, weights):
        return intensity_at(centers, joint.anchors[j])

    return _rasterize(joint.volumes, distance, dims, spacing, origin)


def render_instance(instance: JointInstance, spacing: Optional[float] = None, grid=None) -> Volume3:
    """Voxelize a model instance with its own barycentrically interpolated tet intensities"""
    dims, spacing, origin = grid if grid is not None else grid_for(instance.points, spacing)

    def interpolated(j, mesh, centers, owner, weights):
        return np.einsum('qk,qk->q', weights, mesh.intensity[mesh.tets[owner]])

    return _rasterize([o.volume for o in instance.objects], interpolated, dims, spacing, origin)


def drr_project(volume: Volume3, axis: Union[str, int] = 'x', normalize: bool = True) -> np.ndarray:
    """Orthographic line integral along one axis; image indexed by the two remaining axes"""
    axis = AXES.get(axis, axis) if isinstance(axis, str) else axis
    if axis not in (0, 1, 2):
        raise DataError(f'Unknown projection axis {axis!r}')
    image = volume.grid().sum(axis=axis) * volume.spacing[axis]
    if normalize:
        peak = float(image.max()) if image.size else 0.0
        if peak > 0:
            image = image / peak
    return image


def tet_intensity_correspondence(volume: Volume3, mesh: TetMesh) -> np.ndarray:
    """Value of the nearest voxel center at every tet vertex"""
    index = volume.continuous_index(mesh.vertices)
    dims = np.asarray(volume.dims)
    if np.any(index < -0.5) or np.any(index > dims - 0.5):
        raise DataError('Tet vertex lies outside the volume')
    nearest = np.clip(np.rint(index).astype(np.int64), 0, dims - 1)
    return volume.grid()[nearest[:, 0], nearest[:, 1], nearest[:, 2]]


def sample_joint_intensities(joint: SyntheticJoint, volume: Volume3) -> SyntheticJoint:
    """Joint whose tet intensities are read from a rendered volume"""
    return joint.with_intensities([tet_intensity_correspondence(volume, v) for v in joint.volumes])


def sample_volume(volume: Volume3, points) -> np.ndarray:
    """Trilinear volume values at arbitrary points, 0 outside the grid"""
    index = volume.continuous_index(points)
    return map_coordinates(volume.grid(), index.T, order=1, mode='constant', cval=0.0)
