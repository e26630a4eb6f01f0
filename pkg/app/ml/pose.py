"""
Pose Representation
Rigid alignment, generalized Procrustes analysis and the energy displacement representation (EDR)
"""
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import svd

from app.exceptions import CorrespondenceError, DataError, DegenerateAlignmentError
from app.ml.geometry import as_points
from app.models.geometry import PoseField, RigidTransform

DEGENERACY_TOL = 1e-10


def _check_configuration(points: np.ndarray, what: str):
    if len(points) < 3:
        raise DegenerateAlignmentError(f'{what}: at least 3 points are needed for rigid alignment')
    singular = svd(points - points.mean(axis=0), compute_uv=False)
    if singular[0] <= 0 or singular[1] <= DEGENERACY_TOL * singular[0]:
        raise DegenerateAlignmentError(f'{what}: points are collinear or coincident')


def procrustes_align(source, target, allow_scaling: bool = False) -> RigidTransform:
    """Rigid transform h minimizing sum ||h(source_i) - target_i||^2 (Kabsch)"""
    if allow_scaling:
        raise DataError('Scaled alignment is not supported')
    source = as_points(source)
    target = as_points(target)
    if source.shape != target.shape:
        raise CorrespondenceError(f'Point sets differ in size: {source.shape} vs {target.shape}')
    _check_configuration(source, 'source')
    _check_configuration(target, 'target')

    source_center = source.mean(axis=0)
    target_center = target.mean(axis=0)
    covariance = (source - source_center).T @ (target - target_center)
    u, _, vt = svd(covariance)
    reflection = np.sign(np.linalg.det(vt.T @ u.T))
    correction = np.diag([1.0, 1.0, reflection if reflection != 0 else 1.0])
    rotation = vt.T @ correction @ u.T
    return RigidTransform(rotation, target_center - rotation @ source_center)


def alignment_residual(transform: RigidTransform, source, target) -> float:
    """Sum of squared distances after applying the transform"""
    return float(np.sum((transform.apply(as_points(source)) - as_points(target)) ** 2))


def gpa(shapes: Sequence, tol: float = 1e-10, max_iter: int = 100
        ) -> Tuple[List[np.ndarray], List[RigidTransform], np.ndarray]:
    """Generalized Procrustes analysis: iterative rigid alignment to a centered consensus"""
    shapes = [as_points(s) for s in shapes]
    if len(shapes) < 2:
        raise DataError('GPA needs at least two shapes')
    if len({s.shape for s in shapes}) != 1:
        raise CorrespondenceError('GPA shapes must have equal point counts')

    consensus = shapes[0] - shapes[0].mean(axis=0)
    for _ in range(max_iter):
        transforms = [procrustes_align(s, consensus) for s in shapes]
        mean_shape = np.mean([t.apply(s) for t, s in zip(transforms, shapes)], axis=0)
        mean_shape -= mean_shape.mean(axis=0)
        movement = float(np.sqrt(np.mean(np.sum((mean_shape - consensus) ** 2, axis=1))))
        consensus = mean_shape
        if movement < tol:
            break

    transforms = [procrustes_align(s, consensus) for s in shapes]
    aligned = [t.apply(s) for t, s in zip(transforms, shapes)]
    return aligned, transforms, consensus


def edr_log(h: RigidTransform, ref_points, aligned_centroid=None, object_id: int = 0) -> PoseField:
    """Pose field log[h](x) = h^-1(T(x)) - x over the reference points.

    T is the translation moving the aligned object's centroid onto the reference
    centroid; it is the identity when aligned_centroid is omitted or already coincides.
    """
    ref_points = as_points(ref_points)
    shifted = ref_points
    if aligned_centroid is not None:
        shifted = ref_points + (ref_points.mean(axis=0) - np.asarray(aligned_centroid, dtype=np.float64))
    return PoseField(h.inverse().apply(shifted) - ref_points, object_id)


def edr_exp(field: PoseField, ref_points) -> RigidTransform:
    """Rigid transform whose action on the reference best reproduces the displaced points"""
    ref_points = as_points(ref_points)
    values = field.values if isinstance(field, PoseField) else as_points(field)
    if values.shape != ref_points.shape:
        raise CorrespondenceError('Pose field length does not match the reference points')
    return procrustes_align(ref_points + values, ref_points).inverse()


def pose_distance_sq(field: PoseField) -> float:
    """Squared EDR distance to the identity"""
    values = field.values if isinstance(field, PoseField) else as_points(field)
    return float(np.sum(values * values))


def frechet_mean_pose(fields: Sequence[PoseField], ref_points) -> Tuple[RigidTransform, PoseField]:
    """Mean pose from the pointwise mean of the pose fields"""
    if not fields:
        raise DataError('Frechet mean of an empty set of poses')
    if len({len(f) for f in fields}) != 1:
        raise CorrespondenceError('Pose fields must have equal lengths')
    mean = PoseField(np.mean([f.values for f in fields], axis=0), fields[0].object_id)
    return edr_exp(mean, ref_points), mean


def _sr_design(ref_points: np.ndarray) -> np.ndarray:
    """(3n, 6) map from (euler angles, translation) to a linear displacement field"""
    n = len(ref_points)
    design = np.zeros((n, 3, 6))
    x, y, z = ref_points.T
    # omega x p as a linear map of omega
    design[:, 0, 1], design[:, 0, 2] = z, -y
    design[:, 1, 0], design[:, 1, 2] = -z, x
    design[:, 2, 0], design[:, 2, 1] = y, -x
    design[:, :, 3:] = np.eye(3)
    return design.reshape(3 * n, 6)


def sr_params(g: RigidTransform) -> np.ndarray:
    """Standard representation: XYZ Euler angles followed by the translation"""
    return np.concatenate([g.as_euler(), g.translation])


def sr_log(g: RigidTransform, ref_points, object_id: int = 0) -> PoseField:
    """Embed the 6 SR numbers as the linear field omega x x + t on the reference points"""
    ref_points = as_points(ref_points)
    values = (_sr_design(ref_points) @ sr_params(g)).reshape(-1, 3)
    return PoseField(values, object_id)


def sr_exp(field: PoseField, ref_points) -> RigidTransform:
    """Least-squares SR numbers of a field, mapped back through the Euler parametrization"""
    ref_points = as_points(ref_points)
    values = field.values if isinstance(field, PoseField) else as_points(field)
    params, *_ = np.linalg.lstsq(_sr_design(ref_points), values.ravel(), rcond=None)
    return RigidTransform.from_euler(params[:3], params[3:])


def encode_pose(mode: str, g: RigidTransform, ref_points, shape_points=None, posed_points=None,
                object_id: int = 0) -> PoseField:
    """Pose field of a training object under the given representation.

    g maps the reference frame onto the object; pdm stores the raw displacement
    from the aligned shape to the posed object.
    """
    if mode == 'edr':
        return edr_log(g.inverse(), ref_points, object_id=object_id)
    if mode == 'sr':
        return sr_log(g, ref_points, object_id)
    if mode == 'pdm':
        return PoseField(as_points(posed_points) - as_points(shape_points), object_id)
    raise DataError(f'Unknown pose mode {mode!r}')


def decode_pose(mode: str, field: PoseField, ref_points, shape_points) -> Tuple[RigidTransform, np.ndarray]:
    """(pose transform, posed points) of a sampled object"""
    shape_points = as_points(shape_points)
    if mode == 'edr':
        g = edr_exp(field, ref_points)
        return g, g.apply(shape_points)
    if mode == 'sr':
        g = sr_exp(field, ref_points)
        return g, g.apply(shape_points)
    if mode == 'pdm':
        posed = shape_points + field.values
        return procrustes_align(shape_points, posed), posed
    raise DataError(f'Unknown pose mode {mode!r}')


def rotation_angle(transform: RigidTransform, axis: str = 'x') -> float:
    """Rotation angle about one coordinate axis (the motion-plane angle for planar motion)"""
    r = transform.rotation
    if axis == 'x':
        return float(np.arctan2(r[2, 1], r[1, 1]))
    if axis == 'y':
        return float(np.arctan2(r[0, 2], r[2, 2]))
    if axis == 'z':
        return float(np.arctan2(r[1, 0], r[0, 0]))
    raise DataError(f'Unknown axis {axis!r}')
