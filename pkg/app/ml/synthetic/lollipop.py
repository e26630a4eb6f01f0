"""
Lollipop Generator
Surface of revolution about z: a cylindrical stick from z=0 to z=L capped by an
ellipsoidal head whose z semi-axis is r/2, and a three-lollipop articulated joint
"""
from functools import lru_cache
from typing import List, Optional, Tuple

import numpy as np

from app.ml.config import (
    DEFAULT_RESOLUTION,
    HELD_OUT_THETA2,
    HELD_OUT_THETA3,
    HEAD_RADIUS,
    R2_OFFSET,
    R3_OFFSET,
    REFERENCE_R,
    SHAPE_SPAN,
    STICK_LENGTH,
    STICK_RADIUS,
    THETA2_ANGLES,
    THETA3_ANGLES,
)
from app.models.geometry import ReferenceObject, RigidTransform, TetMesh, TriMesh
from app.models.synthetic import OBJECT_NAMES, JointSpec, LollipopSpec, SyntheticJoint

# Shapes used for the held-out pose volumes
HELD_OUT_SHAPES = (5.0, 11.0)


def ring_layout(resolution: int) -> Tuple[int, int, int]:
    """(samples per ring, stick rings, head rings)"""
    k = 2 ** resolution
    return 4 * k, k + 1, 2 * k - 1


def surface_vertex_count(resolution: int) -> int:
    """2 + 12 * 4^resolution"""
    n_theta, n_stick, n_head = ring_layout(resolution)
    return 2 + n_theta * (n_stick + n_head)


def tet_vertex_count(resolution: int) -> int:
    """Surface vertices plus one axis point per ring above the bottom one"""
    _, n_stick, n_head = ring_layout(resolution)
    return surface_vertex_count(resolution) + n_stick + n_head - 1


def _head_geometry(r: float) -> Tuple[float, float, float]:
    """(z semi-axis, head centre height, polar angle of the stick junction).

    The equatorial radius stays HEAD_RADIUS for every r, so r sets only the head's
    extent along the stick axis; below r = 2 * HEAD_RADIUS the head is oblate.
    """
    c = r / 2.0
    ratio = STICK_RADIUS / HEAD_RADIUS
    return c, STICK_LENGTH + c * np.sqrt(1.0 - ratio ** 2), float(np.arcsin(ratio))


def head_centre(r: float) -> np.ndarray:
    """Head centre in the lollipop's own frame"""
    return np.array([0.0, 0.0, _head_geometry(r)[1]])


def _ring_profile(spec: LollipopSpec) -> Tuple[np.ndarray, np.ndarray, float]:
    """Radius and height of every ring, bottom to top, plus the top pole height"""
    k = 2 ** spec.resolution
    _, n_stick, n_head = ring_layout(spec.resolution)
    c, zc, phi0 = _head_geometry(spec.r)

    stick_z = STICK_LENGTH * np.arange(n_stick) / k
    phi = phi0 + (np.pi - phi0) * np.arange(1, n_head + 1) / (2 * k)
    rho = np.concatenate([np.full(n_stick, STICK_RADIUS), HEAD_RADIUS * np.sin(phi)])
    z = np.concatenate([stick_z, zc - c * np.cos(phi)])
    return rho, z, zc + c


@lru_cache(maxsize=None)
def _topology(resolution: int) -> Tuple[np.ndarray, np.ndarray]:
    """(triangles, tets) shared by every lollipop at this resolution"""
    n_theta, n_stick, n_head = ring_layout(resolution)
    n_rings = n_stick + n_head
    n_surface = surface_vertex_count(resolution)
    top = n_surface - 1
    j = np.arange(n_theta)
    jn = (j + 1) % n_theta

    def ring(k, idx):
        return 1 + k * n_theta + idx

    def axis(k):
        return 0 if k == 0 else n_surface + k - 1

    triangles = [np.column_stack([np.zeros(n_theta, dtype=np.int64), ring(0, jn), ring(0, j)])]
    tets = []
    for k in range(n_rings - 1):
        b, c, e, f = ring(k, j), ring(k, jn), ring(k + 1, j), ring(k + 1, jn)
        a, d = np.full(n_theta, axis(k)), np.full(n_theta, axis(k + 1))
        triangles += [np.column_stack([b, c, f]), np.column_stack([b, f, e])]
        tets += [np.column_stack([a, b, c, f]), np.column_stack([a, b, f, e]), np.column_stack([a, e, f, d])]
    last = n_rings - 1
    triangles.append(np.column_stack([ring(last, j), ring(last, jn), np.full(n_theta, top)]))
    tets.append(np.column_stack([np.full(n_theta, axis(last)), ring(last, j), ring(last, jn), np.full(n_theta, top)]))

    triangles = np.concatenate(triangles).astype(np.int64)
    tets = np.concatenate(tets).astype(np.int64)
    triangles.setflags(write=False)
    tets.setflags(write=False)
    return triangles, tets


def lollipop_mesh(spec: LollipopSpec) -> Tuple[TriMesh, TetMesh]:
    """Surface and tetrahedralized interior; vertex order depends only on the resolution"""
    n_theta, _, _ = ring_layout(spec.resolution)
    rho, z, z_top = _ring_profile(spec)
    alpha = 2.0 * np.pi * np.arange(n_theta) / n_theta

    rings = np.stack([
        np.outer(rho, np.cos(alpha)),
        np.outer(rho, np.sin(alpha)),
        np.repeat(z[:, None], n_theta, axis=1),
    ], axis=-1).reshape(-1, 3)
    surface_points = np.vstack([[0.0, 0.0, 0.0], rings, [0.0, 0.0, z_top]])
    axis_points = np.column_stack([np.zeros(len(z) - 1), np.zeros(len(z) - 1), z[1:]])

    triangles, tets = _topology(spec.resolution)
    return TriMesh(surface_points, triangles), TetMesh(np.vstack([surface_points, axis_points]), tets)


def lollipop_landmarks(resolution: int) -> Tuple[int, int]:
    """Tet-vertex ids of the head's top pole and the axis point of the stick junction"""
    _, n_stick, _ = ring_layout(resolution)
    n_surface = surface_vertex_count(resolution)
    return n_surface - 1, n_surface + n_stick - 2


def lollipop_object(name: str, spec: LollipopSpec, intensity=None) -> ReferenceObject:
    """Reference object for one lollipop (surface vertices come first in the tet mesh)"""
    surface, volume = lollipop_mesh(spec)
    if intensity is not None:
        volume = volume.with_vertices(volume.vertices, intensity)
    return ReferenceObject(name, surface, volume, np.arange(surface.n_vertices),
                           lollipop_landmarks(spec.resolution))


def joint_transforms(spec: JointSpec) -> List[RigidTransform]:
    """Local-to-world transforms of the three lollipops.

    Object 2 stands on object 1's head centre, rotated by theta2 about x; object 3
    stands on object 2's stick end, rotated by theta3 about x in object 2's frame.
    """
    first = RigidTransform.identity()
    second = RigidTransform(_rotation_x(spec.theta2), head_centre(spec.r1))
    third = second.compose(RigidTransform(_rotation_x(spec.theta3), [0.0, 0.0, STICK_LENGTH]))
    return [first, second, third]


def _rotation_x(theta: float) -> np.ndarray:
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[1.0, 0.0, 0.0], [0.0, c, -s], [0.0, s, c]])


def reference_radii() -> Tuple[float, float, float]:
    return REFERENCE_R, R2_OFFSET - REFERENCE_R, R3_OFFSET - REFERENCE_R


def anchor_points(transforms: List[RigidTransform]) -> np.ndarray:
    """Intensity anchors: the head centre of each canonical reference lollipop, carried by its pose"""
    return np.array([t.apply(head_centre(r)) for t, r in zip(transforms, reference_radii())])


def intensity_at(points: np.ndarray, anchor: np.ndarray) -> np.ndarray:
    """Distance-to-anchor intensity of points inside an object"""
    return np.linalg.norm(np.asarray(points) - np.asarray(anchor), axis=1)


def generate_joint(spec: JointSpec) -> SyntheticJoint:
    """Posed lollipops with intensities evaluated at their own tet vertices"""
    transforms = joint_transforms(spec)
    anchors = anchor_points(transforms)
    surfaces, volumes = [], []
    for lollipop, transform, anchor in zip(spec.lollipops(), transforms, anchors):
        surface, volume = lollipop_mesh(lollipop)
        posed = transform.apply(volume.vertices)
        surfaces.append(surface.with_vertices(transform.apply(surface.vertices)))
        volumes.append(volume.with_vertices(posed, intensity_at(posed, anchor)))
    landmarks = (lollipop_landmarks(spec.resolution),) * len(volumes)
    return SyntheticJoint(spec, tuple(surfaces), tuple(volumes), tuple(transforms), anchors, landmarks)


def training_specs(resolution: int = DEFAULT_RESOLUTION) -> List[JointSpec]:
    """15 shape triples x 4 positionally paired poses = 60 joints"""
    return [JointSpec.from_shape(r, t2, t3, resolution)
            for r in SHAPE_SPAN for t2, t3 in zip(THETA2_ANGLES, THETA3_ANGLES)]


def held_out_specs(resolution: int = DEFAULT_RESOLUTION) -> List[JointSpec]:
    """Joints at poses between the training angles"""
    return [JointSpec.from_shape(r, t2, t3, resolution)
            for r in HELD_OUT_SHAPES for t2, t3 in zip(HELD_OUT_THETA2, HELD_OUT_THETA3)]


def reference_spec(resolution: int = DEFAULT_RESOLUTION,
                   theta2: Optional[float] = None, theta3: Optional[float] = None) -> JointSpec:
    """Canonical reference joint: r = 8 at the mean training pose"""
    theta2 = float(np.mean(THETA2_ANGLES)) if theta2 is None else theta2
    theta3 = float(np.mean(THETA3_ANGLES)) if theta3 is None else theta3
    return JointSpec.from_shape(REFERENCE_R, theta2, theta3, resolution)


def reference_objects(joint: SyntheticJoint) -> List[ReferenceObject]:
    """Reference objects built from a generated joint"""
    return [ReferenceObject(name, surface, volume, np.arange(surface.n_vertices), landmarks)
            for name, surface, volume, landmarks in zip(joint.names, joint.surfaces, joint.volumes, joint.landmarks)]


__all__ = [
    'OBJECT_NAMES',
    'anchor_points',
    'generate_joint',
    'head_centre',
    'held_out_specs',
    'intensity_at',
    'joint_transforms',
    'lollipop_landmarks',
    'lollipop_mesh',
    'lollipop_object',
    'training_specs',
    'reference_objects',
    'reference_spec',
    'ring_layout',
    'surface_vertex_count',
    'tet_vertex_count',
]
