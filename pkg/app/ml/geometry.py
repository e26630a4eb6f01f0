"""
Geometry Operations
Centroids, rigid-transform application, field interpolation and instance composition
"""
from typing import Sequence, Tuple, Union

import numpy as np
from scipy.spatial import cKDTree

from app.exceptions import CorrespondenceError, DataError, OutOfDomainError
from app.ml.config import INTERPOLATION_EXPANSION
from app.models.geometry import FeatureField, MultiObjectReference, RigidTransform, TetMesh, TriMesh

INTERPOLATION_SCHEMES = ('nearest', 'barycentric')


def as_points(points_or_mesh) -> np.ndarray:
    """Vertex array of a mesh, or the argument itself as an (n, 3) array"""
    if isinstance(points_or_mesh, (TriMesh, TetMesh)):
        return points_or_mesh.vertices
    points = np.asarray(points_or_mesh, dtype=np.float64)
    return points.reshape(-1, 3)


def centroid(mesh: Union[TriMesh, TetMesh, np.ndarray]) -> np.ndarray:
    """Arithmetic mean of the vertices"""
    points = as_points(mesh)
    if len(points) == 0:
        raise DataError('Centroid of an empty mesh is undefined')
    return points.mean(axis=0)


def apply_rigid(transform: RigidTransform, points) -> np.ndarray:
    """Map every point to R x + t"""
    return transform.apply(as_points(points))


def locate_in_tets(vertices: np.ndarray, tets: np.ndarray, queries: np.ndarray,
                   tol: float = 1e-9) -> Tuple[np.ndarray, np.ndarray]:
    """Enclosing tetrahedron and barycentric weights of each query.

    Returns (owner, weights): owner is -1 where no tetrahedron contains the query.
    The first tetrahedron in mesh order wins on shared faces.
    """
    queries = np.asarray(queries, dtype=np.float64).reshape(-1, 3)
    owner = np.full(len(queries), -1, dtype=np.int64)
    weights = np.zeros((len(queries), 4))
    if len(tets) == 0 or len(queries) == 0:
        return owner, weights

    corners = vertices[tets]
    edges = corners[:, 1:] - corners[:, :1]
    scale = np.abs(edges).max(axis=(1, 2)) + 1e-300
    usable = np.abs(np.linalg.det(edges)) > 1e-12 * scale ** 3
    centers = corners.mean(axis=1)
    radii = np.linalg.norm(corners - centers[:, None, :], axis=2).max(axis=1)

    tree = cKDTree(queries)
    candidates = tree.query_ball_point(centers, radii * (1.0 + tol) + tol)
    for k in np.flatnonzero(usable):
        idx = np.asarray(candidates[k], dtype=np.int64)
        if idx.size == 0:
            continue
        idx = idx[owner[idx] < 0]
        if idx.size == 0:
            continue
        local = np.linalg.solve(edges[k].T, (queries[idx] - corners[k, 0]).T).T
        full = np.column_stack([1.0 - local.sum(axis=1), local])
        inside = (full >= -tol).all(axis=1)
        owner[idx[inside]] = k
        weights[idx[inside]] = full[inside]
    return owner, weights


def joint_tets(reference: MultiObjectReference) -> np.ndarray:
    """All objects' tetrahedra indexed into the concatenated domain"""
    offsets = reference.offsets
    return np.concatenate([obj.volume.tets + offsets[j] for j, obj in enumerate(reference.objects)])


def check_in_domain(points: np.ndarray, queries: np.ndarray, expansion: float = INTERPOLATION_EXPANSION):
    """Raise if a query lies farther than expansion x bounding-box diagonal from the box"""
    low, high = points.min(axis=0), points.max(axis=0)
    diagonal = float(np.linalg.norm(high - low))
    outside = np.maximum(low - queries, 0.0) + np.maximum(queries - high, 0.0)
    distance = np.linalg.norm(outside, axis=1)
    if np.any(distance > expansion * diagonal):
        raise OutOfDomainError(f'Query lies beyond {expansion} x the domain bounding-box diagonal')


def field_matrix(field: FeatureField) -> np.ndarray:
    """(N, 7) table of the 7-tuples"""
    return np.column_stack([field.shape, field.pose, field.intensity])


def interpolate_field(field: FeatureField, query, scheme: str = 'barycentric',
                      expansion: float = INTERPOLATION_EXPANSION) -> np.ndarray:
    """Continuous evaluation of a feature field; returns (7,) or (q, 7)"""
    if scheme not in INTERPOLATION_SCHEMES:
        raise DataError(f'Unknown interpolation scheme {scheme!r}')
    query = np.asarray(query, dtype=np.float64)
    single = query.ndim == 1
    queries = query.reshape(-1, 3)
    points = field.reference.points
    check_in_domain(points, queries, expansion)

    values = field_matrix(field)
    _, nearest = cKDTree(points).query(queries)
    result = values[nearest]
    if scheme == 'barycentric':
        tets = joint_tets(field.reference)
        owner, weights = locate_in_tets(points, tets, queries)
        hit = owner >= 0
        if np.any(hit):
            corner_values = values[tets[owner[hit]]]
            result[hit] = np.einsum('qk,qkc->qc', weights[hit], corner_values)
    return result[0] if single else result


def compose_fields(reference: MultiObjectReference, shape, poses: Sequence[RigidTransform]) -> np.ndarray:
    """Posed points P_j(x + S(x)) for every domain point, objects concatenated"""
    shape = np.asarray(shape, dtype=np.float64)
    if shape.shape != (reference.n_points, 3):
        raise CorrespondenceError(f'Shape field needs {reference.n_points} displacements, got {shape.shape}')
    if len(poses) != reference.n_objects:
        raise CorrespondenceError('One pose per reference object is required')
    deformed = reference.points + shape
    posed = np.empty_like(deformed)
    for j, pose in enumerate(poses):
        s = reference.slice(j)
        posed[s] = pose.apply(deformed[s])
    return posed
