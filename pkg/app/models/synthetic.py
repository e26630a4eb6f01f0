"""
Synthetic Data Models
Lollipop and joint specifications, generated joints with their ground truth
"""
from dataclasses import dataclass, replace
from typing import List, Tuple

import numpy as np

from app.exceptions import DataError
from app.ml.config import DEFAULT_RESOLUTION, R2_OFFSET, R3_OFFSET, SHAPE_SPAN
from app.models.geometry import RigidTransform, TetMesh, TriMesh, frozen_array

OBJECT_NAMES = ('lollipop1', 'lollipop2', 'lollipop3')


@dataclass(frozen=True)
class LollipopSpec:
    """One lollipop: head major axis r at a mesh subdivision level"""
    r: float
    resolution: int = DEFAULT_RESOLUTION

    def __post_init__(self):
        if not np.isfinite(self.r) or self.r <= 0:
            raise DataError(f'Lollipop major axis must be positive, got {self.r}')
        if int(self.resolution) != self.resolution or self.resolution < 0:
            raise DataError(f'Resolution must be a non-negative integer, got {self.resolution}')
        object.__setattr__(self, 'r', float(self.r))
        object.__setattr__(self, 'resolution', int(self.resolution))


@dataclass(frozen=True)
class JointSpec:
    """Three-lollipop joint: head sizes and the yz-plane angles of objects 2 and 3"""
    r1: float
    r2: float
    r3: float
    theta2: float = 0.0
    theta3: float = 0.0
    resolution: int = DEFAULT_RESOLUTION

    def __post_init__(self):
        low, high = min(SHAPE_SPAN), max(SHAPE_SPAN)
        if not low <= self.r1 <= high:
            raise DataError(f'r1 must lie in [{low:g}, {high:g}], got {self.r1}')
        for name in ('r2', 'r3'):
            if getattr(self, name) <= 0:
                raise DataError(f'{name} must be positive')
        if not (np.isfinite(self.theta2) and np.isfinite(self.theta3)):
            raise DataError('Joint angles must be finite')
        for name in ('r1', 'r2', 'r3', 'theta2', 'theta3'):
            object.__setattr__(self, name, float(getattr(self, name)))

    @classmethod
    def from_shape(cls, r: float, theta2: float = 0.0, theta3: float = 0.0,
                   resolution: int = DEFAULT_RESOLUTION) -> 'JointSpec':
        """(r1, r2, r3) = (r, 31 - r, 17 - r)"""
        return cls(r, R2_OFFSET - r, R3_OFFSET - r, theta2, theta3, resolution)

    @property
    def radii(self) -> Tuple[float, float, float]:
        return self.r1, self.r2, self.r3

    def lollipops(self) -> List[LollipopSpec]:
        return [LollipopSpec(r, self.resolution) for r in self.radii]

    def at_pose(self, theta2: float, theta3: float) -> 'JointSpec':
        return replace(self, theta2=theta2, theta3=theta3)

    def to_dict(self):
        return {
            'r1': self.r1, 'r2': self.r2, 'r3': self.r3,
            'theta2': self.theta2, 'theta3': self.theta3,
            'resolution': self.resolution,
        }


@dataclass(frozen=True, eq=False)
class SyntheticJoint:
    """Posed lollipops with intensities, plus the transforms and anchors that produced them"""
    spec: JointSpec
    surfaces: Tuple[TriMesh, ...]
    volumes: Tuple[TetMesh, ...]
    transforms: Tuple[RigidTransform, ...]
    anchors: np.ndarray
    landmarks: Tuple[Tuple[int, ...], ...] = ()
    names: Tuple[str, ...] = OBJECT_NAMES

    def __post_init__(self):
        object.__setattr__(self, 'anchors', frozen_array(self.anchors, shape_tail=(3,)))
        if not (len(self.surfaces) == len(self.volumes) == len(self.transforms) == len(self.anchors)):
            raise DataError('Joint needs one surface, volume, transform and anchor per object')

    @property
    def n_objects(self) -> int:
        return len(self.volumes)

    @property
    def points(self) -> np.ndarray:
        return np.concatenate([v.vertices for v in self.volumes])

    def with_intensities(self, intensities) -> 'SyntheticJoint':
        """Same joint carrying new per-vertex intensities, one array per object"""
        volumes = tuple(v.with_vertices(v.vertices, i) for v, i in zip(self.volumes, intensities))
        return replace(self, volumes=volumes)

    def to_dict(self):
        """Ground-truth record"""
        return {
            'spec': self.spec.to_dict(),
            'objects': list(self.names),
            'transforms': {n: t.to_dict() for n, t in zip(self.names, self.transforms)},
            'anchors': self.anchors.tolist(),
        }

    def __repr__(self):
        return f'<SyntheticJoint r={self.spec.radii} theta=({self.spec.theta2:.4f}, {self.spec.theta3:.4f})>'
