"""
Model Entities
Training sets, the shared latent-space model and its sampled instances
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from app.exceptions import CorrespondenceError, DataError
from app.ml.config import POSE_MODES, VERSION
from app.models.geometry import (
    FeatureField,
    MultiObjectReference,
    RigidTransform,
    TetMesh,
    TriMesh,
    class_scale_vector,
    frozen_array,
)


@dataclass(frozen=True, eq=False)
class TrainingSet:
    """Training feature fields, all defined over one reference"""
    reference: MultiObjectReference
    fields: Tuple[FeatureField, ...]
    pose_mode: str = 'edr'
    labels: Tuple[str, ...] = ()

    def __post_init__(self):
        fields = tuple(self.fields)
        for f in fields:
            if f.n_points != self.reference.n_points:
                raise CorrespondenceError('Training field does not match the reference domain size')
        if self.pose_mode not in POSE_MODES:
            raise DataError(f'Unknown pose mode {self.pose_mode!r}')
        labels = tuple(self.labels) or tuple(f'sample_{i:03d}' for i in range(len(fields)))
        if len(labels) != len(fields):
            raise DataError('One label per training field is required')
        object.__setattr__(self, 'fields', fields)
        object.__setattr__(self, 'labels', labels)

    @property
    def n(self) -> int:
        return len(self.fields)

    def data_matrix(self) -> np.ndarray:
        """n x 7N matrix of stacked field vectors"""
        return np.stack([f.to_vector() for f in self.fields])

    def __repr__(self):
        return f'<TrainingSet n={self.n} mode={self.pose_mode}>'


@dataclass(frozen=True, eq=False)
class Coefficients:
    """Standard-normal latent coordinates theta"""
    theta: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, 'theta', frozen_array(np.ravel(self.theta)))

    @classmethod
    def zeros(cls, rank: int) -> 'Coefficients':
        return cls(np.zeros(rank))

    def __len__(self):
        return len(self.theta)

    def to_dict(self):
        return {'theta': self.theta.tolist()}


@dataclass(frozen=True, eq=False)
class PointObservation:
    """Observed value of one domain point, all 7 channels or a single feature class"""
    point_id: int
    value: np.ndarray
    channel: str = 'all'

    def __post_init__(self):
        expected = {'all': 7, 'shape': 3, 'pose': 3, 'intensity': 1}
        if self.channel not in expected:
            raise DataError(f'Unknown channel {self.channel!r}')
        value = frozen_array(np.ravel(self.value))
        if value.size != expected[self.channel]:
            raise DataError(f'{self.channel} observation needs {expected[self.channel]} values')
        object.__setattr__(self, 'point_id', int(self.point_id))
        object.__setattr__(self, 'value', value)

    def to_dict(self):
        return {'point_id': self.point_id, 'channel': self.channel, 'value': self.value.tolist()}


@dataclass(frozen=True, eq=False)
class DmfcGpm:
    """Low-rank Gaussian process over shape, pose and intensity of a multi-object joint.

    basis rows are the eigenfunctions Phi_m as 7N vectors in feature units; they are
    orthonormal under the inner product weighted by the squared class scales.
    """
    reference: MultiObjectReference
    mean: FeatureField
    eigenvalues: np.ndarray
    basis: np.ndarray
    class_weights: Tuple[float, float, float] = (1.0, 1.0, 1.0)
    pose_mode: str = 'edr'
    metadata: Dict = field(default_factory=dict)

    def __post_init__(self):
        eigenvalues = frozen_array(np.ravel(self.eigenvalues))
        width = 7 * self.reference.n_points
        basis = np.asarray(self.basis, dtype=np.float64)
        if basis.size != len(eigenvalues) * width:
            raise CorrespondenceError('Basis size does not match the rank and reference domain')
        basis = frozen_array(basis.reshape(len(eigenvalues), width))
        if eigenvalues.size and eigenvalues.min() < 0:
            raise DataError('Eigenvalues must be non-negative')
        if np.any(np.diff(eigenvalues) > 1e-12 * max(1.0, float(eigenvalues.max(initial=0.0)))):
            raise DataError('Eigenvalues must be non-increasing')
        weights = tuple(float(w) for w in self.class_weights)
        if len(weights) != 3 or min(weights) <= 0:
            raise DataError('Class weights must be three positive scale factors')
        if self.pose_mode not in POSE_MODES:
            raise DataError(f'Unknown pose mode {self.pose_mode!r}')
        object.__setattr__(self, 'eigenvalues', eigenvalues)
        object.__setattr__(self, 'basis', basis)
        object.__setattr__(self, 'class_weights', weights)
        object.__setattr__(self, 'metadata', dict(self.metadata))

    @property
    def rank(self) -> int:
        return len(self.eigenvalues)

    @property
    def n_points(self) -> int:
        return self.reference.n_points

    def scale_vector(self) -> np.ndarray:
        return class_scale_vector(self.n_points, self.class_weights)

    def weighted_basis(self) -> np.ndarray:
        """Basis in class-weighted coordinates, Euclidean-orthonormal rows"""
        return self.basis * self.scale_vector()

    def scaled_basis(self) -> np.ndarray:
        """sqrt(lambda_m) Phi_m as rows"""
        return np.sqrt(self.eigenvalues)[:, None] * self.basis

    def to_dict(self):
        return {
            'version': self.metadata.get('version', VERSION),
            'objects': self.reference.names,
            'domain_sizes': self.reference.sizes,
            'class_weights': list(self.class_weights),
            'rank': self.rank,
            'pose_mode': self.pose_mode,
        }

    def __repr__(self):
        return f'<DmfcGpm rank={self.rank} objects={self.reference.names} mode={self.pose_mode}>'


@dataclass(frozen=True, eq=False)
class InstanceObject:
    """One posed object of a sampled joint"""
    name: str
    surface: TriMesh
    volume: TetMesh
    pose: RigidTransform
    shape_field: np.ndarray
    pose_field: np.ndarray
    intensity_field: np.ndarray


@dataclass(frozen=True, eq=False)
class JointInstance:
    """A concrete joint produced from a coefficient vector"""
    coefficients: Coefficients
    field: FeatureField
    objects: Tuple[InstanceObject, ...]

    @property
    def names(self) -> List[str]:
        return [o.name for o in self.objects]

    def object(self, name_or_index) -> InstanceObject:
        j = self.field.reference.index(name_or_index)
        return self.objects[j]

    @property
    def points(self) -> np.ndarray:
        return np.concatenate([o.volume.vertices for o in self.objects])

    @property
    def intensity(self) -> np.ndarray:
        return np.concatenate([o.volume.intensity for o in self.objects])

    def to_dict(self):
        return {
            'theta': self.coefficients.theta.tolist(),
            'poses': {o.name: o.pose.to_dict() for o in self.objects},
        }

    def __repr__(self):
        return f'<JointInstance {self.names}>'
