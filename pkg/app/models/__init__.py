"""
Domain Models Package
"""
from app.models.geometry import (
    FeatureField,
    MultiObjectReference,
    PoseField,
    ReferenceObject,
    RigidTransform,
    TetMesh,
    TriMesh,
    Volume3,
)
from app.models.gpm import (
    Coefficients,
    DmfcGpm,
    InstanceObject,
    JointInstance,
    PointObservation,
    TrainingSet,
)
from app.models.fitting import Chain, Observation, Proposal

__all__ = [
    'FeatureField',
    'MultiObjectReference',
    'PoseField',
    'ReferenceObject',
    'RigidTransform',
    'TetMesh',
    'TriMesh',
    'Volume3',
    'Coefficients',
    'DmfcGpm',
    'InstanceObject',
    'JointInstance',
    'PointObservation',
    'TrainingSet',
    'Chain',
    'Observation',
    'Proposal',
]
