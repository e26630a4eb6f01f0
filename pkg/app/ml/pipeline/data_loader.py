"""
Data Loader
Load generated joints and prepare reference and training functions
"""
from typing import List, Sequence, Tuple

import numpy as np

from app.exceptions import DataError
from app.ml import gpm
from app.ml.config import DEFAULT_POSE_MODE
from app.ml.pose import gpa, procrustes_align
from app.ml.synthetic.lollipop import generate_joint, reference_objects, reference_spec
from app.models.geometry import MultiObjectReference, ReferenceObject, Volume3
from app.models.gpm import TrainingSet
from app.models.synthetic import SyntheticJoint
from app.repositories.dataset_repository import DatasetRepository
from app.utils.helpers import status

REFERENCE_MODES = ('gpa', 'template')


class DataLoader:
    """Load and prepare data for model building"""

    @staticmethod
    def load_joints(data_dir: str, group: str = 'train') -> Tuple[List[str], List[SyntheticJoint]]:
        """Labels and joints of one dataset group"""
        repo = DatasetRepository(data_dir)
        labels = repo.labels(group)
        if not labels:
            raise DataError(f'Dataset {data_dir} has no {group!r} joints')
        status(f'Loading {len(labels)} {group} joints from {data_dir}...', '📂')
        return labels, [repo.load_joint(group, label) for label in labels]

    @staticmethod
    def load_volumes(data_dir: str, group: str = 'train') -> Tuple[List[str], List[Volume3]]:
        repo = DatasetRepository(data_dir)
        labels = repo.labels(group)
        return labels, [repo.load_joint_volume(group, label) for label in labels]

    @staticmethod
    def build_reference(joints: Sequence[SyntheticJoint], mode: str = 'gpa') -> MultiObjectReference:
        """Canonical r=8 joint, or per-object GPA consensus placed on it with mean intensities"""
        if mode not in REFERENCE_MODES:
            raise DataError(f'Unknown reference mode {mode!r}')
        if not joints:
            raise DataError('Cannot build a reference without joints')
        template = reference_objects(generate_joint(reference_spec(joints[0].spec.resolution)))
        if mode == 'template':
            return MultiObjectReference(tuple(o.validate() for o in template))

        objects = []
        for j, obj in enumerate(template):
            _, _, consensus = gpa([joint.volumes[j].vertices for joint in joints])
            placed = procrustes_align(consensus, obj.points).apply(consensus)
            intensity = np.mean([joint.volumes[j].intensity for joint in joints], axis=0)
            surface, volume = obj.posed(placed, intensity)
            objects.append(ReferenceObject(obj.name, surface, volume, obj.surface_index, obj.landmarks).validate())
        return MultiObjectReference(tuple(objects))

    @staticmethod
    def assemble(joints: Sequence[SyntheticJoint], reference: MultiObjectReference,
                 pose_mode: str = DEFAULT_POSE_MODE, labels: Sequence[str] = ()) -> TrainingSet:
        """Training functions of every joint"""
        return gpm.assemble_training_functions([j.volumes for j in joints], reference, pose_mode, labels)

    @staticmethod
    def load_and_prepare(data_dir: str, pose_mode: str = DEFAULT_POSE_MODE,
                         reference_mode: str = 'gpa') -> Tuple[TrainingSet, List[SyntheticJoint]]:
        """Full pipeline: load, build reference, assemble"""
        labels, joints = DataLoader.load_joints(data_dir)
        reference = DataLoader.build_reference(joints, reference_mode)
        ts = DataLoader.assemble(joints, reference, pose_mode, labels)
        status(f'Training set: {ts.n} joints, {reference.n_points} domain points')
        return ts, joints
