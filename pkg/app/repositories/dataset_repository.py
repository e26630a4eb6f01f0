"""
Dataset Repository
Dataset directories: per-joint meshes, volumes and ground-truth records under a JSON manifest
"""
import os
from typing import Dict, List, Optional

import numpy as np

from app.exceptions import DataError
from app.ml.config import VERSION
from app.models.geometry import RigidTransform, Volume3
from app.models.synthetic import JointSpec, SyntheticJoint
from app.repositories.mesh_repository import MeshRepository

MANIFEST = 'dataset.json'
VOLUME_STEM = 'volume'
TRUTH = 'truth.json'


class DatasetRepository(MeshRepository):
    """Repository for generated lollipop datasets"""

    def joint_dir(self, group: str, label: str) -> str:
        return os.path.join(group, label)

    def save_joint(self, group: str, label: str, joint: SyntheticJoint,
                   volume: Optional[Volume3] = None) -> Dict:
        """Write one joint and return its manifest entry"""
        directory = self.joint_dir(group, label)
        for name, surface, tets in zip(joint.names, joint.surfaces, joint.volumes):
            self.save_object(os.path.join(directory, f'{name}.ply'), surface, tets, np.arange(surface.n_vertices))
        if volume is not None:
            self.save_volume(os.path.join(directory, VOLUME_STEM), volume)
        self.write_json(os.path.join(directory, TRUTH), {
            **joint.to_dict(),
            'landmarks': [list(m) for m in joint.landmarks],
            'version': VERSION,
        })
        return {'label': label, 'group': group, 'spec': joint.spec.to_dict(),
                'has_volume': volume is not None}

    def load_joint(self, group: str, label: str) -> SyntheticJoint:
        directory = self.joint_dir(group, label)
        truth = self.read_json(os.path.join(directory, TRUTH))
        try:
            spec = JointSpec(**truth['spec'])
            names = tuple(truth['objects'])
            transforms = tuple(RigidTransform(truth['transforms'][n]['rotation'],
                                              truth['transforms'][n]['translation']) for n in names)
            anchors = np.asarray(truth['anchors'], dtype=np.float64)
            landmarks = tuple(tuple(m) for m in truth.get('landmarks', ()))
        except (KeyError, TypeError) as e:
            raise DataError(f'Corrupt ground-truth record for {label}: {e}') from None
        surfaces, volumes = [], []
        for name in names:
            surface, tets, _ = self.load_object(os.path.join(directory, f'{name}.ply'))
            surfaces.append(surface)
            volumes.append(tets)
        return SyntheticJoint(spec, tuple(surfaces), tuple(volumes), transforms, anchors, landmarks, names)

    def load_joint_volume(self, group: str, label: str) -> Volume3:
        return self.load_volume(os.path.join(self.joint_dir(group, label), VOLUME_STEM))

    def save_manifest(self, manifest: Dict) -> str:
        return self.write_json(MANIFEST, {**manifest, 'version': VERSION})

    def load_manifest(self) -> Dict:
        if not self.exists(MANIFEST):
            raise DataError(f'No dataset manifest in {self.root}')
        manifest = self.read_json(MANIFEST)
        if 'joints' not in manifest:
            raise DataError(f'Dataset manifest in {self.root} lists no joints')
        return manifest

    def labels(self, group: str = 'train') -> List[str]:
        return [j['label'] for j in self.load_manifest()['joints'] if j.get('group', 'train') == group]
