"""
Dataset Service
Generation of lollipop datasets and DRR projection of stored volumes
"""
import os
from typing import Dict, List, Optional

from joblib import Parallel, delayed
from tqdm import tqdm

from app.exceptions import DataError
from app.ml.config import DEFAULT_RESOLUTION
from app.ml.synthetic.lollipop import generate_joint, held_out_specs, training_specs
from app.ml.synthetic.rendering import drr_project, render_volume, sample_joint_intensities
from app.models.synthetic import JointSpec
from app.repositories import DatasetRepository, MeshRepository
from app.utils.helpers import is_verbose, status

PRESETS = ('full', 'small')
INTENSITY_SOURCES = ('volume', 'analytic')
SMALL_SHAPES = (3.0, 8.0, 13.0)


def preset_specs(preset: str, resolution: int) -> List[JointSpec]:
    """Training joint specs of a preset"""
    if preset == 'full':
        return training_specs(resolution)
    if preset == 'small':
        return [s for s in training_specs(resolution) if s.r1 in SMALL_SHAPES]
    raise DataError(f'Unknown preset {preset!r}')


def _make_joint(spec: JointSpec, intensity_source: str, spacing: Optional[float]):
    joint = generate_joint(spec)
    volume = render_volume(joint, spacing)
    if intensity_source == 'volume':
        joint = sample_joint_intensities(joint, volume)
    return joint, volume


class DatasetService:
    """Business logic for synthetic datasets"""

    def __init__(self, data_dir: str):
        self.data_dir = data_dir
        self.dataset_repo = DatasetRepository(data_dir)

    def generate(self, preset: str = 'full', resolution: int = DEFAULT_RESOLUTION,
                 intensity_source: str = 'volume', spacing: Optional[float] = None,
                 held_out: bool = True, n_jobs: int = 1) -> Dict:
        """Generate, render and store every joint of a preset"""
        if intensity_source not in INTENSITY_SOURCES:
            raise DataError(f'Unknown intensity source {intensity_source!r}')
        groups = {'train': preset_specs(preset, resolution)}
        if held_out:
            groups['held_out'] = held_out_specs(resolution)

        entries = []
        for group, specs in groups.items():
            status(f'Generating {len(specs)} {group} joints...', '🍭')
            iterator = tqdm(specs, desc=group, disable=not is_verbose(), leave=False)
            if n_jobs == 1:
                made = [_make_joint(s, intensity_source, spacing) for s in iterator]
            else:
                made = Parallel(n_jobs=n_jobs)(delayed(_make_joint)(s, intensity_source, spacing) for s in iterator)
            for k, (joint, volume) in enumerate(made):
                entries.append(self.dataset_repo.save_joint(group, f'joint_{k:03d}', joint, volume))

        manifest = {
            'preset': preset,
            'resolution': resolution,
            'intensity_source': intensity_source,
            'spacing': spacing,
            'joints': entries,
        }
        self.dataset_repo.save_manifest(manifest)
        counts = {g: len(s) for g, s in groups.items()}
        status(f'Dataset written to {self.data_dir}: {counts}')
        return {'data_dir': self.data_dir, 'preset': preset, 'counts': counts, 'n_joints': counts['train']}

    @staticmethod
    def project_drr(volume_path: str, out_path: str, axis: str = 'x', normalize: bool = True) -> Dict:
        """Project a stored volume and save the image"""
        repo = MeshRepository()
        volume = repo.load_volume(volume_path)
        image = drr_project(volume, axis, normalize)
        if not out_path.endswith('.npy'):
            out_path = os.path.splitext(out_path)[0] + '.npy'
        repo.save_image(out_path, image)
        return {'image': out_path, 'shape': list(image.shape), 'axis': axis, 'max': float(image.max(initial=0.0))}
