"""
Fitting Service
Business logic for fitting a model to an observed volume or to surface targets
"""
import os
from typing import Dict, Optional

import numpy as np

from app.exceptions import DataError
from app.ml import gpm
from app.ml.config import DEFAULT_ITERATIONS
from app.ml.metrics import intensity_rms
from app.ml.pose import rotation_angle
from app.ml.predictors import MCMCPredictor
from app.models.fitting import Observation
from app.repositories import MeshRepository, ModelRepository
from app.utils.helpers import is_verbose, status


def _mask(record) -> np.ndarray:
    """Either a boolean list or {"n": vertex count, "ids": observed ids}"""
    if isinstance(record, dict):
        try:
            mask = np.zeros(int(record['n']), dtype=bool)
            mask[np.asarray(record['ids'], dtype=np.int64)] = True
        except (KeyError, IndexError, ValueError) as e:
            raise DataError(f'Invalid surface mask record: {e}') from None
        return mask
    return np.asarray(record, dtype=bool)


class FittingService:
    """Business logic for model fitting"""

    def __init__(self):
        self.model_repo = ModelRepository()
        self.mesh_repo = MeshRepository()

    def load_observation(self, path: str, mode: str, sigma: Optional[float] = None,
                         mask_path: Optional[str] = None) -> Observation:
        """Volume file (or a joint directory holding one), or a directory of <object>.ply targets"""
        if mode == 'volume':
            stem = os.path.join(path, 'volume') if os.path.isdir(path) else path
            return Observation.from_volume(self.mesh_repo.load_volume(stem), sigma)
        if mode != 'surface':
            raise DataError(f'Unknown observation mode {mode!r}')
        if not os.path.isdir(path):
            raise DataError(f'Surface targets must be a directory of PLY files: {path}')

        surfaces = {}
        for filename in sorted(os.listdir(path)):
            name, ext = os.path.splitext(filename)
            if ext != '.ply' or name.endswith('_surface'):
                continue
            surface, volume, _ = self.mesh_repo.load_object(os.path.join(path, filename))
            surfaces[name] = surface.vertices if surface.n_vertices else volume.vertices
        masks = None
        if mask_path:
            masks = {name: _mask(v) for name, v in self.mesh_repo.read_json(mask_path).items()}
        return Observation('surface', 1.0 if sigma is None else sigma, surfaces=surfaces, masks=masks)

    def fit(self, model_path: str, observation_path: str, out_dir: str, mode: str = 'volume',
            sigma: Optional[float] = None, iterations: int = DEFAULT_ITERATIONS, seed: int = 0,
            chains: int = 1, n_jobs: int = 1, mask_path: Optional[str] = None,
            start: str = 'geodesic') -> Dict:
        """Run the chains, keep the best sample and write its meshes and a report"""
        model = self.model_repo.load(model_path)
        observation = self.load_observation(observation_path, mode, sigma, mask_path)
        predictor = MCMCPredictor(model, observation)
        status(f'Fitting {chains} chain(s) x {iterations} iterations (sigma={observation.sigma:.4g})', '🎯')
        runs = predictor.run_chains(chains, iterations, seed, n_jobs, progress=is_verbose(), theta0=start)

        winner, coefficients, log_prob = predictor.best_visited(runs)
        if winner is None:
            status('No accepted state beats the chain start; reporting the start state', '⚠️')
        instance = gpm.sample(model, coefficients)

        files = self.mesh_repo.save_instance(out_dir, instance, model.reference)
        report = {
            'mode': mode,
            'sigma': observation.sigma,
            'iterations': iterations,
            'start': start,
            'best_chain': winner,
            'best_theta': coefficients.theta,
            'log_prob': log_prob,
            'log_likelihood': predictor.global_log_likelihood(coefficients, instance),
            'chains': [c.to_dict() for c in runs],
            'poses': {o.name: {'angle_x': rotation_angle(o.pose), **o.pose.to_dict()} for o in instance.objects},
        }
        if mode == 'volume':
            report['intensity_rms'] = {o.name: intensity_rms(instance, observation.volume, o.name)
                                       for o in instance.objects}
        self.mesh_repo.write_json(os.path.join(out_dir, 'fit_report.json'), report)
        status(f'Best log-probability {log_prob:.3f} (chain {winner})')
        return {**report, 'out_dir': out_dir, 'files': files}
