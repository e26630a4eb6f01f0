"""
Base Predictor
Scores model instances against an observation with per-object and joint Gaussian likelihoods
"""
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.spatial import cKDTree

from app.exceptions import DataError
from app.ml import gpm
from app.ml.synthetic.rendering import sample_volume
from app.models.fitting import Observation
from app.models.gpm import Coefficients, DmfcGpm, JointInstance

LOG_2PI = float(np.log(2.0 * np.pi))


def gaussian_log_density(residuals: np.ndarray, sigma: float) -> float:
    """Sum of independent N(0, sigma^2) log-densities"""
    residuals = np.asarray(residuals, dtype=np.float64)
    return float(-0.5 * np.sum((residuals / sigma) ** 2) - 0.5 * residuals.size * (LOG_2PI + 2.0 * np.log(sigma)))


def standard_normal_log_prior(theta: np.ndarray) -> float:
    """log N(theta | 0, I)"""
    theta = np.asarray(theta, dtype=np.float64)
    return float(-0.5 * theta @ theta - 0.5 * theta.size * LOG_2PI)


class BasePredictor:
    """Likelihood evaluation of coefficient vectors against one observation"""

    def __init__(self, model: DmfcGpm, observation: Observation):
        self.model = model
        self.observation = observation
        self._targets: Dict[str, cKDTree] = {}
        if observation.mode == 'surface':
            unknown = set(observation.surfaces) - set(model.reference.names)
            if unknown:
                raise DataError(f'Surface targets for unknown objects {sorted(unknown)}')
            self._targets = {name: cKDTree(points) for name, points in observation.surfaces.items()}

    @property
    def object_names(self) -> List[str]:
        return self.model.reference.names

    def instance(self, theta) -> JointInstance:
        return gpm.sample(self.model, theta)

    def residuals(self, instance: JointInstance, j) -> np.ndarray:
        """Residuals of object j: intensity differences or closest-point distances"""
        obj = instance.object(j)
        if self.observation.mode == 'volume':
            observed = sample_volume(self.observation.volume, obj.volume.vertices)
            return obj.volume.intensity - observed
        if obj.name not in self._targets:
            return np.zeros(0)
        points = obj.surface.vertices
        mask = (self.observation.masks or {}).get(obj.name)
        if mask is not None:
            if mask.shape != (len(points),):
                raise DataError(f'{obj.name}: mask must cover every surface vertex')
            points = points[mask]
        if len(points) == 0:
            raise DataError(f'{obj.name}: mask leaves no observed surface points')
        forward, _ = self._targets[obj.name].query(points)
        backward, _ = cKDTree(points).query(self.observation.surfaces[obj.name])
        return np.concatenate([forward, backward])

    def local_log_likelihood(self, theta, j, instance: Optional[JointInstance] = None) -> float:
        """Log-likelihood of object j"""
        instance = instance if instance is not None else self.instance(theta)
        return gaussian_log_density(self.residuals(instance, j), self.observation.sigma)

    def local_log_likelihoods(self, theta, instance: Optional[JointInstance] = None) -> List[float]:
        instance = instance if instance is not None else self.instance(theta)
        return [self.local_log_likelihood(theta, j, instance) for j in range(self.model.reference.n_objects)]

    def global_log_likelihood(self, theta, instance: Optional[JointInstance] = None) -> float:
        """Log of the product of the per-object likelihoods"""
        return float(sum(self.local_log_likelihoods(theta, instance)))

    def log_prior(self, theta) -> float:
        values = theta.theta if isinstance(theta, Coefficients) else theta
        return standard_normal_log_prior(values)

    def log_posterior(self, theta, instance: Optional[JointInstance] = None) -> float:
        """Unnormalized log posterior"""
        return self.global_log_likelihood(theta, instance) + self.log_prior(theta)

    def score(self, thetas: Sequence) -> List[float]:
        return [self.log_posterior(t) for t in thetas]
