"""
Fitting Entities
Proposal generator, observations and Metropolis chains
"""
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from app.exceptions import DataError
from app.ml.config import MAX_STEP_RATIO, PROPOSAL_SCALES, PROPOSAL_WEIGHTS
from app.models.geometry import Volume3, frozen_array

OBSERVATION_MODES = ('volume', 'surface')


@dataclass(frozen=True, eq=False)
class Proposal:
    """Symmetric Gaussian random walk, optionally a mixture of isotropic scales"""
    scales: Tuple[float, ...] = PROPOSAL_SCALES
    weights: Tuple[float, ...] = PROPOSAL_WEIGHTS
    diagonal: Optional[np.ndarray] = None

    def __post_init__(self):
        scales = tuple(float(s) for s in self.scales)
        weights = tuple(float(w) for w in self.weights)
        if not scales or min(scales) <= 0:
            raise DataError('Proposal scales must be positive')
        if len(weights) != len(scales) or min(weights) < 0 or abs(sum(weights) - 1.0) > 1e-9:
            raise DataError('Proposal mixture weights must be non-negative and sum to 1')
        object.__setattr__(self, 'scales', scales)
        object.__setattr__(self, 'weights', weights)
        if self.diagonal is not None:
            diagonal = frozen_array(np.ravel(self.diagonal))
            if diagonal.min() <= 0:
                raise DataError('Per-coefficient proposal scales must be positive')
            object.__setattr__(self, 'diagonal', diagonal)

    @classmethod
    def for_eigenvalues(cls, eigenvalues, scales: Tuple[float, ...] = PROPOSAL_SCALES,
                        weights: Tuple[float, ...] = PROPOSAL_WEIGHTS,
                        max_ratio: float = MAX_STEP_RATIO) -> 'Proposal':
        """Per-coefficient steps proportional to sqrt(lambda_1 / lambda_m), capped at max_ratio.

        Every mode then moves the instance by a similar amount per step. The steps are
        normalized to unit RMS, so the total step length matches the isotropic walk.
        """
        eigenvalues = np.asarray(eigenvalues, dtype=np.float64)
        if eigenvalues.size == 0 or eigenvalues[0] <= 0:
            return cls(scales, weights)
        ratio = np.sqrt(eigenvalues[0] / np.maximum(eigenvalues, eigenvalues[0] / max_ratio ** 2))
        return cls(scales, weights, ratio / np.sqrt(np.mean(ratio ** 2)))

    def draw(self, theta: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """theta' ~ N(theta, s^2 diag(Sigma)) with s drawn from the mixture"""
        scale = self.scales[rng.choice(len(self.scales), p=self.weights)]
        step = rng.standard_normal(theta.shape) * scale
        if self.diagonal is not None:
            if self.diagonal.shape != theta.shape:
                raise DataError(f'Proposal has {self.diagonal.size} per-coefficient scales, '
                                f'state has {theta.size} coefficients')
            step = step * self.diagonal
        return theta + step

    def to_dict(self):
        out = {'scales': list(self.scales), 'weights': list(self.weights)}
        if self.diagonal is not None:
            out['diagonal'] = self.diagonal.tolist()
        return out


@dataclass(frozen=True, eq=False)
class Observation:
    """Fitting target: an intensity volume or per-object surface point sets"""
    mode: str
    sigma: float
    volume: Optional[Volume3] = None
    surfaces: Optional[Dict[str, np.ndarray]] = None
    masks: Optional[Dict[str, np.ndarray]] = None

    def __post_init__(self):
        if self.mode not in OBSERVATION_MODES:
            raise DataError(f'Unknown observation mode {self.mode!r}')
        if not np.isfinite(self.sigma) or self.sigma <= 0:
            raise DataError('Observation noise sigma must be positive')
        if self.mode == 'volume' and self.volume is None:
            raise DataError('Volume observation needs a volume')
        if self.mode == 'surface' and not self.surfaces:
            raise DataError('Surface observation needs target point sets')
        if self.surfaces:
            object.__setattr__(self, 'surfaces',
                               {k: frozen_array(v, shape_tail=(3,)) for k, v in self.surfaces.items()})
        if self.masks:
            object.__setattr__(self, 'masks',
                               {k: frozen_array(v, dtype=bool) for k, v in self.masks.items()})

    @classmethod
    def from_volume(cls, volume: Volume3, sigma: Optional[float] = None, fraction: float = 0.1) -> 'Observation':
        """Volume target; default sigma is a fraction of the observed dynamic range"""
        if sigma is None:
            value_range = float(np.ptp(volume.voxels))
            sigma = fraction * value_range if value_range > 0 else 1.0
        return cls('volume', float(sigma), volume=volume)


@dataclass
class Chain:
    """Accepted states of a Metropolis chain"""
    states: List[np.ndarray] = field(default_factory=list)
    log_probs: List[float] = field(default_factory=list)
    log_likelihoods: List[float] = field(default_factory=list)
    accepted_at: List[int] = field(default_factory=list)
    accept_counts: Dict[str, int] = field(default_factory=dict)
    reject_counts: Dict[str, int] = field(default_factory=dict)
    iterations: int = 0
    seed: Optional[int] = None
    start: Optional[np.ndarray] = None

    def record(self, theta: np.ndarray, log_prob: float, log_likelihood: float, iteration: Optional[int] = None):
        self.states.append(np.array(theta, copy=True))
        self.log_probs.append(float(log_prob))
        self.log_likelihoods.append(float(log_likelihood))
        self.accepted_at.append(self.iterations if iteration is None else int(iteration))

    @property
    def n_accepted(self) -> int:
        return len(self.states)

    def path(self, start=None) -> np.ndarray:
        """State after every iteration, rejections repeating the current state"""
        start = np.ravel(np.asarray(self.start if start is None else start, dtype=np.float64))
        out = np.empty((self.iterations, start.size))
        current, k = start, 0
        for i in range(self.iterations):
            while k < len(self.accepted_at) and self.accepted_at[k] <= i:
                current = self.states[k]
                k += 1
            out[i] = current
        return out

    def acceptance_rates(self) -> Dict[str, float]:
        rates = {}
        for name in set(self.accept_counts) | set(self.reject_counts):
            seen = self.accept_counts.get(name, 0) + self.reject_counts.get(name, 0)
            rates[name] = self.accept_counts.get(name, 0) / seen if seen else 0.0
        return rates

    def to_dict(self):
        return {
            'seed': self.seed,
            'iterations': self.iterations,
            'accepted': self.n_accepted,
            'acceptance_rates': self.acceptance_rates(),
            'best_log_prob': max(self.log_probs) if self.log_probs else None,
        }
