"""
MCMC Predictor
Metropolis-Hastings fitting with a cascade of per-object and joint acceptance filters
"""
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from tqdm import tqdm

from app.exceptions import DataError
from app.ml import gpm
from app.ml.config import DEFAULT_ITERATIONS, START_MODES, START_OFFSETS
from app.ml.predictors.base_predictor import BasePredictor
from app.models.fitting import Chain, Observation, Proposal
from app.models.gpm import Coefficients, DmfcGpm, JointInstance

GLOBAL_FILTER = 'global'


class _State:
    """Current chain state with its cached per-object log-likelihoods"""

    def __init__(self, theta: np.ndarray, locals_: Dict[int, float], log_prior: float):
        self.theta = theta
        self.locals = locals_
        self.log_prior = log_prior

    @property
    def log_likelihood(self) -> float:
        return float(sum(self.locals.values()))


class MCMCPredictor(BasePredictor):
    """Random-walk Metropolis sampler over the model coefficients"""

    def __init__(self, model: DmfcGpm, observation: Observation, proposal: Optional[Proposal] = None,
                 filters: Optional[Sequence[str]] = None):
        super().__init__(model, observation)
        self.proposal = proposal if proposal is not None else Proposal.for_eigenvalues(model.eigenvalues)
        if filters is None:
            filters = tuple(self.object_names) + (GLOBAL_FILTER,)
        unknown = set(filters) - set(self.object_names) - {GLOBAL_FILTER}
        if unknown or not filters:
            raise DataError(f'Unknown acceptance filters {sorted(unknown)}')
        self.filters = tuple(filters)

    def _state(self, theta: np.ndarray) -> _State:
        instance = self.instance(theta)
        locals_ = {j: self.local_log_likelihood(theta, j, instance) for j in range(len(self.object_names))}
        return _State(theta, locals_, self.log_prior(theta))

    def metropolis_step(self, state: _State, rng: np.random.Generator) -> Tuple[_State, Dict[str, bool]]:
        """One proposal through the filter cascade; the proposal must pass every filter"""
        theta = self.proposal.draw(state.theta, rng)
        candidate = self._state(theta)
        delta_prior = candidate.log_prior - state.log_prior
        decisions = {}
        for name in self.filters:
            if name == GLOBAL_FILTER:
                delta = candidate.log_likelihood - state.log_likelihood
            else:
                j = self.object_names.index(name)
                delta = candidate.locals[j] - state.locals[j]
            log_ratio = delta + delta_prior
            accepted = bool(log_ratio >= 0 or np.log(rng.random()) < log_ratio)
            decisions[name] = accepted
            if not accepted:
                return state, decisions
        return candidate, decisions

    def geodesic_start(self, offsets: Sequence[float] = START_OFFSETS) -> Coefficients:
        """Highest-posterior point among the mean and offsets along every principal geodesic"""
        best_theta = np.zeros(self.model.rank)
        best = self.log_posterior(best_theta)
        for m in range(self.model.rank):
            for offset in offsets:
                theta = np.zeros(self.model.rank)
                theta[m] = offset
                value = self.log_posterior(theta)
                if value > best:
                    best_theta, best = theta, value
        return Coefficients(best_theta)

    def _start(self, theta0) -> np.ndarray:
        if theta0 is None or (isinstance(theta0, str) and theta0 == 'mean'):
            return np.zeros(self.model.rank)
        if isinstance(theta0, str):
            if theta0 not in START_MODES:
                raise DataError(f'Unknown chain start {theta0!r}')
            return self.geodesic_start().theta
        start = np.ravel(theta0.theta if isinstance(theta0, Coefficients) else theta0).astype(np.float64)
        if start.shape != (self.model.rank,):
            raise DataError(f'Initial state needs {self.model.rank} coefficients')
        return start

    def run_chain(self, n_iterations: int = DEFAULT_ITERATIONS, seed: Optional[int] = None,
                  theta0=None, progress: bool = False) -> Chain:
        """Chain of accepted states, deterministic given the seed.

        theta0 is a coefficient vector, 'mean' (the default, theta = 0) or 'geodesic'.
        """
        if n_iterations < 1:
            raise DataError('A chain needs at least one iteration')
        rng = np.random.default_rng(seed)
        state = self._state(self._start(theta0))
        chain = Chain(seed=seed, start=state.theta.copy())
        for name in self.filters:
            chain.accept_counts[name] = 0
            chain.reject_counts[name] = 0

        for i in tqdm(range(n_iterations), desc='MCMC', disable=not progress, leave=False):
            state_before = state
            state, decisions = self.metropolis_step(state, rng)
            chain.iterations += 1
            for name, accepted in decisions.items():
                counts = chain.accept_counts if accepted else chain.reject_counts
                counts[name] += 1
            if state is not state_before:
                chain.record(state.theta, state.log_likelihood + state.log_prior, state.log_likelihood, i)
        return chain

    def best_sample(self, chain: Chain) -> Tuple[Coefficients, JointInstance]:
        """Highest-probability state, earliest on ties"""
        return best_sample(self.model, chain)

    def best_visited(self, chains: Sequence[Chain]) -> Tuple[Optional[int], Coefficients, float]:
        """(chain index, coefficients, log-probability) of the best state, the first chain start included.

        The index is None when no accepted state beats the start.
        """
        if not chains or chains[0].start is None:
            raise DataError('No chain start to compare with')
        coefficients = Coefficients(chains[0].start)
        log_prob = self.log_posterior(coefficients)
        if not any(c.n_accepted for c in chains):
            return None, coefficients, log_prob
        k, best, _ = best_of_chains(self.model, chains)
        if max(chains[k].log_probs) > log_prob:
            return k, best, max(chains[k].log_probs)
        return None, coefficients, log_prob

    def run_chains(self, n_chains: int = 1, n_iterations: int = DEFAULT_ITERATIONS, seed: int = 0,
                   n_jobs: int = 1, progress: bool = False, theta0=None) -> List[Chain]:
        """Independent chains with seeds seed, seed+1, ...; run concurrently with joblib"""
        if n_chains < 1:
            raise DataError('At least one chain is required')
        start = self._start(theta0)
        if n_chains == 1 or n_jobs == 1:
            return [self.run_chain(n_iterations, seed + k, start, progress) for k in range(n_chains)]
        return Parallel(n_jobs=n_jobs)(
            delayed(self.run_chain)(n_iterations, seed + k, start) for k in range(n_chains)
        )


def best_sample(model: DmfcGpm, chain: Chain) -> Tuple[Coefficients, JointInstance]:
    """argmax over recorded log-probabilities of one chain"""
    if chain.n_accepted == 0:
        raise DataError('Cannot take the best sample of an empty chain')
    k = int(np.argmax(chain.log_probs))
    coefficients = Coefficients(chain.states[k])
    return coefficients, gpm.sample(model, coefficients)


def best_of_chains(model: DmfcGpm, chains: Sequence[Chain]) -> Tuple[int, Coefficients, JointInstance]:
    """Merge chains by global argmax; returns the winning chain index too"""
    candidates = [(max(c.log_probs), -k) for k, c in enumerate(chains) if c.n_accepted]
    if not candidates:
        raise DataError('Every chain is empty')
    _, neg_k = max(candidates)
    coefficients, instance = best_sample(model, chains[-neg_k])
    return -neg_k, coefficients, instance
