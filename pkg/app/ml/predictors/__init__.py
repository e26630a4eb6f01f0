"""
Model Fitting Components
"""
from app.ml.predictors.base_predictor import BasePredictor
from app.ml.predictors.mcmc_predictor import MCMCPredictor, best_of_chains, best_sample

__all__ = [
    'BasePredictor',
    'MCMCPredictor',
    'best_of_chains',
    'best_sample',
]
