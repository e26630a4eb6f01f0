"""
Service Layer - Business Logic
"""
from app.services.dataset_service import DatasetService
from app.services.model_service import ModelService
from app.services.fitting_service import FittingService
from app.services.evaluation_service import EvaluationService

__all__ = [
    'DatasetService',
    'ModelService',
    'FittingService',
    'EvaluationService',
]
