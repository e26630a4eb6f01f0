"""
Model Building Pipeline
"""
from app.ml.pipeline.data_loader import DataLoader
from app.ml.pipeline.model_trainer import ModelTrainer

__all__ = ['DataLoader', 'ModelTrainer']
