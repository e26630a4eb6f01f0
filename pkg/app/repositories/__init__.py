"""
Repository Layer - File Storage Access
"""
from app.repositories.base_repository import BaseRepository
from app.repositories.mesh_repository import MeshRepository
from app.repositories.model_repository import ModelRepository
from app.repositories.dataset_repository import DatasetRepository

__all__ = [
    'BaseRepository',
    'MeshRepository',
    'ModelRepository',
    'DatasetRepository'
]
