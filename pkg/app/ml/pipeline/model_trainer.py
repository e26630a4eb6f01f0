"""
Model Trainer
Build models under each pose representation and compare how compactly they encode the motion
"""
import os
from typing import Dict, Optional, Sequence

from app.ml import gpm
from app.ml.config import POSE_MODES
from app.ml.pipeline.data_loader import DataLoader
from app.models.gpm import DmfcGpm
from app.repositories.model_repository import ModelRepository
from app.utils.helpers import status


class ModelTrainer:
    """Train and compare EDR, SR and PDM models on one dataset"""

    def __init__(self, class_weights=None, rank=None, reference_mode: str = 'gpa'):
        self.class_weights = class_weights
        self.rank = rank
        self.reference_mode = reference_mode
        self.models: Dict[str, DmfcGpm] = {}
        self.results: Dict[str, Dict] = {}

    def train(self, data_dir: str, pose_mode: str) -> DmfcGpm:
        """Build one model"""
        status(f'Building {pose_mode.upper()} model...', '🔧')
        ts, _ = DataLoader.load_and_prepare(data_dir, pose_mode, self.reference_mode)
        model = gpm.build(ts, self.class_weights, self.rank)
        self.models[pose_mode] = model
        status(f'{pose_mode.upper()} model: rank {model.rank}')
        return model

    def evaluate_model(self, model: DmfcGpm, pose_mode: str) -> Dict:
        """Variance fractions of the joint model and of its pose-class marginal"""
        fractions = gpm.variance_explained(model)
        pose_fractions = gpm.variance_explained(gpm.marginalize_class(model, ['pose']))
        result = {
            'pose_mode': pose_mode,
            'rank': model.rank,
            'variance_explained': fractions[:5],
            'pose_first_pg': pose_fractions[0] if pose_fractions else 0.0,
        }
        self.results[pose_mode] = result
        status(f'{pose_mode.upper()}: first PG {fractions[0]:.3f}, pose first PG {result["pose_first_pg"]:.3f}', '📊')
        return result

    def train_all_models(self, data_dir: str, out_dir: str, pose_modes: Sequence[str] = POSE_MODES,
                         repo: Optional[ModelRepository] = None):
        """Train every variant, save them and write model_comparison.json"""
        status('TRAINING MODELS', '🚀')
        repo = repo or ModelRepository(out_dir)
        for mode in pose_modes:
            model = self.train(data_dir, mode)
            self.evaluate_model(model, mode)
            repo.save(f'model_{mode}.dmfc', model)

        # The most compact motion encoding becomes the current model
        best_mode = max(self.results, key=lambda k: self.results[k]['pose_first_pg'])
        repo.save('model.dmfc', self.models[best_mode])
        comparison = {'best': best_mode, 'models': self.results}
        repo.write_json('model_comparison.json', comparison)
        status(f'BEST MODEL: {best_mode.upper()} saved to {os.path.join(out_dir, "model.dmfc")}')
        return self.models[best_mode], comparison
