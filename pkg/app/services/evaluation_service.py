"""
Evaluation Service
Correlation reports, specificity and generality of built models
"""
import os
from typing import Dict, Optional

import numpy as np
import pandas as pd

from app.ml import metrics
from app.ml.config import DEFAULT_ITERATIONS
from app.ml.pipeline import DataLoader
from app.repositories import ModelRepository
from app.utils.helpers import is_verbose, status


def _summary(values) -> Dict:
    values = np.asarray(values, dtype=np.float64)
    return {'mean': float(values.mean()), 'std': float(values.std()), 'n': int(values.size)}


class EvaluationService:
    """Business logic for model evaluation"""

    def __init__(self):
        self.model_repo = ModelRepository()

    def correlations(self, model_path: str, out_dir: str, n_samples: int = 100, seed: int = 0,
                     data_dir: Optional[str] = None) -> Dict:
        """Pairwise |r| over random model samples, beside the training set when a dataset is given"""
        model = self.model_repo.load(model_path)
        training = DataLoader.load_joints(data_dir)[1] if data_dir else None
        status(f'Sampling {n_samples} instances for the correlation report...', '📊')
        table = metrics.correlation_report(model, n_samples, seed, training, progress=is_verbose())

        csv_path = self.model_repo.path(os.path.join(out_dir, 'correlations.csv'))
        os.makedirs(os.path.dirname(csv_path), exist_ok=True)
        table.to_csv(csv_path, float_format='%.6f', index_label='source')
        records = {source: row.to_dict() for source, row in table.iterrows()}
        json_path = self.model_repo.write_json(os.path.join(out_dir, 'correlations.json'),
                                               {'n_samples': n_samples, 'seed': seed, 'table': records})
        status(f'Correlation report written to {out_dir}')
        return {'table': records, 'csv': csv_path, 'json': json_path}

    def specgen(self, model_path: str, data_dir: str, out_dir: str, n_samples: int = 100,
                iterations: int = DEFAULT_ITERATIONS, seed: int = 0, sigma: Optional[float] = None) -> Dict:
        """Specificity against training volumes, generality on held-out volumes"""
        model = self.model_repo.load(model_path)
        _, train_volumes = DataLoader.load_volumes(data_dir, 'train')
        held_labels, held_volumes = DataLoader.load_volumes(data_dir, 'held_out')

        status(f'Specificity over {n_samples} samples...', '📏')
        spec = metrics.specificity(model, train_volumes, n_samples, seed, progress=is_verbose())
        status(f'Generality over {len(held_volumes)} held-out joints...', '📏')
        gen = metrics.generality(model, held_volumes, iterations, seed, sigma, progress=is_verbose())

        series = pd.DataFrame({'sample': np.arange(len(spec)), 'specificity': spec})
        spec_csv = self.model_repo.path(os.path.join(out_dir, 'specificity.csv'))
        os.makedirs(os.path.dirname(spec_csv), exist_ok=True)
        series.to_csv(spec_csv, index=False, float_format='%.6f')
        gen_csv = self.model_repo.path(os.path.join(out_dir, 'generality.csv'))
        pd.DataFrame({'joint': held_labels, **gen}).to_csv(gen_csv, index=False, float_format='%.6f')

        result = {
            'specificity': _summary(spec),
            'generality': {name: _summary(values) for name, values in gen.items()},
            'iterations': iterations,
            'seed': seed,
        }
        json_path = self.model_repo.write_json(os.path.join(out_dir, 'specgen.json'), result)
        status(f'Specificity {result["specificity"]["mean"]:.4f}; results in {out_dir}')
        return {**result, 'json': json_path, 'csv': [spec_csv, gen_csv]}
