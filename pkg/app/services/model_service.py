"""
Model Service
Business logic for building, sampling, marginalizing and conditioning models
"""
import os
from typing import Dict, List, Optional, Sequence

from app.exceptions import DataError
from app.ml import gpm
from app.ml.pipeline import DataLoader, ModelTrainer
from app.ml.pose import rotation_angle
from app.ml.synthetic.rendering import drr_project, render_instance
from app.models.gpm import Coefficients, DmfcGpm, PointObservation
from app.repositories import DatasetRepository, MeshRepository, ModelRepository
from app.utils.helpers import status


class ModelService:
    """Business logic for models"""

    def __init__(self):
        self.model_repo = ModelRepository()
        self.mesh_repo = MeshRepository()

    def load(self, path: str) -> DmfcGpm:
        model = self.model_repo.load(path)
        status(f'Model loaded: {path} ({model.rank} PGs)')
        return model

    def save(self, path: str, model: DmfcGpm) -> Dict:
        self.model_repo.save(path, model)
        return {'model': path, **model.to_dict(), 'variance_explained': gpm.variance_explained(model)[:5]}

    def build(self, data_dir: str, out_path: str, pose_mode: str = 'edr', class_weights=None,
              rank=None, reference_mode: str = 'gpa', permute: bool = False,
              similarity_threshold: Optional[float] = None) -> Dict:
        """Assemble training functions from a dataset and build the model"""
        ts, _ = DataLoader.load_and_prepare(data_dir, pose_mode, reference_mode)
        if permute:
            ts = gpm.permute_poses(ts, similarity_threshold)
            status(f'Pose permutation: {ts.n} training functions', '🔀')
        model = gpm.build(ts, class_weights, rank)
        return {**self.save(out_path, model), 'n_train': ts.n}

    @staticmethod
    def train_all(data_dir: str, out_dir: str, class_weights=None, rank=None) -> Dict:
        _, comparison = ModelTrainer(class_weights, rank).train_all_models(data_dir, out_dir)
        return comparison

    def sample(self, model_path: str, out_dir: str, theta: Optional[Sequence[float]] = None,
               pg: Optional[int] = None, sd: float = 0.0, seed: Optional[int] = None,
               from_joint: Optional[str] = None, render: bool = False, axis: str = 'x') -> Dict:
        """Write one instance; coefficients from --theta, --pg/--sd, a joint projection or the seed"""
        model = self.load(model_path)
        if sum(x is not None for x in (theta, pg, from_joint)) > 1:
            raise DataError('Give at most one of theta, pg or from_joint')
        if theta is not None:
            instance = gpm.sample(model, theta)
        elif pg is not None:
            instance = gpm.pg_sample(model, pg, sd)
        elif from_joint is not None:
            instance = gpm.sample(model, self.project_joint(model, from_joint))
        else:
            _, instance = gpm.random_sample(model, seed)
        coefficients = instance.coefficients

        files = self.mesh_repo.save_instance(out_dir, instance, model.reference)
        result = {
            'out_dir': out_dir,
            'theta': coefficients.theta,
            'poses': {o.name: {'angle_x': rotation_angle(o.pose), 'translation': o.pose.translation}
                      for o in instance.objects},
            'files': files,
        }
        if render:
            volume = render_instance(instance)
            result['volume'] = self.mesh_repo.save_volume(os.path.join(out_dir, 'volume'), volume)
            result['drr'] = self.mesh_repo.save_image(os.path.join(out_dir, f'drr_{axis}.npy'),
                                                      drr_project(volume, axis))
        return result

    @staticmethod
    def project_joint(model: DmfcGpm, joint_dir: str) -> Coefficients:
        """Coefficients of a stored joint projected onto the model"""
        parent, label = os.path.split(os.path.normpath(joint_dir))
        root, group = os.path.split(parent)
        joint = DatasetRepository(root).load_joint(group, label)
        ts = gpm.assemble_training_functions([joint.volumes], model.reference, model.pose_mode)
        return gpm.project(model, ts.fields[0])

    def marginalize(self, model_path: str, out_path: str, objects: Sequence[str] = (),
                    point_ids: Sequence[int] = (), classes: Sequence[str] = ()) -> Dict:
        """Domain marginal (objects and/or point ids), then class marginal"""
        model = self.load(model_path)
        if not (objects or point_ids or classes):
            raise DataError('Nothing to marginalize over: give objects, point ids or classes')
        if objects or point_ids:
            ids = list(point_ids)
            for name in objects:
                ids.extend(model.reference.object_ids(name).tolist())
            model = gpm.marginalize_domain(model, ids)
        if classes:
            model = gpm.marginalize_class(model, classes)
        return self.save(out_path, model)

    @staticmethod
    def parse_observations(records: List[Dict], model: DmfcGpm) -> List[PointObservation]:
        """Observation records: {point_id | object+landmark, channel, value}"""
        observations = []
        for record in records:
            try:
                if 'point_id' in record:
                    point_id = int(record['point_id'])
                else:
                    point_id = int(model.reference.landmark_ids(record['object'])[int(record['landmark'])])
                observations.append(PointObservation(point_id, record['value'], record.get('channel', 'all')))
            except (KeyError, IndexError, TypeError) as e:
                raise DataError(f'Invalid observation record {record}: {e}') from None
        return observations

    def posterior(self, model_path: str, observations_path: str, sigma2: float, out_path: str) -> Dict:
        model = self.load(model_path)
        records = self.model_repo.read_json(observations_path)
        if isinstance(records, dict):
            records = records.get('observations', [])
        observations = self.parse_observations(records, model)
        posterior = gpm.posterior(model, observations, sigma2)
        return {**self.save(out_path, posterior), 'observations': len(observations)}
