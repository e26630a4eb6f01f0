"""
Evaluation Metrics
Correlations, surface distances, intensity errors, specificity and generality
"""
from typing import Dict, List, Optional, Sequence

import numpy as np
import pandas as pd
from scipy import stats
from scipy.spatial import cKDTree
from tqdm import tqdm

from app.exceptions import DataError, UndefinedCorrelationError
from app.ml import gpm
from app.ml.config import DEFAULT_ITERATIONS, PUBLISHED_MODEL, CORRELATION_PAIRS, PUBLISHED_TRAINING, pair_name
from app.ml.pose import procrustes_align, rotation_angle
from app.ml.predictors.mcmc_predictor import MCMCPredictor
from app.ml.synthetic.rendering import sample_volume
from app.models.fitting import Observation
from app.models.geometry import MultiObjectReference, RigidTransform, TriMesh, Volume3
from app.models.gpm import DmfcGpm, JointInstance
from app.models.synthetic import SyntheticJoint


def pearson(a, b) -> float:
    """Sample Pearson correlation coefficient"""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.shape != b.shape:
        raise DataError('Correlation needs vectors of equal length')
    if a.size < 3:
        raise DataError('Correlation needs at least 3 values')
    if np.ptp(a) == 0 or np.ptp(b) == 0:
        raise UndefinedCorrelationError('Correlation with a constant vector is undefined')
    return float(np.clip(stats.pearsonr(a, b)[0], -1.0, 1.0))


def _vertices(mesh) -> np.ndarray:
    points = mesh.vertices if isinstance(mesh, TriMesh) else np.asarray(mesh, dtype=np.float64).reshape(-1, 3)
    if len(points) == 0:
        raise DataError('Surface distance of an empty mesh')
    return points


def rms_surface_distance(a, b) -> float:
    """Symmetric RMS closest-point distance (mean of the two directed RMS values)"""
    pa, pb = _vertices(a), _vertices(b)
    ab, _ = cKDTree(pb).query(pa)
    ba, _ = cKDTree(pa).query(pb)
    return float(0.5 * (np.sqrt(np.mean(ab ** 2)) + np.sqrt(np.mean(ba ** 2))))


def hausdorff(a, b) -> float:
    """Largest of the two directed max-min vertex distances"""
    pa, pb = _vertices(a), _vertices(b)
    ab, _ = cKDTree(pb).query(pa)
    ba, _ = cKDTree(pa).query(pb)
    return float(max(ab.max(), ba.max()))


def intensity_rms(instance: JointInstance, volume: Volume3, j=None) -> float:
    """RMS of instance intensity minus volume value at the posed points (one object or all)"""
    objects = instance.objects if j is None else [instance.object(j)]
    residuals = np.concatenate([
        o.volume.intensity - sample_volume(volume, o.volume.vertices) for o in objects
    ])
    return float(np.sqrt(np.mean(residuals ** 2)))


def joint_quantities(points: Sequence[np.ndarray], intensities: Sequence[np.ndarray],
                     transforms: Sequence[RigidTransform], landmarks: Sequence[Sequence[int]]) -> Dict[str, float]:
    """Shape (landmark distance), intensity (landmark mean) and motion-plane angles of a joint.

    theta3 is measured relative to object 2.
    """
    if len(points) != 3:
        raise DataError('Joint quantities are defined for three-object joints')
    quantities = {}
    for j, (p, values, marks) in enumerate(zip(points, intensities, landmarks), start=1):
        if len(marks) < 2:
            raise DataError(f'Object {j} needs two landmarks')
        marks = list(marks)
        quantities[f'r{j}'] = float(np.linalg.norm(p[marks[0]] - p[marks[1]]))
        quantities[f'd{j}'] = float(np.mean(values[marks]))
    quantities['theta2'] = rotation_angle(transforms[1])
    quantities['theta3'] = rotation_angle(transforms[1].inverse().compose(transforms[2]))
    return quantities


def instance_quantities(instance: JointInstance, reference: MultiObjectReference) -> Dict[str, float]:
    return joint_quantities(
        [o.volume.vertices for o in instance.objects],
        [o.volume.intensity for o in instance.objects],
        [o.pose for o in instance.objects],
        [o.landmarks for o in reference.objects],
    )


def training_quantities(joint: SyntheticJoint, reference: MultiObjectReference) -> Dict[str, float]:
    """Same extractors on a training joint; poses are its alignments from the reference"""
    transforms = [procrustes_align(ref.points, v.vertices) for ref, v in zip(reference.objects, joint.volumes)]
    return joint_quantities(
        [v.vertices for v in joint.volumes],
        [v.intensity for v in joint.volumes],
        transforms,
        [o.landmarks for o in reference.objects],
    )


def correlation_table(quantities: pd.DataFrame) -> List[float]:
    """|pearson| of every correlation pair"""
    return [abs(pearson(quantities[a], quantities[b])) for a, b in CORRELATION_PAIRS]


def correlation_report(model: DmfcGpm, n_samples: int = 100, seed: Optional[int] = None,
                       training: Optional[Sequence[SyntheticJoint]] = None, progress: bool = False) -> pd.DataFrame:
    """One row per source, one column per pair"""
    if n_samples < 3:
        raise DataError('A correlation report needs at least 3 samples')
    rng = np.random.default_rng(seed)
    rows = []
    for _ in tqdm(range(n_samples), desc='Sampling', disable=not progress, leave=False):
        _, instance = gpm.random_sample(model, rng=rng)
        rows.append(instance_quantities(instance, model.reference))
    columns = [pair_name(p) for p in CORRELATION_PAIRS]
    table = {'model': correlation_table(pd.DataFrame(rows))}
    if training:
        table['training'] = correlation_table(
            pd.DataFrame([training_quantities(j, model.reference) for j in training]))
    table['published_model'] = list(PUBLISHED_MODEL)
    table['published_training'] = list(PUBLISHED_TRAINING)
    return pd.DataFrame.from_dict(table, orient='index', columns=columns)


def specificity(model: DmfcGpm, observations: Sequence[Volume3], n_samples: int,
                seed: Optional[int] = None, progress: bool = False) -> List[float]:
    """For each random sample, intensity RMS to the closest observed volume"""
    if not observations:
        raise DataError('Specificity needs at least one observation')
    rng = np.random.default_rng(seed)
    errors = []
    for _ in tqdm(range(n_samples), desc='Specificity', disable=not progress, leave=False):
        _, instance = gpm.random_sample(model, rng=rng)
        errors.append(min(intensity_rms(instance, v) for v in observations))
    return errors


def generality(model: DmfcGpm, observations: Sequence[Volume3], n_iterations: int = DEFAULT_ITERATIONS,
               seed: int = 0, sigma: Optional[float] = None, progress: bool = False,
               start: str = 'geodesic') -> Dict[str, List[float]]:
    """Per-object intensity RMS of the best fit to every held-out volume"""
    if not observations:
        raise DataError('Generality needs at least one observation')
    errors = {name: [] for name in model.reference.names}
    for k, volume in enumerate(tqdm(observations, desc='Generality', disable=not progress, leave=False)):
        predictor = MCMCPredictor(model, Observation.from_volume(volume, sigma))
        chain = predictor.run_chain(n_iterations, seed + k, start)
        _, coefficients, _ = predictor.best_visited([chain])
        instance = gpm.sample(model, coefficients)
        for name in errors:
            errors[name].append(intensity_rms(instance, volume, name))
    return errors
