"""
Shared Latent-Space Model
Training-function assembly, low-rank GP building, sampling, marginalization, conditioning
and pose permutation
"""
from typing import Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import cho_factor, cho_solve, eigh, svd

from app.exceptions import CorrespondenceError, DataError, NumericalError
from app.ml.config import AUTO_RANK_FRACTION, FEATURE_CLASSES, RANK_TOLERANCE, VERSION
from app.ml.geometry import as_points, compose_fields
from app.ml.pose import decode_pose, encode_pose, procrustes_align
from app.models.geometry import (
    FeatureField,
    MultiObjectReference,
    PoseField,
    TetMesh,
    class_mask,
    class_scale_vector,
    vector_rows,
)
from app.models.gpm import (
    Coefficients,
    DmfcGpm,
    InstanceObject,
    JointInstance,
    PointObservation,
    TrainingSet,
)


def assemble_training_functions(raw: Sequence[Sequence], reference: MultiObjectReference,
                                pose_mode: str = 'edr', labels: Sequence[str] = ()) -> TrainingSet:
    """Shape, pose and intensity fields of every training joint.

    raw holds, per joint, one posed TetMesh (or point array) per reference object,
    in correspondence with the reference.
    """
    fields = []
    for i, joint in enumerate(raw):
        if len(joint) != reference.n_objects:
            raise CorrespondenceError(f'Joint {i}: expected {reference.n_objects} objects, got {len(joint)}')
        shape, pose, intensity = [], [], []
        for j, (obj, ref_obj) in enumerate(zip(joint, reference.objects)):
            points = as_points(obj)
            if points.shape != ref_obj.points.shape:
                raise CorrespondenceError(
                    f'Joint {i}, {ref_obj.name}: {len(points)} points, reference has {ref_obj.n_points}')
            h = procrustes_align(points, ref_obj.points)
            aligned = h.apply(points)
            shape.append(aligned - ref_obj.points)
            pose.append(encode_pose(pose_mode, h.inverse(), ref_obj.points, aligned, points, j).values)
            values = obj.intensity if isinstance(obj, TetMesh) else np.zeros(len(points))
            intensity.append(values - ref_obj.volume.intensity)
        fields.append(FeatureField(reference, np.concatenate(shape), np.concatenate(pose),
                                   np.concatenate(intensity)))
    return TrainingSet(reference, tuple(fields), pose_mode, tuple(labels))


def default_class_weights(ts: TrainingSet) -> Tuple[float, float, float]:
    """(1, 1, w_I) with w_I equalizing intensity and displacement RMS variation"""
    data = ts.data_matrix()
    deviation = data - data.mean(axis=0)
    n = ts.reference.n_points
    displacement = deviation[:, :6 * n].reshape(ts.n, 2 * n, 3)
    rms_displacement = float(np.sqrt(np.mean(np.sum(displacement ** 2, axis=2))))
    rms_intensity = float(np.sqrt(np.mean(deviation[:, 6 * n:] ** 2)))
    if rms_intensity <= 0 or rms_displacement <= 0:
        return 1.0, 1.0, 1.0
    return 1.0, 1.0, rms_displacement / rms_intensity


def _sign_convention(rows: np.ndarray) -> np.ndarray:
    """Flip each row so that its largest-magnitude component is positive"""
    if rows.size == 0:
        return rows
    pivots = rows[np.arange(len(rows)), np.abs(rows).argmax(axis=1)]
    return rows * np.where(pivots < 0, -1.0, 1.0)[:, None]


def _rediagonalize(weighted_factor: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Eigenpairs (lambda, orthonormal rows) of C = Z^T Z from a factor Z"""
    if weighted_factor.size == 0 or not np.any(weighted_factor):
        return np.zeros(0), np.zeros((0, weighted_factor.shape[1]))
    _, s, vt = svd(weighted_factor, full_matrices=False)
    keep = s > RANK_TOLERANCE * s[0]
    return s[keep] ** 2, _sign_convention(vt[keep])


def _with_eigenpairs(model: DmfcGpm, reference: MultiObjectReference, mean_vector: np.ndarray,
                     eigenvalues: np.ndarray, weighted_rows: np.ndarray, **metadata) -> DmfcGpm:
    scale = class_scale_vector(reference.n_points, model.class_weights)
    return DmfcGpm(
        reference=reference,
        mean=FeatureField.from_vector(reference, mean_vector),
        eigenvalues=eigenvalues,
        basis=weighted_rows / scale,
        class_weights=model.class_weights,
        pose_mode=model.pose_mode,
        metadata={**model.metadata, **metadata},
    )


def build(ts: TrainingSet, class_weights: Union[None, str, Sequence[float]] = None,
          rank: Union[None, int, str] = None) -> DmfcGpm:
    """Mean and eigenpairs of the sample kernel through a thin SVD of the centered data"""
    if ts.n < 2:
        raise DataError('At least two training functions are needed to build a model')
    if class_weights is None or class_weights == 'auto':
        weights = default_class_weights(ts)
    else:
        weights = tuple(float(w) for w in class_weights)
        if len(weights) != 3 or not all(np.isfinite(weights)) or min(weights) <= 0:
            raise DataError('Class weights must be three positive scale factors')

    data = ts.data_matrix()
    mean_vector = data.mean(axis=0)
    scale = class_scale_vector(ts.reference.n_points, weights)
    weighted = (data - mean_vector) * scale
    total_variance = float(np.sum(weighted ** 2) / (ts.n - 1))
    if total_variance <= 0:
        raise NumericalError('Training set has zero total variance')

    _, s, vt = svd(weighted, full_matrices=False)
    eigenvalues = s ** 2 / (ts.n - 1)
    available = int(min(ts.n - 1, np.count_nonzero(s > RANK_TOLERANCE * s[0])))
    if rank is None:
        m = available
    elif rank == 'auto':
        cumulative = np.cumsum(eigenvalues[:available]) / total_variance
        m = int(min(available, np.searchsorted(cumulative, AUTO_RANK_FRACTION - 1e-12) + 1))
    else:
        if int(rank) < 1:
            raise DataError('Model rank must be at least 1')
        m = min(int(rank), available)

    basis = _sign_convention(vt[:m]) / scale
    return DmfcGpm(
        reference=ts.reference,
        mean=FeatureField.from_vector(ts.reference, mean_vector),
        eigenvalues=eigenvalues[:m],
        basis=basis,
        class_weights=weights,
        pose_mode=ts.pose_mode,
        metadata={'version': VERSION, 'n_train': ts.n, 'total_variance': total_variance},
    )


def _coefficient_vector(model: DmfcGpm, theta) -> np.ndarray:
    values = theta.theta if isinstance(theta, Coefficients) else np.ravel(np.asarray(theta, dtype=np.float64))
    if values.size > model.rank:
        raise DataError(f'Got {values.size} coefficients for a rank-{model.rank} model')
    if not np.all(np.isfinite(values)):
        raise DataError('Coefficients must be finite')
    out = np.zeros(model.rank)
    out[:values.size] = values
    return out


def field_at(model: DmfcGpm, theta) -> FeatureField:
    """f_theta = mean + sum_m theta_m sqrt(lambda_m) Phi_m"""
    coefficients = _coefficient_vector(model, theta)
    vector = model.mean.to_vector() + (coefficients * np.sqrt(model.eigenvalues)) @ model.basis
    return FeatureField.from_vector(model.reference, vector)


def instantiate(model: DmfcGpm, field: FeatureField, coefficients: Optional[Coefficients] = None) -> JointInstance:
    """Posed meshes and intensities of a feature field"""
    reference = model.reference
    shape_points = reference.points + field.shape
    poses, posed = [], []
    for j, ref_obj in enumerate(reference.objects):
        s = reference.slice(j)
        transform, points = decode_pose(model.pose_mode, PoseField(field.pose[s], j),
                                        ref_obj.points, shape_points[s])
        poses.append(transform)
        posed.append(points)
    if model.pose_mode == 'pdm':
        all_posed = np.concatenate(posed)
    else:
        all_posed = compose_fields(reference, field.shape, poses)
    intensity = reference.intensity + field.intensity

    objects = []
    for j, ref_obj in enumerate(reference.objects):
        s = reference.slice(j)
        surface, volume = ref_obj.posed(all_posed[s], intensity[s])
        objects.append(InstanceObject(ref_obj.name, surface, volume, poses[j],
                                      field.shape[s], field.pose[s], field.intensity[s]))
    if coefficients is None:
        coefficients = Coefficients.zeros(model.rank)
    return JointInstance(coefficients, field, tuple(objects))


def sample(model: DmfcGpm, theta) -> JointInstance:
    """Joint instance for a coefficient vector (missing trailing coefficients are zero)"""
    coefficients = Coefficients(_coefficient_vector(model, theta))
    return instantiate(model, field_at(model, coefficients), coefficients)


def random_sample(model: DmfcGpm, seed: Optional[int] = None,
                  rng: Optional[np.random.Generator] = None) -> Tuple[Coefficients, JointInstance]:
    """theta ~ N(0, I) from a seeded generator"""
    rng = rng if rng is not None else np.random.default_rng(seed)
    coefficients = Coefficients(rng.standard_normal(model.rank))
    return coefficients, sample(model, coefficients)


def pg_sample(model: DmfcGpm, component: int, sd: float) -> JointInstance:
    """Instance at sd standard deviations along one principal geodesic"""
    if not 0 <= component < model.rank:
        raise DataError(f'Component {component} out of range for rank {model.rank}')
    theta = np.zeros(model.rank)
    theta[component] = sd
    return sample(model, theta)


def project(model: DmfcGpm, field: FeatureField) -> Coefficients:
    """Coefficients of the orthogonal projection of a field onto the model span"""
    if field.n_points != model.n_points:
        raise CorrespondenceError('Field does not match the model domain')
    scale = model.scale_vector()
    deviation = (field.to_vector() - model.mean.to_vector()) * scale
    projected = model.weighted_basis() @ deviation
    root = np.sqrt(model.eigenvalues)
    theta = np.divide(projected, root, out=np.zeros_like(projected), where=root > 0)
    return Coefficients(theta)


def kernel(model: DmfcGpm, x: int, y: int) -> np.ndarray:
    """7 x 7 low-rank covariance between two domain points"""
    rows_x = vector_rows(model.n_points, [x])
    rows_y = vector_rows(model.n_points, [y])
    scaled = model.scaled_basis()
    return scaled[:, rows_x].T @ scaled[:, rows_y]


def pointwise_variance(model: DmfcGpm) -> np.ndarray:
    """Variance of every entry of the 7N data vector"""
    return np.sum(model.scaled_basis() ** 2, axis=0)


def variance_explained(model: DmfcGpm) -> List[float]:
    """lambda_m / sum(lambda)"""
    total = float(np.sum(model.eigenvalues))
    if total <= 0:
        return []
    return (model.eigenvalues / total).tolist()


def marginalize_domain(model: DmfcGpm, subset: Iterable[int]) -> DmfcGpm:
    """Restriction of the model to a subdomain A"""
    ids = np.unique(np.asarray(list(subset), dtype=np.int64))
    if ids.size == 0:
        raise DataError('Cannot marginalize over an empty subdomain')
    if ids.min() < 0 or ids.max() >= model.n_points:
        raise DataError('Subdomain point id out of range')
    reference = model.reference.restrict(ids)
    rows = vector_rows(model.n_points, ids)
    scale = class_scale_vector(reference.n_points, model.class_weights)
    eigenvalues, weighted_rows = _rediagonalize(model.scaled_basis()[:, rows] * scale)
    return _with_eigenpairs(model, reference, model.mean.to_vector()[rows], eigenvalues, weighted_rows,
                            marginal_points=int(ids.size))


def marginalize_object(model: DmfcGpm, objects: Iterable) -> DmfcGpm:
    """Marginal over whole objects (by name or index)"""
    ids = np.concatenate([model.reference.object_ids(o) for o in objects])
    return marginalize_domain(model, ids)


def marginalize_class(model: DmfcGpm, classes: Iterable[str]) -> DmfcGpm:
    """Model of a subset of feature classes; excluded channels are zeroed"""
    classes = tuple(dict.fromkeys(classes))
    if not classes:
        raise DataError('At least one feature class must be kept')
    unknown = set(classes) - set(FEATURE_CLASSES)
    if unknown:
        raise DataError(f'Unknown feature classes {sorted(unknown)}')
    mask = class_mask(model.n_points, classes)
    mean_vector = np.where(mask, model.mean.to_vector(), 0.0)
    factor = np.where(mask, model.scaled_basis() * model.scale_vector(), 0.0)
    eigenvalues, weighted_rows = _rediagonalize(factor)
    kept = [c for c in FEATURE_CLASSES if c in classes]
    return _with_eigenpairs(model, model.reference, mean_vector, eigenvalues, weighted_rows, classes=kept)


def posterior(model: DmfcGpm, observations: Sequence[PointObservation], sigma2: float) -> DmfcGpm:
    """GP regression on partial observations, computed in the M-dimensional latent space"""
    if not observations or model.rank == 0:
        return model
    if not np.isfinite(sigma2) or sigma2 < 0:
        raise DataError('Observation noise variance must be non-negative')
    rows, values = [], []
    for obs in observations:
        if not 0 <= obs.point_id < model.n_points:
            raise DataError(f'Observation point id {obs.point_id} out of range')
        rows.append(vector_rows(model.n_points, [obs.point_id], obs.channel))
        values.append(obs.value)
    rows = np.concatenate(rows)
    values = np.concatenate(values)

    scaled = model.scaled_basis()
    mean_vector = model.mean.to_vector()
    observed = scaled[:, rows]
    residual = values - mean_vector[rows]
    identity = np.eye(model.rank)

    if sigma2 > 0:
        factor = cho_factor(identity + observed @ observed.T / sigma2)
        theta_mean = cho_solve(factor, observed @ residual / sigma2)
        theta_cov = cho_solve(factor, identity)
    else:
        gram = observed.T @ observed
        if np.linalg.matrix_rank(gram) < len(rows):
            raise NumericalError('Noise-free conditioning on a rank-deficient observation set')
        solved = np.linalg.solve(gram, np.column_stack([residual, observed.T]))
        theta_mean = observed @ solved[:, 0]
        theta_cov = identity - observed @ solved[:, 1:]

    evals, evecs = eigh((theta_cov + theta_cov.T) / 2)
    root = (np.sqrt(np.clip(evals, 0.0, None))[:, None] * evecs.T)
    eigenvalues, weighted_rows = _rediagonalize(root @ (scaled * model.scale_vector()))
    return _with_eigenpairs(model, model.reference, mean_vector + theta_mean @ scaled,
                            eigenvalues, weighted_rows, observations=len(observations), sigma2=float(sigma2))


def permute_poses(ts: TrainingSet, similarity_threshold: Optional[float] = None) -> TrainingSet:
    """Pair every training shape/intensity with every training pose.

    With a threshold, a pair (i, j) is kept only when the RMS shape-field distance
    between samples i and j does not exceed it.
    """
    fields, labels = [], []
    for i, fi in enumerate(ts.fields):
        for j, fj in enumerate(ts.fields):
            if similarity_threshold is not None:
                distance = float(np.sqrt(np.mean(np.sum((fi.shape - fj.shape) ** 2, axis=1))))
                if distance > similarity_threshold:
                    continue
            fields.append(FeatureField(ts.reference, fi.shape, fj.pose, fi.intensity))
            labels.append(f'{ts.labels[i]}+pose:{ts.labels[j]}')
    return TrainingSet(ts.reference, tuple(fields), ts.pose_mode, tuple(labels))
