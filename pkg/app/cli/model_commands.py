"""
Model Commands
Build, compare, sample, marginalize, condition and permute models
"""
import click

from app.cli.base import settings
from app.ml.config import FEATURE_CLASSES, POSE_MODES
from app.ml.pipeline.data_loader import REFERENCE_MODES
from app.ml.synthetic.rendering import AXES
from app.services.model_service import ModelService
from app.utils.helpers import emit_summary, parse_floats, parse_ids


def _rank(value):
    if value is None or value == 'auto':
        return value
    try:
        return int(value)
    except ValueError:
        raise click.BadParameter(f"expected an integer or 'auto', got {value!r}") from None


def _weights(value):
    if value is None or value == 'auto':
        return value
    weights = parse_floats(value)
    if len(weights) != 3:
        raise click.BadParameter('expected three class weights: shape, pose, intensity')
    return weights


def build_options(func):
    """Flags shared by build and permute"""
    options = [
        click.option('--data', 'data_dir', type=click.Path(file_okay=False),
                     help='Dataset directory (default: DMFC_DATA_DIR).'),
        click.option('--out', 'out_path', required=True, type=click.Path(dir_okay=False),
                     help='Model file to write (.dmfc).'),
        click.option('--pose-mode', type=click.Choice(POSE_MODES), default='edr', show_default=True,
                     help='Pose encoding: energy displacement, linear rigid velocity or linear displacement.'),
        click.option('--class-weights', help="Shape, pose, intensity scale factors ('auto' balances them)."),
        click.option('--rank', help="Number of principal geodesics kept (integer or 'auto')."),
        click.option('--reference', 'reference_mode', type=click.Choice(REFERENCE_MODES), default='gpa',
                     show_default=True, help='Reference joint: GPA consensus or canonical template.'),
    ]
    for option in reversed(options):
        func = option(func)
    return func


@click.command('build')
@build_options
@click.pass_context
def build(ctx, data_dir, out_path, pose_mode, class_weights, rank, reference_mode):
    """Build a model from a generated dataset."""
    result = ModelService().build(data_dir or settings(ctx).DATA_DIR, out_path, pose_mode,
                                  _weights(class_weights), _rank(rank), reference_mode)
    emit_summary(result)


@click.command('permute')
@build_options
@click.option('--threshold', type=click.FloatRange(min=0), help='Keep pairs whose RMS shape distance is at most this.')
@click.pass_context
def permute(ctx, data_dir, out_path, pose_mode, class_weights, rank, reference_mode, threshold):
    """Build a model from the pose-permuted training set."""
    result = ModelService().build(data_dir or settings(ctx).DATA_DIR, out_path, pose_mode,
                                  _weights(class_weights), _rank(rank), reference_mode,
                                  permute=True, similarity_threshold=threshold)
    emit_summary(result)


@click.command('train-all')
@click.option('--data', 'data_dir', type=click.Path(file_okay=False),
              help='Dataset directory (default: DMFC_DATA_DIR).')
@click.option('--out', 'out_dir', required=True, type=click.Path(file_okay=False),
              help='Directory for the models and model_comparison.json.')
@click.option('--class-weights', help="Shape, pose, intensity scale factors ('auto' balances them).")
@click.option('--rank', help="Number of principal geodesics kept (integer or 'auto').")
@click.pass_context
def train_all(ctx, data_dir, out_dir, class_weights, rank):
    """Build one model per pose encoding and compare them."""
    emit_summary(ModelService.train_all(data_dir or settings(ctx).DATA_DIR, out_dir,
                                        _weights(class_weights), _rank(rank)))


@click.command('sample')
@click.option('--model', 'model_path', required=True, type=click.Path(dir_okay=False), help='Model file.')
@click.option('--out', 'out_dir', required=True, type=click.Path(file_okay=False), help='Output directory.')
@click.option('--theta', help="Coefficients, comma separated; missing trailing ones are 0 ('0' gives the mean).")
@click.option('--pg', type=click.IntRange(min=0), help='Sample along one principal geodesic.')
@click.option('--sd', type=float, default=0.0, show_default=True, help='Standard deviations along --pg.')
@click.option('--from-joint', type=click.Path(file_okay=False), help='Project a stored dataset joint and sample it.')
@click.option('--seed', type=int, help='Random seed (default: DMFC_SEED).')
@click.option('--render/--no-render', default=False, show_default=True,
              help='Also write a rendered volume and a DRR of the instance.')
@click.option('--axis', type=click.Choice(tuple(AXES)), default='x', show_default=True, help='DRR axis.')
@click.pass_context
def sample(ctx, model_path, out_dir, theta, pg, sd, from_joint, seed, render, axis):
    """Write the meshes of one model instance."""
    coefficients = parse_floats(theta) if theta is not None else None
    seed = settings(ctx).SEED if seed is None else seed
    emit_summary(ModelService().sample(model_path, out_dir, coefficients, pg, sd, seed, from_joint, render, axis))


@click.command('marginalize')
@click.option('--model', 'model_path', required=True, type=click.Path(dir_okay=False), help='Model file.')
@click.option('--out', 'out_path', required=True, type=click.Path(dir_okay=False), help='Marginal model file.')
@click.option('--objects', multiple=True, help='Keep these objects (repeatable).')
@click.option('--points', 'point_ids', help="Keep these domain point ids, e.g. '0-99,150'.")
@click.option('--classes', multiple=True, type=click.Choice(FEATURE_CLASSES),
              help='Keep these feature classes (repeatable).')
def marginalize(model_path, out_path, objects, point_ids, classes):
    """Restrict a model to objects, points and/or feature classes."""
    ids = parse_ids(point_ids) if point_ids else []
    emit_summary(ModelService().marginalize(model_path, out_path, objects, ids, classes))


@click.command('posterior')
@click.option('--model', 'model_path', required=True, type=click.Path(dir_okay=False), help='Model file.')
@click.option('--observations', 'observations_path', required=True, type=click.Path(dir_okay=False),
              help='JSON list of {point_id | object+landmark, channel, value} records.')
@click.option('--sigma2', type=click.FloatRange(min=0), default=1e-4, show_default=True,
              help='Observation noise variance (0 interpolates exactly).')
@click.option('--out', 'out_path', required=True, type=click.Path(dir_okay=False), help='Posterior model file.')
def posterior(model_path, observations_path, sigma2, out_path):
    """Condition a model on partial observations."""
    emit_summary(ModelService().posterior(model_path, observations_path, sigma2, out_path))
