"""
Fit Commands
Metropolis fitting of a model to a volume or to surface targets
"""
import click

from app.cli.base import settings
from app.ml.config import START_MODES
from app.models.fitting import OBSERVATION_MODES
from app.services.fitting_service import FittingService
from app.utils.helpers import emit_summary


@click.command('fit')
@click.option('--model', 'model_path', required=True, type=click.Path(dir_okay=False), help='Model file.')
@click.option('--observation', 'observation_path', required=True, type=click.Path(),
              help='Volume (.raw/.json or a joint directory), or a directory of <object>.ply surface targets.')
@click.option('--mode', type=click.Choice(OBSERVATION_MODES), default='volume', show_default=True,
              help='Observation type.')
@click.option('--sigma', type=click.FloatRange(min=0, min_open=True),
              help='Likelihood noise (default: 10% of the volume range, or 1 for surfaces).')
@click.option('--iterations', type=click.IntRange(min=1), help='Proposals per chain.')
@click.option('--start', type=click.Choice(START_MODES), default='geodesic', show_default=True,
              help='Chain start: the mean, or the best point along the principal geodesics.')
@click.option('--seed', type=int, help='Seed of the first chain (default: DMFC_SEED).')
@click.option('--chains', type=click.IntRange(min=1), default=1, show_default=True,
              help='Independent chains, merged by their best sample.')
@click.option('--n-jobs', type=int, help='joblib workers for the chains (default: DMFC_N_JOBS).')
@click.option('--mask', 'mask_path', type=click.Path(dir_okay=False),
              help='JSON {object: surface-vertex mask} of observed points for surface fitting.')
@click.option('--out', 'out_dir', required=True, type=click.Path(file_okay=False), help='Output directory.')
@click.pass_context
def fit(ctx, model_path, observation_path, mode, sigma, iterations, start, seed, chains, n_jobs, mask_path,
        out_dir):
    """Fit a model by Metropolis filtering and write the best instance."""
    cfg = settings(ctx)
    result = FittingService().fit(
        model_path, observation_path, out_dir, mode, sigma,
        cfg.ITERATIONS if iterations is None else iterations,
        cfg.SEED if seed is None else seed,
        chains, n_jobs or cfg.N_JOBS, mask_path, start,
    )
    # chain records stay in fit_report.json
    result.pop('chains', None)
    emit_summary(result)
