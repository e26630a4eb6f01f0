"""
Evaluation Commands
Correlation report, specificity and generality
"""
import click

from app.cli.base import settings
from app.services.evaluation_service import EvaluationService
from app.utils.helpers import emit_summary


@click.command('eval-correlations')
@click.option('--model', 'model_path', required=True, type=click.Path(dir_okay=False), help='Model file.')
@click.option('--samples', 'n_samples', type=click.IntRange(min=3), help='Random instances to draw.')
@click.option('--seed', type=int, help='Random seed (default: DMFC_SEED).')
@click.option('--data', 'data_dir', type=click.Path(file_okay=False),
              help='Dataset directory; adds the training-set row.')
@click.option('--out', 'out_dir', required=True, type=click.Path(file_okay=False), help='Output directory.')
@click.pass_context
def eval_correlations(ctx, model_path, n_samples, seed, data_dir, out_dir):
    """Absolute correlations between sampled radii, distances and angles."""
    cfg = settings(ctx)
    result = EvaluationService().correlations(model_path, out_dir, cfg.SAMPLES if n_samples is None else n_samples,
                                              cfg.SEED if seed is None else seed, data_dir)
    emit_summary(result)


@click.command('eval-specgen')
@click.option('--model', 'model_path', required=True, type=click.Path(dir_okay=False), help='Model file.')
@click.option('--data', 'data_dir', type=click.Path(file_okay=False),
              help='Dataset directory with train and held_out joints (default: DMFC_DATA_DIR).')
@click.option('--samples', 'n_samples', type=click.IntRange(min=1), help='Random instances for specificity.')
@click.option('--iterations', type=click.IntRange(min=1), help='Proposals per generality fit.')
@click.option('--seed', type=int, help='Random seed (default: DMFC_SEED).')
@click.option('--sigma', type=click.FloatRange(min=0, min_open=True), help='Likelihood noise of the fits.')
@click.option('--out', 'out_dir', required=True, type=click.Path(file_okay=False), help='Output directory.')
@click.pass_context
def eval_specgen(ctx, model_path, data_dir, n_samples, iterations, seed, sigma, out_dir):
    """Specificity on training volumes and generality on held-out volumes."""
    cfg = settings(ctx)
    result = EvaluationService().specgen(
        model_path, data_dir or cfg.DATA_DIR, out_dir,
        cfg.SAMPLES if n_samples is None else n_samples,
        cfg.ITERATIONS if iterations is None else iterations,
        cfg.SEED if seed is None else seed, sigma,
    )
    emit_summary(result)
