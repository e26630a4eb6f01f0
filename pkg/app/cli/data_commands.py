"""
Data Commands
Synthetic lollipop dataset generation and DRR projection
"""
import click

from app.cli.base import settings
from app.ml.synthetic.rendering import AXES
from app.services.dataset_service import INTENSITY_SOURCES, PRESETS, DatasetService
from app.utils.helpers import emit_summary


@click.command('gen-data')
@click.option('--preset', type=click.Choice(PRESETS), default='full', show_default=True,
              help='full: 15 shapes x 4 poses; small: 3 shapes x 4 poses.')
@click.option('--out', 'out_dir', type=click.Path(file_okay=False),
              help='Dataset directory (default: DMFC_DATA_DIR).')
@click.option('--resolution', type=click.IntRange(0, 5), help='Mesh refinement level.')
@click.option('--intensity-source', type=click.Choice(INTENSITY_SOURCES), default='volume', show_default=True,
              help='Sample tet intensities from the rendered volume or from the analytic profile.')
@click.option('--spacing', type=click.FloatRange(min=0, min_open=True), help='Voxel spacing of rendered volumes.')
@click.option('--held-out/--no-held-out', default=True, show_default=True,
              help='Also write the held-out pose joints.')
@click.option('--n-jobs', type=int, help='joblib workers (default: DMFC_N_JOBS).')
@click.pass_context
def gen_data(ctx, preset, out_dir, resolution, intensity_source, spacing, held_out, n_jobs):
    """Generate and render a lollipop joint dataset."""
    cfg = settings(ctx)
    service = DatasetService(out_dir or cfg.DATA_DIR)
    result = service.generate(preset, cfg.RESOLUTION if resolution is None else resolution,
                              intensity_source, spacing, held_out, n_jobs or cfg.N_JOBS)
    emit_summary(result)


@click.command('project-drr')
@click.option('--volume', 'volume_path', required=True, type=click.Path(dir_okay=False),
              help='Raw volume (.raw with its .json header).')
@click.option('--out', 'out_path', required=True, type=click.Path(dir_okay=False), help='Output image (.npy).')
@click.option('--axis', type=click.Choice(tuple(AXES)), default='x', show_default=True, help='Projection axis.')
@click.option('--normalize/--no-normalize', default=True, show_default=True, help='Scale the image to [0, 1].')
def project_drr(volume_path, out_path, axis, normalize):
    """Line-integral projection of a volume along one axis."""
    emit_summary(DatasetService.project_drr(volume_path, out_path, axis, normalize))
