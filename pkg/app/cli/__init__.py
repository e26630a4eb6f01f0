"""
CLI Commands
"""
from app.cli.base import DmfcGroup, make_group, settings
from app.cli.data_commands import gen_data, project_drr
from app.cli.model_commands import build, marginalize, permute, posterior, sample, train_all
from app.cli.fit_commands import fit
from app.cli.eval_commands import eval_correlations, eval_specgen

COMMANDS = (gen_data, build, train_all, sample, marginalize, posterior, permute, fit,
            eval_correlations, eval_specgen, project_drr)

__all__ = ['COMMANDS', 'DmfcGroup', 'make_group', 'settings']
