"""
CLI Base
Root command group, error mapping and configuration-file defaults
"""
import json
import os
from typing import Dict, Type

import click
import numpy as np

from app.config import Config, config
from app.exceptions import DataError, DmfcError
from app.ml.config import VERSION
from app.repositories import BaseRepository
from app.utils.helpers import set_verbose

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_NUMERICAL = 4


def _fail(ctx: click.Context, record: Dict, code: int):
    click.echo(json.dumps(record, sort_keys=True), err=True)
    ctx.exit(code)


class DmfcGroup(click.Group):
    """Command group that reports toolkit errors as JSON on stderr with a mapped exit code"""

    def invoke(self, ctx: click.Context):
        try:
            return super().invoke(ctx)
        except DmfcError as e:
            _fail(ctx, e.to_dict(), e.exit_code)
        except np.linalg.LinAlgError as e:
            _fail(ctx, {'error': 'NumericalError', 'message': str(e)}, EXIT_NUMERICAL)
        except OSError as e:
            _fail(ctx, {'error': type(e).__name__, 'message': str(e)}, EXIT_DATA)


def _key(name: str) -> str:
    return name.replace('-', '_')


def default_map_from(record: Dict, group: click.Group) -> Dict:
    """Flat keys apply to every command that has the flag; a nested object applies to one command"""
    if not isinstance(record, dict):
        raise DataError('Configuration file must hold a JSON object')
    flat = {_key(k): v for k, v in record.items() if not isinstance(v, dict)}
    unknown = [k for k, v in record.items() if isinstance(v, dict) and k not in group.commands]
    if unknown:
        raise DataError(f'Configuration file names unknown commands: {unknown}')

    default_map = {}
    for name, command in group.commands.items():
        params = {p.name for p in command.params}
        entry = {k: v for k, v in flat.items() if k in params}
        nested = {_key(k): v for k, v in record.get(name, {}).items()}
        bad = sorted(set(nested) - params)
        if bad:
            raise DataError(f'Configuration for {name!r} sets unknown flags: {bad}')
        entry.update(nested)
        if entry:
            default_map[name] = entry
    return default_map


def settings(ctx: click.Context) -> Type[Config]:
    """Active configuration class of the invocation"""
    root = ctx.find_root()
    return root.obj if root.obj is not None else config['default']


def make_group(default_env: str = 'default') -> click.Group:
    """Root command group bound to a default configuration name"""
    if default_env not in config:
        raise DataError(f'Unknown configuration {default_env!r}')

    @click.group(cls=DmfcGroup, context_settings={'help_option_names': ['-h', '--help']})
    @click.option('--config', 'config_file', type=click.Path(dir_okay=False),
                  help='JSON file supplying default flag values (command line wins).')
    @click.option('--env', type=click.Choice(sorted(config)), envvar='DMFC_ENV', default=default_env,
                  show_default=True, help='Named configuration (env var DMFC_ENV).')
    @click.option('--quiet/--verbose', default=None, help='Suppress or force progress messages on stderr.')
    @click.version_option(VERSION, prog_name='dmfc')
    @click.pass_context
    def cli(ctx, config_file, env, quiet):
        """DMFC-GPM toolkit: generate lollipop data, build, sample, condition and fit models."""
        active = config[env]
        ctx.obj = active
        set_verbose(active.VERBOSE if quiet is None else not quiet)
        if config_file:
            if not os.path.isfile(config_file):
                raise DataError(f'Configuration file not found: {config_file}')
            record = BaseRepository().read_json(config_file)
            ctx.default_map = default_map_from(record, ctx.command)

    return cli
