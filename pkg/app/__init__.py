"""
DMFC-GPM Toolkit
Multi-object shape, pose and intensity Gaussian process models
"""
import os


def create_app(config_name=None):
    """Application factory pattern: the root command group with every command registered"""
    config_name = config_name or os.getenv('DMFC_ENV', 'default')
    from app.cli import COMMANDS, make_group

    app = make_group(config_name)
    for command in COMMANDS:
        app.add_command(command)
    return app
