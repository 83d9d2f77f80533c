import click
import coloredlogs
import logging
import os
import sys
from typing import Optional

LOG_FORMAT = '%(asctime)s %(levelname)s: %(message)s'
LOG_DATE_FORMAT = '%Y-%m-%d %H:%M:%S'


def setup_logging(verbose: bool, log_file: Optional[str] = None):
    level_colors = coloredlogs.DEFAULT_LEVEL_STYLES | {'info': {'color': 'magenta', 'bright': True}, 'debug': {'color': 'blue', 'bright': True}}
    field_colors = coloredlogs.DEFAULT_FIELD_STYLES | {'asctime': {'color': 'white', 'faint': True}}
    level = logging.DEBUG if verbose else logging.INFO
    coloredlogs.install(
        stream=sys.stdout,
        fmt=LOG_FORMAT,
        datefmt=LOG_DATE_FORMAT,
        level=level,
        level_styles=level_colors,
        field_styles=field_colors,
    )
    if log_file:
        add_log_file(log_file, level)
    logging.debug('Logging set up.')


def add_log_file(path: str, level: int = logging.DEBUG) -> logging.Handler:
    """Mirror the log into `path` (uncoloured), e.g. `run.log` inside an output directory"""
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    handler = logging.FileHandler(path, mode='a')
    handler.setLevel(level)
    handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=LOG_DATE_FORMAT))
    logging.getLogger().addHandler(handler)
    return handler


verbose_option = click.option(
    '-v',
    '--verbose',
    is_flag=True,
    help='Enables verbose logging',
)
