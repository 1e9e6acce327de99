import functools
import logging

import click

from src.data import FORMATS

# Configure logging
logger = logging.getLogger(__name__)


def data_options(func):
    """Options that describe how a data file is read."""
    @click.option("--format", "data_format", type=click.Choice(FORMATS), default=None,
                  help="Data layout (default svmlight).")
    @click.option("--labels", "label_path", type=click.Path(dir_okay=False), default=None,
                  help="Label file: one comma-separated label list per line.")
    @click.option("--one-based", is_flag=True, default=None, help="Indices in the files start at 1.")
    @click.option("--normalize", is_flag=True, default=None, help="Scale every instance to unit L2 norm.")
    @click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
                  help="KEY=value configuration file.")
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        return func(*args, **kwargs)
    return wrapper


def flag_value(value):
    """Render a flag for ExperimentConfig.load; unset flags stay None."""
    if value is None:
        return None
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (list, tuple)):
        return ",".join(str(v) for v in value) if value else None
    return str(value)


def build_overrides(**flags):
    """Map flag values onto config keys, dropping the unset ones."""
    return {key.upper(): flag_value(value) for key, value in flags.items() if flag_value(value) is not None}
