import logging
import os

import click
from dotenv import load_dotenv

from src.errors import ToolkitError

# Configure logging
logger = logging.getLogger(__name__)


class ToolkitGroup(click.Group):
    """
    Command group that turns toolkit errors into exit codes:
    1 for failed verification, 2 for usage and data errors.
    """

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except ToolkitError as e:
            logger.error(f"{type(e).__name__}: {str(e)}")
            click.echo(f"Error: {e}", err=True)
            ctx.exit(e.exit_code)


def configure_logging(verbose=False):
    """
    Set the root level from MLC_LOG_LEVEL, or DEBUG when verbose.

    Args:
        verbose (bool): Force debug output
    """
    name = "DEBUG" if verbose else os.environ.get("MLC_LOG_LEVEL", "INFO").upper()
    level = getattr(logging, name, None)
    if not isinstance(level, int):
        logger.warning(f"Unknown MLC_LOG_LEVEL {name}, using INFO")
        level = logging.INFO
    logging.getLogger().setLevel(level)


def create_cli():
    """
    Create and configure the command-line application.

    Returns:
        click.Group: Group with every command registered
    """
    # Pick up a .env in the working directory
    load_dotenv()

    @click.group(cls=ToolkitGroup)
    @click.option("--verbose", is_flag=True, help="Log at DEBUG level.")
    def cli(verbose):
        """Multi-label one-vs-rest training, prediction and evaluation."""
        configure_logging(verbose)

    # Import and register commands
    from src.commands.evaluate import eval_command
    from src.commands.experiment import experiment_command
    from src.commands.predict import predict_command
    from src.commands.split import describe_command, split_command
    from src.commands.train import train_command
    from src.commands.verify import verify_command

    cli.add_command(train_command)
    cli.add_command(predict_command)
    cli.add_command(eval_command)
    cli.add_command(experiment_command)
    cli.add_command(verify_command)
    cli.add_command(split_command)
    cli.add_command(describe_command)

    return cli
