import click

from qxot.commands.attack import attack
from qxot.commands.leakage import leakage
from qxot.commands.linear import linear
from qxot.commands.qc import qc
from qxot.commands.xot import xot
from qxot.core.config import settings
from qxot.core.logging import get_logger, setup_logging
from qxot.core.telemetry import setup_telemetry

logger = get_logger("main")


@click.group(help=settings.APP_DESCRIPTION)
@click.version_option(settings.APP_VERSION, prog_name=settings.APP_NAME)
@click.option("--log-level", default=None, help="Override LOG_LEVEL for this invocation.")
def cli(log_level):
    setup_logging(log_level)
    setup_telemetry()
    logger.debug(f"{settings.APP_NAME} {settings.APP_VERSION} starting")


# Register commands
cli.add_command(xot)
cli.add_command(linear)
cli.add_command(attack)
cli.add_command(leakage)
cli.add_command(qc)


if __name__ == "__main__":
    cli()
