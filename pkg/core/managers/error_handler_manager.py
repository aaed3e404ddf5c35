import logging

import click

from core.exceptions.exceptions import ModelError, NumericalError

USAGE_EXIT_CODE = 1
NUMERICAL_EXIT_CODE = 2

logger = logging.getLogger('app')


class ErrorHandlerManager:
    def __init__(self, cli):
        self.cli = cli

    def register_error_handlers(self):
        @self.cli.errorhandler(click.ClickException)
        def usage_error(e):
            logger.warning('Usage Error: %s', e.format_message())
            e.show()
            return USAGE_EXIT_CODE

        @self.cli.errorhandler(click.exceptions.Abort)
        def aborted(e):
            logger.warning('Aborted')
            click.echo(click.style("Aborted!", fg='red'), err=True)
            return USAGE_EXIT_CODE

        @self.cli.errorhandler(ModelError)
        def model_error(e):
            logger.warning('Model Error: %s', str(e))
            click.echo(click.style(f"Error: {e}", fg='red'), err=True)
            return USAGE_EXIT_CODE

        @self.cli.errorhandler(NumericalError)
        def numerical_error(e):
            logger.error('Numerical Failure: %s', str(e))
            click.echo(click.style(f"Numerical failure: {e}", fg='red'), err=True)
            return NUMERICAL_EXIT_CODE
