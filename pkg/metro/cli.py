import sys

import click

from app import create_app
from core.managers.error_handler_manager import ErrorHandlerManager
from metro.commands.env import env
from metro.commands.hermite import hermite
from metro.commands.jc import jc
from metro.commands.linter import linter
from metro.commands.mc import mc
from metro.commands.measure import measure
from metro.commands.module_list import module_list
from metro.commands.oscillator import oscillator
from metro.commands.test import test


class MetroCLI(click.Group):
    def __init__(self, *args, **kwargs):
        super().__init__(*args, **kwargs)
        self.error_handlers = {}

    def errorhandler(self, exc_type):
        def decorator(f):
            self.error_handlers[exc_type] = f
            return f
        return decorator

    def get_command(self, ctx, cmd_name):
        rv = super().get_command(ctx, cmd_name)
        if rv is not None:
            return rv
        click.echo(f"No such command '{cmd_name}'.")
        click.echo("Try 'metro --help' for a list of available commands.")
        return None

    def _handler_for(self, error):
        for exc_type in type(error).__mro__:
            if exc_type in self.error_handlers:
                return self.error_handlers[exc_type]
        return None

    def main(self, args=None, prog_name=None, complete_var=None, **extra):
        extra.pop('standalone_mode', None)
        try:
            rv = super().main(args=args, prog_name=prog_name, complete_var=complete_var,
                              standalone_mode=False, **extra)
        except Exception as e:
            handler = self._handler_for(e)
            if handler is None:
                raise
            sys.exit(handler(e))
        sys.exit(rv if isinstance(rv, int) else 0)


def option_defaults(command, options):
    """Nested click default map applying flat config-file options to every command that has them."""
    defaults = {param.name: options[param.name] for param in command.params if param.name in options}
    for name, subcommand in getattr(command, 'commands', {}).items():
        defaults[name] = option_defaults(subcommand, options)
    return defaults


@click.group(cls=MetroCLI)
@click.option('--config', 'config_file', type=click.Path(exists=True, dir_okay=False), envvar='METRO_CONFIG',
              help="Flat key=value file with settings and option defaults.")
@click.option('--verbose', is_flag=True, help="Log progress to the console.")
@click.pass_context
def cli(ctx, config_file, verbose):
    """Fisher information and Cramér–Rao bounds for quantum estimation models."""
    app = create_app(config_file=config_file, verbose=verbose)
    ctx.obj = app
    options = {key.replace('-', '_'): value for key, value in app.option_defaults.items()}
    ctx.default_map = option_defaults(ctx.command, options)


cli.add_command(oscillator)
cli.add_command(jc)
cli.add_command(measure)
cli.add_command(mc)
cli.add_command(hermite)
cli.add_command(env)
cli.add_command(test)
cli.add_command(linter)
cli.add_command(module_list)

ErrorHandlerManager(cli).register_error_handlers()


if __name__ == '__main__':
    cli()
