import click

from core.decorators.decorators import pass_app


@click.command('env', help="Displays the resolved configuration.")
@pass_app
def env(app):
    for key in sorted(app.config):
        click.echo(f"{key}={app.config[key]}")
