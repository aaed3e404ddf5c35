import click

from core.decorators.decorators import pass_app
from core.managers.module_manager import ModuleManager


@click.command('module:list', help="Lists modules, those ignored by .moduleignore and the registered models.")
@pass_app
def module_list(app):
    loaded_modules, ignored_modules = ModuleManager(app).get_modules()

    click.echo(click.style(f"Loaded Modules ({len(loaded_modules)}):", fg='green'))
    for module in loaded_modules:
        click.echo(f"- {module}")

    click.echo(click.style(f"\nIgnored Modules ({len(ignored_modules)}):", fg='bright_yellow'))
    for module in ignored_modules:
        click.echo(click.style(f"- {module}", fg='bright_yellow'))

    click.echo(click.style(f"\nModels ({len(app.models)}):", fg='green'))
    for name, model in sorted(app.models.items()):
        quantities = ', '.join(model.quantities)
        click.echo(f"- {name} [{model.parameter}]: {quantities}  {model.description}")
