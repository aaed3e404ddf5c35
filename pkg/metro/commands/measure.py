import click

from core.decorators.decorators import pass_app
from metro.commands.output import evaluate, parse_quantities, sweep

MEASURE_QUANTITIES = ('J', 'F', 'Im', 'boundJ+Im')


@click.group('measure', help="Qubit read out under the parameter-dependent measure 1 + λ sin x.")
def measure():
    pass


@measure.command('eval', help="Prints one quantity at a single λ.")
@click.option('--lam', type=float, default=0.0, show_default=True)
@click.option('--grid-points', type=int, default=2001, show_default=True, help="Quadrature nodes on [0, 2π].")
@click.option('--quantity', type=click.Choice(MEASURE_QUANTITIES), default='Im', show_default=True)
@click.option('--numeric', is_flag=True, help="Evaluate numerically instead of in closed form.")
@click.option('--json', 'as_json', is_flag=True, help="Print the Fisher information report as JSON (F only).")
@pass_app
def measure_eval(app, lam, grid_points, quantity, numeric, as_json):
    evaluate(app, 'measure', quantity, {'lam': lam, 'grid_points': grid_points}, numeric=numeric, as_json=as_json)


@measure.command('sweep', help="Sweeps λ and writes one CSV row per step.")
@click.option('--lam-min', type=float, default=-0.9, show_default=True)
@click.option('--lam-max', type=float, default=0.9, show_default=True)
@click.option('--steps', type=int, default=37, show_default=True)
@click.option('--grid-points', type=int, default=2001, show_default=True)
@click.option('--quantities', default='J,F,Im,boundJ+Im', show_default=True, callback=parse_quantities)
@click.option('--numeric', is_flag=True, help="Evaluate numerically instead of in closed form.")
@click.option('--out', type=click.Path(dir_okay=False, writable=True), help="CSV file (default: stdout).")
@pass_app
def measure_sweep(app, lam_min, lam_max, steps, grid_points, quantities, numeric, out):
    sweep(app, 'measure', 'lam', lam_min, lam_max, steps, quantities, {'grid_points': grid_points},
          numeric=numeric, out=out)
