import math

import click

from core.decorators.decorators import pass_app
from metro.commands.output import evaluate, parse_quantities, sweep

OSCILLATOR_QUANTITIES = ('J', 'F_H', 'K_X', 'bound13', 'K_X_t', 'bound13_t')


def oscillator_options(f):
    for option in reversed([
        click.option('--m', type=float, default=1.0, show_default=True, help="Mass."),
        click.option('--omega', type=float, default=1.0, show_default=True, help="Angular frequency."),
        click.option('--g', type=float, default=0.0, show_default=True, help="Field strength."),
        click.option('--dx', type=float, default=1.0, show_default=True, help="Initial displacement."),
    ]):
        f = option(f)
    return f


@click.group('oscillator', help="Displaced harmonic oscillator in a uniform field.")
def oscillator():
    pass


@oscillator.command('sweep', help="Sweeps the evolution time and writes one CSV row per step.")
@click.option('--t-min', type=float, default=0.0, show_default=True)
@click.option('--t-max', type=float, default=4 * math.pi, show_default='4π')
@click.option('--steps', type=int, default=401, show_default=True)
@oscillator_options
@click.option('--quantities', default='J,F_H,bound13', show_default=True, callback=parse_quantities,
              help=f"Comma-separated subset of {', '.join(OSCILLATOR_QUANTITIES)}.")
@click.option('--numeric', is_flag=True, help="Evaluate numerically instead of in closed form.")
@click.option('--out', type=click.Path(dir_okay=False, writable=True), help="CSV file (default: stdout).")
@pass_app
def oscillator_sweep(app, t_min, t_max, steps, m, omega, g, dx, quantities, numeric, out):
    sweep(app, 'oscillator', 't', t_min, t_max, steps, quantities, {'m': m, 'omega': omega, 'g': g, 'dx': dx},
          numeric=numeric, out=out)


@oscillator.command('eval', help="Prints one quantity at a single evolution time.")
@click.option('--t', type=float, default=0.0, show_default=True, help="Evolution time.")
@oscillator_options
@click.option('--quantity', type=click.Choice(OSCILLATOR_QUANTITIES), default='J', show_default=True)
@click.option('--numeric', is_flag=True, help="Evaluate numerically instead of in closed form.")
@click.option('--json', 'as_json', is_flag=True, help="Print the Fisher information report as JSON (F_H only).")
@pass_app
def oscillator_eval(app, t, m, omega, g, dx, quantity, numeric, as_json):
    evaluate(app, 'oscillator', quantity, {'t': t, 'm': m, 'omega': omega, 'g': g, 'dx': dx},
             numeric=numeric, as_json=as_json)
