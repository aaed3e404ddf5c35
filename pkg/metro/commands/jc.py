import click

from app.modules.fisher.services import FisherService
from core.decorators.decorators import pass_app, with_services
from core.serialisers.table import format_number
from metro.commands.output import evaluate, parse_quantities, sweep

JC_VARIABLES = ('omega', 'kappa', 'T', 't', 'c1')


def jc_options(f):
    for option in reversed([
        click.option('--omega', type=float, default=1.0, show_default=True, help="Field frequency ω."),
        click.option('--kappa', type=float, default=1.0, show_default=True, help="Coupling κ, Ω = κ√ω."),
        click.option('--T', 'interaction_time', type=float, default=1.0, show_default=True,
                     help="Atom-field interaction time."),
        click.option('--t', 'free_time', type=float, default=0.0, show_default=True,
                     help="Free field evolution before the atom enters."),
        click.option('--c1', type=float, default=1.0, show_default=True, help="One-photon amplitude."),
        click.option('--n-max', type=int, default=8, show_default=True, help="Field truncation."),
    ]):
        f = option(f)
    return f


def jc_parameters(omega, kappa, interaction_time, free_time, c1, n_max):
    return {'omega': omega, 'kappa': kappa, 'T': interaction_time, 't': free_time, 'c1': c1, 'n_max': n_max}


@click.group('jc', help="Cavity frequency estimation through a resonant atom.")
def jc():
    pass


@jc.command('eval', help="Prints F, J or the Cramér–Rao variance bound 1/(shots·F).")
@jc_options
@click.option('--quantity', type=click.Choice(['F', 'J', 'bound']), default='F', show_default=True)
@click.option('--shots', type=click.IntRange(min=1), default=1, show_default=True,
              help="Repetitions for the variance bound.")
@click.option('--numeric', is_flag=True, help="Evaluate numerically instead of in closed form.")
@click.option('--json', 'as_json', is_flag=True, help="Print the Fisher information report as JSON (F only).")
@pass_app
@with_services(fisher_service=FisherService)
def jc_eval(app, fisher_service, quantity, shots, numeric, as_json, **options):
    parameters = jc_parameters(**options)
    if quantity != 'bound':
        evaluate(app, 'jc', quantity, parameters, numeric=numeric, as_json=as_json)
        return
    if as_json:
        raise click.UsageError("--json is available for --quantity F only")
    model = app.get_model('jc')
    service = model.service_class(app.config)
    fisher = getattr(service, model.method('F', numeric=numeric))(model.config(**parameters))
    click.echo(format_number(fisher_service.crb_variance_bound(fisher, shots)))


@jc.command('sweep', help="Sweeps one parameter and writes one CSV row per step.")
@click.option('--variable', type=click.Choice(JC_VARIABLES), default='omega', show_default=True)
@click.option('--lo', type=float, required=True)
@click.option('--hi', type=float, required=True)
@click.option('--steps', type=int, default=101, show_default=True)
@jc_options
@click.option('--quantities', default='F,J', show_default=True, callback=parse_quantities)
@click.option('--numeric', is_flag=True, help="Evaluate numerically instead of in closed form.")
@click.option('--out', type=click.Path(dir_okay=False, writable=True), help="CSV file (default: stdout).")
@pass_app
def jc_sweep(app, variable, lo, hi, steps, quantities, numeric, out, **options):
    sweep(app, 'jc', variable, lo, hi, steps, quantities, jc_parameters(**options), numeric=numeric, out=out)
