import click

from app.modules.lab.models import MonteCarloConfig
from app.modules.lab.services import LabService
from core.decorators.decorators import pass_app
from core.serialisers.serializer import crb_report_serializer
from metro.commands.output import emit_json


class GridType(click.ParamType):
    name = 'LO:HI:POINTS'

    def convert(self, value, param, ctx):
        if isinstance(value, tuple):
            return value
        parts = str(value).split(':')
        if len(parts) != 3:
            self.fail(f"expected LO:HI:POINTS, got {value!r}", param, ctx)
        try:
            return float(parts[0]), float(parts[1]), int(parts[2])
        except ValueError:
            self.fail(f"expected two numbers and an integer, got {value!r}", param, ctx)


def parse_parameters(ctx, param, values):
    parameters = {}
    for item in values:
        key, sep, raw = item.partition('=')
        if not sep:
            raise click.BadParameter(f"expected KEY=VALUE, got {item!r}", ctx=ctx, param=param)
        try:
            parameters[key.strip()] = float(raw)
        except ValueError:
            raise click.BadParameter(f"{key} must be numeric, got {raw!r}", ctx=ctx, param=param) from None
    return parameters


@click.command('mc', help="Monte Carlo check of maximum-likelihood estimation against the Cramér–Rao bound.")
@click.option('--model', type=click.Choice(['jc', 'oscillator']), required=True)
@click.option('--true', 'true_value', type=float, required=True, help="True value of the estimated parameter.")
@click.option('--shots', type=int, default=10000, show_default=True, help="Measurements per trial.")
@click.option('--trials', type=int, default=500, show_default=True)
@click.option('--seed', type=int, default=0, show_default=True)
@click.option('--grid', type=GridType(), required=True, help="Estimator grid.")
@click.option('--param', 'parameters', multiple=True, callback=parse_parameters,
              help="Fixed model parameter as KEY=VALUE, repeatable.")
@click.option('--out', type=click.Path(dir_okay=False, writable=True), help="Also write the JSON report here.")
@pass_app
def mc(app, model, true_value, shots, trials, seed, grid, parameters, out):
    cfg = MonteCarloConfig(model=model, true_value=true_value, shots=shots, trials=trials, seed=seed, grid=grid,
                           parameters=parameters)
    report = LabService(app.config, app.models).crb_experiment(cfg)
    emit_json(crb_report_serializer.serialize(report), out)
