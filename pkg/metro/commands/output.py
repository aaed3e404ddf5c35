import json

import click

from app.modules.lab.models import SweepSpec
from app.modules.lab.services import LabService
from core.serialisers.serializer import fisher_report_serializer
from core.serialisers.table import dumps_csv, format_number, write_csv


def parse_quantities(ctx, param, value):
    names = tuple(name.strip() for name in value.split(',') if name.strip())
    if not names:
        raise click.BadParameter("give at least one quantity name", ctx=ctx, param=param)
    return names


def emit_table(table, out=None):
    if out:
        write_csv(out, table.columns, table.rows)
        click.echo(f"Wrote {len(table.rows)} rows to {out}", err=True)
    else:
        click.echo(dumps_csv(table.columns, table.rows), nl=False)


def emit_json(data, out=None):
    text = json.dumps(data, indent=2)
    if out:
        with open(out, 'w', encoding='utf-8') as file:
            file.write(text + '\n')
    click.echo(text)


def evaluate(app, model_name, quantity, parameters, numeric=False, as_json=False):
    """Prints one quantity of a registered model, or its Fisher information report as JSON."""
    model = app.get_model(model_name)
    service = model.service_class(app.config)
    config = model.config(**parameters)
    if as_json:
        report = getattr(service, model.report(quantity))(config)
        emit_json(fisher_report_serializer.serialize(report))
    else:
        click.echo(format_number(getattr(service, model.method(quantity, numeric=numeric))(config)))


def sweep(app, model_name, variable, lo, hi, steps, quantities, parameters, numeric=False, out=None):
    fixed = {key: value for key, value in parameters.items() if key != variable}
    spec = SweepSpec(model=model_name, variable=variable, lo=lo, hi=hi, steps=steps, outputs=quantities,
                     fixed=fixed, numeric=numeric)
    emit_table(LabService(app.config, app.models).sweep(spec), out)
