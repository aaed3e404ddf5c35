import click

from app.modules.oscillator.services import OscillatorService
from core.decorators.decorators import with_services
from core.serialisers.table import format_number


@click.command('hermite', help="Prints the Hermite-function moment ∫ Hₙ Hₘ ξᵖ e^{-ξ²} dξ.")
@click.option('--p', type=int, required=True, help="Power of ξ.")
@click.option('--n', type=int, required=True)
@click.option('--m', type=int, required=True)
@click.option('--closed-form', is_flag=True, help="Use the closed form (p ≤ 2) instead of the recurrence.")
@with_services(oscillator_service=OscillatorService)
def hermite(oscillator_service, p, n, m, closed_form):
    if closed_form:
        value = oscillator_service.hermite_integral_closed_form(p, n, m)
    else:
        value = oscillator_service.hermite_integral(p, n, m)
    click.echo(format_number(value))
