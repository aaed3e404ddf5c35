from app.modules.jaynescummings.models import JCConfig
from app.modules.jaynescummings.services import JaynesCummingsService
from app.modules.lab.models import QuantityModel


def build_config(parameters):
    return JCConfig.from_amplitude(c1=float(parameters['c1']), omega=float(parameters['omega']),
                                   kappa=float(parameters['kappa']),
                                   interaction_time=float(parameters['T']), free_time=float(parameters['t']),
                                   n_max=int(parameters['n_max']))


MODELS = [
    QuantityModel(
        name='jc',
        service_class=JaynesCummingsService,
        parameter='omega',
        defaults={'omega': 1.0, 'kappa': 1.0, 'T': 1.0, 't': 0.0, 'c1': 1.0, 'n_max': 8},
        build=build_config,
        quantities={
            'F': ('closed_form_fi', 'numeric_fi'),
            'J': ('closed_form_qfi', 'numeric_qfi'),
        },
        distribution='outcome_distribution',
        fisher='closed_form_fi',
        reports={'F': 'fi_report'},
        description='cavity field frequency ω read out through a resonant atom',
    ),
]
