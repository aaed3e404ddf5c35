from app.modules.lab.models import QuantityModel
from app.modules.oscillator.models import OscillatorConfig
from app.modules.oscillator.services import OscillatorService


def build_config(parameters):
    return OscillatorConfig.from_frequency(mass=float(parameters['m']), omega=float(parameters['omega']),
                                           gravity=float(parameters['g']), displacement=float(parameters['dx']),
                                           time=float(parameters['t']))


MODELS = [
    QuantityModel(
        name='oscillator',
        service_class=OscillatorService,
        parameter='g',
        defaults={'m': 1.0, 'omega': 1.0, 'g': 0.0, 'dx': 1.0, 't': 0.0},
        build=build_config,
        quantities={
            'J': ('closed_form_qfi', 'numeric_qfi'),
            'F_H': ('closed_form_energy_fi', 'numeric_energy_fi'),
            'K_X': ('closed_form_kx', None),
            'bound13': ('closed_form_bound13', None),
            'K_X_t': ('closed_form_kx_at_time', 'numeric_kx'),
            'bound13_t': ('closed_form_bound13_at_time', 'numeric_bound13_at_time'),
        },
        distribution='energy_distribution',
        fisher='closed_form_energy_fi',
        reports={'F_H': 'energy_fi_report'},
        description='displaced oscillator in a uniform field, g estimated from an energy measurement',
    ),
]
