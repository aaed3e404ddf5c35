from app.modules.lab.models import QuantityModel
from app.modules.qbounds.synthetic import MeasureModelConfig, MeasureModelService

MODELS = [
    QuantityModel(
        name='measure',
        service_class=MeasureModelService,
        parameter='lam',
        defaults={'lam': 0.0, 'grid_points': 2001},
        build=lambda parameters: MeasureModelConfig(lam=float(parameters['lam']),
                                                    grid_points=int(parameters['grid_points'])),
        quantities={
            'J': ('closed_form_qfi', 'numeric_qfi'),
            'F': ('closed_form_fi', 'numeric_fi'),
            'Im': ('closed_form_im', 'numeric_im'),
            'boundJ+Im': ('closed_form_bound', 'numeric_bound'),
        },
        reports={'F': 'report'},
        description='qubit with flat POVM under the measure 1 + λ sin x',
    ),
]
