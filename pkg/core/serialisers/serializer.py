import math
import numbers

import numpy as np


def convert_value(value):
    if isinstance(value, np.ndarray):
        return [convert_value(v) for v in value.tolist()]
    if isinstance(value, (list, tuple)):
        return [convert_value(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, numbers.Integral):
        return int(value)
    if isinstance(value, numbers.Complex) and not isinstance(value, numbers.Real):
        return [float(value.real), float(value.imag)]
    if isinstance(value, numbers.Real):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


class Serializer:
    def __init__(self, serialization_fields, related_serializers=None):
        self.serialization_fields = serialization_fields
        self.related_serializers = related_serializers or {}

    def serialize(self, instance):
        serialized_data = {}
        for key, attr_name in self.serialization_fields.items():
            if key in self.related_serializers:
                related_data = instance if attr_name is None else getattr(instance, attr_name)
                if callable(related_data):
                    related_data = related_data()
                if isinstance(related_data, list):
                    serialized_data[key] = [self.related_serializers[key].serialize(sub_instance)
                                            for sub_instance in related_data]
                else:
                    serialized_data[key] = self.related_serializers[key].serialize(related_data)
            else:
                attr = getattr(instance, attr_name, None)
                if callable(attr):
                    attr = attr()
                serialized_data[key] = convert_value(attr)
        return serialized_data


terms_serializer = Serializer({
    'state': 'term_state',
    'measure': 'term_measure',
    'povm': 'term_povm',
    'cross': 'term_cross',
})

fisher_report_serializer = Serializer(
    {'value': 'total', 'terms': None, 'error_estimate': 'error_estimate'},
    related_serializers={'terms': terms_serializer},
)

crb_report_serializer = Serializer({
    'empirical_var': 'empirical_var',
    'crb': 'crb',
    'ratio': 'ratio',
    'ci95': 'ci95',
})
