"""Qubit read out with a flat POVM against a parameter-dependent measure.

m_λ(x) = 1 + λ sin x on [0, 2π], Π(x) = 𝕀/2π and ρ_λ = ½(𝕀 + tanh λ σ_z). Every bit of
information in the outcome distribution comes from the measure.
"""
import math
from dataclasses import dataclass

import numpy as np

from app.modules.numcore.models import DensityOperator, OutcomeSpace, ParametricFamily, SampleMeasure
from app.modules.qbounds.models import POVMFamily, QuantumFisherReport
from app.modules.qbounds.services import QboundsService
from core.exceptions.exceptions import ModelError

SIGMA_Z = np.diag([1.0, -1.0]).astype(complex)
IDENTITY = np.eye(2, dtype=complex)
DOMAIN = (-1.0, 1.0)


@dataclass(frozen=True)
class MeasureModelConfig:
    lam: float = 0.0
    grid_points: int = 2001

    def __post_init__(self):
        if not abs(self.lam) < 1.0:
            raise ModelError(f"Measure model needs |λ| < 1, got {self.lam}.")
        if int(self.grid_points) < 5:
            raise ModelError("Measure model needs at least 5 grid points.")


class MeasureModelService(QboundsService):

    def space(self, config: MeasureModelConfig) -> OutcomeSpace:
        return OutcomeSpace.continuous(0.0, 2.0 * math.pi, config.grid_points, self.config.get('QUADRATURE',
                                                                                                'trapezoid'))

    def measure(self) -> SampleMeasure:
        return SampleMeasure(lambda lam, x: 1.0 + lam * np.sin(x), derivative=lambda lam, x: np.sin(x),
                             name='1 + λ sin x')

    def povm(self, config: MeasureModelConfig) -> POVMFamily:
        space = self.space(config)
        flat = np.tile(IDENTITY / (2.0 * math.pi), (space.size, 1, 1))
        zero = np.zeros_like(flat)
        elements = ParametricFamily(lambda lam: flat, derivative=lambda lam: zero, domain=DOMAIN, name='flat')
        return POVMFamily(space=space, elements=elements, measure=self.measure(), name='flat')

    def rho_family(self) -> ParametricFamily:
        def evaluator(lam):
            return DensityOperator('qubit', 0.5 * (IDENTITY + math.tanh(lam) * SIGMA_Z))

        def derivative(lam):
            return 0.5 * SIGMA_Z / math.cosh(lam) ** 2

        return ParametricFamily(evaluator, derivative=derivative, domain=DOMAIN, name='tanh qubit')

    def report(self, config: MeasureModelConfig) -> QuantumFisherReport:
        return self.measure_fi_quantum(self.rho_family(), self.povm(config), self.measure(), config.lam)

    def closed_form_qfi(self, config: MeasureModelConfig) -> float:
        return 1.0 / math.cosh(config.lam) ** 2

    def numeric_qfi(self, config: MeasureModelConfig) -> float:
        return self.qfi(self.rho_family(), config.lam)

    def closed_form_im(self, config: MeasureModelConfig) -> float:
        lam = config.lam
        if abs(lam) < 1e-4:
            return 0.5 + 0.375 * lam ** 2
        return (1.0 / math.sqrt(1.0 - lam ** 2) - 1.0) / lam ** 2

    def numeric_im(self, config: MeasureModelConfig) -> float:
        return self.report(config).term_measure

    def closed_form_fi(self, config: MeasureModelConfig) -> float:
        # The flat POVM sees nothing of ρ.
        return self.closed_form_im(config)

    def numeric_fi(self, config: MeasureModelConfig) -> float:
        return self.povm_fi(self.rho_family(), self.povm(config), config.lam).total

    def closed_form_bound(self, config: MeasureModelConfig) -> float:
        return self.measure_bound(self.closed_form_qfi(config), self.closed_form_im(config))

    def numeric_bound(self, config: MeasureModelConfig) -> float:
        return self.measure_bound(self.numeric_qfi(config), self.numeric_im(config))
