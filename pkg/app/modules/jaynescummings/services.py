import logging
import math

import numpy as np

from app.modules.fisher.models import ClassicalModel
from app.modules.fisher.services import FisherService
from app.modules.jaynescummings.models import LABELS, JCConfig, JCOutcomeDistribution
from app.modules.numcore.models import OutcomeSpace, ParametricFamily, StateVector, annihilation
from app.modules.qbounds.models import POVMFamily, QuantumFisherReport
from app.modules.qbounds.services import QboundsService
from core.exceptions.exceptions import NumericalError
from core.services.BaseService import BaseService

logger = logging.getLogger(__name__)

UNITARITY_TOLERANCE = 1e-9
OPERATOR_TOLERANCE = 1e-10
PROBABILITY_TOLERANCE = 1e-12
DEGENERATE_DENOMINATOR = 1e-14

GROUND = np.array([[1.0, 0.0], [0.0, 0.0]])
EXCITED = np.array([[0.0, 0.0], [0.0, 1.0]])
LOWER = np.array([[0.0, 1.0], [0.0, 0.0]])  # |g⟩⟨e|


def _sinc_root(theta, n):
    """sin(θ√n)/√n, zero at n = 0."""
    n = np.asarray(n, dtype=float)
    root = np.sqrt(n)
    return np.where(n > 0, np.sin(theta * root) / np.where(n > 0, root, 1.0), 0.0)


class JaynesCummingsService(BaseService):
    def __init__(self, config=None):
        super().__init__(config)
        self.qbounds = QboundsService(self.config)
        self.fisher = FisherService(self.config)

    def _levels(self, config: JCConfig) -> np.ndarray:
        return np.arange(config.n_max, dtype=float)

    def safe_indices(self, config: JCConfig) -> np.ndarray:
        """Indices 2n + a of field levels n < n_max - 1, where truncation cannot act."""
        return np.arange(2 * (config.n_max - 1))

    def evolution_operator(self, config: JCConfig) -> np.ndarray:
        """U_T on field ⊗ atom, index 2n + a with a = 0 for |g⟩ and 1 for |e⟩."""
        theta = config.pulse_area
        n = self._levels(config)
        a = annihilation(config.n_max)
        stay_ground = np.diag(np.cos(theta * np.sqrt(n)))
        stay_excited = np.diag(np.cos(theta * np.sqrt(n + 1.0)))
        emit = -1j * np.diag(_sinc_root(theta, n)) @ a.conj().T
        absorb = -1j * np.diag(_sinc_root(theta, n + 1.0)) @ a
        unitary = (np.kron(stay_ground, GROUND) + np.kron(stay_excited, EXCITED)
                   + np.kron(emit, LOWER) + np.kron(absorb, LOWER.T))

        safe = self.safe_indices(config)
        block = (unitary.conj().T @ unitary)[np.ix_(safe, safe)]
        defect = float(np.max(np.abs(block - np.eye(safe.size))))
        if defect > UNITARITY_TOLERANCE:
            raise NumericalError(f"truncation too small: unitarity defect {defect:.3g} with n_max = {config.n_max}")
        return unitary

    def detection_operators(self, config: JCConfig):
        """Field operators M_g = ⟨g|U_T|g⟩ and M_e = ⟨e|U_T|g⟩."""
        theta = config.pulse_area
        n = self._levels(config)
        m_g = np.diag(np.cos(theta * np.sqrt(n))).astype(complex)
        m_e = -1j * np.diag(_sinc_root(theta, n + 1.0)) @ annihilation(config.n_max)

        unitary = self.evolution_operator(config)
        for name, operator, block in (('M_g', m_g, unitary[0::2, 0::2]), ('M_e', m_e, unitary[1::2, 0::2])):
            defect = float(np.max(np.abs(operator - block)))
            if defect > OPERATOR_TOLERANCE:
                raise NumericalError(f"{name} disagrees with the evolution operator by {defect:.3g}")
        return m_g, m_e

    def povm(self, config: JCConfig):
        """Π_g = cos²(ΩT√N) and Π_e = sin²(ΩT√N)."""
        root = np.sqrt(self._levels(config))
        ground = np.cos(config.pulse_area * root) ** 2
        return np.diag(ground).astype(complex), np.diag(1.0 - ground).astype(complex)

    def povm_derivative(self, config: JCConfig):
        root = np.sqrt(self._levels(config))
        dground = -np.sin(2.0 * config.pulse_area * root) * config.interaction_time * root * config.drabi
        return np.diag(dground).astype(complex), np.diag(-dground).astype(complex)

    def _amplitudes(self, config: JCConfig):
        t = config.free_time
        amplitudes = np.zeros(config.n_max, dtype=complex)
        amplitudes[0] = config.c0 * np.exp(-0.5j * config.omega * t)
        amplitudes[1] = config.c1 * np.exp(-1.5j * config.omega * t)
        return amplitudes

    def outcome_probabilities(self, config: JCConfig) -> JCOutcomeDistribution:
        weight = abs(config.c1) ** 2
        p_e = weight * math.sin(config.pulse_area) ** 2
        p_g = abs(config.c0) ** 2 + weight * math.cos(config.pulse_area) ** 2

        psi = self._amplitudes(config)
        projector_g, _ = self.povm(config)
        traced = float(np.real(np.vdot(psi, projector_g @ psi)))
        if abs(traced - p_g) > PROBABILITY_TOLERANCE:
            raise NumericalError(f"free-evolution phases do not cancel: tr(Π_g ρ) = {traced!r}, p_g = {p_g!r}")
        return JCOutcomeDistribution(p_g=p_g, p_e=p_e)

    def outcome_distribution(self, config: JCConfig, omega: float) -> np.ndarray:
        return self.outcome_probabilities(config.with_omega(omega)).vector

    # -- parametric families over ω ------------------------------------------------------------

    def state_family(self, config: JCConfig) -> ParametricFamily:
        t = config.free_time
        energies = np.zeros(config.n_max)
        energies[:2] = (0.5, 1.5)

        def evaluator(omega):
            return StateVector('fock', self._amplitudes(config.with_omega(omega)))

        def derivative(omega):
            return -1j * t * energies * self._amplitudes(config.with_omega(omega))

        return ParametricFamily(evaluator, derivative=derivative, domain=(0.0, math.inf), name='ψ(ω)')

    def density_family(self, config: JCConfig) -> ParametricFamily:
        states = self.state_family(config)

        def derivative(omega):
            outer = np.outer(states.derivative(omega), states(omega).amplitudes.conj())
            return outer + outer.conj().T

        return ParametricFamily(lambda omega: states(omega).density(), derivative=derivative,
                                domain=(0.0, math.inf), name='ρ(ω)')

    def povm_family(self, config: JCConfig) -> POVMFamily:
        def elements(omega):
            return np.stack(self.povm(config.with_omega(omega)))

        def derivative(omega):
            return np.stack(self.povm_derivative(config.with_omega(omega)))

        family = ParametricFamily(elements, derivative=derivative, domain=(0.0, math.inf), name='Π(ω)')
        return POVMFamily(space=OutcomeSpace.discrete(LABELS), elements=family, name='atom detection')

    def outcome_model(self, config: JCConfig) -> ClassicalModel:
        weight = abs(config.c1) ** 2

        def derivative(omega):
            shifted = config.with_omega(omega)
            dp_g = -weight * math.sin(2.0 * shifted.pulse_area) * shifted.interaction_time * shifted.drabi
            return np.array([dp_g, -dp_g])

        family = ParametricFamily(lambda omega: self.outcome_distribution(config, omega), derivative=derivative,
                                  domain=(0.0, math.inf), name='p(ω)')
        return ClassicalModel(space=OutcomeSpace.discrete(LABELS), p=family, name='atom detection')

    # -- Fisher information --------------------------------------------------------------------

    def closed_form_fi(self, config: JCConfig) -> float:
        weight = abs(config.c1) ** 2
        theta = config.pulse_area
        denominator = 1.0 - weight * math.sin(theta) ** 2
        if denominator <= DEGENERATE_DENOMINATOR:
            logger.warning(f"Degenerate point |c1| = 1, sin²(ΩT) = 1 at ω={config.omega}: "
                           f"both outcome probabilities are stationary")
            return 0.0
        return (theta / config.omega) ** 2 * weight * math.cos(theta) ** 2 / denominator

    def closed_form_qfi(self, config: JCConfig) -> float:
        return 4.0 * config.free_time ** 2 * abs(config.c0 * config.c1) ** 2

    def numeric_qfi(self, config: JCConfig) -> float:
        return self.qbounds.qfi_pure(self.state_family(config), config.omega)

    def fi_report(self, config: JCConfig) -> QuantumFisherReport:
        return self.qbounds.povm_fi(self.density_family(config), self.povm_family(config), config.omega)

    def numeric_fi(self, config: JCConfig) -> float:
        return self.fi_report(config).total
