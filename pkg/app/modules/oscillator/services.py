import logging
import math
from functools import lru_cache

import numpy as np
from scipy.stats import poisson

from app.modules.fisher.models import ClassicalModel
from app.modules.fisher.services import FisherService
from app.modules.numcore.models import (
    OutcomeSpace,
    ParametricFamily,
    StateVector,
    annihilation,
    coherent_amplitudes,
    coherent_derivative,
    number,
)
from app.modules.oscillator.models import TAIL_MASS, FockExpansion, OscillatorConfig
from app.modules.qbounds.models import POVMFamily, ProjectiveFamily, QuantumFisherReport
from app.modules.qbounds.services import QboundsService
from core.exceptions.exceptions import ModelError, NumericalError
from core.services.BaseService import BaseService

logger = logging.getLogger(__name__)

MAX_LEVEL = 150
MAX_POWER = 12
MAX_HERMITE_INDEX = 60
SQRT_PI = math.sqrt(math.pi)


def _hermite_functions(n, y):
    """Normalized Hermite functions h_0..h_n at y.

    Runs H_{k+1} = 2yH_k - 2kH_{k-1} on h_k = (2^k k! √π)^{-1/2} H_k(y) e^{-y²/2}, which stays finite at large k.
    """
    y = np.asarray(y, dtype=float)
    values = [np.pi ** -0.25 * np.exp(-0.5 * y ** 2)]
    if n >= 1:
        values.append(math.sqrt(2.0) * y * values[0])
    for k in range(1, n):
        values.append(math.sqrt(2.0 / (k + 1)) * y * values[k] - math.sqrt(k / (k + 1)) * values[k - 1])
    return values


@lru_cache(maxsize=None)
def _hermite_integral(p, n, m):
    if p < 0 or n < 0 or m < 0:
        return 0.0
    if p == 0:
        return SQRT_PI * 2.0 ** n * math.factorial(n) if n == m else 0.0
    return (0.5 * (p - 1) * _hermite_integral(p - 2, n, m)
            + n * _hermite_integral(p - 1, n - 1, m)
            + m * _hermite_integral(p - 1, n, m - 1))


class OscillatorService(BaseService):
    def __init__(self, config=None):
        super().__init__(config)
        self.qbounds = QboundsService(self.config)
        self.fisher = FisherService(self.config)

    # -- spectrum and wavefunctions ------------------------------------------------------------

    def eigenstate(self, n: int, config: OscillatorConfig, xi):
        """ψ_n at ξ (in units of ℓ), normalized as a density in x."""
        if int(n) != n or n < 0:
            raise ModelError(f"Level must be a non-negative integer, got {n}.")
        if n > MAX_LEVEL:
            raise NumericalError(f"level {n} beyond the factorial overflow regime (n > {MAX_LEVEL})")
        if n > config.truncation:
            raise ModelError(f"level {n} above n_max = {config.truncation}")
        values = _hermite_functions(int(n), np.asarray(xi, dtype=float) + config.xi_g)
        result = (config.mass * config.omega) ** 0.25 * values[int(n)]
        return float(result) if np.ndim(result) == 0 else result

    def energy(self, n: int, config: OscillatorConfig) -> float:
        if n < 0:
            raise ModelError(f"Level must be non-negative, got {n}.")
        omega = config.omega
        return omega * (n + 0.5) - config.mass * config.gravity ** 2 / (2.0 * omega ** 2)

    def fock_coefficients(self, config: OscillatorConfig) -> FockExpansion:
        levels = config.truncation + 1
        tail = float(poisson.sf(levels - 1, config.mean_quanta))
        if tail >= TAIL_MASS:
            raise NumericalError(f"increase n_max: Fock tail mass {tail:.3g} beyond n_max = {levels - 1}")
        coefficients = coherent_amplitudes(-config.separation / math.sqrt(2.0), levels).real
        energies = np.array([self.energy(n, config) for n in range(levels)])
        return FockExpansion(coefficients=coefficients, energies=energies)

    def overlap_coefficients(self, config: OscillatorConfig) -> np.ndarray:
        """c_n = ∫ψ_n(x)ψ(x,0)dx by quadrature on the spatial grid."""
        grid = config.spatial_grid
        initial = self.wavefunction(config, grid.points * config.length, 0.0)
        values = _hermite_functions(config.truncation, grid.points + config.xi_g)
        scale = (config.mass * config.omega) ** 0.25 * config.length
        return np.array([self.qbounds.numcore.weighted_sum(grid, scale * np.real(h * initial)).value
                         for h in values])

    def wavefunction(self, config: OscillatorConfig, x, t):
        """Closed-form ψ(x, t) of the displaced ground state evolving under the shifted potential."""
        y = np.asarray(x, dtype=float) / config.length + config.xi_g
        d = config.separation
        phase = config.omega * t
        c, s = math.cos(phase), math.sin(phase)
        ground = self.energy(0, config)
        exponent = -0.5 * (y + d * c) ** 2 + 1j * (d * s * y + 0.5 * d ** 2 * c * s - ground * t)
        result = (config.mass * config.omega) ** 0.25 * SQRT_PI ** -0.5 * np.exp(exponent)
        return complex(result) if np.ndim(result) == 0 else result

    def expansion_wavefunction(self, config: OscillatorConfig, x, t):
        """Σ c_n ψ_n(x) e^{-iE_n t}, the spectral counterpart of wavefunction."""
        expansion = self.fock_coefficients(config)
        values = _hermite_functions(expansion.levels - 1, np.asarray(x, dtype=float) / config.length + config.xi_g)
        amplitudes = expansion.evolved(t)
        total = sum(a * h for a, h in zip(amplitudes, values))
        return (config.mass * config.omega) ** 0.25 * total

    def hamiltonian(self, config: OscillatorConfig, dim: int = None) -> np.ndarray:
        """H = ω(N + ½) + m g x̂ in the field-free Fock basis."""
        dim = config.hilbert_dim if dim is None else dim
        field_free = config.omega * (number(dim).real + 0.5 * np.eye(dim))
        return field_free + config.mass * config.gravity * self._position(config, dim)

    def _position(self, config, dim):
        a = annihilation(dim)
        return config.length * (a + a.T).real / math.sqrt(2.0)

    # -- closed forms --------------------------------------------------------------------------

    def _scale(self, config):
        return config.mass / config.omega ** 3

    def closed_form_qfi(self, config: OscillatorConfig) -> float:
        return 8.0 * self._scale(config) * math.sin(0.5 * config.omega * config.time) ** 2

    def closed_form_energy_fi(self, config: OscillatorConfig) -> float:
        return 2.0 * self._scale(config)

    def closed_form_kx(self, config: OscillatorConfig) -> float:
        return self._scale(config) * (2.0 + config.separation ** 2)

    def closed_form_kx_at_time(self, config: OscillatorConfig) -> float:
        """Tangent-vector sum for the state evolved to config.time."""
        swing = math.sin(config.omega * config.time) ** 2
        return self._scale(config) * (2.0 + 4.0 * config.separation ** 2 * swing)

    def closed_form_bound13(self, config: OscillatorConfig) -> float:
        return self.qbounds.projective_bound(self.closed_form_qfi(config), self.closed_form_kx(config))

    def closed_form_bound13_at_time(self, config: OscillatorConfig) -> float:
        return self.qbounds.projective_bound(self.closed_form_qfi(config), self.closed_form_kx_at_time(config))

    # -- Hermite integrals ---------------------------------------------------------------------

    def hermite_integral(self, p: int, n: int, m: int) -> float:
        """∫ ξ^p H_n(ξ) H_m(ξ) e^{-ξ²} dξ."""
        for name, value in (('p', p), ('n', n), ('m', m)):
            if int(value) != value:
                raise ModelError(f"Hermite integral index {name} must be an integer, got {value}.")
        if p < 0:
            raise ModelError(f"Hermite integral power must be non-negative, got {p}.")
        if p > MAX_POWER or n > MAX_HERMITE_INDEX or m > MAX_HERMITE_INDEX:
            raise NumericalError(f"Hermite integral I_{p}^{{{n},{m}}} is in the overflow regime "
                                 f"(p ≤ {MAX_POWER}, n, m ≤ {MAX_HERMITE_INDEX})")
        return _hermite_integral(int(p), int(n), int(m))

    def hermite_integral_closed_form(self, p: int, n: int, m: int) -> float:
        if p not in (0, 1, 2):
            raise ModelError(f"Closed forms exist for p ≤ 2 only, got p = {p}.")
        if n < 0 or m < 0:
            return 0.0

        def term(power, factorial, factor=1.0):
            return SQRT_PI * 2.0 ** power * math.factorial(factorial) * factor

        if p == 0:
            return term(n, n) if n == m else 0.0
        if p == 1:
            if m == n + 1:
                return term(n, n + 1)
            if m == n - 1:
                return term(n - 1, n)
            return 0.0
        if m == n + 2:
            return term(n, n + 2)
        if m == n:
            return term(n - 1, n, 1 + 2 * n)
        if m == n - 2:
            return term(n - 2, n)
        return 0.0

    # -- parametric families over g ------------------------------------------------------------

    def _amplitude(self, config: OscillatorConfig):
        """Coherent amplitude γ of the evolved state in the field-free basis and ∂γ/∂g."""
        rotation = np.exp(-1j * config.omega * config.time)
        gamma = -(config.separation * rotation + config.xi_g) / math.sqrt(2.0)
        dgamma = config.dxi_g * (rotation - 1.0) / math.sqrt(2.0)
        return gamma, dgamma

    def coefficient_family(self, config: OscillatorConfig) -> ParametricFamily:
        levels = config.truncation + 1

        def evaluator(g):
            return coherent_amplitudes(-config.with_gravity(g).separation / math.sqrt(2.0), levels).real

        def derivative(g):
            alpha = -config.with_gravity(g).separation / math.sqrt(2.0)
            amplitudes = coherent_amplitudes(alpha, levels)
            return coherent_derivative(alpha, config.dxi_g / math.sqrt(2.0), amplitudes).real

        return ParametricFamily(evaluator, derivative=derivative, name='c_n(g)')

    def energy_distribution_model(self, config: OscillatorConfig) -> ClassicalModel:
        """Outcome distribution p_n = |c_n(g)|² of an energy measurement."""
        coefficients = self.coefficient_family(config)
        family = ParametricFamily(lambda g: coefficients(g) ** 2,
                                  derivative=lambda g: 2.0 * coefficients(g) * coefficients.derivative(g),
                                  name='|c_n(g)|²')
        space = OutcomeSpace.discrete(range(config.truncation + 1))
        return ClassicalModel(space=space, p=family, name='energy')

    def state_family(self, config: OscillatorConfig) -> ParametricFamily:
        dim = config.hilbert_dim

        def evaluator(g):
            gamma, _ = self._amplitude(config.with_gravity(g))
            return StateVector('fock', coherent_amplitudes(gamma, dim))

        def derivative(g):
            gamma, dgamma = self._amplitude(config.with_gravity(g))
            return coherent_derivative(gamma, dgamma, coherent_amplitudes(gamma, dim))

        return ParametricFamily(evaluator, derivative=derivative, name='ψ(g)')

    def density_family(self, config: OscillatorConfig) -> ParametricFamily:
        states = self.state_family(config)

        def derivative(g):
            psi = states(g).amplitudes
            outer = np.outer(states.derivative(g), psi.conj())
            return outer + outer.conj().T

        return ParametricFamily(lambda g: states(g).density(), derivative=derivative, name='ρ(g)')

    def grid_state_family(self, config: OscillatorConfig) -> ParametricFamily:
        """ψ(x, t) on the spatial grid, as amplitudes ψ(x_i)√(w_i ℓ)."""
        grid = config.spatial_grid
        points = grid.points
        root_weights = np.sqrt(grid.weights * config.length)
        t = config.time
        c, s = math.cos(config.omega * t), math.sin(config.omega * t)

        def evaluator(g):
            shifted = config.with_gravity(g)
            return self.wavefunction(shifted, points * config.length, t) * root_weights

        def derivative(g):
            shifted = config.with_gravity(g)
            dxi = shifted.dxi_g
            d = shifted.separation
            y = points + shifted.xi_g
            dexponent = (-dxi * (1.0 - c) * (y + d * c) + 1j * dxi * s * (d - y) - 1j * dxi * c * s * d
                         + 1j * t * shifted.mass * g / shifted.omega ** 2)
            return evaluator(g) * dexponent

        return ParametricFamily(evaluator, derivative=derivative, name='ψ(x, g)')

    def _spectrum(self, config, dim):
        values, vectors = np.linalg.eigh(self.hamiltonian(config, dim))
        return values, vectors

    def eigenbasis_family(self, config: OscillatorConfig) -> ProjectiveFamily:
        """Eigenvectors of H(g) with tangents from first-order perturbation theory, ∂H/∂g = m x̂."""
        dim = config.hilbert_dim
        coupling = config.mass * self._position(config, dim)

        def basis(g):
            return self._spectrum(config.with_gravity(g), dim)[1]

        def tangents(g):
            values, vectors = self._spectrum(config.with_gravity(g), dim)
            elements = vectors.conj().T @ coupling @ vectors
            gaps = values[None, :] - values[:, None]
            np.fill_diagonal(gaps, 1.0)
            mixing = elements / gaps
            np.fill_diagonal(mixing, 0.0)
            return vectors @ mixing

        def eigenvalues(g):
            return np.linalg.eigvalsh(self.hamiltonian(config.with_gravity(g), dim))

        return ProjectiveFamily(space=OutcomeSpace.discrete(range(dim)),
                                basis=ParametricFamily(basis, derivative=tangents, name='|n_g⟩'),
                                eigenvalues=ParametricFamily(eigenvalues, name='E_n(g)'),
                                truncated=True, name='energy eigenbasis')

    def energy_povm(self, config: OscillatorConfig) -> POVMFamily:
        return self.qbounds.projective_povm(self.eigenbasis_family(config))

    # -- numerics ------------------------------------------------------------------------------

    def numeric_qfi(self, config: OscillatorConfig) -> float:
        return self.qbounds.qfi_pure(self.state_family(config), config.gravity)

    def numeric_grid_qfi(self, config: OscillatorConfig) -> float:
        return self.qbounds.qfi_pure(self.grid_state_family(config), config.gravity)

    def numeric_energy_fi(self, config: OscillatorConfig) -> float:
        return self.fisher.classical_fi(self.energy_distribution_model(config), config.gravity)

    def numeric_kx(self, config: OscillatorConfig) -> float:
        state = self.state_family(config)(config.gravity)
        return self.qbounds.kx(self.eigenbasis_family(config), state, config.gravity)

    def numeric_bound13_at_time(self, config: OscillatorConfig) -> float:
        return self.qbounds.projective_bound(self.numeric_qfi(config), self.numeric_kx(config))

    def energy_fi_report(self, config: OscillatorConfig) -> QuantumFisherReport:
        """Energy-measurement Fisher information split into state, POVM and cross terms."""
        logger.debug(f"Energy measurement report at g={config.gravity}, t={config.time}")
        return self.qbounds.povm_fi(self.density_family(config), self.energy_povm(config), config.gravity)

    def energy_distribution(self, config: OscillatorConfig, gravity: float) -> np.ndarray:
        shifted = config.with_gravity(gravity)
        return poisson.pmf(np.arange(shifted.truncation + 1), shifted.mean_quanta)
