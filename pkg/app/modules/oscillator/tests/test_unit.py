import math

import numpy as np
import pytest
from scipy.integrate import trapezoid
from scipy.special import eval_hermite

from app.modules.numcore.models import ParametricFamily
from app.modules.oscillator.models import FockExpansion, OscillatorConfig
from app.modules.oscillator.services import OscillatorService
from app.modules.qbounds.models import ProjectiveFamily
from core.exceptions.exceptions import ModelError, NumericalError

UNIT = OscillatorConfig.from_frequency(mass=1.0, omega=1.0, gravity=0.0, displacement=1.0)


@pytest.fixture(scope='module')
def oscillator_service(test_config):
    return OscillatorService(test_config)


def overlap(service, config, n, k):
    grid = config.spatial_grid
    values = service.eigenstate(n, config, grid.points) * service.eigenstate(k, config, grid.points)
    return trapezoid(values, grid.points) * config.length


def test_config_derived_quantities():
    config = OscillatorConfig(mass=2.0, stiffness=8.0, gravity=0.5, displacement=0.25)
    assert config.omega == 2.0
    assert abs(config.length - 0.5) < 1e-15
    assert abs(config.xi_g - 2.0 * 0.5 / (8.0 * 0.5)) < 1e-15
    assert abs(config.xi_delta - 0.5) < 1e-15
    assert abs(config.dxi_g - math.sqrt(2.0) * 2.0 ** -1.5) < 1e-15
    assert config.truncation >= 20
    grid = config.spatial_grid
    assert grid.grid_points == 2001
    assert abs(grid.hi - (config.xi_delta + config.xi_g + 10.0)) < 1e-12


def test_config_validation():
    with pytest.raises(ModelError, match="mass must be positive"):
        OscillatorConfig(mass=0.0)
    with pytest.raises(ModelError, match="stiffness must be positive"):
        OscillatorConfig(stiffness=-1.0)
    with pytest.raises(ModelError, match="non-negative"):
        OscillatorConfig(time=-1.0)
    with pytest.raises(ModelError, match="frequency must be positive"):
        OscillatorConfig.from_frequency(omega=0.0)


def test_ground_state_at_origin(oscillator_service):
    config = OscillatorConfig.from_frequency(displacement=0.0)
    assert abs(oscillator_service.eigenstate(0, config, 0.0) - math.pi ** -0.25) < 1e-15


def test_eigenstates_are_orthonormal(oscillator_service):
    for n in range(11):
        for k in range(11):
            expected = 1.0 if n == k else 0.0
            value = overlap(oscillator_service, UNIT, n, k)
            assert abs(value - expected) < 1e-8, f"⟨ψ_{n}|ψ_{k}⟩ = {value}"


def test_eigenstate_parity(oscillator_service):
    xi = np.linspace(0.0, 4.0, 9)
    for n in range(6):
        left = oscillator_service.eigenstate(n, UNIT, -xi)
        right = oscillator_service.eigenstate(n, UNIT, xi)
        assert np.allclose(left, (-1) ** n * right, atol=1e-14)


def test_eigenstate_matches_hermite_polynomials(oscillator_service):
    xi = np.linspace(-3.0, 3.0, 13)
    for n in range(8):
        expected = (math.pi ** -0.25 / math.sqrt(2.0 ** n * math.factorial(n))
                    * eval_hermite(n, xi) * np.exp(-0.5 * xi ** 2))
        assert np.allclose(oscillator_service.eigenstate(n, UNIT, xi), expected, atol=1e-12)


def test_eigenstate_level_limits(oscillator_service):
    with pytest.raises(ModelError, match="above n_max"):
        oscillator_service.eigenstate(UNIT.truncation + 1, UNIT, 0.0)
    with pytest.raises(NumericalError, match="overflow"):
        oscillator_service.eigenstate(151, OscillatorConfig.from_frequency(n_max=200), 0.0)


def test_energy_spectrum(oscillator_service):
    assert oscillator_service.energy(0, UNIT) == 0.5
    assert oscillator_service.energy(1, OscillatorConfig.from_frequency(omega=2.0)) == 3.0
    shifted = OscillatorConfig.from_frequency(mass=2.0, omega=1.5, gravity=0.7)
    free = OscillatorConfig.from_frequency(mass=2.0, omega=1.5)
    for n in range(5):
        shift = oscillator_service.energy(n, shifted) - oscillator_service.energy(n, free)
        assert abs(shift + 2.0 * 0.7 ** 2 / (2.0 * 1.5 ** 2)) < 1e-14


def test_hamiltonian_spectrum_matches_energies(oscillator_service):
    config = OscillatorConfig.from_frequency(mass=1.3, omega=0.8, gravity=0.5)
    values = np.linalg.eigvalsh(oscillator_service.hamiltonian(config))
    expected = [oscillator_service.energy(n, config) for n in range(10)]
    assert np.allclose(values[:10], expected, atol=1e-9)


def test_fock_coefficients_of_undisplaced_preparation(oscillator_service):
    config = UNIT.with_gravity(1.0)
    expansion = oscillator_service.fock_coefficients(config)
    assert expansion.coefficients[0] == 1.0
    assert np.all(expansion.coefficients[1:] == 0.0)


def test_fock_coefficients_are_poissonian(oscillator_service):
    expansion = oscillator_service.fock_coefficients(UNIT)
    assert abs(expansion.probabilities[0] - math.exp(-0.5)) < 1e-12
    levels = np.arange(expansion.levels)
    expected = np.array([(-1) ** n / math.sqrt(2.0 ** n * math.factorial(n)) * math.exp(-0.25) for n in levels])
    assert np.allclose(expansion.coefficients, expected, atol=1e-15)

    wide = oscillator_service.fock_coefficients(OscillatorConfig.from_frequency(n_max=40))
    assert wide.levels == 41
    assert abs(np.sum(wide.probabilities) - 1.0) < 1e-10


def test_fock_coefficients_match_grid_overlaps(oscillator_service):
    for config in (UNIT, OscillatorConfig.from_frequency(mass=2.0, omega=1.0, gravity=0.3, displacement=0.5)):
        expansion = oscillator_service.fock_coefficients(config)
        overlaps = oscillator_service.overlap_coefficients(config)
        assert np.allclose(expansion.coefficients.real, overlaps, atol=1e-7)


def test_fock_coefficients_need_enough_levels(oscillator_service):
    with pytest.raises(NumericalError, match="increase n_max"):
        oscillator_service.fock_coefficients(OscillatorConfig.from_frequency(displacement=3.0, n_max=2))


def test_fock_expansion_validation():
    with pytest.raises(ModelError, match="not normalized"):
        FockExpansion(coefficients=[1.0, 1.0], energies=[0.5, 1.5])


def test_initial_wavefunction(oscillator_service):
    x = np.linspace(-4.0, 4.0, 17)
    config = OscillatorConfig.from_frequency(mass=2.0, omega=1.0, gravity=0.3, displacement=0.5)
    xi = x / config.length
    expected = (config.mass * config.omega / math.pi) ** 0.25 * np.exp(-0.5 * (xi + config.xi_delta) ** 2)
    assert np.allclose(oscillator_service.wavefunction(config, x, 0.0), expected, atol=1e-14)


def test_wavefunction_stays_normalized(oscillator_service):
    grid = UNIT.spatial_grid
    for t in (0.0, 1.0, math.pi):
        density = np.abs(oscillator_service.wavefunction(UNIT, grid.points * UNIT.length, t)) ** 2
        assert abs(trapezoid(density, grid.points) * UNIT.length - 1.0) < 1e-8


def test_ground_state_is_stationary(oscillator_service):
    config = OscillatorConfig.from_frequency(displacement=0.0)
    x = np.linspace(-3.0, 3.0, 13)
    for t in (0.3, 2.0):
        expected = oscillator_service.eigenstate(0, config, x) * np.exp(-0.5j * t)
        assert np.allclose(oscillator_service.wavefunction(config, x, t), expected, atol=1e-14)


def test_wavefunction_matches_spectral_sum(oscillator_service):
    config = OscillatorConfig.from_frequency(mass=2.0, omega=1.0, gravity=0.3, displacement=0.5)
    x = config.spatial_grid.points[::50] * config.length
    for t in (0.0, 1.0, 4.0):
        closed = oscillator_service.wavefunction(config, x, t)
        spectral = oscillator_service.expansion_wavefunction(config, x, t)
        assert np.allclose(closed, spectral, atol=1e-7)


def test_closed_forms(oscillator_service):
    assert abs(oscillator_service.closed_form_qfi(UNIT.with_time(math.pi)) - 8.0) < 1e-14
    assert oscillator_service.closed_form_qfi(UNIT) == 0.0
    assert abs(oscillator_service.closed_form_qfi(UNIT.with_time(math.pi / 2)) - 4.0) < 1e-14
    assert oscillator_service.closed_form_energy_fi(UNIT) == 2.0
    assert oscillator_service.closed_form_energy_fi(OscillatorConfig.from_frequency(mass=2.0)) == 4.0
    assert oscillator_service.closed_form_kx(UNIT) == 3.0
    assert oscillator_service.closed_form_kx(UNIT.with_gravity(1.0)) == 2.0
    assert abs(oscillator_service.closed_form_bound13(UNIT.with_time(math.pi))
               - (11.0 + 4.0 * math.sqrt(6.0))) < 1e-12
    assert abs(oscillator_service.closed_form_kx_at_time(UNIT.with_time(math.pi / 6)) - 3.0) < 1e-14


def test_energy_measurement_fisher_information(oscillator_service):
    for config in (UNIT, OscillatorConfig.from_frequency(mass=2.0, omega=1.0, displacement=0.5, gravity=0.3)):
        numeric = oscillator_service.numeric_energy_fi(config)
        closed = oscillator_service.closed_form_energy_fi(config)
        assert abs(numeric - closed) <= 1e-6 * closed, f"F_H = {numeric}, expected {closed}"


def test_energy_measurement_fisher_information_is_time_independent(oscillator_service):
    values = [oscillator_service.numeric_energy_fi(UNIT.with_time(t)) for t in np.linspace(0.0, 4.0 * math.pi, 9)]
    assert max(values) - min(values) < 1e-8


def test_coefficient_derivative_matches_differences(oscillator_service):
    family = oscillator_service.coefficient_family(UNIT)
    differenced = ParametricFamily(family.evaluator)
    numcore = oscillator_service.qbounds.numcore
    assert np.allclose(family.derivative(0.2), numcore.fd_derivative(differenced, 0.2), atol=1e-8)


def test_quantum_fisher_information_of_evolved_state(oscillator_service):
    for g in (0.0, 0.5):
        for t in (0.1, 1.0, math.pi, 5.0):
            config = UNIT.with_gravity(g).with_time(t)
            closed = oscillator_service.closed_form_qfi(config)
            numeric = oscillator_service.numeric_qfi(config)
            assert abs(numeric - closed) <= 1e-5 * closed, f"J = {numeric}, expected {closed} at g={g}, t={t}"


def test_quantum_fisher_information_over_two_periods(oscillator_service):
    for t in np.linspace(0.0, 4.0 * math.pi, 50):
        config = UNIT.with_time(t)
        closed = oscillator_service.closed_form_qfi(config)
        assert abs(oscillator_service.numeric_qfi(config) - closed) <= 1e-5 * closed + 1e-12


def test_quantum_fisher_information_from_wavefunction_grid(oscillator_service):
    config = UNIT.with_time(math.pi)
    assert abs(oscillator_service.numeric_grid_qfi(config) - 8.0) < 1e-5 * 8.0


def test_state_derivative_matches_differences(oscillator_service):
    config = UNIT.with_time(1.0)
    family = oscillator_service.state_family(config)
    differenced = ParametricFamily(family.evaluator)
    numcore = oscillator_service.qbounds.numcore
    assert np.allclose(family.derivative(0.1), numcore.fd_derivative(differenced, 0.1), atol=1e-8)

    grid_family = oscillator_service.grid_state_family(config)
    assert np.allclose(grid_family.derivative(0.1), numcore.fd_derivative(ParametricFamily(grid_family.evaluator), 0.1),
                       atol=1e-8)


@pytest.mark.parametrize('gravity, displacement, expected', [(0.0, 1.0, 3.0), (0.0, 2.0, 6.0), (1.0, 1.0, 2.0)])
def test_tangent_vector_sum(oscillator_service, gravity, displacement, expected):
    config = OscillatorConfig.from_frequency(gravity=gravity, displacement=displacement, time=math.pi / 6)
    closed = oscillator_service.closed_form_kx(config)
    assert abs(closed - expected) < 1e-12
    numeric = oscillator_service.numeric_kx(config)
    assert abs(numeric - closed) <= 1e-5 * closed, f"K_X = {numeric}, expected {closed}"


def test_tangent_vector_sum_follows_the_evolution(oscillator_service):
    for t in (0.0, 1.0, 2.5):
        config = UNIT.with_time(t)
        closed = oscillator_service.closed_form_kx_at_time(config)
        assert abs(oscillator_service.numeric_kx(config) - closed) <= 1e-5 * closed


def test_tangent_vectors_match_phase_aligned_differences(oscillator_service):
    config = UNIT.with_time(1.0)
    proj = oscillator_service.eigenbasis_family(config)
    differenced = ProjectiveFamily(space=proj.space, basis=ParametricFamily(proj.basis.evaluator),
                                   eigenvalues=proj.eigenvalues, truncated=True)
    state = oscillator_service.state_family(config)(0.0)
    analytic = oscillator_service.qbounds.kx(proj, state, 0.0)
    numeric = oscillator_service.qbounds.kx(differenced, state, 0.0)
    assert abs(analytic - numeric) <= 1e-6 * analytic


def test_energy_projectors_recover_energy_fisher_information(oscillator_service):
    config = UNIT.with_time(0.2)
    report = oscillator_service.energy_fi_report(config)
    assert abs(report.total - 2.0) < 1e-5
    assert report.total > oscillator_service.numeric_qfi(config), "F_H exceeds J for short times"
    assert report.total <= oscillator_service.numeric_bound13_at_time(config) + 1e-6


@pytest.mark.parametrize('gravity', [0.0, 0.5])
def test_energy_measurement_respects_projective_bound_over_the_sweep(oscillator_service, gravity):
    for t in np.linspace(0.05, 4.0 * math.pi - 0.05, 24):
        config = UNIT.with_gravity(gravity).with_time(t)
        total = oscillator_service.energy_fi_report(config).total
        bound = oscillator_service.qbounds.projective_bound(oscillator_service.numeric_qfi(config),
                                                            oscillator_service.numeric_kx(config))
        assert total <= bound + 1e-6, f"F_H = {total} above the bound {bound} at g={gravity}, t={t}"


def test_hermite_integral_examples(oscillator_service):
    assert abs(oscillator_service.hermite_integral(0, 1, 1) - 2.0 * math.sqrt(math.pi)) < 1e-14
    assert abs(oscillator_service.hermite_integral(1, 0, 1) - math.sqrt(math.pi)) < 1e-14
    assert abs(oscillator_service.hermite_integral(2, 0, 0) - math.sqrt(math.pi) / 2.0) < 1e-14
    assert oscillator_service.hermite_integral(3, 2, -1) == 0.0


def test_hermite_integral_matches_quadrature(oscillator_service):
    xi = np.linspace(-12.0, 12.0, 4001)
    weight = np.exp(-xi ** 2)
    for p in range(5):
        for n in range(9):
            for m in range(9):
                quadrature = trapezoid(xi ** p * eval_hermite(n, xi) * eval_hermite(m, xi) * weight, xi)
                value = oscillator_service.hermite_integral(p, n, m)
                scale = math.sqrt(math.pi * 2.0 ** n * math.factorial(n) * 2.0 ** m * math.factorial(m))
                assert abs(quadrature - value) <= 1e-8 * max(abs(value), scale), f"I_{p}^{{{n},{m}}}"


def test_hermite_integral_matches_closed_forms(oscillator_service):
    for p in range(3):
        for n in range(11):
            for m in range(11):
                closed = oscillator_service.hermite_integral_closed_form(p, n, m)
                value = oscillator_service.hermite_integral(p, n, m)
                assert (closed == 0.0) == (value == 0.0), f"Kronecker pattern differs for I_{p}^{{{n},{m}}}"
                assert abs(closed - value) <= 1e-12 * abs(closed)


def test_hermite_integral_limits(oscillator_service):
    with pytest.raises(NumericalError, match="overflow"):
        oscillator_service.hermite_integral(13, 0, 0)
    with pytest.raises(NumericalError, match="overflow"):
        oscillator_service.hermite_integral(0, 61, 61)
    with pytest.raises(ModelError, match="non-negative"):
        oscillator_service.hermite_integral(-1, 0, 0)
    with pytest.raises(ModelError, match="p ≤ 2"):
        oscillator_service.hermite_integral_closed_form(3, 0, 0)
