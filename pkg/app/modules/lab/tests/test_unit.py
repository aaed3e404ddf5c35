import math

import numpy as np
import pytest

from app.modules.lab.models import MonteCarloConfig, SweepSpec, SweepTable
from app.modules.lab.services import LabService
from core.exceptions.exceptions import EstimationError, ModelError
from core.serialisers.table import dumps_csv, loads_csv, read_csv, write_csv


@pytest.fixture(scope='module')
def lab_service(test_app):
    return LabService(test_app.config, test_app.models)


@pytest.fixture(scope='module')
def time_sweep(lab_service):
    spec = SweepSpec(model='oscillator', variable='t', lo=0.0, hi=4 * math.pi, steps=401,
                     outputs=('J', 'F_H', 'bound13'))
    return lab_service.sweep(spec)


def bernoulli(value):
    return np.array([value, 1.0 - value])


def test_registered_models(test_app):
    assert {'oscillator', 'jc', 'measure'} <= set(test_app.models)
    assert test_app.get_model('jc').parameter == 'omega'
    with pytest.raises(ModelError, match="Unknown model"):
        test_app.get_model('pendulum')


def test_quantity_model_lookup(test_app):
    model = test_app.get_model('oscillator')
    assert model.method('J') == 'closed_form_qfi'
    assert model.method('J', numeric=True) == 'numeric_qfi'
    assert model.method('K_X', numeric=True) == 'closed_form_kx'
    with pytest.raises(ModelError, match="Unknown quantity 'Q'"):
        model.method('Q')
    with pytest.raises(ModelError, match="Unknown parameter"):
        model.config(mass=2.0)


def test_monte_carlo_config_validation():
    with pytest.raises(ModelError, match="must contain the true value"):
        MonteCarloConfig(model='jc', true_value=2.0, shots=10, trials=2, seed=1, grid=(0.5, 1.5, 101))
    with pytest.raises(ModelError, match="at least 11 points"):
        MonteCarloConfig(model='jc', true_value=1.0, shots=10, trials=2, seed=1, grid=(0.5, 1.5, 10))
    with pytest.raises(ModelError, match="shots"):
        MonteCarloConfig(model='jc', true_value=1.0, shots=0, trials=2, seed=1, grid=(0.5, 1.5, 101))
    with pytest.raises(ModelError, match="64-bit"):
        MonteCarloConfig(model='jc', true_value=1.0, shots=10, trials=2, seed=-1, grid=(0.5, 1.5, 101))


def test_sweep_spec_validation():
    with pytest.raises(ModelError, match="at least 2 steps"):
        SweepSpec(model='oscillator', variable='t', lo=0.0, hi=1.0, steps=1, outputs=('J',))
    with pytest.raises(ModelError, match="at least one output"):
        SweepSpec(model='oscillator', variable='t', lo=0.0, hi=1.0, steps=5, outputs=())
    with pytest.raises(ModelError, match="both swept and fixed"):
        SweepSpec(model='oscillator', variable='t', lo=0.0, hi=1.0, steps=5, outputs=('J',), fixed={'t': 1.0})


def test_sample_single_outcome(lab_service):
    assert lab_service.sample([0.0, 1.0, 0.0], 5, seed=3).tolist() == [0, 5, 0]


def test_sample_concentrates(lab_service):
    counts = lab_service.sample([0.5, 0.5], 10 ** 6, seed=42)
    assert counts.sum() == 10 ** 6
    assert abs(counts[0] - 5 * 10 ** 5) < 5 * 500


def test_sample_is_reproducible_per_trial(lab_service):
    p = [0.2, 0.3, 0.5]
    first = lab_service.sample(p, 1000, seed=7, trial=4)
    assert np.array_equal(first, lab_service.sample(p, 1000, seed=7, trial=4))
    assert not np.array_equal(first, lab_service.sample(p, 1000, seed=7, trial=5))


def test_sample_rejects_unnormalized(lab_service):
    with pytest.raises(ModelError, match="not normalized"):
        lab_service.sample([0.5, 0.6], 10, seed=1)


def test_mle_at_expected_counts(lab_service):
    grid = np.linspace(0.1, 0.9, 81)
    distributions = np.array([bernoulli(value) for value in grid])
    estimate = lab_service.mle([300, 700], grid, distributions)
    assert estimate == pytest.approx(0.3, abs=0.01)


def test_mle_breaks_ties_toward_lower_value(lab_service):
    grid = np.arange(11.0)
    heights = [0.1, 0.1, 0.1, 0.1, 0.5, 0.2, 0.5, 0.1, 0.1, 0.1, 0.1]
    distributions = np.array([bernoulli(value) for value in heights])
    estimate = lab_service.mle([1, 0], grid, distributions)
    assert 4.0 < estimate < 4.5


def test_mle_rejects_flat_likelihood(lab_service):
    grid = np.linspace(0.0, 1.0, 11)
    distributions = np.array([bernoulli(0.5)] * 11)
    with pytest.raises(EstimationError, match="estimate at boundary"):
        lab_service.mle([3, 3], grid, distributions)


def test_mle_rejects_boundary_maximum(lab_service):
    grid = np.linspace(0.1, 0.9, 81)
    distributions = np.array([bernoulli(value) for value in grid])
    with pytest.raises(EstimationError, match="estimate at boundary: widen grid"):
        lab_service.mle([50, 0], grid, distributions)


def test_crb_experiment_needs_two_trials(lab_service):
    cfg = MonteCarloConfig(model='jc', true_value=1.0, shots=100, trials=1, seed=1, grid=(0.8, 1.2, 101))
    with pytest.raises(ModelError, match="trials ≥ 2 required"):
        lab_service.crb_experiment(cfg)


def test_crb_experiment_custom_distribution(lab_service):
    cfg = MonteCarloConfig(model='bernoulli', true_value=0.3, shots=1000, trials=300, seed=11,
                           grid=(0.2, 0.4, 201))
    report = lab_service.crb_experiment(cfg, distribution=bernoulli, fisher=1 / (0.3 * 0.7))
    assert report.crb == pytest.approx(0.21 / 1000)
    assert len(report.estimates) == 300
    assert report.ratio >= 1 - 3 * report.sigma
    assert report.ci95[0] <= report.ratio <= report.ci95[1]


def test_jc_predicted_bound(test_app, lab_service):
    model = test_app.get_model('jc')
    service = model.service_class(test_app.config)
    fisher = service.closed_form_fi(model.config(c1=1.0, omega=1.0, kappa=1.0, T=1.0))
    assert fisher == pytest.approx(1.0)
    assert lab_service.fisher.crb_variance_bound(fisher, 10 ** 4) == pytest.approx(1e-4)


@pytest.mark.slow
def test_jc_estimator_saturates_cramer_rao_bound(lab_service):
    cfg = MonteCarloConfig(model='jc', true_value=1.0, shots=10 ** 4, trials=500, seed=2024,
                           grid=(0.9, 1.1, 401), parameters={'c1': 1.0, 'kappa': 1.0, 'T': 1.0})
    report = lab_service.crb_experiment(cfg)
    assert 0.85 <= report.ratio <= 1.2
    assert report.ratio >= 1 - 3 * report.sigma


@pytest.mark.slow
def test_jc_estimator_is_unbiased(lab_service):
    cfg = MonteCarloConfig(model='jc', true_value=1.0, shots=10 ** 4, trials=200, seed=99,
                           grid=(0.9, 1.1, 401), parameters={'c1': 1.0})
    report = lab_service.crb_experiment(cfg)
    stderr = math.sqrt(report.empirical_var / 200)
    assert abs(report.mean_estimate - 1.0) < 3 * stderr


def test_oscillator_energy_estimation(lab_service):
    cfg = MonteCarloConfig(model='oscillator', true_value=0.5, shots=2000, trials=100, seed=5,
                           grid=(0.0, 1.0, 201))
    report = lab_service.crb_experiment(cfg)
    assert report.fisher == pytest.approx(2.0)
    assert report.ratio >= 1 - 3 * report.sigma


def test_sweep_rejects_unknown_quantity(lab_service):
    spec = SweepSpec(model='oscillator', variable='t', lo=0.0, hi=1.0, steps=3, outputs=('J', 'Q'))
    with pytest.raises(ModelError, match="Unknown quantity"):
        lab_service.sweep(spec)


def test_sweep_rejects_unknown_variable(lab_service):
    spec = SweepSpec(model='oscillator', variable='x', lo=0.0, hi=1.0, steps=3, outputs=('J',))
    with pytest.raises(ModelError, match="Unknown parameter"):
        lab_service.sweep(spec)


def test_time_sweep_anchor_rows(time_sweep):
    assert time_sweep.columns == ('t', 'J', 'F_H', 'bound13')
    assert time_sweep.rows[0][1:] == pytest.approx((0.0, 2.0, 3.0), abs=1e-12)
    assert time_sweep.rows[100][0] == pytest.approx(math.pi)
    assert time_sweep.rows[100][1:] == pytest.approx((8.0, 2.0, 11 + 4 * math.sqrt(6)), rel=1e-12)


def test_time_sweep_energy_measurement_beats_qfi_periodically(time_sweep):
    t = time_sweep.column('t')
    qfi = time_sweep.column('J')
    energy = time_sweep.column('F_H')
    offset = np.abs(np.remainder(t + math.pi, 2 * math.pi) - math.pi)
    assert np.array_equal(energy > qfi, offset < math.pi / 3)
    assert np.all(energy <= time_sweep.column('bound13'))


def test_time_sweep_qfi_period(time_sweep):
    qfi = time_sweep.column('J')
    assert np.allclose(qfi[:201], qfi[200:], rtol=0, atol=1e-12)


def test_numeric_sweep_matches_closed_forms(lab_service):
    closed = lab_service.sweep(SweepSpec(model='jc', variable='T', lo=0.2, hi=1.2, steps=5, outputs=('F', 'J'),
                                         fixed={'c1': 0.6, 't': 1.0}))
    numeric = lab_service.sweep(SweepSpec(model='jc', variable='T', lo=0.2, hi=1.2, steps=5, outputs=('F', 'J'),
                                          fixed={'c1': 0.6, 't': 1.0}, numeric=True))
    for left, right in zip(closed.rows, numeric.rows):
        assert right == pytest.approx(left, rel=1e-7)


def test_sweep_csv_round_trip(time_sweep, tmp_path):
    path = tmp_path / 'sweep.csv'
    write_csv(path, time_sweep.columns, time_sweep.rows)
    text = path.read_bytes().decode('utf-8')
    assert text.startswith('t,J,F_H,bound13\n')
    assert '\r' not in text
    columns, rows = read_csv(path)
    assert dumps_csv(columns, rows) == text
    assert SweepTable(tuple(columns), tuple(map(tuple, rows))).column('J').tolist() == time_sweep.column('J').tolist()
    assert loads_csv(text)[0] == list(time_sweep.columns)


def test_time_sweep_pins_both_tangent_vector_sums(test_app, lab_service):
    model = test_app.get_model('oscillator')
    service = model.service_class(test_app.config)
    table = lab_service.sweep(SweepSpec(model='oscillator', variable='t', lo=0.0, hi=2 * math.pi, steps=13,
                                        outputs=('K_X', 'K_X_t')))
    t = table.column('t')
    assert np.all(table.column('K_X') == service.closed_form_kx(model.config()))
    assert np.all(table.column('K_X') == 3.0)
    assert np.allclose(table.column('K_X_t'), 2.0 + 4.0 * np.sin(t) ** 2, rtol=0, atol=1e-12)
    assert table.rows[1][2] == pytest.approx(table.rows[1][1], abs=1e-12)
