import logging
import math

import numpy as np
import pytest
from scipy.stats import norm, poisson

from app.modules.fisher.models import ClassicalModel, FisherReport
from app.modules.fisher.services import FisherService
from app.modules.numcore.models import OutcomeSpace, ParametricFamily, SampleMeasure
from core.exceptions.exceptions import ModelError, NumericalError

GRID = OutcomeSpace.continuous(-12.0, 12.0, 4001)


@pytest.fixture(scope='module')
def fisher_service(test_config):
    return FisherService(test_config)


def gaussian_mean_model(sigma=1.0):
    family = ParametricFamily(lambda lam: norm.pdf(GRID.points, loc=lam, scale=sigma),
                              derivative=lambda lam: norm.pdf(GRID.points, loc=lam, scale=sigma)
                              * (GRID.points - lam) / sigma ** 2)
    return ClassicalModel(space=GRID, p=family, name='gaussian-mean')


def poisson_model(mu, levels=41):
    n = np.arange(levels)
    family = ParametricFamily(lambda lam: poisson.pmf(n, mu(lam)))
    return ClassicalModel(space=OutcomeSpace.discrete(range(levels)), p=family, name='poisson')


def two_point_model():
    """m_λ = (1+λ, 1-λ) with p chosen so that ∂p and ∂m share their sign at each outcome."""
    space = OutcomeSpace.discrete([0, 1])
    family = ParametricFamily(lambda lam: np.array([1.0 + lam, 1.0 - lam]) / (2.0 * (1.0 + lam ** 2)),
                              domain=(-1.0, 1.0))
    measure = SampleMeasure(lambda lam, x: 1.0 + lam * (1.0 - 2.0 * x),
                            derivative=lambda lam, x: 1.0 - 2.0 * x)
    return ClassicalModel(space=space, p=family, m=measure)


def factorized_model():
    """m_λ(x) = (1+λ²)(2+sin x) and p_λ = N(λ, 1)/m_λ."""
    def m1(lam):
        return 1.0 + lam ** 2

    def m2(x):
        return 2.0 + np.sin(x)

    family = ParametricFamily(lambda lam: norm.pdf(GRID.points, loc=lam) / (m1(lam) * m2(GRID.points)))
    measure = SampleMeasure(lambda lam, x: m1(lam) * m2(x), derivative=lambda lam, x: 2.0 * lam * m2(x))
    return ClassicalModel(space=GRID, p=family, m=measure), m1


def test_gaussian_mean_fisher_information(fisher_service):
    value = fisher_service.classical_fi(gaussian_mean_model(), 0.2)
    assert abs(value - 1.0) < 1e-8, f"Gaussian FI should be 1/σ², got {value}"


def test_gaussian_width_scaling(fisher_service):
    value = fisher_service.classical_fi(gaussian_mean_model(sigma=0.5), -0.4)
    assert abs(value - 4.0) < 1e-7


def test_parameter_independent_density_has_no_information(fisher_service):
    family = ParametricFamily(lambda lam: np.array([0.2, 0.3, 0.5]))
    model = ClassicalModel(space=OutcomeSpace.discrete([0, 1, 2]), p=family)
    assert fisher_service.classical_fi(model, 1.3) == 0.0


def test_oscillator_energy_distribution_fisher_information(fisher_service):
    # ξ_g = g and ξ_δ = 1 at unit mass, frequency and displacement.
    model = poisson_model(lambda g: 0.5 * (1.0 - g) ** 2)
    value = fisher_service.classical_fi(model, 0.0)
    assert abs(value - 2.0) < 1e-6, f"Expected F_H = 2, got {value}"


def test_generalized_reduces_to_classical_for_fixed_measure(fisher_service):
    base = gaussian_mean_model()
    model = ClassicalModel(space=GRID, p=ParametricFamily(lambda lam: 0.5 * base.p(lam)),
                           m=SampleMeasure(lambda lam, x: 2.0))
    report = fisher_service.generalized_fi(model, 0.7)
    assert abs(report.total - fisher_service.classical_fi(model, 0.7)) < 1e-12
    assert report.term_measure == 0.0
    assert report.term_cross == 0.0
    assert abs(report.total - 1.0) < 1e-8


def test_pure_reparametrization_carries_no_information(fisher_service):
    space = OutcomeSpace.discrete([0, 1, 2])
    q = np.array([0.1, 0.6, 0.3])
    model = ClassicalModel(space=space,
                           p=ParametricFamily(lambda lam: math.exp(-lam) * q,
                                              derivative=lambda lam: -math.exp(-lam) * q),
                           m=SampleMeasure(lambda lam, x: math.exp(lam), derivative=lambda lam, x: math.exp(lam)))
    report = fisher_service.generalized_fi(model, 0.4)
    assert abs(report.total) < 1e-8, f"∂ ln(m p) vanishes identically, got {report.total}"
    assert abs(report.term_state - 1.0) < 1e-12
    assert abs(report.term_measure - 1.0) < 1e-12


def test_factorized_measure_identity(fisher_service):
    model, m1 = factorized_model()
    lam = 0.6
    report = fisher_service.generalized_fi(model, lam)
    dlog_m1 = 2.0 * lam / m1(lam)
    assert abs(report.total - (report.term_state - dlog_m1 ** 2)) < 1e-8
    assert abs(report.total - 1.0) < 1e-8, "The measure factor only relabels the Gaussian mean model"


def test_report_terms_add_up(fisher_service):
    model, _ = factorized_model()
    report = fisher_service.generalized_fi(model, -0.3)
    parts = report.term_state + report.term_measure + report.term_cross
    assert abs(report.total - parts) <= 1e-9 * abs(parts)
    assert report.total >= 0.0
    assert report.error_estimate >= 0.0


def test_same_sign_derivatives_give_non_negative_cross_term(fisher_service):
    report = fisher_service.generalized_fi(two_point_model(), 0.2)
    assert report.term_cross >= 0.0
    assert report.total >= report.term_state


def test_score_expectation_vanishes(fisher_service):
    models = [gaussian_mean_model(), two_point_model(), factorized_model()[0],
              poisson_model(lambda g: 0.5 * (1.0 - g) ** 2)]
    for model in models:
        value = fisher_service.score_expectation(model, 0.3)
        assert abs(value) < 1e-8, f"Score expectation of {model!r} is {value}"


def test_reparametrization_rescales_fisher_information(fisher_service):
    lam = 0.35
    phi_family = ParametricFamily(lambda phi: norm.pdf(GRID.points, loc=math.log(phi)), domain=(0.0, math.inf))
    phi_model = ClassicalModel(space=GRID, p=phi_family)
    total_phi = fisher_service.generalized_fi(phi_model, math.exp(lam)).total
    total = fisher_service.generalized_fi(gaussian_mean_model(), lam).total
    assert abs(total_phi * math.exp(lam) ** 2 - total) < 1e-6


def test_product_model_fisher_information_is_additive(fisher_service):
    space = OutcomeSpace.discrete([0, 1])
    model = ClassicalModel(space=space,
                           p=ParametricFamily(lambda lam: np.array([math.cos(lam) ** 2, math.sin(lam) ** 2])))
    single = fisher_service.classical_fi(model, 0.4)
    assert abs(single - 4.0) < 1e-8
    for n in (2, 3):
        product = fisher_service.iid_product(model, n)
        assert product.space.size == 2 ** n
        assert abs(fisher_service.classical_fi(product, 0.4) - n * single) < 1e-7


def test_product_of_parameter_dependent_measures(fisher_service):
    model = two_point_model()
    single = fisher_service.generalized_fi(model, 0.2).total
    product = fisher_service.iid_product(model, 2)
    assert abs(fisher_service.generalized_fi(product, 0.2).total - 2.0 * single) < 1e-7


def test_crb_variance_bound(fisher_service):
    assert abs(fisher_service.crb_variance_bound(2.0, 100) - 0.005) < 1e-15
    assert fisher_service.crb_variance_bound(1.0, 1) == 1.0
    report = FisherReport(total=2.0, term_state=2.0, term_measure=0.0, term_cross=0.0)
    assert abs(fisher_service.crb_variance_bound(report, 10 ** 4) - 5e-5) < 1e-18
    with pytest.raises(ModelError, match="no information: bound infinite"):
        fisher_service.crb_variance_bound(0.0, 10)
    with pytest.raises(ModelError, match="positive integer"):
        fisher_service.crb_variance_bound(1.0, 0)


def test_singular_support_shift(fisher_service):
    model = ClassicalModel(space=OutcomeSpace.discrete([0, 1]),
                           p=ParametricFamily(lambda lam: np.array([lam, 1.0 - lam]),
                                              derivative=lambda lam: np.array([1.0, -1.0])))
    with pytest.raises(ModelError, match="singular support shift"):
        fisher_service.classical_fi(model, 0.0)


def test_zero_probability_with_zero_derivative_is_ignored(fisher_service):
    model = ClassicalModel(space=OutcomeSpace.discrete([0, 1, 2]),
                           p=ParametricFamily(lambda lam: np.array([math.cos(lam) ** 2, math.sin(lam) ** 2, 0.0])))
    assert abs(fisher_service.classical_fi(model, 0.4) - 4.0) < 1e-8


def test_measure_support_mismatch(fisher_service):
    model = ClassicalModel(space=OutcomeSpace.discrete([0, 1]),
                           p=ParametricFamily(lambda lam: np.array([0.5, 0.5])),
                           m=SampleMeasure(lambda lam, x: np.where(x == 0, 2.0, 0.0)))
    with pytest.raises(ModelError, match="measure support mismatch"):
        fisher_service.generalized_fi(model, 0.1)


def test_unnormalized_model_is_rejected(fisher_service):
    model = ClassicalModel(space=OutcomeSpace.discrete([0, 1]),
                           p=ParametricFamily(lambda lam: np.array([0.5, 0.5 + lam])))
    with pytest.raises(ModelError, match="model not normalized"):
        fisher_service.generalized_fi(model, 0.1)


def test_classical_fi_rejects_parameter_dependent_measure(fisher_service):
    with pytest.raises(ModelError, match="parameter-independent measure"):
        fisher_service.classical_fi(two_point_model(), 0.2)


def test_report_rejects_negative_total():
    with pytest.raises(NumericalError, match="negative Fisher information"):
        FisherReport(total=-0.5, term_state=0.5, term_measure=0.0, term_cross=-1.0)
    rounding = FisherReport(total=-1e-15, term_state=1e-15, term_measure=0.0, term_cross=-2e-15)
    assert rounding.total < 0.0


def test_terms_agree_with_direct_evaluation(fisher_service, caplog):
    model, _ = factorized_model()
    with caplog.at_level(logging.WARNING, logger='app.modules.fisher.services'):
        for lam in (-0.3, 0.2, 0.6):
            report = fisher_service.generalized_fi(model, lam)
            assert abs(report.total - 1.0) < 1e-8
    assert 'disagree' not in caplog.text
