import itertools
import logging
from dataclasses import dataclass
from functools import reduce

import numpy as np

from app.modules.fisher.models import ClassicalModel, FisherReport
from app.modules.numcore.models import OutcomeSpace, ParametricFamily, SampleMeasure, as_array
from app.modules.numcore.services import NORMALIZATION_TOLERANCE, NumcoreService
from core.exceptions.exceptions import ModelError, NumericalError
from core.services.BaseService import BaseService

logger = logging.getLogger(__name__)

CONSISTENCY_TOLERANCE = 1e-8


@dataclass(frozen=True)
class ModelFields:
    """Nodal values of p, ∂p, m and ∂m at one parameter value."""
    p: np.ndarray
    dp: np.ndarray
    m: np.ndarray
    dm: np.ndarray


class FisherService(BaseService):
    def __init__(self, config=None):
        super().__init__(config)
        self.numcore = NumcoreService(self.config)

    def density(self, model: ClassicalModel, lam: float) -> np.ndarray:
        values = np.asarray(as_array(model.p(lam)), dtype=float)
        if values.shape != (model.space.size,):
            raise ModelError(f"Density has shape {values.shape}, expected ({model.space.size},).")
        if not np.all(np.isfinite(values)):
            raise NumericalError("non-finite integrand")
        if np.any(values < -self.floor):
            raise ModelError(f"Density is negative at λ={lam}.")
        return np.clip(values, 0.0, None)

    def measure_family(self, model: ClassicalModel) -> ParametricFamily:
        derivative = None
        if model.m.derivative is not None:
            def derivative(lam):
                return model.m.derivative_values(lam, model.space)
        return ParametricFamily(lambda lam: model.m.values(lam, model.space), derivative=derivative,
                                fd_step=model.p.fd_step, domain=model.p.domain)

    def fields(self, model: ClassicalModel, lam: float) -> ModelFields:
        p = self.density(model, lam)
        dp = np.asarray(self.numcore.fd_derivative(model.p, lam), dtype=float)
        measure = self.measure_family(model)
        m = measure(lam)
        dm = np.asarray(self.numcore.fd_derivative(measure, lam), dtype=float)
        return ModelFields(p=p, dp=dp, m=m, dm=dm)

    def normalization(self, model: ClassicalModel, lam: float) -> float:
        m = model.m.values(lam, model.space)
        return self.numcore.weighted_sum(model.space, m * self.density(model, lam)).value

    def check_normalized(self, model: ClassicalModel, lam: float, stencil=False):
        points = [lam]
        if stencil:
            lower, upper, _ = self.numcore.stencil(model.p, lam)
            points.extend([lower, upper])
        for point in points:
            total = self.normalization(model, point)
            if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
                raise ModelError(f"model not normalized at λ={point}: ∫ m p = {total:.12g}")

    def is_measure_independent(self, model: ClassicalModel, lam: float) -> bool:
        """True iff ∂m vanishes identically on the grid (analytic, or by finite differences)."""
        measure = self.measure_family(model)
        return bool(np.all(np.asarray(self.numcore.fd_derivative(measure, lam)) == 0.0))

    def _supported(self, fields: ModelFields):
        """Mask of nodes carrying probability mass; raises on ill-posed nodes."""
        q = fields.m * fields.p
        supported = q >= self.floor
        if np.any(~supported & (fields.p >= self.floor) & (fields.m <= 0.0)):
            raise ModelError("measure support mismatch")
        dq = fields.m * fields.dp + fields.p * fields.dm
        if np.any(~supported & (np.abs(dq) > self.singular_derivative)):
            raise ModelError("singular support shift")
        return supported

    def _decompose(self, model: ClassicalModel, lam: float, stencil: bool) -> FisherReport:
        self.check_normalized(model, lam, stencil=stencil)
        fields = self.fields(model, lam)
        supported = self._supported(fields)
        space = model.space

        q = np.where(supported, fields.m * fields.p, 1.0)
        score_p = np.where(supported, fields.dp / np.where(supported, fields.p, 1.0), 0.0)
        score_m = np.where(supported, fields.dm / np.where(supported, fields.m, 1.0), 0.0)
        q = np.where(supported, q, 0.0)

        state = self.numcore.weighted_sum(space, q * score_p ** 2)
        measure = self.numcore.weighted_sum(space, q * score_m ** 2)
        cross = self.numcore.weighted_sum(space, 2.0 * q * score_p * score_m)
        total = state.value + measure.value + cross.value

        direct = self._direct(model, lam, supported)
        scale = max(state.value + measure.value, 1e-12)
        discrepancy = abs(total - direct)
        if discrepancy > CONSISTENCY_TOLERANCE * scale:
            logger.warning(f"Fisher information terms ({total:.12g}) disagree with the direct "
                           f"evaluation ({direct:.12g}) at λ={lam}")

        error = state.error + measure.error + cross.error + discrepancy
        return FisherReport(total=total, term_state=state.value, term_measure=measure.value,
                            term_cross=cross.value, error_estimate=error)

    def _direct(self, model: ClassicalModel, lam: float, supported: np.ndarray) -> float:
        """‖∂ ln(m p)‖² from a central difference of the product m_λ p_λ."""
        product = ParametricFamily(lambda value: model.m.values(value, model.space) * self.density(model, value),
                                   fd_step=model.p.fd_step, domain=model.p.domain)
        q = product(lam)
        dq = np.asarray(self.numcore.fd_derivative(product, lam), dtype=float)
        integrand = np.where(supported, dq ** 2 / np.where(supported, q, 1.0), 0.0)
        return self.numcore.weighted_sum(model.space, integrand).value

    def classical_fi(self, model: ClassicalModel, lam: float) -> float:
        if not self.is_measure_independent(model, lam):
            raise ModelError("classical_fi needs a parameter-independent measure; use generalized_fi")
        return self._decompose(model, lam, stencil=False).term_state

    def generalized_fi(self, model: ClassicalModel, lam: float) -> FisherReport:
        return self._decompose(model, lam, stencil=True)

    def score_expectation(self, model: ClassicalModel, lam: float) -> float:
        """E_λ[∂_λ ln(m_λ p_λ)], zero for every normalized model."""
        self.check_normalized(model, lam)
        fields = self.fields(model, lam)
        supported = self._supported(fields)
        dq = np.where(supported, fields.m * fields.dp + fields.p * fields.dm, 0.0)
        return self.numcore.weighted_sum(model.space, dq).value

    def crb_variance_bound(self, report, n: int) -> float:
        total = float(getattr(report, 'total', report))
        if isinstance(n, bool) or int(n) != n or n < 1:
            raise ModelError(f"Number of repetitions must be a positive integer, got {n}.")
        if not total > 0:
            raise ModelError("no information: bound infinite")
        return 1.0 / (int(n) * total)

    def iid_product(self, model: ClassicalModel, n: int) -> ClassicalModel:
        """Model of n independent repetitions; outcomes are n-tuples of the base labels."""
        if not model.space.is_discrete:
            raise ModelError("iid_product needs a discrete outcome space.")
        if int(n) != n or n < 1:
            raise ModelError(f"Number of repetitions must be a positive integer, got {n}.")
        n = int(n)
        space = OutcomeSpace.discrete(itertools.product(model.space.labels, repeat=n))

        def outer(factors):
            return reduce(np.multiply.outer, factors).ravel()

        def product_rule(values, derivatives):
            return sum(outer(values[:i] + [derivatives[i]] + values[i + 1:]) for i in range(n))

        def evaluator(lam):
            return outer([self.density(model, lam)] * n)

        derivative = None
        if model.p.derivative is not None:
            def derivative(lam):
                p = self.density(model, lam)
                dp = np.asarray(as_array(model.p.derivative(lam)), dtype=float)
                return product_rule([p] * n, [dp] * n)

        family = ParametricFamily(evaluator, derivative=derivative, fd_step=model.p.fd_step,
                                  domain=model.p.domain, name=f'{model.p.name}^{n}')

        base = model.m

        def density(lam, labels):
            return float(np.prod([base.density(lam, label) for label in labels]))

        measure_derivative = None
        if base.derivative is not None:
            def measure_derivative(lam, labels):
                values = [float(base.density(lam, label)) for label in labels]
                total = 0.0
                for i, label in enumerate(labels):
                    factors = values[:i] + [float(base.derivative(lam, label))] + values[i + 1:]
                    total += float(np.prod(factors))
                return total

        measure = SampleMeasure(density, derivative=measure_derivative, name=f'{base.name}^{n}')
        return ClassicalModel(space=space, p=family, m=measure, name=f'{model.name}^{n}')
