import logging

import numpy as np
from scipy.integrate import trapezoid

from app.modules.numcore.models import (
    Integral,
    OutcomeSpace,
    ParametricFamily,
    evaluate_pointwise,
    as_array,
)
from core.exceptions.exceptions import ModelError, NumericalError
from core.services.BaseService import BaseService

logger = logging.getLogger(__name__)

NORMALIZATION_TOLERANCE = 1e-6


class NumcoreService(BaseService):

    def step(self, family: ParametricFamily, lam: float) -> float:
        fd_step = family.fd_step if family.fd_step is not None else self.fd_step
        return fd_step * max(1.0, abs(lam))

    def stencil(self, family: ParametricFamily, lam: float):
        """Parameter values λ-h, λ+h of the central difference, checked against the domain."""
        h = self.step(family, lam)
        lo, hi = family.domain
        if not (lo < lam - h and lam + h < hi):
            raise ModelError(f"cannot difference at boundary: λ={lam}, step {h:.3g}, domain {family.domain}")
        return lam - h, lam + h, h

    def fd_derivative(self, family: ParametricFamily, lam: float, richardson=None):
        if family.derivative is not None:
            return family.derivative(lam)

        richardson = self.richardson if richardson is None else richardson
        lower, upper, h = self.stencil(family, lam)
        coarse = (as_array(family(upper)) - as_array(family(lower))) / (2.0 * h)
        if not richardson:
            return coarse

        half = 0.5 * h
        fine = (as_array(family(lam + half)) - as_array(family(lam - half))) / (2.0 * half)
        return (4.0 * fine - coarse) / 3.0

    def nodal_values(self, space: OutcomeSpace, f) -> np.ndarray:
        if callable(f):
            return evaluate_pointwise(f, space)
        values = np.asarray(f, dtype=float)
        if values.shape != (space.size,):
            raise ModelError(f"Expected {space.size} nodal values, got shape {values.shape}.")
        return values

    def weighted_sum(self, space: OutcomeSpace, values) -> Integral:
        """Quadrature of nodal values; the error compares with the nested half-resolution grid."""
        values = np.asarray(values, dtype=float)
        if not np.all(np.isfinite(values)):
            raise NumericalError("non-finite integrand")
        if space.is_discrete:
            return Integral(float(np.sum(values)), 0.0)

        if space.quadrature_rule == 'trapezoid':
            value = float(trapezoid(values, space.points))
        else:
            value = float(np.dot(space.weights, values))

        stride = space.nested_stride()
        if stride is None:
            return Integral(value, 0.0)
        coarse = float(trapezoid(values[::stride], space.points[::stride]))
        return Integral(value, abs(value - coarse))

    def integrate(self, space: OutcomeSpace, f) -> Integral:
        values = self.nodal_values(space, f)
        if not np.all(np.isfinite(values)):
            raise NumericalError("non-finite integrand")
        result = self.weighted_sum(space, values)
        if space.is_discrete or space.nested_stride() is not None or not callable(f):
            return result

        coarse_space = space.halved()
        coarse = self.weighted_sum(coarse_space, self.nodal_values(coarse_space, f))
        return Integral(result.value, abs(result.value - coarse.value))

    def expectation(self, p, f, space: OutcomeSpace, m=None) -> float:
        p_values = self.nodal_values(space, p)
        m_values = np.ones(space.size) if m is None else self.nodal_values(space, m)
        total = self.weighted_sum(space, m_values * p_values).value
        if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
            raise ModelError(f"model not normalized: ∫ m p = {total:.12g}")

        f_values = self.nodal_values(space, f)
        weight = m_values * p_values
        # Nodes without probability mass do not contribute, whatever f does there.
        f_values = np.where(weight > 0, f_values, 0.0)
        return self.weighted_sum(space, weight * f_values).value
