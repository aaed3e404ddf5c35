import logging
import math

import numpy as np

from app.modules.fisher.models import ClassicalModel
from app.modules.fisher.services import FisherService
from app.modules.numcore.models import (
    DensityOperator,
    HermitianOperator,
    OutcomeSpace,
    ParametricFamily,
    SampleMeasure,
    as_array,
)
from app.modules.numcore.services import NumcoreService
from app.modules.qbounds.models import POVMFamily, ProjectiveFamily, QuantumFisherReport, basis_columns, element_stack
from core.exceptions.exceptions import ModelError, NumericalError
from core.services.BaseService import BaseService

logger = logging.getLogger(__name__)

SUPPORT_THRESHOLD = 1e-12
RANK_TOLERANCE = 1e-8
NORM_DRIFT = 1e-8
COMPLETENESS_TOLERANCE = 1e-8
PSD_TOLERANCE = 1e-10
ORACLE_TOLERANCE = 1e-7
CROSS_TOLERANCE = 1e-8
ORTHONORMALITY_TOLERANCE = 1e-9
GAP_TOLERANCE = 1e-8
CONVERGENCE_TOLERANCE = 1e-10


def _hermitian(matrix):
    matrix = np.asarray(matrix, dtype=complex)
    return 0.5 * (matrix + np.swapaxes(matrix, -1, -2).conj())


def density_matrix(value) -> np.ndarray:
    if isinstance(value, DensityOperator):
        return np.asarray(value.matrix)
    array = np.asarray(as_array(value), dtype=complex)
    if array.ndim == 1:
        return np.outer(array, array.conj())
    return array


def density_derivative(value, dvalue) -> np.ndarray:
    """∂ρ of a family value; a state vector ψ gives |∂ψ⟩⟨ψ| + |ψ⟩⟨∂ψ|."""
    dvalue = np.asarray(as_array(dvalue), dtype=complex)
    if dvalue.ndim == 1:
        outer = np.outer(dvalue, np.asarray(as_array(value), dtype=complex).conj())
        return outer + outer.conj().T
    return _hermitian(dvalue)


def _traces(stack, matrix):
    """Re tr(E_k M) for every element of a (K, d, d) stack."""
    return np.real(np.einsum('kij,ji->k', stack, matrix))


class QboundsService(BaseService):
    def __init__(self, config=None):
        super().__init__(config)
        self.numcore = NumcoreService(self.config)
        self.fisher = FisherService(self.config)

    def _density_pair(self, rho_family: ParametricFamily, lam: float):
        value = rho_family(lam)
        return value, density_derivative(value, self.numcore.fd_derivative(rho_family, lam))

    # -- symmetric logarithmic derivative ------------------------------------------------------

    def _sld_eigenbasis(self, rho_family: ParametricFamily, lam: float):
        rho, drho = self._density_pair(rho_family, lam)
        if not isinstance(rho, DensityOperator):
            rho = DensityOperator(getattr(rho, 'basis_label', 'state'), density_matrix(rho))
        p, vectors = rho.eigh()
        p = np.clip(p, 0.0, None)
        projected = vectors.conj().T @ drho @ vectors
        denominators = p[:, None] + p[None, :]
        supported = denominators > SUPPORT_THRESHOLD
        scale = max(1.0, float(np.max(np.abs(projected))))
        if np.any(~supported & (np.abs(projected) > RANK_TOLERANCE * scale)):
            raise NumericalError("rank-changing family")
        coefficients = np.where(supported, 2.0 * projected / np.where(supported, denominators, 1.0), 0.0)
        return rho, p, vectors, coefficients, denominators

    def sld(self, rho_family: ParametricFamily, lam: float) -> HermitianOperator:
        rho, _, vectors, coefficients, _ = self._sld_eigenbasis(rho_family, lam)
        matrix = _hermitian(vectors @ coefficients @ vectors.conj().T)
        return HermitianOperator(rho.basis_label, matrix)

    def sld_residual(self, rho_family: ParametricFamily, lam: float) -> float:
        """Frobenius norm of ∂ρ - (ρL + Lρ)/2."""
        value, drho = self._density_pair(rho_family, lam)
        rho = density_matrix(value)
        sld = self.sld(rho_family, lam).matrix
        return float(np.linalg.norm(drho - 0.5 * (rho @ sld + sld @ rho)))

    def qfi(self, rho_family: ParametricFamily, lam: float) -> float:
        _, _, _, coefficients, denominators = self._sld_eigenbasis(rho_family, lam)
        # tr(ρL²) in the eigenbasis of ρ: Σ (p_i + p_j)/2 |L_ij|².
        return float(np.sum(0.5 * denominators * np.abs(coefficients) ** 2))

    def qfi_pure(self, psi_family: ParametricFamily, lam: float) -> float:
        psi = np.asarray(as_array(psi_family(lam)), dtype=complex)
        if abs(np.vdot(psi, psi).real - 1.0) > NORM_DRIFT:
            raise NumericalError(f"state not normalized at λ={lam}")
        if psi_family.derivative is None:
            lower, upper, _ = self.numcore.stencil(psi_family, lam)
            for point in (lower, upper):
                shifted = np.asarray(as_array(psi_family(point)), dtype=complex)
                drift = abs(np.vdot(shifted, shifted).real - 1.0)
                if drift > NORM_DRIFT:
                    raise NumericalError(f"norm drift {drift:.3g} across the difference stencil at λ={point}")
        dpsi = np.asarray(as_array(self.numcore.fd_derivative(psi_family, lam)), dtype=complex)
        value = 4.0 * (np.vdot(dpsi, dpsi).real - abs(np.vdot(psi, dpsi)) ** 2)
        return max(float(value), 0.0)

    # -- measurement Fisher information --------------------------------------------------------

    def _measure_family(self, measure: SampleMeasure, space: OutcomeSpace, like: ParametricFamily):
        derivative = None
        if measure.derivative is not None:
            def derivative(lam):
                return measure.derivative_values(lam, space)
        return ParametricFamily(lambda lam: measure.values(lam, space), derivative=derivative,
                                fd_step=like.fd_step, domain=like.domain)

    def check_povm(self, povm: POVMFamily, lam: float, measure: SampleMeasure = None):
        """Positivity and completeness ∫dx m_λ Π_λ = 𝕀 at λ and across the difference stencil."""
        measure = povm.measure if measure is None else measure
        lower, upper, _ = self.numcore.stencil(povm.elements, lam)
        for point in (lam, lower, upper):
            stack = povm.stack(point)
            smallest = float(np.min(np.linalg.eigvalsh(_hermitian(stack))))
            if smallest < -PSD_TOLERANCE:
                raise ModelError(f"invalid POVM family: element eigenvalue {smallest:.3g} at λ={point}")
            weights = povm.space.weights * measure.values(point, povm.space)
            resolution = np.einsum('k,kij->ij', weights, stack)
            defect = float(np.max(np.abs(resolution - np.eye(stack.shape[1]))))
            if defect > COMPLETENESS_TOLERANCE:
                raise ModelError(f"invalid POVM family: completeness defect {defect:.3g} at λ={point}")

    def _outcome_model(self, rho_family: ParametricFamily, povm: POVMFamily, measure: SampleMeasure):
        def probabilities(lam):
            return np.clip(_traces(povm.stack(lam), density_matrix(rho_family(lam))), 0.0, None)

        family = ParametricFamily(probabilities, fd_step=povm.elements.fd_step, domain=povm.elements.domain)
        return ClassicalModel(space=povm.space, p=family, m=measure, name=povm.name)

    def _support(self, prob, dprob):
        supported = prob >= self.floor
        if np.any(~supported & (np.abs(dprob) > self.singular_derivative)):
            raise ModelError("singular support shift")
        return supported

    def povm_fi(self, rho_family: ParametricFamily, povm: POVMFamily, lam: float) -> QuantumFisherReport:
        self.check_povm(povm, lam)
        space = povm.space
        value, drho = self._density_pair(rho_family, lam)
        rho = density_matrix(value)
        stack = povm.stack(lam)
        dstack = _hermitian(element_stack(self.numcore.fd_derivative(povm.elements, lam), space))
        measure = self._measure_family(povm.measure, space, povm.elements)
        m = measure(lam)
        dm = np.asarray(self.numcore.fd_derivative(measure, lam), dtype=float)

        t = _traces(stack, rho)
        a = _traces(stack, drho)
        b = _traces(dstack, rho)
        supported = self._support(m * t, dm * t + m * (a + b))
        inverse_t = np.where(supported, 1.0 / np.where(supported, t, 1.0), 0.0)
        inverse_m = np.where(supported, 1.0 / np.where(supported, m, 1.0), 0.0)

        state = self.numcore.weighted_sum(space, m * a ** 2 * inverse_t)
        povm_term = self.numcore.weighted_sum(space, m * b ** 2 * inverse_t)
        measure_term = self.numcore.weighted_sum(space, np.where(supported, t, 0.0) * dm ** 2 * inverse_m)
        cross = self.numcore.weighted_sum(space, np.where(supported, 2.0 * m * a * b * inverse_t
                                                          + 2.0 * (a + b) * dm, 0.0))
        total = state.value + povm_term.value + measure_term.value + cross.value

        oracle = self.fisher.generalized_fi(self._outcome_model(rho_family, povm, povm.measure), lam).total
        discrepancy = abs(total - oracle)
        if discrepancy > ORACLE_TOLERANCE * max(abs(oracle), 1e-12):
            logger.warning(f"POVM Fisher information {total:.12g} disagrees with the outcome-distribution "
                           f"oracle {oracle:.12g} at λ={lam}")

        error = state.error + povm_term.error + measure_term.error + cross.error + discrepancy
        return QuantumFisherReport(total=total, term_state=state.value, term_povm=povm_term.value,
                                   term_cross=cross.value, term_measure=measure_term.value, error_estimate=error)

    def measure_fi_quantum(self, rho_family: ParametricFamily, povm: POVMFamily, measure: SampleMeasure,
                           lam: float) -> QuantumFisherReport:
        space = povm.space
        dstack = element_stack(self.numcore.fd_derivative(povm.elements, lam), space)
        if np.any(np.abs(dstack) > 0.0):
            raise ModelError("measure_fi_quantum needs a parameter-independent POVM; use povm_fi")
        self.check_povm(povm, lam, measure=measure)

        value, drho = self._density_pair(rho_family, lam)
        rho = density_matrix(value)
        stack = povm.stack(lam)
        measure_family = self._measure_family(measure, space, rho_family)
        m = measure_family(lam)
        dm = np.asarray(self.numcore.fd_derivative(measure_family, lam), dtype=float)

        t = _traces(stack, rho)
        a = _traces(stack, drho)
        supported = self._support(m * t, dm * t + m * a)
        inverse_t = np.where(supported, 1.0 / np.where(supported, t, 1.0), 0.0)
        inverse_m = np.where(supported, 1.0 / np.where(supported, m, 1.0), 0.0)

        state = self.numcore.weighted_sum(space, m * a ** 2 * inverse_t)
        information = self.numcore.weighted_sum(space, np.where(supported, t, 0.0) * dm ** 2 * inverse_m)
        cross = self.numcore.weighted_sum(space, np.where(supported, 2.0 * a * dm, 0.0))
        if abs(cross.value) > CROSS_TOLERANCE:
            raise NumericalError(f"measure cross term {cross.value:.3g} does not vanish: "
                                 f"∫dx ∂m Π is not zero")

        total = state.value + information.value + cross.value
        error = state.error + information.error + cross.error + abs(cross.value)
        return QuantumFisherReport(total=total, term_state=state.value, term_povm=0.0, term_cross=cross.value,
                                   term_measure=information.value, error_estimate=error)

    # -- eigenbasis geometry -------------------------------------------------------------------

    def _orthonormal_columns(self, proj: ProjectiveFamily, lam: float) -> np.ndarray:
        columns = proj.columns(lam)
        gram = columns.conj().T @ columns
        defect = float(np.max(np.abs(gram - np.eye(gram.shape[0]))))
        if defect > ORTHONORMALITY_TOLERANCE:
            raise ModelError(f"eigenbasis not orthonormal at λ={lam}: defect {defect:.3g}")
        return columns

    def _check_gaps(self, proj: ProjectiveFamily, points):
        if proj.eigenvalues is None:
            return
        for point in points:
            values = np.sort(np.asarray(proj.eigenvalues(point), dtype=float))
            if values.size > 1 and float(np.min(np.diff(values))) < GAP_TOLERANCE:
                raise ModelError(f"degenerate eigenvalues at λ={point}: tangent vectors ill-defined")

    def tangents(self, proj: ProjectiveFamily, lam: float) -> np.ndarray:
        """|∂_λ x⟩ as columns; differenced eigenvectors are phase-aligned with those at λ."""
        lower, upper, h = self.numcore.stencil(proj.basis, lam)
        columns = self._orthonormal_columns(proj, lam)
        shifted = [self._orthonormal_columns(proj, point) for point in (lower, upper)]
        self._check_gaps(proj, (lam, lower, upper))
        if proj.basis.derivative is not None:
            return basis_columns(proj.basis.derivative(lam), proj.space)

        aligned = []
        for other in shifted:
            overlaps = np.einsum('ik,ik->k', columns.conj(), other)
            magnitudes = np.abs(overlaps)
            phases = np.where(magnitudes > 0.0, overlaps / np.where(magnitudes > 0.0, magnitudes, 1.0), 1.0)
            aligned.append(other * phases.conj()[None, :])
        return (aligned[1] - aligned[0]) / (2.0 * h)

    def kx(self, proj: ProjectiveFamily, rho, lam: float) -> float:
        if not proj.space.is_discrete:
            raise ModelError("continuum K_X unsupported: projective families need a discrete spectrum")
        rho = density_matrix(rho)
        tangents = self.tangents(proj, lam)
        contributions = 4.0 * np.real(np.einsum('ik,ij,jk->k', tangents.conj(), rho, tangents))
        total = float(np.sum(contributions))
        if proj.truncated and total > 0.0 and contributions[-1] > CONVERGENCE_TOLERANCE * total:
            raise NumericalError(f"increase truncation: last eigenvector contributes {contributions[-1]:.3g} "
                                 f"of {total:.6g}")
        return max(total, 0.0)

    def kx_intermediate(self, proj: ProjectiveFamily, rho, lam: float) -> float:
        """4 Σ_x |⟨x|ρ|∂x⟩|² / ⟨x|ρ|x⟩, between the Fisher information and the K_X-based bound."""
        rho = density_matrix(rho)
        tangents = self.tangents(proj, lam)
        columns = proj.columns(lam)
        populations = np.real(np.einsum('ik,ij,jk->k', columns.conj(), rho, columns))
        couplings = np.einsum('ik,ij,jk->k', columns.conj(), rho, tangents)
        supported = populations >= self.floor
        terms = np.where(supported, np.abs(couplings) ** 2 / np.where(supported, populations, 1.0), 0.0)
        return float(4.0 * np.sum(terms))

    def projective_povm(self, proj: ProjectiveFamily) -> POVMFamily:
        """Projectors |x⟩⟨x| of a projective family, differentiated through its tangents when known."""
        def elements(lam):
            columns = proj.columns(lam)
            return np.einsum('ik,jk->kij', columns, columns.conj())

        derivative = None
        if proj.basis.derivative is not None:
            def derivative(lam):
                columns = proj.columns(lam)
                tangents = basis_columns(proj.basis.derivative(lam), proj.space)
                outer = np.einsum('ik,jk->kij', tangents, columns.conj())
                return outer + np.swapaxes(outer, 1, 2).conj()

        family = ParametricFamily(elements, derivative=derivative, fd_step=proj.basis.fd_step,
                                  domain=proj.basis.domain, name=f'{proj.name} projectors')
        return POVMFamily(space=proj.space, elements=family, name=f'{proj.name} projectors')

    # -- bounds --------------------------------------------------------------------------------

    def projective_bound(self, J: float, K: float) -> float:
        if J < 0 or K < 0:
            raise ModelError(f"bound inputs must be non-negative, got J={J}, K={K}")
        return (math.sqrt(J) + math.sqrt(K)) ** 2

    def measure_bound(self, J: float, Im: float) -> float:
        if J < 0 or Im < 0:
            raise ModelError(f"bound inputs must be non-negative, got J={J}, Im={Im}")
        return J + Im
