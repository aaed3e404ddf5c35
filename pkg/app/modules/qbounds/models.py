from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from app.modules.numcore.models import OutcomeSpace, ParametricFamily, SampleMeasure, StateVector, as_array
from core.exceptions.exceptions import ModelError, NumericalError

SUM_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class POVMFamily:
    """λ ↦ {Π_λ(x)} on an outcome space; elements evaluate to a (K, d, d) stack."""
    space: OutcomeSpace
    elements: ParametricFamily
    measure: SampleMeasure = field(default_factory=SampleMeasure.unit)
    name: str = ''

    def stack(self, lam) -> np.ndarray:
        return element_stack(self.elements(lam), self.space)

    def __repr__(self):
        return f'POVMFamily<{self.name or "unnamed"}, {self.space!r}>'


@dataclass(frozen=True, eq=False)
class ProjectiveFamily:
    """λ ↦ ordered orthonormal basis {|x_λ⟩}; the basis evaluates to eigenvector columns.

    The derivative of `basis`, when given, returns the tangent vectors |∂_λ x⟩ as columns.
    `truncated` marks a finite cut of an infinite spectrum; sums over it are checked for convergence.
    """
    space: OutcomeSpace
    basis: ParametricFamily
    eigenvalues: Optional[ParametricFamily] = None
    truncated: bool = False
    name: str = ''

    def __post_init__(self):
        if not self.space.is_discrete:
            raise ModelError("continuum K_X unsupported: projective families need a discrete spectrum")

    @property
    def labels(self):
        return self.space.labels

    def columns(self, lam) -> np.ndarray:
        return basis_columns(self.basis(lam), self.space)

    def vectors(self, lam):
        columns = self.columns(lam)
        return [StateVector(self.name or 'basis', columns[:, k]) for k in range(columns.shape[1])]

    def __repr__(self):
        return f'ProjectiveFamily<{self.name or "unnamed"}, {self.space.size} states>'


@dataclass(frozen=True)
class QuantumFisherReport:
    total: float
    term_state: float
    term_povm: float
    term_cross: float
    term_measure: float = 0.0
    error_estimate: float = 0.0

    def __post_init__(self):
        parts = self.term_state + self.term_povm + self.term_cross + self.term_measure
        scale = max(abs(self.term_state) + abs(self.term_povm) + abs(self.term_cross) + abs(self.term_measure),
                    1e-300)
        if abs(self.total - parts) > SUM_TOLERANCE * scale:
            raise NumericalError(f"Fisher report terms do not add up: {parts} != {self.total}")
        if self.total < -(SUM_TOLERANCE * max(scale, 1.0) + abs(self.error_estimate)):
            raise NumericalError(f"negative Fisher information {self.total:.6g}")

    @property
    def terms(self):
        return {'state': self.term_state, 'measure': self.term_measure, 'povm': self.term_povm,
                'cross': self.term_cross}


def element_stack(value, space: OutcomeSpace) -> np.ndarray:
    stack = np.asarray(as_array(value), dtype=complex)
    if stack.ndim != 3 or stack.shape[0] != space.size or stack.shape[1] != stack.shape[2]:
        raise ModelError(f"POVM elements have shape {stack.shape}, expected ({space.size}, d, d).")
    return stack


def basis_columns(value, space: OutcomeSpace) -> np.ndarray:
    if isinstance(value, (list, tuple)):
        columns = np.stack([np.asarray(as_array(vector), dtype=complex) for vector in value], axis=1)
    else:
        columns = np.asarray(as_array(value), dtype=complex)
    if columns.ndim != 2 or columns.shape[1] != space.size:
        raise ModelError(f"Basis has shape {columns.shape}, expected (d, {space.size}).")
    return columns
