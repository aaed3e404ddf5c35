import math
from dataclasses import dataclass, replace
from functools import cached_property
from numbers import Real
from typing import Any, Callable, Optional, Tuple

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.stats import poisson

from core.exceptions.exceptions import ModelError

TOLERANCE = 1e-10
QUADRATURE_RULES = ('trapezoid', 'gauss_legendre')


def _readonly(array):
    array.setflags(write=False)
    return array


def _hermiticity_defect(matrix):
    return float(np.max(np.abs(matrix - matrix.conj().T))) if matrix.size else 0.0


def _square_matrix(matrix, what):
    matrix = np.array(matrix, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1] or matrix.shape[0] == 0:
        raise ModelError(f"{what} must be a non-empty square matrix, got shape {matrix.shape}.")
    return matrix


@dataclass(frozen=True, eq=False)
class StateVector:
    basis_label: str
    amplitudes: np.ndarray

    def __post_init__(self):
        amplitudes = np.array(self.amplitudes, dtype=complex)
        if amplitudes.ndim != 1 or amplitudes.size == 0:
            raise ModelError("State vector amplitudes must be a non-empty vector.")
        norm = float(np.vdot(amplitudes, amplitudes).real)
        if abs(norm - 1.0) > TOLERANCE:
            raise ModelError(f"State vector not normalized: squared norm {norm:.15g}.")
        object.__setattr__(self, 'amplitudes', _readonly(amplitudes))

    @property
    def dim(self) -> int:
        return self.amplitudes.size

    def inner(self, other) -> complex:
        """⟨self|other⟩."""
        return complex(np.vdot(self.amplitudes, as_array(other)))

    def density(self) -> 'DensityOperator':
        return DensityOperator(self.basis_label, np.outer(self.amplitudes, self.amplitudes.conj()))

    def __repr__(self):
        return f'StateVector<{self.basis_label}, dim={self.dim}>'


@dataclass(frozen=True, eq=False)
class HermitianOperator:
    basis_label: str
    matrix: np.ndarray

    def __post_init__(self):
        matrix = _square_matrix(self.matrix, "Hermitian operator")
        if _hermiticity_defect(matrix) > TOLERANCE:
            raise ModelError("Operator is not Hermitian within 1e-10.")
        object.__setattr__(self, 'matrix', _readonly(matrix))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def expectation(self, state) -> float:
        if isinstance(state, DensityOperator):
            return float(np.trace(state.matrix @ self.matrix).real)
        amplitudes = as_array(state)
        return float(np.vdot(amplitudes, self.matrix @ amplitudes).real)

    def __repr__(self):
        return f'HermitianOperator<{self.basis_label}, dim={self.dim}>'


@dataclass(frozen=True, eq=False)
class DensityOperator:
    basis_label: str
    matrix: np.ndarray

    def __post_init__(self):
        matrix = _square_matrix(self.matrix, "Density operator")
        if _hermiticity_defect(matrix) > TOLERANCE:
            raise ModelError("Density operator is not Hermitian within 1e-10.")
        trace = complex(np.trace(matrix))
        if abs(trace - 1.0) > TOLERANCE:
            raise ModelError(f"Density operator trace is {trace.real:.15g}, expected 1.")
        smallest = float(np.linalg.eigvalsh(matrix).min())
        if smallest < -TOLERANCE:
            raise ModelError(f"Density operator has negative eigenvalue {smallest:.3g}.")
        object.__setattr__(self, 'matrix', _readonly(matrix))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def eigh(self):
        """Eigenvalues (ascending, those within 1e-10 of zero clamped) and eigenvector columns."""
        hermitian = 0.5 * (self.matrix + self.matrix.conj().T)
        values, vectors = np.linalg.eigh(hermitian)
        values = np.where(np.abs(values) < TOLERANCE, 0.0, values)
        return values, vectors

    def __repr__(self):
        return f'DensityOperator<{self.basis_label}, dim={self.dim}>'


def as_array(value):
    """Raw numeric content of a family value, used for differencing and linear algebra."""
    if isinstance(value, StateVector):
        return value.amplitudes
    if isinstance(value, (DensityOperator, HermitianOperator)):
        return value.matrix
    if isinstance(value, (list, tuple)):
        return np.stack([np.asarray(as_array(item)) for item in value])
    if isinstance(value, (np.ndarray, np.generic)):
        return value
    if isinstance(value, Real):
        return float(value)
    if isinstance(value, complex):
        return value
    return np.asarray(value)


@dataclass(frozen=True, eq=False)
class OutcomeSpace:
    kind: str
    labels: Tuple[Any, ...] = ()
    lo: float = 0.0
    hi: float = 0.0
    grid_points: int = 0
    quadrature_rule: str = 'trapezoid'

    def __post_init__(self):
        if self.kind == 'discrete':
            labels = tuple(self.labels)
            if not labels:
                raise ModelError("Discrete outcome space needs at least one label.")
            if len(set(labels)) != len(labels):
                raise ModelError("Discrete outcome labels must be unique.")
            object.__setattr__(self, 'labels', labels)
        elif self.kind == 'continuous':
            if not (math.isfinite(self.lo) and math.isfinite(self.hi) and self.lo < self.hi):
                raise ModelError(f"Continuous outcome space needs lo < hi, got [{self.lo}, {self.hi}].")
            if int(self.grid_points) < 3:
                raise ModelError("Continuous outcome space needs grid_points >= 3.")
            if self.quadrature_rule not in QUADRATURE_RULES:
                raise ModelError(f"Unknown quadrature rule '{self.quadrature_rule}'.")
            object.__setattr__(self, 'grid_points', int(self.grid_points))
        else:
            raise ModelError(f"Unknown outcome space kind '{self.kind}'.")

    @classmethod
    def discrete(cls, labels):
        return cls(kind='discrete', labels=tuple(labels))

    @classmethod
    def continuous(cls, lo, hi, grid_points, quadrature_rule='trapezoid'):
        return cls(kind='continuous', lo=float(lo), hi=float(hi), grid_points=grid_points,
                   quadrature_rule=quadrature_rule)

    @property
    def is_discrete(self) -> bool:
        return self.kind == 'discrete'

    @property
    def size(self) -> int:
        return len(self.labels) if self.is_discrete else self.grid_points

    @cached_property
    def numeric_labels(self) -> bool:
        return self.is_discrete and all(isinstance(label, Real) for label in self.labels)

    @cached_property
    def points(self) -> np.ndarray:
        """Quadrature nodes; discrete spaces use their labels, or indices for non-numeric labels."""
        if self.is_discrete:
            if self.numeric_labels:
                return _readonly(np.array(self.labels, dtype=float))
            return _readonly(np.arange(len(self.labels), dtype=float))
        if self.quadrature_rule == 'gauss_legendre':
            nodes, _ = leggauss(self.grid_points)
            return _readonly(0.5 * (self.hi - self.lo) * nodes + 0.5 * (self.hi + self.lo))
        return _readonly(np.linspace(self.lo, self.hi, self.grid_points))

    @cached_property
    def weights(self) -> np.ndarray:
        if self.is_discrete:
            return _readonly(np.ones(len(self.labels)))
        if self.quadrature_rule == 'gauss_legendre':
            _, weights = leggauss(self.grid_points)
            return _readonly(0.5 * (self.hi - self.lo) * weights)
        step = (self.hi - self.lo) / (self.grid_points - 1)
        weights = np.full(self.grid_points, step)
        weights[0] = weights[-1] = 0.5 * step
        return _readonly(weights)

    def arguments(self):
        """Values handed to user functions: labels for non-numeric discrete spaces, points otherwise."""
        if self.is_discrete and not self.numeric_labels:
            return list(self.labels)
        return self.points

    def halved(self) -> Optional['OutcomeSpace']:
        """Half-resolution space; for odd trapezoid grids its nodes are every other node of this one."""
        if self.is_discrete:
            return None
        if self.quadrature_rule == 'gauss_legendre':
            return replace(self, grid_points=max(3, self.grid_points // 2))
        return replace(self, grid_points=max(3, (self.grid_points - 1) // 2 + 1))

    def nested_stride(self) -> Optional[int]:
        """Stride selecting the halved grid out of this one, when the grids nest."""
        if not self.is_discrete and self.quadrature_rule == 'trapezoid' and self.grid_points % 2 == 1 \
                and self.grid_points >= 5:
            return 2
        return None

    def __repr__(self):
        if self.is_discrete:
            return f'OutcomeSpace<discrete, {len(self.labels)} labels>'
        return f'OutcomeSpace<continuous [{self.lo}, {self.hi}], {self.grid_points} {self.quadrature_rule}>'


@dataclass(frozen=True, eq=False)
class ParametricFamily:
    evaluator: Callable[[float], Any]
    derivative: Optional[Callable[[float], Any]] = None
    fd_step: Optional[float] = None
    domain: Tuple[float, float] = (-math.inf, math.inf)
    name: str = ''

    def __post_init__(self):
        if self.fd_step is not None and not self.fd_step > 0:
            raise ModelError("fd_step must be positive.")
        lo, hi = self.domain
        if not lo < hi:
            raise ModelError(f"Empty parameter domain {self.domain}.")

    def __call__(self, lam):
        return self.evaluator(lam)

    @property
    def has_derivative(self) -> bool:
        return self.derivative is not None

    def contains(self, lam) -> bool:
        lo, hi = self.domain
        return lo <= lam <= hi


@dataclass(frozen=True, eq=False)
class SampleMeasure:
    density: Callable[[float, Any], Any]
    derivative: Optional[Callable[[float, Any], Any]] = None
    name: str = ''

    @classmethod
    def unit(cls):
        """Counting or Lebesgue measure, independent of the parameter."""
        return cls(density=lambda lam, x: _constant_like(x, 1.0),
                   derivative=lambda lam, x: _constant_like(x, 0.0),
                   name='unit')

    def values(self, lam, space: OutcomeSpace) -> np.ndarray:
        values = evaluate_pointwise(lambda x: self.density(lam, x), space)
        if np.any(values < -TOLERANCE):
            raise ModelError(f"Measure density is negative at λ={lam}.")
        return values

    def derivative_values(self, lam, space: OutcomeSpace) -> Optional[np.ndarray]:
        if self.derivative is None:
            return None
        return evaluate_pointwise(lambda x: self.derivative(lam, x), space)


def _constant_like(x, value):
    if isinstance(x, np.ndarray):
        return np.full(x.shape, value)
    return value


def evaluate_pointwise(f, space: OutcomeSpace) -> np.ndarray:
    arguments = space.arguments()
    if isinstance(arguments, np.ndarray):
        values = np.asarray(f(arguments), dtype=float)
        if values.shape == arguments.shape:
            return values
        if values.ndim == 0:
            return np.full(arguments.shape, float(values))
    return np.array([float(f(x)) for x in arguments])


@dataclass(frozen=True)
class Integral:
    value: float
    error: float = 0.0

    def __float__(self):
        return float(self.value)


def annihilation(dim: int) -> np.ndarray:
    return np.diag(np.sqrt(np.arange(1, dim, dtype=float)), k=1).astype(complex)


def number(dim: int) -> np.ndarray:
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def projector(vector) -> np.ndarray:
    vector = np.asarray(as_array(vector), dtype=complex)
    return np.outer(vector, vector.conj())


def coherent_amplitudes(gamma: complex, dim: int) -> np.ndarray:
    """Fock amplitudes e^{-|γ|²/2} γⁿ/√n! for n < dim."""
    ratios = np.concatenate(([1.0 + 0j], gamma / np.sqrt(np.arange(1, dim, dtype=float))))
    return np.exp(-0.5 * abs(gamma) ** 2) * np.cumprod(ratios)


def coherent_derivative(gamma: complex, dgamma: complex, amplitudes: np.ndarray) -> np.ndarray:
    """Derivative of coherent_amplitudes along a path γ(λ) with velocity dγ."""
    shifted = np.concatenate(([0j], amplitudes[:-1]))
    n = np.arange(amplitudes.size, dtype=float)
    return -np.real(np.conj(gamma) * dgamma) * amplitudes + dgamma * np.sqrt(n) * shifted


def poisson_cutoff(mu: float, tail: float = 1e-12, minimum: int = 20) -> int:
    """Smallest n ≥ minimum with Poisson(μ) tail mass beyond n below `tail`."""
    n = max(int(minimum), int(math.floor(mu)))
    while poisson.sf(n, mu) >= tail:
        n += 1
    return n
