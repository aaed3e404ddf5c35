import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from app.modules.numcore.models import OutcomeSpace, poisson_cutoff
from core.exceptions.exceptions import ModelError

NORMALIZATION_TOLERANCE = 1e-10
TAIL_MASS = 1e-12
HILBERT_MARGIN = 40
GRID_MARGIN = 10.0
GRID_POINTS = 2001


@dataclass(frozen=True)
class OscillatorConfig:
    """Harmonic oscillator of mass m and stiffness k in a uniform field g.

    Lengths are measured in units of ℓ = 1/√(mω); ξ_g is the shift of the potential minimum
    caused by g and ξ_δ the displacement of the initial ground state.
    """
    mass: float = 1.0
    stiffness: float = 1.0
    gravity: float = 0.0
    displacement: float = 1.0
    time: float = 0.0
    n_max: Optional[int] = None
    grid: Optional[OutcomeSpace] = None

    def __post_init__(self):
        for name in ('mass', 'stiffness', 'gravity', 'displacement', 'time'):
            if not math.isfinite(getattr(self, name)):
                raise ModelError(f"Oscillator {name} must be finite.")
        if not self.mass > 0:
            raise ModelError(f"Oscillator mass must be positive, got {self.mass}.")
        if not self.stiffness > 0:
            raise ModelError(f"Oscillator stiffness must be positive, got {self.stiffness}.")
        if self.time < 0:
            raise ModelError(f"Evolution time must be non-negative, got {self.time}.")
        if self.n_max is not None and (int(self.n_max) != self.n_max or self.n_max < 0):
            raise ModelError(f"n_max must be a non-negative integer, got {self.n_max}.")
        if self.grid is not None and self.grid.is_discrete:
            raise ModelError("The spatial grid must be a continuous outcome space.")

    @classmethod
    def from_frequency(cls, mass=1.0, omega=1.0, **kwargs):
        if not omega > 0:
            raise ModelError(f"Oscillator frequency must be positive, got {omega}.")
        return cls(mass=mass, stiffness=mass * omega ** 2, **kwargs)

    @property
    def omega(self) -> float:
        return math.sqrt(self.stiffness / self.mass)

    @property
    def length(self) -> float:
        return 1.0 / math.sqrt(self.mass * self.omega)

    @property
    def xi_g(self) -> float:
        return self.mass * self.gravity / (self.stiffness * self.length)

    @property
    def dxi_g(self) -> float:
        """∂ξ_g/∂g."""
        return self.mass / (self.stiffness * self.length)

    @property
    def xi_delta(self) -> float:
        return self.displacement / self.length

    @property
    def separation(self) -> float:
        """ξ_δ - ξ_g, the initial offset from the shifted potential minimum."""
        return self.xi_delta - self.xi_g

    @property
    def mean_quanta(self) -> float:
        return 0.5 * self.separation ** 2

    @property
    def truncation(self) -> int:
        if self.n_max is not None:
            return int(self.n_max)
        return poisson_cutoff(self.mean_quanta, tail=TAIL_MASS)

    @property
    def hilbert_dim(self) -> int:
        """Fock-space dimension holding the evolved state in the field-free basis."""
        spread = 0.5 * (abs(self.separation) + abs(self.xi_g)) ** 2
        return max(self.truncation, poisson_cutoff(spread, tail=TAIL_MASS)) + HILBERT_MARGIN

    @property
    def spatial_grid(self) -> OutcomeSpace:
        if self.grid is not None:
            return self.grid
        half_width = abs(self.xi_delta) + abs(self.xi_g) + GRID_MARGIN
        return OutcomeSpace.continuous(-half_width, half_width, GRID_POINTS)

    def with_gravity(self, gravity) -> 'OscillatorConfig':
        return replace(self, gravity=float(gravity))

    def with_time(self, time) -> 'OscillatorConfig':
        return replace(self, time=float(time))


@dataclass(frozen=True, eq=False)
class FockExpansion:
    coefficients: np.ndarray
    energies: np.ndarray

    def __post_init__(self):
        coefficients = np.array(self.coefficients, dtype=complex)
        energies = np.array(self.energies, dtype=float)
        if coefficients.shape != energies.shape or coefficients.ndim != 1:
            raise ModelError("Fock coefficients and energies must be vectors of equal length.")
        total = float(np.sum(np.abs(coefficients) ** 2))
        if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
            raise ModelError(f"Fock expansion not normalized: Σ|c_n|² = {total:.15g}.")
        coefficients.setflags(write=False)
        energies.setflags(write=False)
        object.__setattr__(self, 'coefficients', coefficients)
        object.__setattr__(self, 'energies', energies)

    @property
    def levels(self) -> int:
        return self.coefficients.size

    @property
    def probabilities(self) -> np.ndarray:
        return np.abs(self.coefficients) ** 2

    def evolved(self, t) -> np.ndarray:
        """c_n e^{-iE_n t}."""
        return self.coefficients * np.exp(-1j * self.energies * t)

    def __repr__(self):
        return f'FockExpansion<{self.levels} levels>'
