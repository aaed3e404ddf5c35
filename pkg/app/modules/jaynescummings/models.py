import math
from dataclasses import dataclass, replace

import numpy as np

from core.exceptions.exceptions import ModelError

TOLERANCE = 1e-10
LABELS = ('g', 'e')


@dataclass(frozen=True)
class JCConfig:
    """Resonant two-level atom crossing a single-mode cavity prepared in c₀|0⟩ + c₁|1⟩.

    The Rabi frequency is Ω = κ√ω; `free_time` is the field evolution time t before the atom
    enters and `interaction_time` the atom-field interaction time T.
    """
    omega: float = 1.0
    kappa: float = 1.0
    free_time: float = 0.0
    interaction_time: float = 1.0
    c0: complex = 0.0
    c1: complex = 1.0
    n_max: int = 8

    def __post_init__(self):
        if not (math.isfinite(self.omega) and self.omega > 0):
            raise ModelError(f"Field frequency must be positive, got {self.omega}.")
        if not (math.isfinite(self.kappa) and self.kappa > 0):
            raise ModelError(f"Coupling constant must be positive, got {self.kappa}.")
        if self.free_time < 0 or self.interaction_time < 0:
            raise ModelError("Evolution times must be non-negative.")
        norm = abs(self.c0) ** 2 + abs(self.c1) ** 2
        if abs(norm - 1.0) > TOLERANCE:
            raise ModelError(f"Field amplitudes not normalized: |c0|² + |c1|² = {norm:.15g}.")
        if int(self.n_max) != self.n_max or self.n_max < 2:
            raise ModelError(f"Field truncation n_max must be an integer ≥ 2, got {self.n_max}.")

    @classmethod
    def from_amplitude(cls, c1=1.0, **kwargs):
        """Config with a real non-negative vacuum amplitude c₀ = √(1 - |c₁|²)."""
        weight = abs(c1) ** 2
        if weight > 1.0 + TOLERANCE:
            raise ModelError(f"|c1| must not exceed 1, got {abs(c1)}.")
        return cls(c0=math.sqrt(max(0.0, 1.0 - weight)), c1=c1, **kwargs)

    @property
    def rabi(self) -> float:
        return self.kappa * math.sqrt(self.omega)

    @property
    def drabi(self) -> float:
        """∂Ω/∂ω."""
        return self.rabi / (2.0 * self.omega)

    @property
    def pulse_area(self) -> float:
        return self.rabi * self.interaction_time

    def with_omega(self, omega) -> 'JCConfig':
        return replace(self, omega=float(omega))


@dataclass(frozen=True)
class JCOutcomeDistribution:
    p_g: float
    p_e: float

    def __post_init__(self):
        if abs(self.p_g + self.p_e - 1.0) > TOLERANCE:
            raise ModelError(f"Outcome probabilities sum to {self.p_g + self.p_e:.15g}, expected 1.")
        for name, value in (('p_g', self.p_g), ('p_e', self.p_e)):
            if not -TOLERANCE <= value <= 1.0 + TOLERANCE:
                raise ModelError(f"{name} = {value} outside [0, 1].")

    @property
    def vector(self) -> np.ndarray:
        return np.array([self.p_g, self.p_e])
