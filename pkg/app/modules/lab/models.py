from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Mapping, Optional, Tuple

import numpy as np

from core.exceptions.exceptions import ModelError

MAX_SEED = 2 ** 64


@dataclass(frozen=True)
class QuantityModel:
    """A physics model as the sweep and Monte Carlo lab see it.

    `quantities` maps a column name to (closed-form method, numeric method or None); both are
    methods of `service_class` taking the model config. `distribution(config, value)` gives the
    outcome probabilities with the estimated `parameter` set to `value`, and `fisher(config)`
    the Fisher information used for the Cramér–Rao prediction. `reports` names the methods that
    return the term-by-term Fisher information report of a quantity.
    """
    name: str
    service_class: type
    parameter: str
    defaults: Mapping[str, Any]
    build: Callable[[Mapping[str, Any]], Any]
    quantities: Mapping[str, Tuple[str, Optional[str]]]
    distribution: Optional[str] = None
    fisher: Optional[str] = None
    reports: Mapping[str, str] = field(default_factory=dict)
    description: str = ''

    def config(self, **overrides):
        unknown = set(overrides) - set(self.defaults)
        if unknown:
            raise ModelError(f"Unknown parameter(s) for model '{self.name}': {', '.join(sorted(unknown))}")
        parameters = dict(self.defaults)
        parameters.update(overrides)
        return self.build(parameters)

    def method(self, quantity, numeric=False):
        try:
            closed, approximate = self.quantities[quantity]
        except KeyError:
            known = ', '.join(self.quantities)
            raise ModelError(f"Unknown quantity '{quantity}' for model '{self.name}' (known: {known})") from None
        if numeric and approximate is not None:
            return approximate
        return closed

    def report(self, quantity):
        self.method(quantity)
        try:
            return self.reports[quantity]
        except KeyError:
            raise ModelError(f"No Fisher information report for quantity '{quantity}' of model '{self.name}'") from None

    def __repr__(self):
        return f'QuantityModel<{self.name}>'


@dataclass(frozen=True)
class MonteCarloConfig:
    model: str
    true_value: float
    shots: int
    trials: int
    seed: int
    grid: Tuple[float, float, int]
    parameters: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        lo, hi, points = self.grid
        if not lo < self.true_value < hi:
            raise ModelError(f"Estimator grid [{lo}, {hi}] must contain the true value {self.true_value}.")
        if int(points) != points or points < 11:
            raise ModelError("Estimator grid needs at least 11 points.")
        if int(self.shots) != self.shots or self.shots < 1:
            raise ModelError(f"Number of shots must be a positive integer, got {self.shots}.")
        if int(self.trials) != self.trials or self.trials < 1:
            raise ModelError(f"Number of trials must be a positive integer, got {self.trials}.")
        if not 0 <= int(self.seed) < MAX_SEED:
            raise ModelError("Seed must be a 64-bit unsigned integer.")

    @property
    def grid_values(self) -> np.ndarray:
        lo, hi, points = self.grid
        return np.linspace(lo, hi, int(points))


@dataclass(frozen=True)
class SweepSpec:
    model: str
    variable: str
    lo: float
    hi: float
    steps: int
    outputs: Tuple[str, ...]
    fixed: Dict[str, Any] = field(default_factory=dict)
    numeric: bool = False

    def __post_init__(self):
        if int(self.steps) != self.steps or self.steps < 2:
            raise ModelError("A sweep needs at least 2 steps.")
        if not self.outputs:
            raise ModelError("A sweep needs at least one output quantity.")
        if self.variable in self.fixed:
            raise ModelError(f"'{self.variable}' is both swept and fixed.")
        object.__setattr__(self, 'outputs', tuple(self.outputs))

    @property
    def values(self) -> np.ndarray:
        return np.linspace(self.lo, self.hi, int(self.steps))


@dataclass(frozen=True)
class CRBReport:
    empirical_var: float
    crb: float
    ratio: float
    ci95: Tuple[float, float]
    sigma: float
    mean_estimate: float
    fisher: float
    estimates: Tuple[float, ...] = ()


@dataclass(frozen=True)
class SweepTable:
    columns: Tuple[str, ...]
    rows: Tuple[Tuple[float, ...], ...]

    def column(self, name) -> np.ndarray:
        index = self.columns.index(name)
        return np.array([row[index] for row in self.rows], dtype=float)
