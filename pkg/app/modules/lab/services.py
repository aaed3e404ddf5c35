import logging
import math

import numpy as np

from app.modules.fisher.services import FisherService
from app.modules.lab.models import MAX_SEED, CRBReport, MonteCarloConfig, QuantityModel, SweepSpec, SweepTable
from core.exceptions.exceptions import EstimationError, ModelError
from core.services.BaseService import BaseService

logger = logging.getLogger(__name__)

NORMALIZATION_TOLERANCE = 1e-10
# Second Philox key word of the bootstrap stream; trial streams use the trial index.
BOOTSTRAP_STREAM = MAX_SEED - 1


def _generator(seed: int, stream: int) -> np.random.Generator:
    key = np.array([int(seed) % MAX_SEED, int(stream)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _pad(vectors) -> np.ndarray:
    width = max(len(vector) for vector in vectors)
    padded = np.zeros((len(vectors), width))
    for row, vector in zip(padded, vectors):
        row[:len(vector)] = vector
    return padded


class LabService(BaseService):
    """Monte Carlo estimation experiments and parameter sweeps over the registered quantity models."""

    def __init__(self, config=None, models=None):
        super().__init__(config)
        self.models = dict(models or {})
        self.fisher = FisherService(self.config)

    def get_model(self, name) -> QuantityModel:
        try:
            return self.models[name]
        except KeyError:
            known = ', '.join(sorted(self.models))
            raise ModelError(f"Unknown model '{name}' (known: {known})") from None

    def sample(self, probabilities, n: int, seed: int, trial: int = 0) -> np.ndarray:
        """Outcome counts of n i.i.d. draws from the stream keyed by (seed, trial)."""
        p = np.asarray(probabilities, dtype=float)
        if p.ndim != 1 or p.size == 0 or not np.all(np.isfinite(p)):
            raise ModelError("Outcome probabilities must be a finite vector.")
        if np.any(p < -NORMALIZATION_TOLERANCE):
            raise ModelError("Outcome probabilities must be non-negative.")
        if abs(p.sum() - 1.0) > NORMALIZATION_TOLERANCE:
            raise ModelError(f"Outcome probabilities not normalized: sum = {p.sum():.15g}")
        if int(n) != n or n < 0:
            raise ModelError(f"Number of draws must be a non-negative integer, got {n}.")
        p = np.clip(p, 0.0, None)
        return _generator(seed, trial).multinomial(int(n), p / p.sum())

    def log_likelihood(self, counts, distributions) -> np.ndarray:
        """Σ_k counts_k ln p_k(λ) for each row of `distributions`; 0·ln 0 counts as 0."""
        counts = np.asarray(counts, dtype=float)
        distributions = np.atleast_2d(np.asarray(distributions, dtype=float))
        if distributions.shape[1] != counts.size:
            raise ModelError(f"{counts.size} outcome counts for distributions over {distributions.shape[1]} outcomes.")
        observed = counts > 0
        with np.errstate(divide='ignore'):
            logs = np.log(distributions[:, observed])
        return logs @ counts[observed]

    def mle(self, counts, grid, distributions) -> float:
        """Grid argmax of the log-likelihood refined by one parabola through the argmax and its neighbours.

        Ties go to the lower grid value.
        """
        grid = np.asarray(grid, dtype=float)
        values = self.log_likelihood(counts, distributions)
        if values.size != grid.size:
            raise ModelError(f"Likelihood has {values.size} values for a grid of {grid.size} points.")
        if not np.any(np.isfinite(values)):
            raise EstimationError("likelihood is not finite anywhere on the estimator grid")

        best = int(np.argmax(values))
        if best == 0 or best == grid.size - 1:
            raise EstimationError(f"estimate at boundary: widen grid (argmax at {grid[best]!r})")

        left, centre, right = values[best - 1:best + 2]
        curvature = left - 2.0 * centre + right
        if not (math.isfinite(left) and math.isfinite(right)) or curvature >= 0:
            return float(grid[best])
        h = 0.5 * (grid[best + 1] - grid[best - 1])
        return float(grid[best] + 0.5 * h * (left - right) / curvature)

    def _model_pieces(self, cfg: MonteCarloConfig):
        model = self.get_model(cfg.model)
        if model.distribution is None or model.fisher is None:
            raise ModelError(f"Model '{model.name}' has no outcome distribution for Monte Carlo estimation.")
        service = model.service_class(self.config)
        config = model.config(**{**cfg.parameters, model.parameter: cfg.true_value})
        distribution = getattr(service, model.distribution)
        return (lambda value: distribution(config, value)), float(getattr(service, model.fisher)(config))

    def crb_experiment(self, cfg: MonteCarloConfig, distribution=None, fisher=None) -> CRBReport:
        """Variance of `trials` maximum-likelihood estimates against the Cramér–Rao bound 1/(nF).

        `distribution(value)` and `fisher` replace the registered model when given.
        """
        if cfg.trials < 2:
            raise ModelError("trials ≥ 2 required to estimate a variance")
        if distribution is None:
            distribution, fisher = self._model_pieces(cfg)
        elif fisher is None:
            raise ModelError("A custom distribution needs its Fisher information.")
        crb = self.fisher.crb_variance_bound(float(fisher), cfg.shots)

        grid = cfg.grid_values
        table = _pad([np.asarray(distribution(value), dtype=float) for value in [cfg.true_value, *grid]])
        truth, distributions = table[0], table[1:]

        logger.info(f"Monte Carlo on '{cfg.model}': {cfg.trials} trials of {cfg.shots} shots at {cfg.true_value}")
        estimates = np.empty(cfg.trials)
        for trial in range(cfg.trials):
            counts = self.sample(truth, cfg.shots, cfg.seed, trial)
            estimates[trial] = self.mle(counts, grid, distributions)
            if (trial + 1) % max(1, cfg.trials // 10) == 0:
                logger.debug(f"{trial + 1}/{cfg.trials} trials done")

        empirical_var = float(np.var(estimates, ddof=1))
        resamples = int(self.config['BOOTSTRAP_RESAMPLES'])
        picks = _generator(cfg.seed, BOOTSTRAP_STREAM).integers(0, cfg.trials, size=(resamples, cfg.trials))
        ratios = np.var(estimates[picks], axis=1, ddof=1) / crb
        low, high = np.percentile(ratios, [2.5, 97.5])

        report = CRBReport(empirical_var=empirical_var, crb=crb, ratio=empirical_var / crb,
                           ci95=(float(low), float(high)), sigma=float(np.std(ratios, ddof=1)),
                           mean_estimate=float(np.mean(estimates)), fisher=float(fisher),
                           estimates=tuple(float(e) for e in estimates))
        logger.info(f"Monte Carlo on '{cfg.model}' done: ratio {report.ratio:.4f} ± {report.sigma:.4f}")
        return report

    def sweep(self, spec: SweepSpec) -> SweepTable:
        """Every requested quantity at every grid value of `spec.variable`, rows in grid order."""
        model = self.get_model(spec.model)
        if spec.variable not in model.defaults:
            raise ModelError(f"Unknown parameter '{spec.variable}' for model '{model.name}'")
        service = model.service_class(self.config)
        methods = [getattr(service, model.method(quantity, numeric=spec.numeric)) for quantity in spec.outputs]

        logger.info(f"Sweeping '{model.name}' over {spec.variable} ∈ [{spec.lo}, {spec.hi}] in {spec.steps} steps")
        rows = []
        for value in spec.values:
            config = model.config(**{**spec.fixed, spec.variable: float(value)})
            rows.append((float(value), *(float(method(config)) for method in methods)))
        return SweepTable(columns=(spec.variable, *spec.outputs), rows=tuple(rows))
