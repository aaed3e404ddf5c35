from dataclasses import dataclass, field

from app.modules.numcore.models import OutcomeSpace, ParametricFamily, SampleMeasure
from core.exceptions.exceptions import NumericalError

SUM_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class ClassicalModel:
    """Statistical model {p_λ} on a sample space whose measure has density m_λ."""
    space: OutcomeSpace
    p: ParametricFamily
    m: SampleMeasure = field(default_factory=SampleMeasure.unit)
    name: str = ''

    def __repr__(self):
        return f'ClassicalModel<{self.name or "unnamed"}, {self.space!r}>'


@dataclass(frozen=True)
class FisherReport:
    total: float
    term_state: float
    term_measure: float
    term_cross: float
    error_estimate: float = 0.0

    def __post_init__(self):
        parts = self.term_state + self.term_measure + self.term_cross
        scale = max(abs(self.term_state) + abs(self.term_measure) + abs(self.term_cross), 1e-300)
        if abs(self.total - parts) > SUM_TOLERANCE * scale:
            raise NumericalError(f"Fisher report terms do not add up: {parts} != {self.total}")
        if self.total < -(SUM_TOLERANCE * max(scale, 1.0) + abs(self.error_estimate)):
            raise NumericalError(f"negative Fisher information {self.total:.6g}")

    @property
    def terms(self):
        return {'state': self.term_state, 'measure': self.term_measure, 'cross': self.term_cross}
