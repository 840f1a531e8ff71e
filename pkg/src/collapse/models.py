"""
Data models for the collapse race
"""
from dataclasses import dataclass, field
from typing import Literal
import math
from core.exceptions import DomainError, ValidationError

CLOSED_SERIES = 'closed_series'
QUADRATURE = 'quadrature'
SeriesMode = Literal['closed_series', 'quadrature']

SINGLE_LABELS = ('i', 'ii', 'iii', 'iv', 'v', 'vi', 'vii', 'viii')
DOUBLE_LABELS = ('2i', '2ii', '2iii', '2iv', '2v', '2vi', '2vii')


def check_weight(a2) -> None:
    """Raise DomainError unless 0 <= a2 <= 1"""
    if not 0 <= a2 <= 1:
        raise DomainError(f"a2 must lie in [0, 1], got {a2}")


@dataclass(frozen=True)
class DiagramId:
    """Collapse diagram contributing to second order in lambda T"""
    particle_count: int
    label: str

    def __post_init__(self):
        labels = {1: SINGLE_LABELS, 2: DOUBLE_LABELS}.get(self.particle_count)
        if labels is None:
            raise ValidationError(f"particle_count must be 1 or 2, got {self.particle_count}")
        if self.label not in labels:
            raise ValidationError(
                f"Unknown diagram '{self.label}' for particle_count={self.particle_count}"
            )

    @classmethod
    def all(cls, particle_count: int) -> list['DiagramId']:
        labels = SINGLE_LABELS if particle_count == 1 else DOUBLE_LABELS
        return [cls(particle_count, label) for label in labels]


@dataclass(frozen=True)
class DiagramResult:
    """Constant part and coefficient of the self-consistent P"""
    constant_part: float
    p_coefficient: float
    mode: SeriesMode


@dataclass(frozen=True)
class ProcessParams:
    """
    Collapse race parameters

    lam is the hit rate and T the signal delay between the peaks (or
    particles); only their product enters the statistics.
    """
    a2: float
    lam: float
    T: float
    master_seed: int = 0
    max_events: int = 64
    trials: int = 100000

    def __post_init__(self):
        check_weight(self.a2)
        if self.lam < 0 or self.T < 0:
            raise DomainError(f"lambda and T must be non-negative, got lambda={self.lam}, T={self.T}")
        if self.trials < 1:
            raise ValidationError(f"trials must be >= 1, got {self.trials}")
        if self.max_events < 1:
            raise ValidationError(f"max_events must be >= 1, got {self.max_events}")
        if not 0 <= self.master_seed < 2 ** 64:
            raise ValidationError(f"master_seed must be a 64-bit unsigned integer, got {self.master_seed}")

    @classmethod
    def from_lambda_t(cls, a2: float, lambda_t: float, **kwargs) -> 'ProcessParams':
        """Unit rate with delay lambda_t"""
        return cls(a2=a2, lam=1.0, T=lambda_t, **kwargs)

    @property
    def lambda_t(self) -> float:
        return self.lam * self.T

    def to_dict(self) -> dict:
        return {
            'a2': self.a2, 'lambda': self.lam, 'T': self.T,
            'master_seed': self.master_seed, 'max_events': self.max_events,
            'trials': self.trials,
        }


@dataclass(frozen=True)
class CollapseRecord:
    """Single hit of a trial"""
    time: float
    peak: int
    side: int


@dataclass(frozen=True)
class TrialOutcome:
    """Result of one collapse race"""
    winner: int
    n_events: int
    resolve_time: float
    truncated: bool
    events: tuple[CollapseRecord, ...] = field(default=(), compare=False)


@dataclass(frozen=True)
class McEstimate:
    """Monte Carlo estimate of the probability that peak (branch) 1 dominates"""
    p_hat: float
    std_error: float
    trials: int
    truncation_fraction: float
    mean_events: float = 1.0
    warning: bool = False

    @classmethod
    def from_tallies(cls, wins: int, trials: int, truncated: int, events: int,
                     warning_level: float = 0.01) -> 'McEstimate':
        p_hat = wins / trials
        truncation_fraction = truncated / trials
        return cls(
            p_hat=p_hat,
            std_error=math.sqrt(p_hat * (1.0 - p_hat) / trials),
            trials=trials,
            truncation_fraction=truncation_fraction,
            mean_events=events / trials,
            warning=truncation_fraction > warning_level,
        )

    def to_dict(self) -> dict:
        return {
            'p_hat': self.p_hat, 'std_error': self.std_error, 'trials': self.trials,
            'truncation_fraction': self.truncation_fraction,
            'mean_events': self.mean_events, 'warning': self.warning,
        }
