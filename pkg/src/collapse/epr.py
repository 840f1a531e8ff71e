"""
Correlated two-particle state

    psi(z1, z2) = a phi1(z1) phi2(z2) + b chi1(z1) chi2(z2)

Particle 1 has peaks at z11 (branch 1) and z12 (branch 2), particle 2 at z21
and z22. All peaks are exp(-alpha (z - c)^2) at rest, so hits use the
rest-frame momentum vector. The peaks of one particle are close compared
with the distance between the particles: a hit on either peak of a particle
reaches its other peak at once and the other particle after the delay.
"""
from dataclasses import dataclass, field, replace
from typing import Iterable, Optional
import numpy as np
from core.exceptions import DomainError, ValidationError
from core.logger import get_logger
from utils.gaussian import log_gaussian_integral, log_softmax_weights
from .models import McEstimate, ProcessParams, TrialOutcome
from . import process

logger = get_logger('epr')

NORM_TOLERANCE = 1e-10
MIN_PEAK_SEPARATION = 25.0
MIN_PARTICLE_RATIO = 10.0


@dataclass(frozen=True)
class HitFactor:
    """exp(-(strength/2) (z_particle - center)^2)"""
    particle: int
    center: float
    strength: float


@dataclass(frozen=True)
class TwoParticleState:
    """Entangled pair of two-peak particles with accumulated hit factors"""
    a: complex
    b: complex
    z11: float
    z12: float
    z21: float
    z22: float
    width_coeff: float
    hit_factors: tuple[HitFactor, ...] = field(default=())

    def __post_init__(self):
        if not self.width_coeff > 0:
            raise ValidationError(f"width_coeff must be positive, got {self.width_coeff}")
        alpha = self.width_coeff
        if alpha * (self.z11 - self.z12) ** 2 < MIN_PEAK_SEPARATION:
            raise ValidationError(
                f"Particle 1 peaks overlap: alpha (z11 - z12)^2 = "
                f"{alpha * (self.z11 - self.z12) ** 2:.4g} < {MIN_PEAK_SEPARATION}"
            )
        if alpha * (self.z21 - self.z22) ** 2 < MIN_PEAK_SEPARATION:
            raise ValidationError(
                f"Particle 2 peaks overlap: alpha (z21 - z22)^2 = "
                f"{alpha * (self.z21 - self.z22) ** 2:.4g} < {MIN_PEAK_SEPARATION}"
            )
        if abs(self.z11 - self.z21) < MIN_PARTICLE_RATIO * abs(self.z11 - self.z12):
            raise ValidationError(
                f"Particles too close: |z11 - z21| = {abs(self.z11 - self.z21):.4g} "
                f"< {MIN_PARTICLE_RATIO} |z11 - z12| = {MIN_PARTICLE_RATIO * abs(self.z11 - self.z12):.4g}"
            )

    def branch_centers(self, branch: int) -> tuple[float, float]:
        """(particle 1, particle 2) peak centers of a branch"""
        return (self.z11, self.z21) if branch == 1 else (self.z12, self.z22)

    def _log_branch_weight(self, branch: int) -> float:
        coef = self.a if branch == 1 else self.b
        with np.errstate(divide='ignore'):
            log_weight = float(np.log(abs(coef) ** 2))
        for particle, center in enumerate(self.branch_centers(branch), start=1):
            # |psi|^2 doubles the peak coefficient; each hit factor squared gives exp(-beta (z - c)^2)
            coeffs = [2.0 * self.width_coeff]
            centers = [center]
            for hit in self.hit_factors:
                if hit.particle == particle:
                    coeffs.append(hit.strength)
                    centers.append(hit.center)
            log_weight += log_gaussian_integral(coeffs, centers)
        return log_weight

    def branch_weights(self) -> tuple[float, float]:
        """
        Normalized squared weights of the two branches

        Computed from closed-form Gaussian integrals in log space; the
        overlap between branches is neglected.
        """
        w = log_softmax_weights([self._log_branch_weight(1), self._log_branch_weight(2)])
        return float(w[0]), float(w[1])

    def to_dict(self) -> dict:
        return {
            'a': [self.a.real, self.a.imag],
            'b': [self.b.real, self.b.imag],
            'centers': [self.z11, self.z12, self.z21, self.z22],
            'alpha': self.width_coeff,
            'hit_factors': [
                {'particle': h.particle, 'center': h.center, 'beta': h.strength}
                for h in self.hit_factors
            ],
        }


def make_epr(a: complex, b: complex, centers: Iterable[float], alpha: float) -> TwoParticleState:
    """
    Build the correlated two-peak pair

    Args:
        a, b: Branch amplitudes, |a|^2 + |b|^2 = 1
        centers: (z11, z12, z21, z22)
        alpha: Peak width coefficient

    Returns:
        TwoParticleState: State with no hits applied

    Raises:
        DomainError: If the amplitudes are not normalized
        ValidationError: If the peaks overlap or the particles are too close
    """
    a = complex(a)
    b = complex(b)
    norm = abs(a) ** 2 + abs(b) ** 2
    if abs(norm - 1.0) > NORM_TOLERANCE:
        raise DomainError(f"|a|^2 + |b|^2 must be 1, got {norm}")
    z11, z12, z21, z22 = (float(c) for c in centers)
    return TwoParticleState(a=a, b=b, z11=z11, z12=z12, z21=z21, z22=z22, width_coeff=float(alpha))


def apply_hit_pair(state: TwoParticleState, hits: Iterable[tuple[int, float]], beta: float) -> TwoParticleState:
    """
    Multiply the state by one hit factor per (particle, center)

    Raises:
        DomainError: If beta <= 0 or a particle index is not 1 or 2
    """
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    added = []
    for particle, center in hits:
        if particle not in (1, 2):
            raise DomainError(f"particle must be 1 or 2, got {particle}")
        added.append(HitFactor(particle=particle, center=float(center), strength=float(beta)))
    logger.debug(f"Applying {len(added)} hit(s) with beta={beta}")
    return replace(state, hit_factors=state.hit_factors + tuple(added))


def apply_incompatible_pair(state: TwoParticleState, beta: float) -> TwoParticleState:
    """Hits on particle 1 at z11 and particle 2 at z22, one on each branch"""
    return apply_hit_pair(state, [(1, state.z11), (2, state.z22)], beta)


def apply_compatible_pair(state: TwoParticleState, beta: float) -> TwoParticleState:
    """Hits on particle 1 at z11 and particle 2 at z21, both on branch 1"""
    return apply_hit_pair(state, [(1, state.z11), (2, state.z21)], beta)


def simulate_epr_trial(params: ProcessParams, rng: np.random.Generator, record: bool = False) -> TrialOutcome:
    """Race between the two branches; T is the delay between the particles"""
    return process.run_race(params, rng, shared_sides=True, record=record)


def estimate(params: ProcessParams, threads: int = 1, chunk_size: int = 20000,
             warning_level: float = 0.01) -> McEstimate:
    """Monte Carlo probability that branch 1 dominates"""
    return process.estimate(params, particle_count=2, threads=threads,
                            chunk_size=chunk_size, warning_level=warning_level)


def state_from_dict(payload: dict, hits: Optional[list[dict]] = None) -> TwoParticleState:
    """Inverse of TwoParticleState.to_dict"""
    state = make_epr(complex(*payload['a']), complex(*payload['b']), payload['centers'], payload['alpha'])
    for hit in hits if hits is not None else payload.get('hit_factors', []):
        state = apply_hit_pair(state, [(int(hit['particle']), float(hit['center']))], float(hit['beta']))
    return state
