"""
Analytic 1D wavefunctions as superpositions of complex Gaussian packets

A term is amplitude * exp(-gamma (z - z_c)^2) * exp(-i E t + i p z).
Hits multiply the state by exp(-(beta/2)(z - z_1)^2); in the quasi-static
rest-frame regime (free spreading neglected) the product stays a sum of
Gaussian terms, so every operation here is closed form.
"""
from dataclasses import dataclass, field, replace
from typing import Iterable
import json
import numpy as np
from core.exceptions import (
    NodeError, PartitionError, PreconditionError, ValidationError, DomainError
)
from core.logger import get_logger
from utils.gaussian import gaussian_product, complex_gaussian_integral
from .geometry import FourVector, SpacetimeEvent, dot

logger = get_logger('wavefunction')

ON_SHELL_TOLERANCE = 1e-9
NODE_TOLERANCE = 1e-12
# Relative size of inter-peak cross terms above which peaks are not separable
PARTITION_TOLERANCE = 1e-5


@dataclass(frozen=True)
class GaussianTerm:
    """Single complex Gaussian packet with a plane-wave phase"""
    amplitude: complex
    center: float
    width_coeff: float
    energy: float = 0.0
    momentum: float = 0.0

    def __post_init__(self):
        if not self.width_coeff > 0:
            raise ValidationError(f"width_coeff must be positive, got {self.width_coeff}")

    def evaluate(self, t, z):
        z = np.asarray(z, dtype=float)
        envelope = np.exp(-self.width_coeff * (z - self.center) ** 2)
        phase = np.exp(-1j * self.energy * t + 1j * self.momentum * z)
        return self.amplitude * envelope * phase


@dataclass(frozen=True)
class WaveState:
    """Superposition of Gaussian terms for a particle of the given mass"""
    terms: tuple[GaussianTerm, ...]
    mass: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, 'terms', tuple(self.terms))
        if not self.terms:
            raise ValidationError("WaveState needs at least one term")
        if self.mass > 0:
            m_sq = self.mass * self.mass
            for term in self.terms:
                shell = term.energy ** 2 - term.momentum ** 2 - m_sq
                if abs(shell) > ON_SHELL_TOLERANCE * max(1.0, m_sq):
                    raise ValidationError(
                        f"Term off shell: E^2 - p^2 - m^2 = {shell:.3e}"
                    )

    def evaluate(self, t, z):
        z = np.asarray(z, dtype=float)
        total = np.zeros(z.shape, dtype=complex)
        for term in self.terms:
            total = total + term.evaluate(t, z)
        return total

    def norm_sq(self, t: float = 0.0) -> float:
        """Closed-form L2 norm squared at time t"""
        return float(np.real(_overlap_sum(self.terms, self.terms, t)))

    def normalize(self, t: float = 0.0) -> 'WaveState':
        norm_sq = self.norm_sq(t)
        if not norm_sq > 0 or not np.isfinite(norm_sq):
            raise ValidationError(f"State is not normalizable (norm^2 = {norm_sq})")
        scale = 1.0 / np.sqrt(norm_sq)
        return replace(self, terms=tuple(replace(k, amplitude=k.amplitude * scale) for k in self.terms))

    def to_dict(self) -> dict:
        return {
            'mass': self.mass,
            'terms': [
                {
                    're_amp': float(np.real(k.amplitude)),
                    'im_amp': float(np.imag(k.amplitude)),
                    'center': k.center,
                    'width_coeff': k.width_coeff,
                    'energy': k.energy,
                    'momentum': k.momentum,
                }
                for k in self.terms
            ],
        }

    @classmethod
    def from_dict(cls, payload: dict) -> 'WaveState':
        try:
            terms = tuple(
                GaussianTerm(
                    amplitude=complex(entry['re_amp'], entry['im_amp']),
                    center=float(entry['center']),
                    width_coeff=float(entry['width_coeff']),
                    energy=float(entry['energy']),
                    momentum=float(entry['momentum']),
                )
                for entry in payload['terms']
            )
            return cls(terms=terms, mass=float(payload['mass']))
        except (KeyError, TypeError) as e:
            raise ValidationError(f"Malformed wave state document: {e}")

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> 'WaveState':
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class HitRecord:
    """A collapse hit: where it happened, how strong, and the momentum vector seeding it"""
    event: SpacetimeEvent
    strength: float
    momentum_vector: FourVector = field(default_factory=lambda: FourVector(1.0, 0.0))

    def __post_init__(self):
        if not self.strength > 0:
            raise ValidationError(f"Hit strength must be positive, got {self.strength}")
        if not dot(self.momentum_vector, self.momentum_vector) > 0:
            raise ValidationError("Hit momentum vector must be timelike")


def _pair_overlap(left: GaussianTerm, right: GaussianTerm, t: float) -> complex:
    """Integral of conj(left) * right over the real line at time t"""
    a = left.width_coeff + right.width_coeff
    b = 2 * (left.width_coeff * left.center + right.width_coeff * right.center) \
        + 1j * (right.momentum - left.momentum)
    c = -left.width_coeff * left.center ** 2 - right.width_coeff * right.center ** 2 \
        + 1j * (left.energy - right.energy) * t
    return np.conj(left.amplitude) * right.amplitude * complex_gaussian_integral(a, b, c)


def _overlap_sum(left: Iterable[GaussianTerm], right: Iterable[GaussianTerm], t: float) -> complex:
    right = tuple(right)
    return sum((_pair_overlap(k, q, t) for k in left for q in right), 0j)


def make_two_peak(a: complex, b: complex, alpha: float, z1: float, z2: float,
                  mass: float = 1.0) -> WaveState:
    """
    Two Gaussian peaks at rest, N [a exp(-alpha (z-z1)^2) + b exp(-alpha (z-z2)^2)]

    Args:
        a, b: Peak coefficients (normalized afterwards)
        alpha: Packet width coefficient
        z1, z2: Peak centers
        mass: Particle mass; terms carry E = mass, p = 0

    Returns:
        WaveState: Normalized two-peak state
    """
    terms = [
        GaussianTerm(complex(amp), center, alpha, energy=mass, momentum=0.0)
        for amp, center in ((a, z1), (b, z2))
        if amp != 0
    ]
    return WaveState(terms=tuple(terms), mass=mass).normalize()


def sample(state: WaveState, t: float, z_grid) -> np.ndarray:
    """Pointwise evaluation of the analytic state on a grid"""
    z = np.asarray(z_grid, dtype=float)
    if not np.all(np.isfinite(z)):
        raise ValidationError("Sample grid must be finite")
    return state.evaluate(t, z)


def bohm_momentum(state: WaveState, at: SpacetimeEvent) -> FourVector:
    """
    Bohm four-momentum Re(p_op psi / psi) at an event

    With p_op = (i d/dt, -i d/dz) each term contributes E * term to the time
    component and (p + 2 i gamma (z - z_c)) * term to the space component.

    Raises:
        NodeError: If |psi| at the event is negligible
    """
    psi = 0j
    p_t = 0j
    p_z = 0j
    for term in state.terms:
        value = complex(term.evaluate(at.t, at.z))
        psi += value
        p_t += term.energy * value
        p_z += (term.momentum + 2j * term.width_coeff * (at.z - term.center)) * value

    peak = sum(abs(term.amplitude) for term in state.terms)
    if abs(psi) < NODE_TOLERANCE * peak:
        raise NodeError(f"|psi| = {abs(psi):.3e} at ({at.t}, {at.z}) is at a node")

    # Re(x / psi) = Re(x * conj(psi)) / |psi|^2
    weight = abs(psi) ** 2
    return FourVector(
        float(np.real(p_t * np.conj(psi)) / weight),
        float(np.real(p_z * np.conj(psi)) / weight)
    )


def _multiply_gaussian(state: WaveState, k: float, center: float, log_prefactor: float = 0.0) -> WaveState:
    """Multiply every term by exp(log_prefactor) exp(-k (z - center)^2)"""
    new_terms = []
    for term in state.terms:
        width, new_center, log_factor = gaussian_product(term.width_coeff, term.center, k, center)
        new_terms.append(replace(
            term,
            amplitude=term.amplitude * np.exp(log_factor + log_prefactor),
            center=new_center,
            width_coeff=width,
        ))
    return replace(state, terms=tuple(new_terms))


def apply_hit(state: WaveState, hit: HitRecord, renormalize: bool = True) -> WaveState:
    """
    Apply one collapse hit in the quasi-static rest-frame regime

    Each term is multiplied by exp(-(beta/2)(z - z1)^2): its width coefficient
    grows by beta/2, its center moves toward z1 and its amplitude picks up the
    Gaussian-product prefactor.

    Args:
        state: State before the hit
        hit: Hit location and strength
        renormalize: Renormalize the result (default True)

    Returns:
        WaveState: State inside the hit's forward light cone

    Raises:
        PreconditionError: If the hit momentum has a spatial component
    """
    if hit.momentum_vector.z_component != 0.0:
        raise PreconditionError("Single hit is defined for a rest-frame momentum only")
    hit_state = _multiply_gaussian(state, 0.5 * hit.strength, hit.event.z)
    return hit_state.normalize() if renormalize else hit_state


def apply_double_hit(state: WaveState, hit1: HitRecord, hit2: HitRecord,
                     renormalize: bool = True) -> WaveState:
    """
    Apply two spacelike-separated hits with equal momenta

    The two hit factors are first merged into one Gaussian (a single hit at
    the strength-weighted midpoint with the summed strength), which makes the
    result independent of the order of the hits bit for bit.

    Raises:
        PreconditionError: If the hits' momentum vectors differ
    """
    p1, p2 = hit1.momentum_vector, hit2.momentum_vector
    scale = max(p1.euclidean_norm(), p2.euclidean_norm())
    if (p1 - p2).euclidean_norm() > 1e-12 * scale:
        raise PreconditionError("Double hit requires equal momentum vectors")
    k, center, log_prefactor = gaussian_product(
        0.5 * hit1.strength, hit1.event.z, 0.5 * hit2.strength, hit2.event.z
    )
    hit_state = _multiply_gaussian(state, k, center, log_prefactor)
    return hit_state.normalize() if renormalize else hit_state


def two_peak_shift(alpha: float, beta: float, z1: float, z2: float) -> tuple[float, float]:
    """
    Peak centers after two hits, one on each peak

    Returns:
        tuple: (z1_new, z2_new), each moved toward the other by
        (beta/2)/(alpha+beta) of the separation
    """
    if not (alpha > 0 and beta > 0):
        raise DomainError(f"alpha and beta must be positive, got {alpha}, {beta}")
    fraction = 0.5 * beta / (alpha + beta)
    return z1 + fraction * (z2 - z1), z2 + fraction * (z1 - z2)


def tail_shift_condition(alpha: float, beta: float, separation: float,
                         threshold: float = 1e-3) -> bool:
    """
    Whether a shifted peak lands well into the original peak's tail

    True iff exp(-alpha beta^2 s^2 / (4 (alpha+beta)^2)) < threshold.
    """
    if not (alpha > 0 and beta > 0) or separation < 0:
        raise DomainError("alpha, beta must be positive and separation non-negative")
    exponent = alpha * beta ** 2 * separation ** 2 / (4 * (alpha + beta) ** 2)
    return bool(np.exp(-exponent) < threshold)


def peak_centers(state: WaveState) -> list[float]:
    """Distinct term centers, sorted"""
    centers = sorted({term.center for term in state.terms})
    merged = [centers[0]]
    for c in centers[1:]:
        if abs(c - merged[-1]) > 1e-12 * max(1.0, abs(c)):
            merged.append(c)
    return merged


def _peak_groups(state: WaveState) -> list[list[GaussianTerm]]:
    centers = peak_centers(state)
    # midpoint bisection: each term belongs to the nearest peak center
    bounds = [0.5 * (lo + hi) for lo, hi in zip(centers[:-1], centers[1:])]
    groups: list[list[GaussianTerm]] = [[] for _ in centers]
    for term in state.terms:
        groups[int(np.searchsorted(bounds, term.center))].append(term)
    return groups


def peak_weights(state: WaveState, t: float = 0.0) -> list[float]:
    """
    Born weight of every peak, left to right

    Raises:
        PartitionError: If inter-peak cross terms exceed the partition tolerance
    """
    groups = _peak_groups(state)
    total = state.norm_sq(t)
    group_norms = [float(np.real(_overlap_sum(g, g, t))) for g in groups]
    cross = total - sum(group_norms)
    if abs(cross) > PARTITION_TOLERANCE * total:
        raise PartitionError(
            f"Peaks overlap: cross terms are {abs(cross) / total:.2e} of the norm"
        )
    logger.debug(f"Peak partition cross term {abs(cross) / total:.2e} of the norm")
    peaks_total = sum(group_norms)
    return [n / peaks_total for n in group_norms]


def peak_weight(state: WaveState, peak_index: int, t: float = 0.0) -> float:
    """Born weight of one peak (index into the sorted peak centers)"""
    weights = peak_weights(state, t)
    if not 0 <= peak_index < len(weights):
        raise ValidationError(f"peak_index {peak_index} out of range (0..{len(weights) - 1})")
    return weights[peak_index]


def brute_force_peaks(state: WaveState, z_grid, t: float = 0.0) -> list[float]:
    """Positions of the interior local maxima of |psi| on a grid"""
    z = np.asarray(z_grid, dtype=float)
    modulus = np.abs(sample(state, t, z))
    interior = (modulus[1:-1] > modulus[:-2]) & (modulus[1:-1] >= modulus[2:])
    return [float(v) for v in z[1:-1][interior]]
