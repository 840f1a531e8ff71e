"""
Minkowski 1+1D geometry

Natural units (c = 1), metric signature (+, -). Events carry light-cone
coordinates x_plus = t + z and x_minus = t - z. The collapse distance is the
Lorentz-invariant perpendicular distance from a null separation to the
particle's momentum vector.
"""
from dataclasses import dataclass
import math
from core.exceptions import DomainError, PreconditionError

# |dot(dx, dx)| <= NULL_TOLERANCE * (dx.t^2 + dx.z^2) counts as null
NULL_TOLERANCE = 1e-9


@dataclass(frozen=True)
class FourVector:
    """Minkowski 2-vector (t, z)"""
    t_component: float
    z_component: float

    def __add__(self, other: 'FourVector') -> 'FourVector':
        return FourVector(self.t_component + other.t_component, self.z_component + other.z_component)

    def __sub__(self, other: 'FourVector') -> 'FourVector':
        return FourVector(self.t_component - other.t_component, self.z_component - other.z_component)

    def scale(self, factor: float) -> 'FourVector':
        return FourVector(factor * self.t_component, factor * self.z_component)

    def euclidean_norm(self) -> float:
        return math.hypot(self.t_component, self.z_component)


@dataclass(frozen=True)
class SpacetimeEvent:
    """Event in 1+1D spacetime"""
    t: float
    z: float

    @property
    def x_plus(self) -> float:
        return self.t + self.z

    @property
    def x_minus(self) -> float:
        return self.t - self.z

    @classmethod
    def from_lightcone(cls, x_plus: float, x_minus: float) -> 'SpacetimeEvent':
        return cls(t=0.5 * (x_plus + x_minus), z=0.5 * (x_plus - x_minus))

    def __sub__(self, other: 'SpacetimeEvent') -> FourVector:
        return FourVector(self.t - other.t, self.z - other.z)


def dot(u: FourVector, v: FourVector) -> float:
    """Minkowski inner product with signature (+, -)"""
    return u.t_component * v.t_component - u.z_component * v.z_component


def lightcone_coords(e: SpacetimeEvent) -> tuple[float, float]:
    """Return (x_plus, x_minus) = (t + z, t - z)"""
    return e.x_plus, e.x_minus


def in_forward_cone(origin: SpacetimeEvent, e: SpacetimeEvent) -> bool:
    """True iff e lies in the closed forward light cone of origin"""
    return e.x_plus >= origin.x_plus and e.x_minus >= origin.x_minus


def spacelike_separated(a: SpacetimeEvent, b: SpacetimeEvent) -> bool:
    """True iff neither event lies in the open light cone of the other"""
    d = b - a
    return dot(d, d) <= 0.0


def is_null(v: FourVector) -> bool:
    scale = v.t_component ** 2 + v.z_component ** 2
    return abs(dot(v, v)) <= NULL_TOLERANCE * scale


def boost(velocity: float, v: FourVector) -> FourVector:
    """
    Lorentz boost into a frame moving with the given velocity

    Args:
        velocity: Frame velocity, |velocity| < 1
        v: Vector to transform

    Returns:
        FourVector: Boosted vector

    Raises:
        DomainError: If |velocity| >= 1
    """
    if not abs(velocity) < 1.0:
        raise DomainError(f"Boost velocity must satisfy |v| < 1, got {velocity}")
    gamma = 1.0 / math.sqrt(1.0 - velocity * velocity)
    return FourVector(
        gamma * (v.t_component - velocity * v.z_component),
        gamma * (v.z_component - velocity * v.t_component)
    )


def boost_event(velocity: float, e: SpacetimeEvent) -> SpacetimeEvent:
    """Boost an event about the origin"""
    b = boost(velocity, FourVector(e.t, e.z))
    return SpacetimeEvent(b.t_component, b.z_component)


def _check_collapse_inputs(P: FourVector, dx: FourVector) -> float:
    m_sq = dot(P, P)
    if not m_sq > 0.0:
        raise DomainError(f"Momentum vector must be timelike, got P.P = {m_sq}")
    if not is_null(dx):
        raise PreconditionError(
            f"Separation must be null, got dx.dx = {dot(dx, dx)} for dx = {dx}"
        )
    return m_sq


def collapse_distance_sq(P: FourVector, dx: FourVector) -> float:
    """
    Invariant squared collapse distance -(P.dx)^2 / (P.P)

    Args:
        P: Timelike momentum vector of the hit
        dx: Null separation from the hit to the point on its light cone

    Returns:
        float: alpha.alpha, always <= 0; equals -(dx.z)^2 in the rest frame

    Raises:
        DomainError: If P is not timelike
        PreconditionError: If dx is not null within tolerance
    """
    m_sq = _check_collapse_inputs(P, dx)
    p_dx = dot(P, dx)
    return -(p_dx * p_dx) / m_sq


def alpha_vector(P: FourVector, dx: FourVector) -> FourVector:
    """
    Component of dx perpendicular (in the Minkowski sense) to P

    Returns:
        FourVector: dx - P (P.dx)/(P.P), orthogonal to P
    """
    m_sq = _check_collapse_inputs(P, dx)
    return dx - P.scale(dot(P, dx) / m_sq)
