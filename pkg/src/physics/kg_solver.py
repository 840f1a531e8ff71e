"""
Goursat solver for the Klein-Gordon equation in light-cone coordinates

    d^2 psi / dx_plus dx_minus = -(mu^2 / 4) psi

Data is prescribed on the two characteristics through an apex event; the
interior of the forward cone is filled cell by cell with the trapezoidal
box scheme

    psi[i+1,j+1] (1 + q) = psi[i+1,j] + psi[i,j+1] - psi[i,j]
                           - q (psi[i+1,j] + psi[i,j+1] + psi[i,j]),
    q = mu^2 h^2 / 16,

which is second order accurate. Cells on one anti-diagonal are independent,
so each anti-diagonal is updated as one vectorized step.
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional
import struct
import numpy as np
import pandas as pd
from core.exceptions import (
    BoundaryConsistencyError, DomainError, OrderingError, ValidationError
)
from core.logger import get_logger
from .geometry import FourVector, SpacetimeEvent, collapse_distance_sq, spacelike_separated

logger = get_logger('kg_solver')

BoundaryFunction = Callable[[np.ndarray], np.ndarray]
Solution = Callable[[np.ndarray, np.ndarray], np.ndarray]

APEX_TOLERANCE = 1e-12
GRID_MAGIC = b'KGLC'
GRID_HEADER = struct.Struct('<4sIdd')
GRID_HEADER_SIZE = 32
GRID_COLUMNS = ['x_plus', 'x_minus', 't', 'z', 're_psi', 'im_psi', 'abs_psi']


@dataclass(frozen=True)
class BoundaryData:
    """
    Characteristic data through an apex event

    on_xminus_zero(u) is psi at (apex.x_plus + u, apex.x_minus) and
    on_xplus_zero(v) is psi at (apex.x_plus, apex.x_minus + v).
    """
    on_xminus_zero: BoundaryFunction
    on_xplus_zero: BoundaryFunction
    apex: SpacetimeEvent = field(default_factory=lambda: SpacetimeEvent(0.0, 0.0))

    def __post_init__(self):
        a = complex(np.asarray(self.on_xminus_zero(np.zeros(1)))[0])
        b = complex(np.asarray(self.on_xplus_zero(np.zeros(1)))[0])
        if abs(a - b) > APEX_TOLERANCE * max(1.0, abs(a), abs(b)):
            raise ValidationError(f"Boundary functions disagree at the apex: {a} vs {b}")


@dataclass(frozen=True)
class CharacteristicGrid:
    """Solution on the square [0, extent]^2 of light-cone offsets from origin"""
    origin: SpacetimeEvent
    extent: float
    n: int
    values: np.ndarray
    mu: float = 0.0

    def __post_init__(self):
        if self.n < 2 or not self.extent > 0:
            raise ValidationError(f"Grid needs n >= 2 and extent > 0, got n={self.n}, extent={self.extent}")
        if self.values.shape != (self.n, self.n):
            raise ValidationError(f"values must be {self.n}x{self.n}, got {self.values.shape}")

    @property
    def spacing(self) -> float:
        return self.extent / (self.n - 1)

    def coordinates(self) -> tuple[np.ndarray, np.ndarray]:
        """Absolute (x_plus, x_minus) arrays indexed like values"""
        offsets = np.linspace(0.0, self.extent, self.n)
        xp = self.origin.x_plus + offsets[:, None] + np.zeros((1, self.n))
        xm = self.origin.x_minus + offsets[None, :] + np.zeros((self.n, 1))
        return xp, xm

    def to_frame(self) -> pd.DataFrame:
        xp, xm = self.coordinates()
        psi = self.values
        return pd.DataFrame({
            'x_plus': xp.ravel(),
            'x_minus': xm.ravel(),
            't': 0.5 * (xp + xm).ravel(),
            'z': 0.5 * (xp - xm).ravel(),
            're_psi': psi.real.ravel(),
            'im_psi': psi.imag.ravel(),
            'abs_psi': np.abs(psi).ravel(),
        }, columns=GRID_COLUMNS)


def _shell_check(on_shell_e: float, p: float, m: float):
    if not m > 0:
        raise DomainError(f"Mass must be positive, got {m}")
    if abs(on_shell_e ** 2 - p ** 2 - m ** 2) > 1e-9 * max(1.0, m ** 2):
        raise DomainError(f"(E, p) = ({on_shell_e}, {p}) is off shell for m = {m}")


def plane_wave(E: float, p: float, N: complex = 1.0) -> Solution:
    """Exact solution N exp(-i E t + i p z) in light-cone coordinates"""
    def solution(xp, xm):
        xp = np.asarray(xp, dtype=float)
        xm = np.asarray(xm, dtype=float)
        return N * np.exp(-0.5j * (E - p) * xp - 0.5j * (E + p) * xm)
    return solution


def plane_wave_boundary(E: float, p: float, N: complex = 1.0,
                        apex: SpacetimeEvent = SpacetimeEvent(0.0, 0.0)) -> BoundaryData:
    """Plane-wave data on the characteristics through apex"""
    wave = plane_wave(E, p, N)
    return BoundaryData(
        on_xminus_zero=lambda u: wave(apex.x_plus + np.asarray(u), apex.x_minus + 0 * np.asarray(u)),
        on_xplus_zero=lambda v: wave(apex.x_plus + 0 * np.asarray(v), apex.x_minus + np.asarray(v)),
        apex=apex,
    )


def collapse_boundary(E: float, p: float, beta: float, m: float, N: complex = 1.0) -> BoundaryData:
    """
    Boundary data on the forward light cone of a hit at the origin

    psi(x+, 0) = N exp(-i (E-p) x+ / 2) exp(-beta (E-p)^2 x+^2 / (8 m^2))
    psi(0, x-) = N exp(-i (E+p) x- / 2) exp(-beta (E+p)^2 x-^2 / (8 m^2))

    Raises:
        DomainError: If (E, p) is off shell, m <= 0 or beta < 0
    """
    _shell_check(E, p, m)
    if beta < 0:
        raise DomainError(f"beta must be non-negative, got {beta}")
    k_plus = E - p
    k_minus = E + p

    def along_plus(u):
        u = np.asarray(u, dtype=float)
        return N * np.exp(-0.5j * k_plus * u) * np.exp(-beta * k_plus ** 2 * u ** 2 / (8 * m ** 2))

    def along_minus(v):
        v = np.asarray(v, dtype=float)
        return N * np.exp(-0.5j * k_minus * v) * np.exp(-beta * k_minus ** 2 * v ** 2 / (8 * m ** 2))

    return BoundaryData(on_xminus_zero=along_plus, on_xplus_zero=along_minus)


def default_extent(beta: float, widths: float = 8.0) -> float:
    """Grid extent covering the given number of collapse widths 1/sqrt(beta)"""
    if not beta > 0:
        raise DomainError(f"beta must be positive, got {beta}")
    return widths / np.sqrt(beta)


def solve_goursat(bd: BoundaryData, mu: float, extent: float, n: int) -> CharacteristicGrid:
    """
    March the box scheme over the forward cone of the boundary apex

    Args:
        bd: Characteristic boundary data
        mu: m c / hbar (natural units: the mass), >= 0
        extent: Maximal light-cone offset from the apex
        n: Grid points per axis

    Returns:
        CharacteristicGrid: Filled grid; row/column 0 hold the boundary data exactly
    """
    if mu < 0:
        raise DomainError(f"mu must be non-negative, got {mu}")
    if n < 2 or not extent > 0:
        raise ValidationError(f"Grid needs n >= 2 and extent > 0, got n={n}, extent={extent}")

    h = extent / (n - 1)
    offsets = np.linspace(0.0, extent, n)
    psi = np.empty((n, n), dtype=complex)
    psi[:, 0] = bd.on_xminus_zero(offsets)
    psi[0, :] = bd.on_xplus_zero(offsets)

    q = mu * mu * h * h / 16.0
    lead = 1.0 / (1.0 + q)
    logger.debug(f"Goursat march: n={n}, h={h:.4g}, mu={mu}, q={q:.3e}")

    # Anti-diagonal d holds cells (i, d - i); interior cells need i, j >= 1
    for d in range(2, 2 * n - 1):
        i = np.arange(max(1, d - n + 1), min(d, n))
        if i.size == 0:
            continue
        j = d - i
        right = psi[i, j - 1]
        up = psi[i - 1, j]
        corner = psi[i - 1, j - 1]
        psi[i, j] = lead * (right + up - corner - q * (right + up + corner))

    return CharacteristicGrid(origin=bd.apex, extent=extent, n=n, values=psi, mu=mu)


def tabulate(solution: Solution, apex: SpacetimeEvent, extent: float, n: int,
             mu: float = 0.0) -> CharacteristicGrid:
    """Evaluate an analytic solution on the characteristic grid of apex"""
    offsets = np.linspace(0.0, extent, n)
    xp = apex.x_plus + offsets[:, None]
    xm = apex.x_minus + offsets[None, :]
    values = np.asarray(solution(xp + 0 * xm, xm + 0 * xp), dtype=complex)
    return CharacteristicGrid(origin=apex, extent=extent, n=n, values=values, mu=mu)


def zeroth_order_solution(bd: BoundaryData, E: float, p: float,
                          tolerance: float = 1e-8, samples: int = 257) -> Solution:
    """
    Zeroth-order solution psi = plane_wave * h(x_plus - x_minus)

    h is read off each characteristic after dividing out the plane wave; the
    two readings must agree as functions of lambda = x_plus - x_minus.

    Raises:
        BoundaryConsistencyError: If the readings disagree beyond tolerance
    """
    wave = plane_wave(E, p)
    apex = bd.apex
    lam0 = apex.x_plus - apex.x_minus

    def h_from_plus(lam):
        # on x_minus = apex.x_minus, lambda = lam0 + u
        u = np.asarray(lam, dtype=float) - lam0
        return bd.on_xminus_zero(u) / wave(apex.x_plus + u, apex.x_minus + 0 * u)

    def h_from_minus(lam):
        # on x_plus = apex.x_plus, lambda = lam0 - v
        v = lam0 - np.asarray(lam, dtype=float)
        return bd.on_xplus_zero(v) / wave(apex.x_plus + 0 * v, apex.x_minus + v)

    # compare the readings on a symmetric window around the apex value
    probe = lam0 + np.linspace(-4.0, 4.0, samples)
    a = h_from_plus(probe)
    b = h_from_minus(probe)
    scale = np.maximum(np.maximum(np.abs(a), np.abs(b)), 1e-300)
    significant = scale > 1e-12 * scale.max()
    discrepancy = float(np.max(np.abs(a - b)[significant] / scale[significant]))
    if discrepancy > tolerance:
        raise BoundaryConsistencyError(
            f"Boundary data is not a function of x_plus - x_minus (max relative discrepancy {discrepancy:.3e})",
            max_discrepancy=discrepancy,
        )

    def solution(xp, xm):
        xp = np.asarray(xp, dtype=float)
        xm = np.asarray(xm, dtype=float)
        lam = xp - xm
        # each half of h comes from its own characteristic
        h = np.where(lam >= lam0, h_from_plus(np.maximum(lam, lam0)), h_from_minus(np.minimum(lam, lam0)))
        return wave(xp, xm) * h

    return solution


def single_collapse_solution(hit: SpacetimeEvent, beta: float, m: float, N: complex = 1.0) -> Solution:
    """Rest-frame zeroth-order collapsed wave N exp(-i m t) exp(-beta (z - z1)^2 / 2)"""
    def solution(xp, xm):
        t = 0.5 * (np.asarray(xp) + np.asarray(xm))
        z = 0.5 * (np.asarray(xp) - np.asarray(xm))
        return N * np.exp(-1j * m * t) * np.exp(-0.5 * beta * (z - hit.z) ** 2)
    return solution


def _hit_factor(hit: SpacetimeEvent, beta: float, momentum: FourVector, xp, xm) -> np.ndarray:
    """exp((beta/2) alpha.alpha) at points on the forward light cone of hit"""
    xp = np.atleast_1d(np.asarray(xp, dtype=float))
    xm = np.atleast_1d(np.asarray(xm, dtype=float))
    xp, xm = np.broadcast_arrays(xp, xm)
    out = np.empty(xp.shape)
    for idx, (a, b) in enumerate(zip(xp.ravel(), xm.ravel())):
        dx = SpacetimeEvent.from_lightcone(a, b) - hit
        out.flat[idx] = np.exp(0.5 * beta * collapse_distance_sq(momentum, dx))
    return out


def double_collapse_boundary(X1: SpacetimeEvent, X2: SpacetimeEvent, beta: float,
                             psi_w1: Optional[Solution] = None,
                             psi_w2: Optional[Solution] = None,
                             mass: float = 1.0,
                             momentum: Optional[FourVector] = None) -> BoundaryData:
    """
    Data on the light cone of X3, where the forward cones of X1 and X2 meet

    Along X3-A (x_plus = x2_plus) the region-w1 wave is multiplied by X2's
    collapse factor; along X3-B (x_minus = x1_minus) the region-w2 wave is
    multiplied by X1's factor. X1 is taken as the left hit; the pair is
    reordered if needed.

    Args:
        X1, X2: Hit events, spacelike (or identically) separated
        beta: Collapse strength
        psi_w1, psi_w2: Waves inside each single cone; default to the
            rest-frame zeroth-order single-collapse solutions
        mass: Mass of the default waves
        momentum: Common momentum vector of both hits (default rest frame)

    Raises:
        OrderingError: If the hits are timelike separated
    """
    if not spacelike_separated(X1, X2):
        raise OrderingError("Hits are timelike separated; apply them sequentially instead")
    if X1.z > X2.z:
        X1, X2 = X2, X1
        psi_w1, psi_w2 = psi_w2, psi_w1
    P = momentum or FourVector(1.0, 0.0)
    psi_w1 = psi_w1 or single_collapse_solution(X1, beta, mass)
    psi_w2 = psi_w2 or single_collapse_solution(X2, beta, mass)
    apex = SpacetimeEvent.from_lightcone(X2.x_plus, X1.x_minus)

    def along_plus(u):
        # X3-B: x_minus = x1_minus, inside X2's cone, on X1's cone
        u = np.asarray(u, dtype=float)
        xp = apex.x_plus + u
        xm = apex.x_minus + 0 * u
        return psi_w2(xp, xm) * _hit_factor(X1, beta, P, xp, xm).reshape(np.shape(u))

    def along_minus(v):
        # X3-A: x_plus = x2_plus, inside X1's cone, on X2's cone
        v = np.asarray(v, dtype=float)
        xp = apex.x_plus + 0 * v
        xm = apex.x_minus + v
        return psi_w1(xp, xm) * _hit_factor(X2, beta, P, xp, xm).reshape(np.shape(v))

    return BoundaryData(on_xminus_zero=along_plus, on_xplus_zero=along_minus, apex=apex)


def double_collapse_solution(X1: SpacetimeEvent, X2: SpacetimeEvent, beta: float, m: float,
                             N: complex = 1.0) -> Solution:
    """Merged double collapse N exp(-i m t) exp(-beta (z-z1)^2 / 2) exp(-beta (z-z2)^2 / 2)"""
    def solution(xp, xm):
        t = 0.5 * (np.asarray(xp) + np.asarray(xm))
        z = 0.5 * (np.asarray(xp) - np.asarray(xm))
        return N * np.exp(-1j * m * t) * np.exp(-0.5 * beta * ((z - X1.z) ** 2 + (z - X2.z) ** 2))
    return solution


def max_error(grid: CharacteristicGrid, exact: Solution) -> float:
    """Max-norm deviation of a grid from an analytic solution"""
    xp, xm = grid.coordinates()
    return float(np.max(np.abs(grid.values - exact(xp, xm))))


def convergence_order(bd: BoundaryData, exact: Solution, mu: float, extent: float, n: int) -> float:
    """Ratio of max errors between spacing h (n points) and h/2 (2n - 1 points)"""
    coarse = max_error(solve_goursat(bd, mu, extent, n), exact)
    fine = max_error(solve_goursat(bd, mu, extent, 2 * n - 1), exact)
    return coarse / fine


def time_slice(grid: CharacteristicGrid, t: float) -> tuple[np.ndarray, np.ndarray]:
    """
    |psi| at the grid points nearest a constant-t line

    Returns:
        tuple: (z, |psi|) sorted by z; one point per x_plus index
    """
    xp, xm = grid.coordinates()
    target = 2.0 * t
    h = grid.spacing
    # on row i, x_minus = 2t - x_plus gives j
    j = np.rint((target - xp[:, 0] - grid.origin.x_minus) / h).astype(int)
    rows = np.arange(grid.n)
    ok = (j >= 0) & (j < grid.n)
    rows, j = rows[ok], j[ok]
    z = 0.5 * (xp[rows, j] - xm[rows, j])
    return z, np.abs(grid.values[rows, j])


def write_binary(grid: CharacteristicGrid, path: Path) -> Path:
    """Row-major little-endian float64 (re, im) pairs after a 32-byte header"""
    header = GRID_HEADER.pack(GRID_MAGIC, grid.n, grid.extent, grid.mu)
    header = header.ljust(GRID_HEADER_SIZE, b'\0')
    body = np.stack([grid.values.real, grid.values.imag], axis=-1).astype('<f8')
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open('wb') as handle:
        handle.write(header)
        handle.write(body.tobytes(order='C'))
    return path


def read_binary(path: Path, origin: SpacetimeEvent = SpacetimeEvent(0.0, 0.0)) -> CharacteristicGrid:
    raw = path.read_bytes()
    magic, n, extent, mu = GRID_HEADER.unpack(raw[:GRID_HEADER.size])
    if magic != GRID_MAGIC:
        raise ValidationError(f"Not a grid file: {path}")
    body = np.frombuffer(raw[GRID_HEADER_SIZE:], dtype='<f8').reshape(n, n, 2)
    return CharacteristicGrid(origin=origin, extent=extent, n=n,
                              values=body[..., 0] + 1j * body[..., 1], mu=mu)
