"""
Collapse diagram series

Every way the race can be decided to second order in lambda T is a diagram;
each contributes a constant part and, for the diagrams that return the race
to its initial state, a multiple of the total probability P itself. Summing
gives the linear self-consistency

    P = A + B P,    P = A / (1 - B)

Time is measured in units of T, so lambda T is the only rate parameter and
every integral runs over [0, 1]. Diagrams are available either as their
truncated O((lambda T)^2) expansions or by adaptive quadrature of the full
integrands.
"""
from fractions import Fraction
from typing import Callable, Iterable, Optional, Sequence, Union
import math
import numpy as np
import pandas as pd
from scipy import integrate
from core.exceptions import DomainError, RegimeError
from core.logger import get_logger
from .models import (
    CLOSED_SERIES, QUADRATURE, DiagramId, DiagramResult, SeriesMode, check_weight
)

logger = get_logger('series')

Number = Union[float, Fraction]
Poly = tuple[Number, Number, Number]

EPSREL = 1e-10
MAX_P_COEFFICIENT = 0.5
MAX_LAMBDA_T = 2.0 / 7.0
SWEEP_COLUMNS = ['a2', 'lambdaT', 'P_series', 'P_quadrature', 'deviation_from_born']


# Truncated expansions: (constant polynomial, P-coefficient polynomial) in lambda T

def _series_terms(label: str, A: Number, B: Number) -> tuple[Poly, Poly]:
    zero = (0, 0, 0)
    half = Fraction(1, 2)
    three_halves = Fraction(3, 2)
    if label == 'i':
        return (A, -A * B, A * B * B * half), zero
    if label in ('ii', 'iii'):
        return zero, (0, A * B, -Fraction(7, 2) * A * B)
    if label == 'iv':
        return (0, 0, three_halves * A * B), zero
    if label == 'v':
        return (0, 0, three_halves * A * A * B), zero
    if label in ('vi', 'viii'):
        return (0, 0, half * A * A * B), zero
    if label == 'vii':
        return (0, 0, half * A * B), zero
    if label == '2i':
        return (A, -A * B, half * A * B), zero
    if label in ('2ii', '2iii'):
        return zero, (0, A * B, -3 * A * B)
    if label in ('2iv', '2vii'):
        return (0, 0, half * A * A * B), zero
    if label == '2v':
        return (0, 0, three_halves * A * B), zero
    if label == '2vi':
        return (0, 0, half * A * B), zero
    raise DomainError(f"No expansion for diagram '{label}'")


def _evaluate(poly: Poly, x: Number) -> Number:
    return poly[0] + x * (poly[1] + x * poly[2])


def _coerce(value: Number) -> Number:
    # exact rationals stay exact; float32, numpy scalars etc. become float
    return value if isinstance(value, Fraction) else float(value)


# Integrands in units of T (x = lambda T)

def _quad(f: Callable[[float], float], lo: float = 0.0, hi: float = 1.0, epsrel: float = EPSREL) -> float:
    value, _ = integrate.quad(f, lo, hi, epsabs=0.0, epsrel=epsrel, limit=200)
    return value


def _dblquad(f: Callable[[float, float], float], inner_hi: Callable[[float], float],
             epsrel: float = EPSREL) -> float:
    # f(inner, outer), outer over [0, 1], inner over [0, inner_hi(outer)]
    value, _ = integrate.dblquad(f, 0.0, 1.0, 0.0, inner_hi, epsabs=0.0, epsrel=epsrel)
    return value


def _quadrature_terms(label: str, A: float, B: float, x: float, epsrel: float) -> tuple[float, float]:
    exp = math.exp
    if label == 'i':
        return A * exp(-x * B), 0.0
    if x == 0.0:
        return (A, 0.0) if label == '2i' else (0.0, 0.0)

    if label in ('ii', 'iii'):
        p = A * _quad(lambda t: exp(-x * B) * x * B * exp(-x * (1 + t) * A)
                      * exp(-2 * x) * exp(-x * t * B), epsrel=epsrel)
        return 0.0, p
    if label == 'iv':
        c = A * _dblquad(lambda s, t: exp(-x * B) * x * B * exp(-x * (1 + t) * A)
                         * exp(-2 * x) * x * exp(-x * s * B),
                         lambda t: 1 + t, epsrel=epsrel)
        return c, 0.0
    if label == 'v':
        c = A * _quad(lambda t: exp(-x * B) * x * B * x * A * (1 + t) * exp(-x * (1 + t) * A),
                      epsrel=epsrel)
        return c, 0.0
    if label == 'vi':
        c = B * _quad(lambda t: exp(-x * A) * x * A * exp(-x * (1 + t) * B) * x * A * (1 - t),
                      epsrel=epsrel)
        return c, 0.0
    if label == 'vii':
        c = B * _dblquad(lambda s, t: exp(-x * A) * x * A * exp(-x * (1 + t) * B)
                         * x * exp(-2 * x) * exp(-x * s * B),
                         lambda t: 1 - t, epsrel=epsrel)
        return c, 0.0
    if label == 'viii':
        c = B * _dblquad(lambda s, t: exp(-x * A) * x * A * exp(-x * (1 + t) * B)
                         * x * A * exp(-2 * x) * exp(-x * t * A) * exp(-x * (1 - t + s) * B),
                         lambda t: t, epsrel=epsrel)
        return c, 0.0

    if label == '2i':
        inner = _quad(lambda t: x * A * exp(-x * t), epsrel=epsrel)
        return A * (exp(-x) + inner), 0.0
    if label in ('2ii', '2iii'):
        return 0.0, A * _quad(lambda t: x * B * exp(-2 * x * (1 + t)), epsrel=epsrel)
    if label == '2iv':
        c = A * _dblquad(lambda s, t: x * B * x * A * exp(-x * (1 + s)) * exp(-x * (1 - t + s)),
                         lambda t: t, epsrel=epsrel)
        return c, 0.0
    if label == '2v':
        c = A * _dblquad(lambda s, t: x * B * exp(-x) * exp(-x * (1 + t)) * x * exp(-x * s),
                         lambda t: 1 + t, epsrel=epsrel)
        return c, 0.0
    if label == '2vi':
        c = B * _dblquad(lambda s, t: x * A * exp(-x) * exp(-x * (1 + t)) * x * exp(-x * s),
                         lambda t: 1 - t, epsrel=epsrel)
        return c, 0.0
    if label == '2vii':
        c = B * _dblquad(lambda s, t: x * A * exp(-x) * exp(-x * (1 + t)) * x * A * exp(-x * (1 - t + s)),
                         lambda t: t, epsrel=epsrel)
        return c, 0.0
    raise DomainError(f"No integrand for diagram '{label}'")


def _check_inputs(a2: Number, lambdaT: Number) -> None:
    check_weight(a2)
    if lambdaT < 0:
        raise DomainError(f"lambdaT must be non-negative, got {lambdaT}")


def diagram(id: DiagramId, a2: Number, lambdaT: Number, mode: SeriesMode = CLOSED_SERIES,
            epsrel: float = EPSREL) -> DiagramResult:
    """
    Probability contribution of one collapse diagram

    Args:
        id: Diagram to evaluate (single- or two-particle)
        a2: Initial squared weight of peak 1, in [0, 1]
        lambdaT: Hit rate times signal delay
        mode: CLOSED_SERIES for the truncated expansion, QUADRATURE for the full integrand
        epsrel: Relative tolerance of the quadrature

    Returns:
        DiagramResult: Constant part and coefficient of P

    Raises:
        DomainError: If a2 is outside [0, 1] or lambdaT < 0
    """
    _check_inputs(a2, lambdaT)
    if mode == CLOSED_SERIES:
        A = _coerce(a2)
        B = 1 - A
        x = _coerce(lambdaT)
        const, p = _series_terms(id.label, A, B)
        return DiagramResult(_evaluate(const, x), _evaluate(p, x), mode)
    if mode == QUADRATURE:
        A = float(a2)
        const, p = _quadrature_terms(id.label, A, 1.0 - A, float(lambdaT), epsrel)
        return DiagramResult(const, p, mode)
    raise DomainError(f"Unknown mode '{mode}'")


def diagram2(id: DiagramId, a2: Number, lambdaT: Number, mode: SeriesMode = CLOSED_SERIES,
             epsrel: float = EPSREL) -> DiagramResult:
    """Two-particle diagram; id.particle_count must be 2"""
    if id.particle_count != 2:
        raise DomainError(f"diagram2 needs a two-particle diagram, got '{id.label}'")
    return diagram(id, a2, lambdaT, mode, epsrel)


def diagram_sums(a2: Number, lambdaT: Number, particle_count: int = 1,
                 mode: SeriesMode = CLOSED_SERIES, epsrel: float = EPSREL) -> tuple[Number, Number]:
    """Summed (constant parts, P-coefficients) over all diagrams"""
    results = [diagram(d, a2, lambdaT, mode, epsrel) for d in DiagramId.all(particle_count)]
    return (sum(r.constant_part for r in results), sum(r.p_coefficient for r in results))


def series_coefficients(a2: Number) -> tuple[Number, Number, Number]:
    """
    Coefficients (c0, c1, c2) of P = c0 + c1 lambdaT + c2 lambdaT^2

    Fraction input gives exact rationals.

    Raises:
        DomainError: If a2 is outside [0, 1]
    """
    check_weight(a2)
    A = _coerce(a2)
    B = 1 - A
    first = A * B * (A - B)
    return A, first, -first * (5 - 4 * A * B) / 2


def expanded_coefficients(a2: Number, particle_count: int = 1) -> tuple[Number, Number, Number]:
    """
    Taylor coefficients of A / (1 - B) built from the truncated diagrams

    Agrees with series_coefficients for both particle counts.
    """
    check_weight(a2)
    A = _coerce(a2)
    B = 1 - A
    const = [0, 0, 0]
    pcoef = [0, 0, 0]
    for d in DiagramId.all(particle_count):
        c, p = _series_terms(d.label, A, B)
        const = [u + v for u, v in zip(const, c)]
        pcoef = [u + v for u, v in zip(pcoef, p)]
    # 1 / (1 - B) = 1 + B + B^2 + ..., B has no constant term
    c0 = const[0]
    c1 = const[1] + const[0] * pcoef[1]
    c2 = const[2] + const[1] * pcoef[1] + const[0] * (pcoef[2] + pcoef[1] ** 2)
    return c0, c1, c2


def turning_point(a2: Number) -> Optional[Number]:
    """
    lambda T at which the second-order deviation c1 x + c2 x^2 peaks

    Equals 1 / (5 - 4 a2 (1 - a2)), always inside [1/5, 1/4]. None when the
    first-order coefficient vanishes (a2 in {0, 1/2, 1}) and P is flat.
    """
    _, c1, c2 = series_coefficients(a2)
    if c1 == 0:
        return None
    return -c1 / (2 * c2)


def check_regime(lambdaT: Number, p_coefficient: Number,
                 max_lambda_t: float = MAX_LAMBDA_T,
                 max_p_coefficient: float = MAX_P_COEFFICIENT,
                 a2: Optional[Number] = None) -> None:
    """
    Raise RegimeError when the second-order series cannot be trusted

    With a2 given, lambda T past the turning point of the truncated deviation
    is also out of regime.
    """
    if p_coefficient >= max_p_coefficient:
        raise RegimeError(
            f"Summed P-coefficient {float(p_coefficient):.4g} >= {max_p_coefficient}: expansion untrustworthy"
        )
    if lambdaT > max_lambda_t:
        raise RegimeError(f"lambdaT = {float(lambdaT):.4g} exceeds the series regime bound {max_lambda_t:.4g}")
    peak = turning_point(a2) if a2 is not None else None
    if peak is not None and lambdaT > peak:
        raise RegimeError(
            f"lambdaT = {float(lambdaT):.4g} is past the series turning point {float(peak):.4g} for a2 = {float(a2):.4g}"
        )


def total_probability(a2: Number, lambdaT: Number, particle_count: int = 1,
                      mode: SeriesMode = CLOSED_SERIES, epsrel: float = EPSREL,
                      max_lambda_t: float = MAX_LAMBDA_T,
                      max_p_coefficient: float = MAX_P_COEFFICIENT) -> Number:
    """
    Probability that peak (branch) 1 dominates

    In series mode the self-consistent total is expanded to second order,
    which is the same polynomial for one and two particles. In quadrature
    mode the total is A / (1 - B) from the integrated diagrams.

    Args:
        a2: Initial squared weight of peak 1
        lambdaT: Hit rate times signal delay
        particle_count: 1 (two-peak particle) or 2 (correlated pair)
        mode: CLOSED_SERIES or QUADRATURE

    Returns:
        Probability P

    Raises:
        DomainError: If a2 is outside [0, 1] or lambdaT < 0
        RegimeError: If lambdaT is outside the series regime or past the
            turning point of the deviation
    """
    _check_inputs(a2, lambdaT)
    const, pcoef = diagram_sums(a2, lambdaT, particle_count, mode, epsrel)
    check_regime(lambdaT, pcoef, max_lambda_t, max_p_coefficient, a2)
    if mode == CLOSED_SERIES:
        c0, c1, c2 = series_coefficients(a2)
        x = _coerce(lambdaT)
        return c0 + x * (c1 + x * c2)
    return const / (1.0 - pcoef)


def series_sweep(a2_grid: Iterable[float], lambdaT_grid: Iterable[float],
                 particle_count: int = 1, epsrel: float = EPSREL,
                 max_lambda_t: float = MAX_LAMBDA_T) -> pd.DataFrame:
    """
    Tabulate series and quadrature totals over a parameter grid

    Cells outside the regime are kept with NaN probabilities.

    Returns:
        pd.DataFrame: Columns a2, lambdaT, P_series, P_quadrature, deviation_from_born
    """
    a2_values = list(a2_grid)
    lt_values = list(lambdaT_grid)
    if not a2_values or not lt_values:
        raise DomainError("Sweep grids must be nonempty")

    rows = []
    for a2 in a2_values:
        for lt in lt_values:
            try:
                p_series = float(total_probability(a2, lt, particle_count, CLOSED_SERIES,
                                                   max_lambda_t=max_lambda_t))
                p_quad = float(total_probability(a2, lt, particle_count, QUADRATURE, epsrel,
                                                 max_lambda_t=max_lambda_t))
            except RegimeError as e:
                logger.warning(f"Skipping a2={a2}, lambdaT={lt}: {e}")
                p_series = p_quad = np.nan
            rows.append({
                'a2': float(a2), 'lambdaT': float(lt),
                'P_series': p_series, 'P_quadrature': p_quad,
                'deviation_from_born': p_series - float(a2),
            })
    logger.info(f"Series sweep: {len(rows)} cells")
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)


def residual_slope(id: DiagramId, a2: float, lambdaT_grid: Sequence[float],
                   epsrel: float = EPSREL) -> float:
    """
    Log-log slope of |quadrature - series| against lambdaT

    Both the constant part and the P-coefficient residuals are summed.
    """
    residuals = []
    for lt in lambdaT_grid:
        q = diagram(id, a2, lt, QUADRATURE, epsrel)
        s = diagram(id, a2, lt, CLOSED_SERIES)
        residuals.append(abs(q.constant_part - s.constant_part) + abs(q.p_coefficient - s.p_coefficient))
    slope, _ = np.polyfit(np.log(lambdaT_grid), np.log(residuals), 1)
    return float(slope)
