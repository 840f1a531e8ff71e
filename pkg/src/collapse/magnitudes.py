"""
Order-of-magnitude estimates for a real apparatus

lambda T = (L / c) (N / tau_col): the hit rate of N particles times the
light travel time across the separation L.
"""
from dataclasses import dataclass
from typing import Iterable
import pandas as pd
from core.exceptions import DomainError, RegimeError
from core.logger import get_logger
from . import series

logger = get_logger('magnitudes')

SPEED_OF_LIGHT = 299792458.0
DEFAULT_TAU_PER = 1e-4
SWEEP_COLUMNS = ['L_m', 'N', 'lambdaT', 'deviation', 'flagged', 'regime_ok']


@dataclass(frozen=True)
class ApparatusParams:
    """Separation L (m), particle count N, collapse time tau_col (s), perception time tau_per (s)"""
    L: float
    N: float
    tau_col: float
    tau_per: float = DEFAULT_TAU_PER

    def __post_init__(self):
        # L = 0 is the no-separation limit
        if self.L < 0:
            raise DomainError(f"L must be non-negative, got {self.L}")
        for name in ('N', 'tau_col', 'tau_per'):
            if not getattr(self, name) > 0:
                raise DomainError(f"{name} must be positive, got {getattr(self, name)}")

    @property
    def T(self) -> float:
        """Light travel time across L"""
        return self.L / SPEED_OF_LIGHT


def lambda_T(p: ApparatusParams) -> float:
    """Hit rate of the apparatus times the signal delay"""
    return p.T * (p.N / p.tau_col)


def perception_bound(p: ApparatusParams) -> float:
    """Lower bound T / tau_per on lambda T if collapse is faster than perception"""
    return p.T / p.tau_per


def violates_perception_bound(p: ApparatusParams) -> bool:
    """True when the apparatus would collapse more slowly than it is perceived"""
    return lambda_T(p) < perception_bound(p)


def detectability_sweep(L_grid: Iterable[float], N_grid: Iterable[float], tau_col: float,
                        a2: float, threshold: float, tau_per: float = DEFAULT_TAU_PER,
                        max_lambda_t: float = series.MAX_LAMBDA_T) -> pd.DataFrame:
    """
    Born-rule deviation for each (L, N) apparatus

    Cells whose lambda T leaves the series regime get regime_ok False and no
    deviation.

    Returns:
        pd.DataFrame: Columns L_m, N, lambdaT, deviation, flagged, regime_ok
    """
    L_values = [float(v) for v in L_grid]
    N_values = [float(v) for v in N_grid]
    if not L_values or not N_values:
        raise DomainError("Sweep grids must be nonempty")
    if not 0 < a2 < 1:
        raise DomainError(f"a2 must lie in (0, 1), got {a2}")

    rows = []
    for L in L_values:
        for N in N_values:
            lt = lambda_T(ApparatusParams(L=L, N=N, tau_col=tau_col, tau_per=tau_per))
            try:
                deviation = float(series.total_probability(a2, lt, max_lambda_t=max_lambda_t)) - a2
                regime_ok = True
            except RegimeError:
                deviation = float('nan')
                regime_ok = False
            rows.append({
                'L_m': L, 'N': N, 'lambdaT': lt, 'deviation': deviation,
                'flagged': bool(regime_ok and abs(deviation) >= threshold),
                'regime_ok': regime_ok,
            })
    out_of_regime = sum(not r['regime_ok'] for r in rows)
    if out_of_regime:
        logger.warning(f"{out_of_regime} of {len(rows)} cells are outside the series regime")
    return pd.DataFrame(rows, columns=SWEEP_COLUMNS)
