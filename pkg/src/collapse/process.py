"""
Event-driven collapse race

Two sides (the two peaks of one particle, or the two particles of a
correlated pair) are separated by a signal delay. Each side's knowledge is
the number of hits it knows of on each branch: its own hits at once, the
other side's after the delay. Under full suppression that knowledge implies
the branch weights

    (1, 0) if n1 > n2,   (0, 1) if n1 < n2,   (a2, 1 - a2) if n1 == n2

A single particle's side k hosts peak k and hits at rate lambda * weight_k.
A side of a correlated pair hosts both branches, hits at rate lambda and
picks the branch in proportion to its weights. The race is decided for a
branch once both sides see it dominant and no hit on the other branch is
still in flight; equal counts with nothing in flight reproduce the initial
state, so the race restarts without memory.

Time runs in units of 1 / lambda: rate 1, delay lambda T.
"""
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from typing import Iterable, Optional
import math
import time
import numpy as np
import pandas as pd
from core.exceptions import RegimeError, SimulationError, ValidationError
from core.logger import get_logger
from .models import CollapseRecord, McEstimate, ProcessParams, TrialOutcome
from . import series

logger = get_logger('process')

RULE_VARIANT_ID = 'count-suppression-v1'
DEVIATION_COLUMNS = [
    'a2', 'lambdaT', 'p_hat', 'std_error', 'truncation_fraction',
    'P_series', 'deviation_mc', 'deviation_series', 'warning',
]
EVENT_COLUMNS = ['trial', 'time', 'peak', 'side']


def stream_key(master_seed: int) -> np.ndarray:
    """Philox key derived from the master seed"""
    return np.random.SeedSequence(master_seed).generate_state(2, np.uint64)


def trial_generator(master_seed: int, trial_index: int, key: Optional[np.ndarray] = None) -> np.random.Generator:
    """
    Independent generator for one trial

    The trial index occupies the top counter word, so streams of different
    trials never overlap and a trial's draws do not depend on which worker
    runs it.
    """
    if key is None:
        key = stream_key(master_seed)
    counter = np.array([0, 0, 0, trial_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def _weights(known: list[int], A: float, B: float) -> tuple[float, float]:
    if known[0] > known[1]:
        return 1.0, 0.0
    if known[0] < known[1]:
        return 0.0, 1.0
    return A, B


def _resolved(known: list[list[int]], in_flight: deque) -> Optional[int]:
    for branch in (0, 1):
        other = 1 - branch
        if all(k[branch] > k[other] for k in known) and not any(b == other for _, _, b in in_flight):
            return branch + 1
    return None


def run_race(params: ProcessParams, rng: np.random.Generator, shared_sides: bool = False,
             record: bool = False) -> TrialOutcome:
    """
    Run one collapse race with competing exponential clocks

    Rates are constant between knowledge changes; a clock that would ring
    past the next signal arrival is discarded at the arrival and redrawn.

    Args:
        params: Race parameters
        rng: Trial generator
        shared_sides: True when each side hosts both branches (correlated pair)
        record: Keep the hit sequence in the outcome

    Returns:
        TrialOutcome: Winner (1 or 2), hit count, resolve time, truncation flag
    """
    A = params.a2
    B = 1.0 - A
    delay = params.lambda_t
    known = [[0, 0], [0, 0]]
    totals = [0, 0]
    in_flight: deque = deque()
    tau = 0.0
    hits = 0
    events: list[CollapseRecord] = []

    def outcome(winner: int, truncated: bool) -> TrialOutcome:
        resolve_time = tau / params.lam if params.lam > 0 else 0.0
        return TrialOutcome(winner, hits, resolve_time, truncated, tuple(events))

    while hits < params.max_events:
        w = (_weights(known[0], A, B), _weights(known[1], A, B))
        rates = (1.0, 1.0) if shared_sides else (w[0][0], w[1][1])
        total = rates[0] + rates[1]
        next_arrival = in_flight[0][0] if in_flight else math.inf
        if total <= 0.0 and not in_flight:
            raise SimulationError(f"Race stalled with knowledge {known}")

        step = rng.exponential(1.0 / total) if total > 0.0 else math.inf
        if tau + step >= next_arrival:
            tau, side, branch = in_flight.popleft()
            known[side][branch] += 1
        else:
            tau += step
            side = 0 if rng.random() * total < rates[0] else 1
            if shared_sides:
                branch = 0 if rng.random() < w[side][0] else 1
            else:
                branch = side
            hits += 1
            totals[branch] += 1
            known[side][branch] += 1
            if record:
                hit_time = tau / params.lam if params.lam > 0 else tau
                events.append(CollapseRecord(time=hit_time, peak=branch + 1, side=side + 1))
            if delay == 0.0:
                known[1 - side][branch] += 1
            else:
                in_flight.append((tau + delay, 1 - side, branch))

        winner = _resolved(known, in_flight)
        if winner is not None:
            return outcome(winner, False)

    # cap reached: true global counts decide, ties go to the larger weight
    if totals[0] != totals[1]:
        return outcome(1 if totals[0] > totals[1] else 2, True)
    return outcome(1 if A >= B else 2, True)


def simulate_trial(params: ProcessParams, rng: np.random.Generator, record: bool = False) -> TrialOutcome:
    """Race between the two peaks of a single particle"""
    return run_race(params, rng, shared_sides=False, record=record)


def _run_chunk(params: ProcessParams, start: int, stop: int, shared_sides: bool) -> tuple[int, int, int]:
    key = stream_key(params.master_seed)
    wins = truncated = events = 0
    for index in range(start, stop):
        result = run_race(params, trial_generator(params.master_seed, index, key), shared_sides)
        wins += result.winner == 1
        truncated += result.truncated
        events += result.n_events
    return wins, truncated, events


def _chunks(trials: int, chunk_size: int) -> list[tuple[int, int]]:
    return [(start, min(start + chunk_size, trials)) for start in range(0, trials, chunk_size)]


def estimate(params: ProcessParams, particle_count: int = 1, threads: int = 1,
             chunk_size: int = 20000, warning_level: float = 0.01) -> McEstimate:
    """
    Monte Carlo estimate of the probability that peak (branch) 1 dominates

    Trials are seeded from (master_seed, trial index) and tallied as
    integers, so the estimate is identical for any thread count or chunking.

    Args:
        params: Race parameters including trials and master_seed
        particle_count: 1 for a two-peak particle, 2 for a correlated pair
        threads: Worker processes (1 runs in-process)
        chunk_size: Trials per worker task
        warning_level: Truncation fraction above which the estimate is flagged

    Returns:
        McEstimate: Estimate, standard error and truncation statistics
    """
    if particle_count not in (1, 2):
        raise ValidationError(f"particle_count must be 1 or 2, got {particle_count}")
    if chunk_size < 1:
        raise ValidationError(f"chunk_size must be >= 1, got {chunk_size}")
    shared_sides = particle_count == 2
    chunks = _chunks(params.trials, chunk_size)
    logger.info(
        f"Estimating a2={params.a2}, lambdaT={params.lambda_t:.4g}, particles={particle_count}: "
        f"{params.trials} trials in {len(chunks)} chunks on {threads} worker(s)"
    )
    started = time.perf_counter()

    wins = truncated = events = 0
    if threads <= 1 or len(chunks) == 1:
        for start, stop in chunks:
            w, t, e = _run_chunk(params, start, stop, shared_sides)
            wins, truncated, events = wins + w, truncated + t, events + e
            logger.debug(f"Chunk [{start}, {stop}) done")
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(_run_chunk, params, start, stop, shared_sides) for start, stop in chunks]
            for (start, stop), future in zip(chunks, futures):
                w, t, e = future.result()
                wins, truncated, events = wins + w, truncated + t, events + e
                logger.debug(f"Chunk [{start}, {stop}) done")

    result = McEstimate.from_tallies(wins, params.trials, truncated, events, warning_level)
    if result.warning:
        logger.warning(
            f"Truncation fraction {result.truncation_fraction:.3%} exceeds {warning_level:.0%}; "
            f"raise max_events (currently {params.max_events})"
        )
    logger.info(
        f"p_hat={result.p_hat:.6f} +/- {result.std_error:.2e} "
        f"({time.perf_counter() - started:.1f}s)"
    )
    return result


def deviation_curve(a2_grid: Iterable[float], lambdaT_grid: Iterable[float], trials: int,
                    master_seed: int = 0, particle_count: int = 1, max_events: int = 64,
                    threads: int = 1, chunk_size: int = 20000,
                    max_lambda_t: float = series.MAX_LAMBDA_T) -> pd.DataFrame:
    """
    Monte Carlo and series deviations from the Born rule over a grid

    Every cell uses the same master seed. Series values outside the regime
    are NaN.

    Returns:
        pd.DataFrame: One row per (a2, lambdaT)
    """
    a2_values = list(a2_grid)
    lt_values = list(lambdaT_grid)
    if not a2_values or not lt_values:
        raise ValidationError("Deviation grids must be nonempty")

    rows = []
    for a2 in a2_values:
        for lt in lt_values:
            params = ProcessParams.from_lambda_t(a2, lt, master_seed=master_seed,
                                                 max_events=max_events, trials=trials)
            mc = estimate(params, particle_count, threads, chunk_size)
            try:
                p_series = float(series.total_probability(a2, lt, particle_count,
                                                          max_lambda_t=max_lambda_t))
            except RegimeError as e:
                logger.warning(f"No series value at a2={a2}, lambdaT={lt}: {e}")
                p_series = np.nan
            rows.append({
                'a2': float(a2), 'lambdaT': float(lt),
                'p_hat': mc.p_hat, 'std_error': mc.std_error,
                'truncation_fraction': mc.truncation_fraction,
                'P_series': p_series,
                'deviation_mc': mc.p_hat - float(a2),
                'deviation_series': p_series - float(a2),
                'warning': mc.warning,
            })
    return pd.DataFrame(rows, columns=DEVIATION_COLUMNS)


def event_log(params: ProcessParams, n_trials: int, particle_count: int = 1) -> pd.DataFrame:
    """Hit sequences of the first n_trials trials as (trial, time, peak, side) rows"""
    key = stream_key(params.master_seed)
    rows = []
    for index in range(min(n_trials, params.trials)):
        result = run_race(params, trial_generator(params.master_seed, index, key),
                          shared_sides=particle_count == 2, record=True)
        rows.extend({'trial': index, 'time': e.time, 'peak': e.peak, 'side': e.side} for e in result.events)
    return pd.DataFrame(rows, columns=EVENT_COLUMNS)


def residual_slope(a2: float, lambdaT_grid: Iterable[float], trials: int, order: int = 2,
                   master_seed: int = 0, particle_count: int = 1, threads: int = 1,
                   chunk_size: int = 20000) -> float:
    """
    Log-log slope of |p_hat - series truncated after lambdaT^order| against lambdaT

    With order 1 the residual is the second-order part of the race, so a
    slope near 2 confirms the race leaves the Born rule the way the series
    does. With order 2 the residual is third order and only resolvable where
    it exceeds the binomial noise.

    Raises:
        ValidationError: If order is not 0, 1 or 2 or the grid has fewer than two points
    """
    if order not in (0, 1, 2):
        raise ValidationError(f"order must be 0, 1 or 2, got {order}")
    lt_values = [float(v) for v in lambdaT_grid]
    if len(lt_values) < 2:
        raise ValidationError("Residual slope needs at least two lambdaT values")

    coefficients = series.series_coefficients(a2)[:order + 1]
    residuals = []
    for lt in lt_values:
        params = ProcessParams.from_lambda_t(a2, lt, trials=trials, master_seed=master_seed)
        mc = estimate(params, particle_count, threads, chunk_size)
        truncated = sum(c * lt ** k for k, c in enumerate(coefficients))
        residuals.append(abs(mc.p_hat - truncated))
        logger.debug(f"Residual at lambdaT={lt}: {residuals[-1]:.3e} (std error {mc.std_error:.1e})")
    slope, _ = np.polyfit(np.log(lt_values), np.log(residuals), 1)
    return float(slope)
