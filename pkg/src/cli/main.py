"""
collapse-sim command line

    collapse-sim series     --a2 0.7 --lambdaT 0.1
    collapse-sim mc         --a2 0.7 --lambdaT 0.05 --trials 100000 --seed 42 --event-log 20
    collapse-sim epr        --a2 0.7 --lambdaT 0.05 --trials 100000 --seed 42
    collapse-sim kg         --mode double --beta 1 --sep 4 --n 513
    collapse-sim shift      --alpha 1 --beta 1 --sep 20
    collapse-sim magnitudes --L 10,30 --N 1,1e20 --tau-col 1e16
    collapse-sim sweep      --a2 0.6,0.7 --lambdaT 0.01,0.05,0.1
    collapse-sim plot       runs/sweep/series_sweep.csv

Every run writes its data files and a manifest.json into --output-dir.
"""
import argparse
import math
import sys
import time
from pathlib import Path
from typing import Any, Optional
import numpy as np
import pandas as pd
from dotenv import dotenv_values
from core.config import AppConfig, load_config
from core.exceptions import (
    CollapseSimError, ConfigurationError, DomainError, PreconditionError, RegimeError, ValidationError
)
from core.logger import get_logger, setup_logging
from collapse import epr, magnitudes, process, series
from collapse.models import CLOSED_SERIES, QUADRATURE, DiagramId, ProcessParams
from data.exporter import ResultExporter, dumps
from data.models import RunManifest
from data.validator import DataValidator
from physics import kg_solver, wavefunction
from physics.geometry import SpacetimeEvent
from . import plotting

logger = get_logger('cli')

COMMANDS = ('series', 'mc', 'epr', 'kg', 'shift', 'magnitudes', 'sweep', 'plot')
FORMATS = ('csv', 'json', 'svg', 'bin')

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INVALID = 2
EXIT_REGIME = 3
EXIT_USAGE = 64


def _float_list(text: str) -> list[float]:
    try:
        values = [float(item) for item in text.split(',') if item.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one value")
    return values


def _formats(text: str) -> tuple[str, ...]:
    chosen = tuple(item.strip() for item in text.split(',') if item.strip())
    unknown = set(chosen) - set(FORMATS)
    if unknown:
        raise argparse.ArgumentTypeError(f"unknown format(s) {sorted(unknown)}; choose from {list(FORMATS)}")
    return chosen


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2 ** 64:
        raise argparse.ArgumentTypeError(f"seed must be a 64-bit unsigned integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--seed', type=_seed, default=0, help='Master seed (64-bit)')
    common.add_argument('--output-dir', type=Path, default=None, help='Run directory (default: runs/<command>)')
    common.add_argument('--formats', type=_formats, default=('csv', 'json'),
                        help='Comma-separated subset of csv,json,svg,bin')
    common.add_argument('--config', type=Path, default=None, help='key=value file; flags override it')

    rate = argparse.ArgumentParser(add_help=False)
    rate.add_argument('--lambdaT', type=float, default=None, help='Hit rate times signal delay')
    rate.add_argument('--lambda', dest='lam', type=float, default=None, help='Hit rate (with --T)')
    rate.add_argument('--T', type=float, default=None, help='Signal delay (with --lambda)')

    parser = argparse.ArgumentParser(prog='collapse-sim', description='Relativistic collapse race simulations')
    subparsers = parser.add_subparsers(dest='command', required=True)

    p = subparsers.add_parser('series', parents=[common, rate], help='Diagram series and quadrature totals')
    p.add_argument('--a2', type=float, required=True)
    p.add_argument('--mode', choices=['both', CLOSED_SERIES, QUADRATURE], default='both')
    p.add_argument('--particles', type=int, choices=[1, 2], default=1)

    for name, help_text in (('mc', 'Monte Carlo collapse race (one particle)'),
                            ('epr', 'Monte Carlo collapse race (correlated pair)')):
        p = subparsers.add_parser(name, parents=[common, rate], help=help_text)
        p.add_argument('--a2', type=float, required=True)
        p.add_argument('--trials', type=int, default=None)
        p.add_argument('--event-log', type=int, default=0, metavar='N',
                       help='Write the hit sequences of the first N trials to event_log.csv')
        if name == 'mc':
            p.add_argument('--particles', type=int, choices=[1, 2], default=1)
        else:
            p.add_argument('--beta', type=float, default=1.0, help='Hit strength for the branch-weight check')
            p.add_argument('--alpha', type=float, default=1.0)
            p.add_argument('--sep', type=float, default=10.0, help='Peak separation within a particle')

    p = subparsers.add_parser('kg', parents=[common], help='Goursat solve of a collapsed wave')
    p.add_argument('--mode', choices=['single', 'double'], default='double')
    p.add_argument('--beta', type=float, default=1.0)
    p.add_argument('--sep', type=float, default=4.0, help='Hit separation (double mode)')
    p.add_argument('--n', type=int, default=513)
    p.add_argument('--extent', type=float, default=None)
    p.add_argument('--mass', type=float, default=None)

    p = subparsers.add_parser('shift', parents=[common], help='Peak shift after one hit on each peak')
    p.add_argument('--alpha', type=float, default=1.0)
    p.add_argument('--beta', type=float, default=1.0)
    p.add_argument('--sep', type=float, default=20.0)
    p.add_argument('--threshold', type=float, default=1e-3)

    p = subparsers.add_parser('magnitudes', parents=[common], help='Apparatus lambda T and detectability')
    p.add_argument('--L', type=_float_list, required=True, help='Separation(s) in meters')
    p.add_argument('--N', type=_float_list, default=[1.0], help='Particle count(s)')
    p.add_argument('--tau-col', type=float, default=1e16)
    p.add_argument('--tau-per', type=float, default=magnitudes.DEFAULT_TAU_PER)
    p.add_argument('--a2', type=float, default=0.7)
    p.add_argument('--threshold', type=float, default=1e-6)

    p = subparsers.add_parser('sweep', parents=[common], help='Series (and Monte Carlo) deviation tables')
    p.add_argument('--a2', type=_float_list, required=True)
    p.add_argument('--lambdaT', type=_float_list, required=True)
    p.add_argument('--particles', type=int, choices=[1, 2], default=1)
    p.add_argument('--trials', type=int, default=0, help='Monte Carlo trials per cell (0: series only)')

    p = subparsers.add_parser('plot', parents=[common], help='SVG plot of a result CSV')
    p.add_argument('csv', type=Path)
    p.add_argument('--kind', choices=sorted(DataValidator.REQUIRED_COLUMNS), default=None)

    return parser


def _config_tokens(argv: list[str]) -> list[str]:
    """Flags read from a --config key=value file, to be placed before the command-line flags"""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument('--config', type=Path, default=None)
    known, _ = pre.parse_known_args(argv[1:])
    if known.config is None:
        return []
    if not known.config.is_file():
        raise ConfigurationError(f"Config file not found: {known.config}")
    tokens = []
    for key, value in dotenv_values(known.config).items():
        if value is None:
            raise ConfigurationError(f"Config key without value: {key}")
        tokens += ['--' + key.replace('_', '-'), value]
    return tokens


def _lambda_t(args) -> tuple[float, float]:
    """(lambda, T) from --lambdaT or --lambda/--T; --lambdaT means unit rate"""
    if args.lambdaT is not None:
        return 1.0, args.lambdaT
    if args.lam is not None and args.T is not None:
        return args.lam, args.T
    raise ValidationError("lambdaT: give --lambdaT or both --lambda and --T")


def _process_params(args, config: AppConfig) -> ProcessParams:
    lam, T = _lambda_t(args)
    trials = args.trials if args.trials is not None else config.simulation.trials
    return ProcessParams(a2=args.a2, lam=lam, T=T, master_seed=args.seed,
                         max_events=config.simulation.max_events, trials=trials)


def _cmd_series(args, config: AppConfig, exporter: ResultExporter) -> tuple[dict, dict]:
    lam, T = _lambda_t(args)
    lt = lam * T
    modes = [CLOSED_SERIES, QUADRATURE] if args.mode == 'both' else [args.mode]
    result: dict[str, Any] = {'a2': args.a2, 'lambdaT': lt, 'particle_count': args.particles}
    rows = []
    for mode in modes:
        key = 'P_series' if mode == CLOSED_SERIES else 'P_quadrature'
        result[key] = float(series.total_probability(
            args.a2, lt, args.particles, mode, config.series.epsrel,
            max_lambda_t=config.series.max_lambda_t,
            max_p_coefficient=config.series.max_p_coefficient,
        ))
        for d in DiagramId.all(args.particles):
            r = series.diagram(d, args.a2, lt, mode, config.series.epsrel)
            rows.append({'label': d.label, 'mode': mode,
                         'constant_part': float(r.constant_part), 'p_coefficient': float(r.p_coefficient)})
    result['coefficients'] = [float(c) for c in series.series_coefficients(args.a2)]
    if exporter.enabled('csv'):
        exporter.write_csv(pd.DataFrame(rows, columns=['label', 'mode', 'constant_part', 'p_coefficient']),
                           'diagrams.csv')
    return result, {'particle_count': args.particles}


def _cmd_mc(args, config: AppConfig, exporter: ResultExporter, particle_count: int) -> tuple[dict, dict]:
    if args.event_log < 0:
        raise ValidationError(f"--event-log must be non-negative, got {args.event_log}")
    params = _process_params(args, config)
    estimate = process.estimate(params, particle_count, config.simulation.threads,
                                config.simulation.chunk_size, config.simulation.truncation_warning)
    result = {'params': params.to_dict(), 'lambdaT': params.lambda_t, **estimate.to_dict()}
    try:
        result['P_series'] = float(series.total_probability(
            params.a2, params.lambda_t, particle_count, max_lambda_t=config.series.max_lambda_t))
    except RegimeError as e:
        logger.warning(f"No series comparison: {e}")
        result['P_series'] = None
    if particle_count == 2:
        result['branch_weights'] = _epr_weights(args)
    if exporter.enabled('json'):
        exporter.write_json(result, 'estimate.json')
    if args.event_log and exporter.enabled('csv'):
        events = process.event_log(params, args.event_log, particle_count)
        exporter.write_csv(events, 'event_log.csv')
        logger.info(f"Event log: {len(events)} hits from {min(args.event_log, params.trials)} trials")
    return result, {'rule_variant_id': process.RULE_VARIANT_ID, 'particle_count': particle_count}


def _epr_weights(args) -> dict:
    """Branch weights before and after an incompatible hit pair in a symmetric geometry"""
    distance = 20.0 * args.sep
    centers = (-0.5 * distance - 0.5 * args.sep, -0.5 * distance + 0.5 * args.sep,
               0.5 * distance - 0.5 * args.sep, 0.5 * distance + 0.5 * args.sep)
    state = epr.make_epr(math.sqrt(args.a2), math.sqrt(1.0 - args.a2), centers, args.alpha)
    hit = epr.apply_incompatible_pair(state, args.beta)
    return {'initial': list(state.branch_weights()), 'after_incompatible_pair': list(hit.branch_weights())}


def _cmd_kg(args, config: AppConfig, exporter: ResultExporter) -> tuple[dict, dict]:
    mass = args.mass if args.mass is not None else config.solver.mass
    extent = args.extent if args.extent is not None else kg_solver.default_extent(args.beta, config.solver.extent_widths)
    if args.mode == 'single':
        hit = SpacetimeEvent(0.0, 0.0)
        boundary = kg_solver.collapse_boundary(mass, 0.0, args.beta, mass)
        midpoint = hit.z
    else:
        X1 = SpacetimeEvent(0.0, -0.5 * args.sep)
        X2 = SpacetimeEvent(0.0, 0.5 * args.sep)
        boundary = kg_solver.double_collapse_boundary(X1, X2, args.beta, mass=mass)
        midpoint = 0.5 * (X1.z + X2.z)
    # rest-frame data, so the zeroth-order wave exists
    reference = kg_solver.zeroth_order_solution(boundary, mass, 0.0, tolerance=config.solver.consistency_tol)

    grid = kg_solver.solve_goursat(boundary, mass, extent, args.n)
    xp, xm = grid.coordinates()
    modulus_gap = float(np.max(np.abs(np.abs(grid.values) - np.abs(reference(xp, xm)))))
    t_mid = grid.origin.t + 0.5 * extent
    z, modulus = kg_solver.time_slice(grid, t_mid)
    result = {
        'mode': args.mode, 'mass': mass, 'beta': args.beta, 'n': args.n, 'extent': extent,
        'apex': [grid.origin.t, grid.origin.z],
        'slice_t': t_mid,
        'argmax_z': float(z[int(np.argmax(modulus))]),
        'midpoint_z': midpoint,
        'max_modulus_deviation': modulus_gap,
    }

    frame = grid.to_frame()
    if exporter.enabled('csv'):
        exporter.write_csv(frame, 'kg_grid.csv')
    if exporter.enabled('bin'):
        exporter.write_grid(grid, 'kg_grid.bin')
    if exporter.enabled('svg'):
        exporter.register('kg_grid.svg', plotting.plot_kg(frame, exporter.output_dir / 'kg_grid.svg'))
    return result, {}


def _cmd_shift(args, config: AppConfig, exporter: ResultExporter) -> tuple[dict, dict]:
    z1, z2 = -0.5 * args.sep, 0.5 * args.sep
    shifted = wavefunction.two_peak_shift(args.alpha, args.beta, z1, z2)
    state = wavefunction.make_two_peak(1.0, 1.0, args.alpha, z1, z2)
    hit_state = wavefunction.apply_double_hit(
        state,
        wavefunction.HitRecord(SpacetimeEvent(0.0, z1), args.beta),
        wavefunction.HitRecord(SpacetimeEvent(0.0, z2), args.beta),
    )
    spacing = args.sep / 20000.0
    z_grid = np.arange(z1 - 0.5 * args.sep, z2 + 0.5 * args.sep + spacing, spacing)
    result = {
        'alpha': args.alpha, 'beta': args.beta, 'separation': args.sep,
        'shifted_centers': list(shifted),
        'grid_peaks': wavefunction.brute_force_peaks(hit_state, z_grid),
        'grid_spacing': spacing,
        'shift_fraction': (shifted[0] - z1) / args.sep,
        'into_tail': wavefunction.tail_shift_condition(args.alpha, args.beta, args.sep, args.threshold),
    }
    if exporter.enabled('json'):
        exporter.write_json({'state': hit_state.to_dict(), **result}, 'shift.json')
    return result, {}


def _cmd_magnitudes(args, config: AppConfig, exporter: ResultExporter) -> tuple[dict, dict]:
    table = magnitudes.detectability_sweep(args.L, args.N, args.tau_col, args.a2, args.threshold,
                                           args.tau_per, config.series.max_lambda_t)
    apparatus = magnitudes.ApparatusParams(L=args.L[0], N=args.N[0], tau_col=args.tau_col, tau_per=args.tau_per)
    result = {
        'lambdaT': magnitudes.lambda_T(apparatus),
        'perception_bound': magnitudes.perception_bound(apparatus),
        'violates_perception_bound': magnitudes.violates_perception_bound(apparatus),
        'cells': len(table),
        'flagged': int(table['flagged'].sum()),
    }
    if exporter.enabled('csv'):
        exporter.write_csv(table, 'detectability.csv')
    if exporter.enabled('svg'):
        exporter.register('detectability.svg',
                          plotting.plot_detectability(table, exporter.output_dir / 'detectability.svg'))
    return result, {}


def _cmd_sweep(args, config: AppConfig, exporter: ResultExporter) -> tuple[dict, dict]:
    table = series.series_sweep(args.a2, args.lambdaT, args.particles, config.series.epsrel,
                                config.series.max_lambda_t)
    result: dict[str, Any] = {'cells': len(table)}
    extras: dict[str, Any] = {'particle_count': args.particles}
    if exporter.enabled('csv'):
        exporter.write_csv(table, 'series_sweep.csv')
    if exporter.enabled('svg'):
        exporter.register('series_sweep.svg', plotting.plot_series(table, exporter.output_dir / 'series_sweep.svg'))

    if args.trials > 0:
        curve = process.deviation_curve(
            args.a2, args.lambdaT, args.trials, args.seed, args.particles,
            config.simulation.max_events, config.simulation.threads, config.simulation.chunk_size,
            config.series.max_lambda_t,
        )
        result['warnings'] = int(curve['warning'].sum())
        extras['rule_variant_id'] = process.RULE_VARIANT_ID
        if exporter.enabled('csv'):
            exporter.write_csv(curve, 'deviation_curve.csv')
        if exporter.enabled('svg'):
            exporter.register('deviation_curve.svg',
                              plotting.plot_deviation(curve, exporter.output_dir / 'deviation_curve.svg'))
    return result, extras


def _cmd_plot(args, config: AppConfig, exporter: ResultExporter) -> tuple[dict, dict]:
    validator = DataValidator()
    is_valid, error = validator.validate_csv(args.csv, args.kind)
    if not is_valid:
        raise ValidationError(f"{args.csv}: {error}")
    kind = args.kind or validator.detect_kind(pd.read_csv(args.csv).columns)
    out_path = exporter.output_dir / f"{args.csv.stem}.svg"
    exporter.register(out_path.name, plotting.plot_csv(args.csv, kind, out_path))
    return {'kind': kind, 'plot': out_path.name}, {}


def run(args, config: AppConfig) -> int:
    """
    Execute one parsed command and write its manifest

    Returns:
        int: Exit status
    """
    started = time.perf_counter()
    output_dir = args.output_dir or config.paths.output_dir / args.command
    DataValidator().validate_output_dir(output_dir)
    exporter = ResultExporter(output_dir, args.formats)

    if args.command == 'series':
        result, extras = _cmd_series(args, config, exporter)
    elif args.command == 'mc':
        result, extras = _cmd_mc(args, config, exporter, args.particles)
    elif args.command == 'epr':
        result, extras = _cmd_mc(args, config, exporter, 2)
    elif args.command == 'kg':
        result, extras = _cmd_kg(args, config, exporter)
    elif args.command == 'shift':
        result, extras = _cmd_shift(args, config, exporter)
    elif args.command == 'magnitudes':
        result, extras = _cmd_magnitudes(args, config, exporter)
    elif args.command == 'sweep':
        result, extras = _cmd_sweep(args, config, exporter)
    else:
        result, extras = _cmd_plot(args, config, exporter)

    echo = {key: value for key, value in vars(args).items() if key not in ('output_dir', 'config')}
    manifest = RunManifest(
        command=args.command,
        config=echo,
        tool_version=config.version,
        seed=args.seed,
        wall_time=round(time.perf_counter() - started, 3),
        result=result,
        **extras,
    )
    exporter.write_manifest(manifest)
    print(dumps(result).rstrip('\n'))
    return EXIT_OK


def main(argv: Optional[list[str]] = None) -> int:
    """
    Entry point

    Returns:
        int: 0 ok, 2 invalid input, 3 out of regime, 64 unknown command, 1 other errors
    """
    argv = list(argv if argv is not None else sys.argv[1:])
    parser = build_parser()

    if argv and not argv[0].startswith('-') and argv[0] not in COMMANDS:
        parser.print_usage(sys.stderr)
        print(f"collapse-sim: unknown command '{argv[0]}' (choose from {', '.join(COMMANDS)})", file=sys.stderr)
        return EXIT_USAGE

    config = load_config()
    setup_logging(config)

    try:
        argv = argv[:1] + _config_tokens(argv) + argv[1:] if argv else argv
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_OK if e.code == 0 else EXIT_INVALID
    except ConfigurationError as e:
        logger.error(str(e))
        return EXIT_FAILURE

    try:
        return run(args, config)
    except RegimeError as e:
        logger.error(f"Out of regime: {e}")
        return EXIT_REGIME
    except (ValidationError, DomainError, PreconditionError) as e:
        logger.error(f"Invalid input: {e}")
        return EXIT_INVALID
    except CollapseSimError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_FAILURE
    except Exception as e:
        logger.error(f"Unexpected error: {str(e)}", exc_info=True)
        return EXIT_FAILURE


if __name__ == '__main__':
    sys.exit(main())
