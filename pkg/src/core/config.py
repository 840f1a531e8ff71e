"""
Configuration management module
"""
from dataclasses import dataclass
from pathlib import Path
import os
from dotenv import load_dotenv


@dataclass
class SimulationConfig:
    """Monte Carlo collapse-race configuration"""
    threads: int
    trials: int
    max_events: int
    chunk_size: int
    truncation_warning: float = 0.01


@dataclass
class SeriesConfig:
    """Diagram series and quadrature configuration"""
    epsrel: float
    max_lambda_t: float
    max_p_coefficient: float = 0.5


@dataclass
class SolverConfig:
    """Klein-Gordon Goursat solver configuration"""
    mass: float
    extent_widths: float = 8.0
    consistency_tol: float = 1e-8


@dataclass
class PathConfig:
    """Path configuration"""
    project_root: Path
    output_dir: Path
    logs_dir: Path


@dataclass
class AppConfig:
    """Main application configuration"""
    simulation: SimulationConfig
    series: SeriesConfig
    solver: SolverConfig
    paths: PathConfig
    version: str = '1.0.0'


def load_config() -> AppConfig:
    """
    Load configuration from environment variables

    Returns:
        AppConfig: Loaded configuration object
    """
    # Load environment variables from .env file
    env_path = Path(__file__).parent.parent.parent / 'config' / '.env'
    load_dotenv(env_path)

    # Get project root directory
    project_root = Path(__file__).parent.parent.parent

    return AppConfig(
        simulation=SimulationConfig(
            threads=max(1, int(os.getenv('COLLAPSE_SIM_THREADS', '1'))),
            trials=int(os.getenv('COLLAPSE_SIM_TRIALS', '100000')),
            max_events=int(os.getenv('COLLAPSE_SIM_MAX_EVENTS', '64')),
            chunk_size=int(os.getenv('COLLAPSE_SIM_CHUNK_SIZE', '20000'))
        ),
        series=SeriesConfig(
            epsrel=float(os.getenv('COLLAPSE_SIM_EPSREL', '1e-10')),
            max_lambda_t=float(os.getenv('COLLAPSE_SIM_MAX_LAMBDA_T', str(2.0 / 7.0)))
        ),
        solver=SolverConfig(
            mass=float(os.getenv('COLLAPSE_SIM_KG_MASS', '20.0'))
        ),
        paths=PathConfig(
            project_root=project_root,
            output_dir=Path(os.getenv('COLLAPSE_SIM_OUTPUT_DIR', str(project_root / 'runs'))),
            logs_dir=Path(os.getenv('COLLAPSE_SIM_LOG_DIR', str(project_root / 'logs')))
        )
    )
