"""
Pytest configuration and fixtures
"""
import pytest
import sys
from pathlib import Path

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent / 'src'))


def pytest_configure(config):
    config.addinivalue_line('markers', 'slow: Monte Carlo acceptance runs with 10^6 trials')


@pytest.fixture
def app_config(tmp_path, monkeypatch):
    """Configuration pointing output and logs into a temporary directory"""
    from core.config import load_config
    monkeypatch.setenv('COLLAPSE_SIM_OUTPUT_DIR', str(tmp_path / 'runs'))
    monkeypatch.setenv('COLLAPSE_SIM_LOG_DIR', str(tmp_path / 'logs'))
    monkeypatch.setenv('COLLAPSE_SIM_THREADS', '1')
    return load_config()
