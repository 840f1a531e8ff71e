"""
Tests for result export module
"""
import json
from fractions import Fraction
import numpy as np
import pandas as pd
import pytest
from core.exceptions import CollapseSimError
from data.exporter import MANIFEST_NAME, ResultExporter, dumps, sha256_of
from data.models import RunManifest
from physics.kg_solver import plane_wave_boundary, read_binary, solve_goursat


@pytest.fixture
def exporter(tmp_path):
    """Exporter writing into a temporary run directory"""
    return ResultExporter(tmp_path / 'run', formats=('csv', 'json', 'bin'))


@pytest.fixture
def manifest():
    """Manifest for a series run"""
    return RunManifest(command='series', config={'a2': [0.7]}, tool_version='1.0.0', seed=None,
                       wall_time=0.25, result={'P': 0.7066528})


def test_dumps_canonical():
    """Test sorted keys, numpy scalars and fractions"""
    text = dumps({'b': np.float64(0.5), 'a': Fraction(1, 4), 'n': np.int64(3)})
    assert text.endswith('\n')
    assert list(json.loads(text)) == ['a', 'b', 'n']
    assert json.loads(text) == {'a': 0.25, 'b': 0.5, 'n': 3}


def test_dumps_rejects_unknown_type():
    """Test objects without a JSON form"""
    with pytest.raises(TypeError):
        dumps({'x': object()})


def test_write_csv_lf_endings(exporter):
    """Test CSV uses LF line endings and no index"""
    path = exporter.write_csv(pd.DataFrame({'a2': [0.7, 0.6], 'lambdaT': [0.1, 0.05]}), 'table.csv')
    raw = path.read_bytes()
    assert b'\r\n' not in raw
    assert raw.splitlines()[0] == b'a2,lambdaT'
    assert exporter.files == {'table.csv': path}


def test_write_grid(exporter):
    """Test binary grid goes through the tracked files"""
    grid = solve_goursat(plane_wave_boundary(1.25, 0.75), mu=1.0, extent=1.0, n=5)
    path = exporter.write_grid(grid, 'kg_grid.bin')
    np.testing.assert_array_equal(read_binary(path).values, grid.values)
    assert 'kg_grid.bin' in exporter.hashes()


def test_manifest_hashes_files(exporter, manifest):
    """Test manifest lists SHA-256 of every artifact"""
    csv_path = exporter.write_csv(pd.DataFrame({'x': [1]}), 'a.csv')
    exporter.write_json({'p_hat': 0.7}, 'estimate.json')
    path = exporter.write_manifest(manifest)
    assert path.name == MANIFEST_NAME
    payload = json.loads(path.read_text())
    assert payload['files']['a.csv'] == sha256_of(csv_path)
    assert set(payload['files']) == {'a.csv', 'estimate.json'}
    assert payload['command'] == 'series'
    assert 'rule_variant_id' not in payload


def test_manifest_missing_artifact(exporter, manifest, tmp_path):
    """Test vanished artifact aborts the manifest"""
    exporter.register('plot.svg', tmp_path / 'nowhere.svg')
    with pytest.raises(CollapseSimError):
        exporter.write_manifest(manifest)


def test_data_section_drops_wall_time(manifest):
    """Test rerun comparison ignores the wall time"""
    other = RunManifest(**{**manifest.__dict__, 'wall_time': 9.0})
    assert manifest.data_section() == other.data_section()
    assert 'wall_time' not in manifest.data_section()


def test_manifest_extras():
    """Test Monte Carlo runs carry rule variant and particle count"""
    payload = RunManifest(command='mc', config={}, tool_version='1.0.0', seed=1, wall_time=0.0,
                          rule_variant_id='count-suppression-v1', particle_count=1).to_dict()
    assert payload['rule_variant_id'] == 'count-suppression-v1'
    assert payload['particle_count'] == 1


def test_manifest_result_keys_flat():
    """Test result values are top-level manifest fields and run fields win on a clash"""
    payload = RunManifest(command='mc', config={}, tool_version='1.0.0', seed=3, wall_time=1.5,
                          result={'p_hat': 0.71, 'std_error': 0.001, 'truncation_fraction': 0.0,
                                  'params': {'a2': 0.7}, 'seed': 99},
                          rule_variant_id='count-suppression-v1').to_dict()
    assert payload['p_hat'] == 0.71
    assert payload['std_error'] == 0.001
    assert payload['truncation_fraction'] == 0.0
    assert payload['params'] == {'a2': 0.7}
    assert payload['seed'] == 3
    assert 'result' not in payload


def test_enabled_formats(exporter):
    """Test format switches"""
    assert exporter.enabled('bin')
    assert not exporter.enabled('svg')
