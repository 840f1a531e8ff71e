"""
Result export module
"""
import hashlib
import json
from pathlib import Path
from typing import Any
import pandas as pd
from core.exceptions import CollapseSimError, ValidationError
from core.logger import get_logger
from physics.kg_solver import CharacteristicGrid, write_binary
from .models import RunManifest

MANIFEST_NAME = 'manifest.json'


def sha256_of(path: Path) -> str:
    digest = hashlib.sha256()
    with path.open('rb') as handle:
        for block in iter(lambda: handle.read(65536), b''):
            digest.update(block)
    return digest.hexdigest()


def _json_default(value: Any):
    # numpy scalars, Fractions and paths
    if hasattr(value, 'item'):
        return value.item()
    if hasattr(value, 'numerator') and hasattr(value, 'denominator'):
        return float(value)
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Not JSON serializable: {type(value).__name__}")


def dumps(payload: Any) -> str:
    """Canonical JSON text used for every artifact"""
    return json.dumps(payload, sort_keys=True, indent=2, default=_json_default) + '\n'


class ResultExporter:
    """Writes run artifacts to one output directory and tracks their hashes"""

    def __init__(self, output_dir: Path, formats: tuple[str, ...] = ('csv', 'json')):
        """
        Initialize result exporter

        Args:
            output_dir: Directory receiving the artifacts
            formats: Enabled formats out of csv, json, svg, bin
        """
        self.output_dir = Path(output_dir)
        self.formats = tuple(formats)
        self.files: dict[str, Path] = {}
        self.logger = get_logger('exporter')

    def enabled(self, fmt: str) -> bool:
        return fmt in self.formats

    def _target(self, name: str) -> Path:
        self.output_dir.mkdir(parents=True, exist_ok=True)
        return self.output_dir / name

    def write_csv(self, df: pd.DataFrame, name: str) -> Path:
        """
        Export a table as CSV (comma separated, header row, LF line endings)

        Args:
            df: Table to export
            name: File name inside the output directory

        Returns:
            Path: Path to the written file

        Raises:
            ValidationError: If the file cannot be written
        """
        path = self._target(name)
        try:
            df.to_csv(path, index=False, lineterminator='\n')
        except OSError as e:
            self.logger.error(f"CSV export failed: {path}")
            raise ValidationError(f"CSV export failed: {e}")
        self.files[name] = path
        self.logger.info(f"Exported {len(df)} rows to: {path}")
        return path

    def write_json(self, payload: Any, name: str) -> Path:
        path = self._target(name)
        try:
            path.write_text(dumps(payload), encoding='utf-8')
        except (OSError, TypeError) as e:
            self.logger.error(f"JSON export failed: {path}")
            raise ValidationError(f"JSON export failed: {e}")
        self.files[name] = path
        self.logger.info(f"Exported to: {path}")
        return path

    def write_grid(self, grid: CharacteristicGrid, name: str) -> Path:
        """Binary Goursat grid: 32-byte header then (re, im) float64 pairs"""
        path = write_binary(grid, self._target(name))
        self.files[name] = path
        self.logger.info(f"Exported {grid.n}x{grid.n} grid to: {path}")
        return path

    def register(self, name: str, path: Path) -> Path:
        """Track a file written elsewhere (e.g. a plot)"""
        self.files[name] = Path(path)
        return Path(path)

    def hashes(self) -> dict[str, str]:
        return {name: sha256_of(path) for name, path in sorted(self.files.items())}

    def write_manifest(self, manifest: RunManifest) -> Path:
        """
        Hash every tracked file and write manifest.json

        Raises:
            CollapseSimError: If a tracked file disappeared
        """
        try:
            manifest.files = self.hashes()
        except FileNotFoundError as e:
            self.logger.error("Tracked artifact missing")
            raise CollapseSimError(f"Tracked artifact missing: {e}")
        path = self._target(MANIFEST_NAME)
        path.write_text(dumps(manifest.to_dict()), encoding='utf-8')
        self.logger.info(f"Manifest written: {path}")
        return path
