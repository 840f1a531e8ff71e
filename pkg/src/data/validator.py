"""
Data validation module
"""
import os
import pandas as pd
from pathlib import Path
from typing import Tuple, Optional
from core.exceptions import ValidationError
from core.logger import get_logger


class DataValidator:
    """Validates result files and output locations"""

    REQUIRED_COLUMNS = {
        'deviation': ['a2', 'lambdaT', 'p_hat', 'std_error', 'P_series'],
        'kg': ['t', 'z', 'abs_psi'],
        'series': ['a2', 'lambdaT', 'P_series', 'P_quadrature', 'deviation_from_born'],
        'detectability': ['L_m', 'N', 'lambdaT', 'deviation', 'flagged', 'regime_ok'],
    }

    def __init__(self):
        self.logger = get_logger('validator')

    def detect_kind(self, columns) -> Optional[str]:
        """First schema whose required columns are all present"""
        present = set(columns)
        for kind, required in self.REQUIRED_COLUMNS.items():
            if set(required) <= present:
                return kind
        return None

    def validate_output_dir(self, output_dir: Path) -> bool:
        """
        Validate that the output directory exists (or can be created) and is writable

        Args:
            output_dir: Directory for run artifacts

        Returns:
            bool: True if valid

        Raises:
            ValidationError: If validation fails
        """
        if output_dir.exists() and not output_dir.is_dir():
            self.logger.error(f"Output path is not a directory: {output_dir}")
            raise ValidationError(f"Output path is not a directory: {output_dir}")

        try:
            output_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            self.logger.error(f"Cannot create output directory: {output_dir}")
            raise ValidationError(f"Cannot create output directory {output_dir}: {e}")

        if not os.access(output_dir, os.W_OK):
            self.logger.error(f"Output directory is not writable: {output_dir}")
            raise ValidationError(f"Output directory is not writable: {output_dir}")

        self.logger.debug(f"Output directory validated: {output_dir}")
        return True

    def validate_csv(self, csv_path: Path, kind: Optional[str] = None) -> Tuple[bool, Optional[str]]:
        """
        Validate CSV structure and content against a result schema

        Args:
            csv_path: Path to CSV file
            kind: Schema name; detected from the header when omitted

        Returns:
            Tuple[bool, Optional[str]]: (is_valid, error_message)
        """
        try:
            df = pd.read_csv(csv_path)

            if kind is None:
                kind = self.detect_kind(df.columns)
                if kind is None:
                    error = f"Unrecognized columns: {list(df.columns)}"
                    self.logger.error(error)
                    return False, error
            elif kind not in self.REQUIRED_COLUMNS:
                error = f"Unknown schema: {kind}"
                self.logger.error(error)
                return False, error

            required = self.REQUIRED_COLUMNS[kind]
            missing_cols = set(required) - set(df.columns)
            if missing_cols:
                error = f"Missing columns: {sorted(missing_cols)}"
                self.logger.error(error)
                return False, error

            if df.empty:
                error = "CSV file is empty"
                self.logger.error(error)
                return False, error

            # NaN marks out-of-regime cells; worth a warning, not a failure
            null_counts = df[required].isnull().sum()
            if null_counts.any():
                self.logger.warning(f"Null values found: {null_counts[null_counts > 0].to_dict()}")

            self.logger.info(f"CSV validated as '{kind}': {csv_path} ({len(df)} rows)")
            return True, None

        except Exception as e:
            error = f"CSV validation failed: {str(e)}"
            self.logger.error(error)
            return False, error
