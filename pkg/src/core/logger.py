"""
Logging configuration module
"""
import logging
import sys
import os
from typing import Optional
from colorlog import ColoredFormatter
from .config import AppConfig

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
DATE_FORMAT = '%Y-%m-%d %H:%M:%S'
LOG_FILE = 'collapse_sim.log'


def setup_logging(config: AppConfig, level: Optional[str] = None, log_file: bool = True):
    """
    Setup logging configuration for the application

    Args:
        config: Application configuration object
        level: Level name overriding LOG_LEVEL (e.g. from a --verbose flag)
        log_file: Also append to logs_dir/collapse_sim.log
    """
    log_level_str = (level or os.getenv('LOG_LEVEL', 'INFO')).upper()
    log_level = getattr(logging, log_level_str, logging.INFO)

    root_logger = logging.getLogger()
    root_logger.setLevel(log_level)
    root_logger.handlers.clear()

    # Console handler with colors; stderr keeps stdout free for results
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(log_level)
    console_handler.setFormatter(ColoredFormatter(
        '%(log_color)s' + LOG_FORMAT,
        datefmt=DATE_FORMAT,
        log_colors={
            'DEBUG': 'cyan',
            'INFO': 'green',
            'WARNING': 'yellow',
            'ERROR': 'red',
            'CRITICAL': 'red,bg_white',
        }
    ))
    root_logger.addHandler(console_handler)

    if log_file:
        config.paths.logs_dir.mkdir(parents=True, exist_ok=True)
        file_handler = logging.FileHandler(config.paths.logs_dir / LOG_FILE, encoding='utf-8')
        file_handler.setLevel(log_level)
        file_handler.setFormatter(logging.Formatter(LOG_FORMAT, datefmt=DATE_FORMAT))
        root_logger.addHandler(file_handler)


def get_logger(name: str) -> logging.Logger:
    """
    Get a logger with the specified name

    Args:
        name: Name for the logger (typically the module name)

    Returns:
        logging.Logger: Logger instance
    """
    return logging.getLogger(name)
