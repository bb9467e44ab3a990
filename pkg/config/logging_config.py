#config/logging_config.py
"""
Logging configuration for the softmax mixture toolkit.
Provides structured logging with optional file rotation and different log levels.

Library modules only call ``get_logger``; handlers are installed by the
command-line entry point through ``setup_logging``.
"""

import logging
import logging.handlers
import sys
from pathlib import Path
from typing import Any, Optional, Union

from config.settings import get_settings

settings = get_settings()


class ColoredFormatter(logging.Formatter):
    """Custom formatter with colors for console output."""

    # ANSI color codes
    COLORS = {
        'DEBUG': '\033[36m',    # Cyan
        'INFO': '\033[32m',     # Green
        'WARNING': '\033[33m',  # Yellow
        'ERROR': '\033[31m',    # Red
        'CRITICAL': '\033[35m', # Magenta
        'RESET': '\033[0m'      # Reset
    }

    def format(self, record: logging.LogRecord) -> str:
        """Format log record with colors."""
        log_color = self.COLORS.get(record.levelname, self.COLORS['RESET'])
        reset_color = self.COLORS['RESET']

        # the record is shared with the file handlers
        original = record.levelname
        record.levelname = f"{log_color}{record.levelname}{reset_color}"
        try:
            return super().format(record)
        finally:
            record.levelname = original


class StructuredFormatter(logging.Formatter):
    """Structured formatter for file logging."""

    def format(self, record: logging.LogRecord) -> str:
        """Format log record with its estimation context."""
        if hasattr(record, 'method'):
            record.context = f"[{record.method}]"
        elif hasattr(record, 'scenario_id'):
            record.context = f"[scenario:{record.scenario_id}]"
        else:
            record.context = ""

        return super().format(record)


class BenchLogFilter(logging.Filter):
    """Filter to only include benchmark-harness messages."""

    def filter(self, record: logging.LogRecord) -> bool:
        return record.name.startswith('src.bench')


def setup_logging(level: Optional[str] = None, log_dir: Optional[str] = None) -> None:
    """
    Set up console and optional rotating-file logging.

    Args:
        level: Root level; defaults to the configured ``log_level``.
        log_dir: Directory for log files; defaults to the configured
            ``log_dir``. No files are written when both are unset.
    """
    level_name = (level or settings.log_level).upper()
    log_dir = log_dir or settings.log_dir

    root_logger = logging.getLogger()
    root_logger.setLevel(getattr(logging, level_name))
    root_logger.handlers.clear()

    # stdout carries command results, so the console log goes to stderr
    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setLevel(getattr(logging, level_name))
    console_handler.setFormatter(ColoredFormatter(
        fmt='%(asctime)s | %(levelname)s | %(name)s | %(message)s',
        datefmt='%Y-%m-%d %H:%M:%S'
    ))
    root_logger.addHandler(console_handler)

    if log_dir:
        logs_path = Path(log_dir)
        logs_path.mkdir(parents=True, exist_ok=True)
        file_formatter = StructuredFormatter(
            fmt=(
                '%(asctime)s | %(levelname)s | %(name)s %(context)s | '
                '%(funcName)s:%(lineno)d | %(message)s'
            ),
            datefmt='%Y-%m-%d %H:%M:%S'
        )

        app_handler = logging.handlers.RotatingFileHandler(
            logs_path / "softmix.log",
            maxBytes=10 * 1024 * 1024,  # 10MB
            backupCount=5
        )
        app_handler.setLevel(getattr(logging, level_name))
        app_handler.setFormatter(file_formatter)
        root_logger.addHandler(app_handler)

        bench_handler = logging.handlers.RotatingFileHandler(
            logs_path / "bench.log",
            maxBytes=5 * 1024 * 1024,  # 5MB
            backupCount=3
        )
        bench_handler.setLevel(logging.INFO)
        bench_handler.addFilter(BenchLogFilter())
        bench_handler.setFormatter(file_formatter)
        root_logger.addHandler(bench_handler)

        error_handler = logging.handlers.RotatingFileHandler(
            logs_path / "error.log",
            maxBytes=5 * 1024 * 1024,  # 5MB
            backupCount=5
        )
        error_handler.setLevel(logging.ERROR)
        error_handler.setFormatter(file_formatter)
        root_logger.addHandler(error_handler)


def get_logger(
    name: str, **context: Any
) -> Union[logging.Logger, logging.LoggerAdapter]:
    """
    Get a logger with optional context.

    Args:
        name: Logger name (usually __name__)
        **context: Additional context to include in logs

    Returns:
        Configured logger instance
    """
    logger = logging.getLogger(name)

    if context:
        return logging.LoggerAdapter(logger, context)

    return logger


def _join_details(details: dict) -> str:
    return " | ".join(f"{k}={v}" for k, v in details.items())


def log_fit_progress(method: str, stage: str, **details: Any) -> None:
    """Log one stage of an estimation pipeline."""
    logger = get_logger('src.estimation', method=method)

    message = stage
    detail_str = _join_details(details)
    if detail_str:
        message += f" | {detail_str}"

    logger.info(message)


def log_bench_cell(scenario_id: str, replicate: int, **details: Any) -> None:
    """Log a finished benchmark cell."""
    logger = get_logger('src.bench', scenario_id=scenario_id)

    message = f"replicate={replicate}"
    detail_str = _join_details(details)
    if detail_str:
        message += f" | {detail_str}"

    logger.info(message)
