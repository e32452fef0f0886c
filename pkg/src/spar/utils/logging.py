"""Logging configuration for SPAR."""

import logging
import logging.handlers
import sys
from pathlib import Path
from typing import Iterable, Optional

DEFAULT_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
_MASK = "****"


class SecretMaskFilter(logging.Filter):
    """Replaces registered secret values in log messages."""

    def __init__(self, secrets: Iterable[str] = ()):
        super().__init__()
        self.secrets = {s for s in secrets if s}

    def filter(self, record: logging.LogRecord) -> bool:
        if not self.secrets:
            return True
        message = record.getMessage()
        masked = message
        for secret in self.secrets:
            masked = masked.replace(secret, _MASK)
        if masked != message:
            record.msg = masked
            record.args = ()
        return True


def setup_logging(
    log_level: str = "WARNING",
    log_format: Optional[str] = None,
    log_file: Optional[str] = None,
    secrets: Iterable[str] = (),
) -> None:
    """
    Configure logging for the application.

    Console output goes to stderr so command output on stdout stays clean.

    Args:
        log_level: The logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_format: Custom log format string
        log_file: Path to a rotating log file
        secrets: Values masked out of every log line
    """
    formatter = logging.Formatter(log_format or DEFAULT_FORMAT)
    mask = SecretMaskFilter(secrets)

    root_logger = logging.getLogger()
    root_logger.setLevel(log_level.upper())
    for handler in list(root_logger.handlers):
        if getattr(handler, "_spar_handler", False):
            root_logger.removeHandler(handler)
            handler.close()

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(formatter)
    console_handler.addFilter(mask)
    console_handler._spar_handler = True
    root_logger.addHandler(console_handler)

    if log_file:
        log_dir = Path(log_file).parent
        log_dir.mkdir(parents=True, exist_ok=True)

        file_handler = logging.handlers.RotatingFileHandler(
            log_file,
            maxBytes=10 * 1024 * 1024,  # 10MB
            backupCount=5,
            encoding="utf-8",
        )
        file_handler.setFormatter(formatter)
        file_handler.addFilter(mask)
        file_handler._spar_handler = True
        root_logger.addHandler(file_handler)

    logging.getLogger(__name__).debug("Logging system initialized")


def get_logger(name: str) -> logging.Logger:
    """
    Get a logger instance for the specified name.

    Args:
        name: The name of the logger (typically __name__)

    Returns:
        logging.Logger: Configured logger instance
    """
    return logging.getLogger(name)
