"""
Logging Setup

Numeric modules log through children of the ``toric-geodesics`` logger.
The CLI attaches handlers once per run: a console handler on stderr
(colored or JSON lines) and optionally a JSON file handler.
"""

import contextvars
import json
import logging
import sys
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Dict, Optional

ROOT_LOGGER = "toric-geodesics"
DEFAULT_LOG_FILE = "logs/toric.log"

# attributes every LogRecord has; anything else came from extra= or a LogContext
_RECORD_ATTRS = frozenset(vars(logging.LogRecord('', 0, '', 0, '', (), None))) | {'message', 'asctime'}


class StructuredFormatter(logging.Formatter):
    """One JSON object per record: timestamp, level, logger, message and any context fields"""

    def format(self, record: logging.LogRecord) -> str:
        payload: Dict[str, Any] = {
            'timestamp': datetime.fromtimestamp(record.created, timezone.utc).isoformat(),
            'level': record.levelname,
            'logger': record.name,
            'message': record.getMessage(),
        }
        payload.update(
            (key, value) for key, value in vars(record).items()
            if key not in _RECORD_ATTRS and not key.startswith('_')
        )
        if record.exc_info:
            payload['exception'] = self.formatException(record.exc_info)
        return json.dumps(payload, default=str)


class ColoredFormatter(logging.Formatter):
    """
    Single-line console format with an ANSI-colored level

        [2026-01-13 10:30:45] [INFO    ] [toric-geodesics.rays] [rays.nu_0.3] l=64 gap=1.2e-05

    The bracketed task id appears only inside a LogContext that sets one.
    """

    LEVEL_COLORS = {
        logging.DEBUG: '\033[36m',
        logging.INFO: '\033[32m',
        logging.WARNING: '\033[33m',
        logging.ERROR: '\033[31m',
        logging.CRITICAL: '\033[35m',
    }
    RESET = '\033[0m'

    def format(self, record: logging.LogRecord) -> str:
        color = self.LEVEL_COLORS.get(record.levelno, self.RESET)
        task_id = getattr(record, 'task_id', None)
        parts = [
            f"[{self.formatTime(record, '%Y-%m-%d %H:%M:%S')}]",
            f"{color}[{record.levelname:8s}]{self.RESET}",
            f"[{record.name}]",
        ]
        if task_id:
            parts.append(f"[{task_id}]")
        parts.append(record.getMessage())
        line = " ".join(parts)
        if record.exc_info:
            line = f"{line}\n{self.formatException(record.exc_info)}"
        return line


def setup_logging(
    level: str = "INFO",
    format_type: str = "colored",
    log_file: Optional[str] = None,
    enable_file_logging: bool = False
) -> logging.Logger:
    """
    Replace the handlers of the ``toric-geodesics`` logger

    Args:
        level: DEBUG, INFO, WARNING, ERROR or CRITICAL
        format_type: "colored" or "json" for the stderr handler
        log_file: JSON log file; implies file logging
        enable_file_logging: write JSON to ``logs/toric.log`` when no file is given

    Returns:
        The configured package logger
    """
    numeric_level = logging.getLevelName(level.upper())
    if not isinstance(numeric_level, int):
        raise ValueError(f"Unknown log level: {level}")

    logger = logging.getLogger(ROOT_LOGGER)
    logger.setLevel(numeric_level)
    logger.handlers.clear()

    console = logging.StreamHandler(sys.stderr)
    console.setFormatter(StructuredFormatter() if format_type == "json" else ColoredFormatter())
    handlers: list[logging.Handler] = [console]

    if log_file or enable_file_logging:
        path = Path(log_file or DEFAULT_LOG_FILE)
        path.parent.mkdir(parents=True, exist_ok=True)
        to_file = logging.FileHandler(path, encoding="utf-8")
        to_file.setFormatter(StructuredFormatter())
        handlers.append(to_file)

    for handler in handlers:
        handler.setLevel(numeric_level)
        logger.addHandler(handler)
    return logger


def get_logger(name: str = ROOT_LOGGER) -> logging.Logger:
    """
    Logger under ``toric-geodesics``; short names ("rays") are prefixed

    Example:
        >>> get_logger("envelopes").debug("C=%g stabilized", 4.0)
    """
    if name == ROOT_LOGGER or name.startswith(ROOT_LOGGER + "."):
        return logging.getLogger(name)
    return logging.getLogger(f"{ROOT_LOGGER}.{name}")


_context_fields: contextvars.ContextVar[Dict[str, Any]] = contextvars.ContextVar(
    "toric_log_context", default={}
)
_factory_installed = False


def _ensure_record_factory() -> None:
    global _factory_installed
    if _factory_installed:
        return
    base_factory = logging.getLogRecordFactory()

    def with_context(*args, **kwargs) -> logging.LogRecord:
        record = base_factory(*args, **kwargs)
        for key, value in _context_fields.get().items():
            setattr(record, key, value)
        return record

    logging.setLogRecordFactory(with_context)
    _factory_installed = True


class LogContext:
    """
    Attach fields (task_id, suite, ...) to every record created in the block

    The fields live in a context variable; ``asyncio.to_thread`` copies it,
    so each verify task keeps its own id on its worker thread.

    Example:
        >>> with LogContext(task_id="rays.nu_0.3", suite="rays"):
        ...     get_logger("rays").info("building ray")
    """

    def __init__(self, **fields: Any):
        self.fields = fields
        self._token: Optional[contextvars.Token] = None

    def __enter__(self) -> "LogContext":
        _ensure_record_factory()
        self._token = _context_fields.set({**_context_fields.get(), **self.fields})
        return self

    def __exit__(self, *exc_info) -> None:
        if self._token is not None:
            _context_fields.reset(self._token)
            self._token = None


__all__ = [
    'ROOT_LOGGER',
    'setup_logging',
    'get_logger',
    'LogContext',
    'StructuredFormatter',
    'ColoredFormatter',
]
