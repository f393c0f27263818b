"""
Structured logging setup.

JSON records on stderr (and optionally a file) via python-json-logger, so
long Monte Carlo runs can be filtered by trial / time fields afterwards.
"""

import logging
import sys
from typing import Optional

from pythonjsonlogger import jsonlogger

LOG_FORMAT = "%(asctime)s %(name)s %(levelname)s %(message)s"

# Marks handlers installed here so repeated calls replace instead of stacking
_HANDLER_TAG = "_glmb_tbd_handler"


def setup_logging(level: str = "INFO", log_file: Optional[str] = None) -> logging.Logger:
    """Setup structured JSON logging on the root logger"""
    root_logger = logging.getLogger()
    root_logger.setLevel(getattr(logging, level.upper(), logging.INFO))

    for handler in list(root_logger.handlers):
        if getattr(handler, _HANDLER_TAG, False):
            root_logger.removeHandler(handler)
            handler.close()

    json_formatter = jsonlogger.JsonFormatter(LOG_FORMAT)

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(json_formatter)
    setattr(console_handler, _HANDLER_TAG, True)
    root_logger.addHandler(console_handler)

    if log_file:
        try:
            file_handler = logging.FileHandler(log_file)
            file_handler.setFormatter(json_formatter)
            setattr(file_handler, _HANDLER_TAG, True)
            root_logger.addHandler(file_handler)
        except (FileNotFoundError, PermissionError) as e:
            root_logger.warning(f"Log file unavailable ({e}); logging to stderr only")

    # matplotlib is chatty at DEBUG (font cache scans)
    logging.getLogger("matplotlib").setLevel(logging.WARNING)

    return root_logger
