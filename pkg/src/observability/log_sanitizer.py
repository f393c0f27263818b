"""
Log value sanitization.

Scenario names, target ids and file paths come from user-edited JSON files
and end up inside log messages; strip anything that could forge or split a
log record.
"""

import re
from typing import Any, Optional


class LogSanitizer:
    """Sanitize values before logging"""

    # Control characters to remove (except tab / newline, escaped below)
    CONTROL_CHARS = re.compile(r"[\x00-\x08\x0B\x0C\x0E-\x1F\x7F]")

    MAX_LOG_LENGTH = 200

    @classmethod
    def sanitize(cls, value: Any, max_length: Optional[int] = None) -> str:
        """
        Sanitize a value for safe logging.

        Args:
            value: Value to sanitize (converted to string)
            max_length: Max length (default: MAX_LOG_LENGTH)

        Returns:
            Single-line string without control characters
        """
        if value is None:
            return "None"

        s = cls.CONTROL_CHARS.sub("", str(value))
        s = s.replace("\n", "\\n").replace("\r", "\\r").replace("\t", "\\t")

        max_len = max_length or cls.MAX_LOG_LENGTH
        if len(s) > max_len:
            s = s[:max_len] + "..."
        return s


def safe_log_value(value: Any, max_length: Optional[int] = None) -> str:
    """
    Convenience function for sanitizing a single value for logging.

    Usage:
        logger.info(f"Loaded scenario: {safe_log_value(cfg.name)}")
    """
    return LogSanitizer.sanitize(value, max_length)
