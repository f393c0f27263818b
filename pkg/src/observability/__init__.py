"""
Structured logging setup and log value sanitization
"""

from src.observability.logger import setup_logging
from src.observability.log_sanitizer import safe_log_value

__all__ = ["setup_logging", "safe_log_value"]
