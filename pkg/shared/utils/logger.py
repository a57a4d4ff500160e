"""
Logging configuration for the simulator.
Console output goes to stderr so stdout stays free for check tables.
"""

import logging
import sys
from pathlib import Path
from datetime import datetime

from infrastructure.config.settings import settings


class SimulationLogger:
    """Component logger with pipe-separated context."""

    def __init__(self, name: str = "vpcollapse", log_level: str = "INFO"):
        self.logger = logging.getLogger(name)
        self.logger.setLevel(getattr(logging, log_level.upper()))

        # Avoid duplicate handlers
        if not self.logger.handlers:
            self._setup_handlers()

    def _setup_handlers(self):
        """Setup console and file handlers with proper formatting."""
        self.logger.propagate = False
        console_formatter = logging.Formatter(
            '%(asctime)s | %(levelname)-8s | %(name)s | %(message)s',
            datefmt='%H:%M:%S'
        )
        file_formatter = logging.Formatter(
            '%(asctime)s | %(levelname)-8s | %(name)s | %(filename)s:%(lineno)d | %(message)s',
            datefmt='%Y-%m-%d %H:%M:%S'
        )

        if settings.logging.enable_console:
            console_handler = logging.StreamHandler(sys.stderr)
            console_handler.setLevel(getattr(logging, settings.logging.level.upper()))
            console_handler.setFormatter(console_formatter)
            self.logger.addHandler(console_handler)

        if settings.logging.enable_file:
            log_dir = Path(settings.logging.log_dir)
            try:
                log_dir.mkdir(parents=True, exist_ok=True)
                log_file = log_dir / f"vpcollapse_{datetime.now().strftime('%Y%m%d')}.log"
                file_handler = logging.FileHandler(log_file, encoding='utf-8')
            except OSError:
                # read-only working directory: console only
                return
            file_handler.setLevel(logging.DEBUG)
            file_handler.setFormatter(file_formatter)
            self.logger.addHandler(file_handler)

    @staticmethod
    def _context(kwargs) -> str:
        return f" | {kwargs}" if kwargs else ""

    def info(self, msg: str, **kwargs):
        """Log info message with optional context."""
        self.logger.info(f"{msg}{self._context(kwargs)}")

    def debug(self, msg: str, **kwargs):
        """Log debug message with optional context."""
        self.logger.debug(f"{msg}{self._context(kwargs)}")

    def warning(self, msg: str, **kwargs):
        """Log warning message with optional context."""
        self.logger.warning(f"{msg}{self._context(kwargs)}")

    def error(self, msg: str, **kwargs):
        """Log error message with optional context."""
        self.logger.error(f"{msg}{self._context(kwargs)}")

    def success(self, msg: str, **kwargs):
        """Log success message (info level with ✅)."""
        self.logger.info(f"✅ {msg}{self._context(kwargs)}")

    def progress(self, msg: str, **kwargs):
        """Log progress message (info level with 🔄)."""
        self.logger.info(f"🔄 {msg}{self._context(kwargs)}")

    def iteration(self, index: int, **kwargs):
        """Log one optimizer iteration (debug level)."""
        self.logger.debug(f"📉 iteration {index}{self._context(kwargs)}")

    def check_result(self, suite: str, name: str, passed: bool, **kwargs):
        """Log a verification check outcome."""
        mark = "✅" if passed else "❌"
        level = logging.INFO if passed else logging.ERROR
        self.logger.log(level, f"{mark} Check [{suite}/{name}]{self._context(kwargs)}")


def get_logger(component: str, level: str = "DEBUG") -> SimulationLogger:
    """Get a logger for a specific component."""
    return SimulationLogger(f"vpcollapse.{component}", level)


def set_console_level(level: str):
    """Change the console threshold of every simulator logger created so far."""
    threshold = getattr(logging, level.upper())
    settings.logging.level = level.upper()
    for name, logger in logging.root.manager.loggerDict.items():
        if not name.startswith("vpcollapse") or not isinstance(logger, logging.Logger):
            continue
        for handler in logger.handlers:
            if isinstance(handler, logging.StreamHandler) and not isinstance(handler, logging.FileHandler):
                handler.setLevel(threshold)


# Main application logger
app_logger = get_logger("app")
