"""
Centralized run logging on top of loguru.
Designers, experiments and the CLI report through one RunLogger.
"""
import sys
import traceback

from loguru import logger as _loguru

from config.settings import settings
from .formatters import LogFormatter
from .rate_limiter import LogRateLimiter

LOG_FORMAT = (
    "<green>{time:HH:mm:ss}</green> | <level>{level: <8}</level> | "
    "<cyan>{extra[component]}</cyan> | {message}"
)


def configure_logging(level: str | None = None, log_file: str | None = None):
    """Install the stderr sink (and an optional file sink) for the process."""
    _loguru.remove()
    _loguru.configure(extra={"component": "esc"})
    _loguru.add(sys.stderr, level=(level or settings.log_level).upper(), format=LOG_FORMAT)
    path = settings.log_file if log_file is None else log_file
    if path:
        _loguru.add(path, level="DEBUG", format=LOG_FORMAT, rotation="10 MB", encoding="utf-8")


class RunLogger:
    def __init__(self, component: str = "esc", rate_limit: bool | None = None):
        self.component = component
        self.formatter = LogFormatter()
        self.rate_limiter = LogRateLimiter()
        self.rate_limit = settings.log_rate_limit if rate_limit is None else rate_limit
        self._log = _loguru.bind(component=component)

    def child(self, component: str) -> "RunLogger":
        return RunLogger(component, rate_limit=self.rate_limit)

    def _emit(self, level: str, message: str, urgent: bool = False):
        if not urgent and self.rate_limit and not self.rate_limiter.should_send(level, message):
            return
        self._log.log(level, message)

    # ─── Public API ────────────────────────────────────────────────

    def log_system_event(self, event_type: str, details: str = ""):
        self._emit("INFO", self.formatter.format_system_event(event_type, details))

    def log_info(self, title: str, details: str = ""):
        self._emit("INFO", self.formatter.format_info(title, details))

    def log_debug(self, title: str, details: str = ""):
        self._emit("DEBUG", self.formatter.format_info(title, details))

    def log_warning(self, warning_type: str, details: str = ""):
        self._emit("WARNING", self.formatter.format_warning(warning_type, details))

    def log_error(self, error_type: str, error: Exception, context: dict = None):
        tb = traceback.format_exc() if context is None else context.get("traceback", "")
        if tb.strip() == "NoneType: None":
            tb = ""
        msg = self.formatter.format_error(error_type, error, tb, context)
        self._emit("ERROR", msg, urgent=True)

    def log_critical(self, critical_type: str, details: str = ""):
        self._emit("CRITICAL", self.formatter.format_critical(critical_type, details), urgent=True)

    def log_design_result(self, data: dict):
        self._emit("SUCCESS", self.formatter.format_design_result(data), urgent=True)

    def log_experiment_row(self, row: dict):
        self._emit("INFO", self.formatter.format_experiment_row(row), urgent=True)
