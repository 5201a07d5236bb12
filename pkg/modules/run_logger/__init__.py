from .logger import RunLogger, configure_logging
from .formatters import LogFormatter
from .rate_limiter import LogRateLimiter
