"""Rate limiter for repeated log messages (per-iteration reseeds, stalls)."""
import hashlib
import time


class LogRateLimiter:
    TIME_WINDOWS = {
        "DEBUG": 10,
        "INFO": 5,
        "SUCCESS": 10,
        "WARNING": 30,
        "ERROR": 0,        # No limit
        "CRITICAL": 0,     # No limit
    }

    def __init__(self, clock=time.monotonic):
        self._clock = clock
        self._counters: dict[str, dict] = {}

    def _hash(self, message: str) -> str:
        return hashlib.md5(message.encode()).hexdigest()[:12]

    def should_send(self, level: str, message: str) -> bool:
        """Check if this log message should be emitted now."""
        window = self.TIME_WINDOWS.get(level, 5)
        if window == 0:
            return True

        key = f"{level}:{self._hash(message)}"
        now = self._clock()

        entry = self._counters.get(key)
        if entry is None or now - entry["last_sent"] >= window:
            self._counters[key] = {"count": 1, "suppressed": 0, "last_sent": now}
            return True

        entry["count"] += 1
        entry["suppressed"] += 1
        return False

    def suppressed_count(self, level: str, message: str) -> int:
        entry = self._counters.get(f"{level}:{self._hash(message)}")
        return entry["suppressed"] if entry else 0

    def cleanup(self, max_age: float = 3600):
        """Remove entries not sent within max_age seconds."""
        now = self._clock()
        stale_keys = [
            k for k, v in self._counters.items()
            if now - v["last_sent"] > max_age
        ]
        for k in stale_keys:
            del self._counters[k]
