"""Restart supervision for seeded designers."""
from typing import Callable, Generic, Iterable, TypeVar

from .errors import DescentViolation, DesignError, EdgeCodingError

T = TypeVar("T")


class RestartSupervisor(Generic[T]):
    """Runs independent seeded restarts and keeps the best one.

    A restart that raises a recoverable DesignError is recorded and skipped;
    the best of the rest wins by (objective, restart index). Descent
    violations are never swallowed.
    """

    def __init__(self, component: str, logger=None):
        self.component = component
        self.logger = logger
        self._failures: dict[str, int] = {}
        self._successes: dict[str, int] = {}
        self.last_error: EdgeCodingError | None = None

    def record_failure(self, component: str):
        self._failures[component] = self._failures.get(component, 0) + 1

    def record_success(self, component: str):
        self._successes[component] = self._successes.get(component, 0) + 1

    def get_failure_count(self, component: str) -> int:
        return self._failures.get(component, 0)

    def run(self, attempt: Callable[[int, object], T], seeds: Iterable,
            objective: Callable[[T], float]) -> T:
        best: T | None = None
        best_key: tuple[float, int] | None = None

        for index, seed in enumerate(seeds):
            try:
                result = attempt(index, seed)
            except DescentViolation:
                raise
            except DesignError as e:
                self.record_failure(self.component)
                self.last_error = e
                if self.logger:
                    self.logger.log_warning(
                        "Restart Failed",
                        f"Component: {self.component}\n"
                        f"Restart: {index}\n"
                        f"Error: {e}"
                    )
                continue

            self.record_success(self.component)
            key = (objective(result), index)
            if best_key is None or key < best_key:
                best, best_key = result, key

        if best is None:
            if self.logger:
                self.logger.log_critical(
                    "All Restarts Failed",
                    f"Component: {self.component}\n"
                    f"Failures: {self.get_failure_count(self.component)}"
                )
            raise self.last_error or DesignError(f"{self.component}: no restarts ran")
        return best
