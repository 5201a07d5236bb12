from pydantic import BaseModel, ConfigDict, Field

from config.settings import settings


class DesignOptions(BaseModel):
    """Knobs shared by every designer. Defaults come from Settings."""
    model_config = ConfigDict(frozen=True)

    restarts: int = Field(default_factory=lambda: settings.restarts, ge=1)
    max_iters: int = Field(default_factory=lambda: settings.max_iters, ge=1)
    epsilon: float = Field(default_factory=lambda: settings.epsilon, gt=0)
    subproblem_tol: float = Field(default_factory=lambda: settings.subproblem_tol, gt=0)
    subproblem_max_iters: int = Field(default_factory=lambda: settings.subproblem_max_iters, ge=1)
    descent_tol: float = Field(default_factory=lambda: settings.descent_tol, gt=0)
    seed: int = Field(default_factory=lambda: settings.seed, ge=0, lt=2**64)

    @classmethod
    def from_settings(cls, **overrides) -> "DesignOptions":
        return cls(**{k: v for k, v in overrides.items() if v is not None})

    @classmethod
    def for_twouser(cls, **overrides) -> "DesignOptions":
        """Options with the per-K0 restart count of the two-user designers."""
        if overrides.get("restarts") is None:
            overrides["restarts"] = settings.twouser_restarts
        return cls.from_settings(**overrides)

    def with_restarts(self, restarts: int) -> "DesignOptions":
        return self.model_copy(update={"restarts": restarts})
