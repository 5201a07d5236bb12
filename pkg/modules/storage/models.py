"""File formats, one pydantic model per kind of artifact."""
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

FORMAT_VERSION = 1


class FileModel(BaseModel):
    model_config = ConfigDict(extra="ignore")

    format_version: int = FORMAT_VERSION


class PreferenceFile(FileModel):
    n: int = Field(ge=2)
    spvs: list[list[float]]
    probs: list[float]

    @model_validator(mode="after")
    def _shapes(self):
        if not self.spvs or any(len(row) != self.n for row in self.spvs):
            raise ValueError(f"every SPV needs {self.n} entries")
        if len(self.probs) != len(self.spvs):
            raise ValueError("one request probability per SPV")
        return self


class CodebookSetFile(FileModel):
    n: int = Field(ge=2)
    codebooks: list[list[float]]

    @field_validator("codebooks")
    @classmethod
    def _non_empty(cls, rows):
        if not rows:
            raise ValueError("at least one codebook is required")
        return rows


class DesignResultFile(CodebookSetFile):
    method: str
    k: int = Field(ge=1)
    objective_bits_per_symbol: float
    iterations: int = 0
    assignment: list[int] = Field(default_factory=list)
    trace: list[float] = Field(default_factory=list)
    seed: int | None = None
    restarts: int | None = None
    expected_bits: float | None = None
    symbols_per_item: int | None = None


class TwoUserDesignFile(FileModel):
    n: int = Field(ge=2)
    k0: int = Field(ge=0)
    common: list[list[float]]
    excl1: list[list[float]]
    excl2: list[list[float]]
    objective_bits: float
    expected_bits: float | None = None
    method: str = ""
    costs_by_k0: dict[str, float] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _k0_matches(self):
        if len(self.common) != self.k0:
            raise ValueError(f"k0={self.k0} but {len(self.common)} common codebooks")
        return self


class PreferenceSpecFile(FileModel):
    kind: Literal["uniform", "dirichlet", "radial"]
    n: int = Field(ge=2)
    alpha: list[float] | None = None
    center: list[float] | None = None


class JointPreferenceFile(FileModel):
    """Either a dense matrix F or the similarity-family parameters (j, alpha)."""
    F: list[list[float]] | None = None
    j: int | None = Field(default=None, ge=2)
    alpha: float | None = Field(default=None, ge=0.0, le=1.0)

    @model_validator(mode="after")
    def _one_form(self):
        if (self.F is None) == (self.alpha is None or self.j is None):
            raise ValueError("give either F or both j and alpha")
        return self
