"""Domain types: symbol probability vectors, codebooks, preferences, assignments.

Every type stores its numbers as read-only numpy arrays and validates on
construction. Row-oriented matrices (one SPV or codebook per row) are the
working representation; the per-row wrappers exist for single-item calls.
"""
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from modules.error_handler.errors import DimensionMismatch, InvalidDistribution

SUM_TOL = 1e-9
NEG_TOL = 1e-12


def _frozen(values, dtype=float) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    arr.setflags(write=False)
    return arr


def validate_simplex_rows(rows, what: str = "SPV", renormalize: bool = False) -> np.ndarray:
    """Return rows as a (J, N) array of probability vectors.

    With renormalize=True each row is divided by its sum first (file ingest).
    """
    arr = np.array(rows, dtype=float)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise InvalidDistribution(f"{what}s must form a non-empty matrix, got shape {arr.shape}")
    if arr.shape[1] < 2:
        raise InvalidDistribution(f"{what} alphabet needs N >= 2, got {arr.shape[1]}")
    if not np.all(np.isfinite(arr)):
        raise InvalidDistribution(f"{what} contains non-finite entries")
    if np.any(arr < -NEG_TOL):
        raise InvalidDistribution(f"{what} contains negative entries")
    arr = np.clip(arr, 0.0, None)

    sums = arr.sum(axis=1)
    if renormalize:
        if np.any(sums <= 0):
            raise InvalidDistribution(f"{what} with zero total mass cannot be normalized")
        arr = arr / sums[:, None]
    elif np.any(np.abs(sums - 1.0) > SUM_TOL):
        worst = int(np.argmax(np.abs(sums - 1.0)))
        raise InvalidDistribution(f"{what} {worst} sums to {sums[worst]!r}, expected 1")
    if np.any(arr > 1.0 + SUM_TOL):
        raise InvalidDistribution(f"{what} entries must lie in [0, 1]")
    return arr


# ─── Vectors ───────────────────────────────────────────────────────

@dataclass(frozen=True)
class Spv:
    """Symbol probability vector of one content item."""
    probs: np.ndarray

    def __post_init__(self):
        row = validate_simplex_rows(self.probs, "SPV")[0]
        object.__setattr__(self, "probs", _frozen(row))

    @classmethod
    def ingest(cls, values: Sequence[float]) -> "Spv":
        return cls(validate_simplex_rows(values, "SPV", renormalize=True)[0])

    @property
    def n(self) -> int:
        return self.probs.shape[0]


@dataclass(frozen=True)
class Codebook:
    """Implied symbol probabilities q of a binary code; lengths are -log2 q."""
    q: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=float)
        _check_codebook_rows(q[None, :] if q.ndim == 1 else q)
        object.__setattr__(self, "q", _frozen(q))

    @property
    def n(self) -> int:
        return self.q.shape[0]


def _check_codebook_rows(rows: np.ndarray):
    if rows.ndim != 2 or rows.shape[0] == 0 or rows.shape[1] < 2:
        raise InvalidDistribution(f"codebooks must form a non-empty K x N matrix, got {rows.shape}")
    if not np.all(np.isfinite(rows)) or np.any(rows < 0):
        raise InvalidDistribution("codebook entries must be finite and nonnegative")
    if np.any(rows.sum(axis=1) > 1.0 + SUM_TOL):
        raise InvalidDistribution("codebook violates the Kraft inequality")
    if np.any(rows.max(axis=1) <= 0):
        raise InvalidDistribution("codebook needs at least one positive entry")


@dataclass(frozen=True)
class CodebookSet:
    """K codebooks over a shared alphabet, stored as a (K, N) matrix."""
    matrix: np.ndarray

    def __post_init__(self):
        rows = np.array(self.matrix, dtype=float)
        if rows.ndim == 1:
            rows = rows[None, :]
        _check_codebook_rows(rows)
        object.__setattr__(self, "matrix", _frozen(rows))

    @classmethod
    def of(cls, codebooks: Iterable[Codebook | Sequence[float]]) -> "CodebookSet":
        rows = [c.q if isinstance(c, Codebook) else np.asarray(c, dtype=float) for c in codebooks]
        if len({len(r) for r in rows}) > 1:
            raise DimensionMismatch("all codebooks must share the same N")
        return cls(np.vstack(rows))

    @property
    def k(self) -> int:
        return self.matrix.shape[0]

    @property
    def n(self) -> int:
        return self.matrix.shape[1]

    @property
    def codebooks(self) -> list[Codebook]:
        return [Codebook(row) for row in self.matrix]

    def __len__(self) -> int:
        return self.k

    def __getitem__(self, k: int) -> Codebook:
        return Codebook(self.matrix[k])


# ─── Preferences ───────────────────────────────────────────────────

@dataclass(frozen=True)
class DiscretePreference:
    """J SPVs (rows of `spvs`) requested with probabilities `probs`."""
    spvs: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        spvs = validate_simplex_rows(self.spvs, "SPV")
        probs = np.array(self.probs, dtype=float).ravel()
        if probs.shape[0] != spvs.shape[0]:
            raise DimensionMismatch(f"{spvs.shape[0]} SPVs but {probs.shape[0]} request probabilities")
        if np.any(probs < -NEG_TOL) or not np.all(np.isfinite(probs)):
            raise InvalidDistribution("request probabilities must be finite and nonnegative")
        probs = np.clip(probs, 0.0, None)
        if abs(probs.sum() - 1.0) > SUM_TOL:
            raise InvalidDistribution(f"request probabilities sum to {probs.sum()!r}, expected 1")
        object.__setattr__(self, "spvs", _frozen(spvs))
        object.__setattr__(self, "probs", _frozen(probs))

    @classmethod
    def uniform(cls, spvs) -> "DiscretePreference":
        spvs = np.asarray(spvs, dtype=float)
        j = spvs.shape[0]
        return cls(spvs, np.full(j, 1.0 / j))

    @classmethod
    def ingest(cls, spvs, probs) -> "DiscretePreference":
        rows = validate_simplex_rows(spvs, "SPV", renormalize=True)
        f = np.array(probs, dtype=float)
        if f.sum() <= 0:
            raise InvalidDistribution("request probabilities have zero total mass")
        return cls(rows, f / f.sum())

    @property
    def j(self) -> int:
        return self.spvs.shape[0]

    @property
    def n(self) -> int:
        return self.spvs.shape[1]

    def spv(self, j: int) -> Spv:
        return Spv(self.spvs[j])


# ─── Assignments ───────────────────────────────────────────────────

@dataclass(frozen=True)
class PartitionAssignment:
    """owner[j] is the codebook index that encodes item j."""
    owner: np.ndarray
    k: int

    def __post_init__(self):
        owner = np.array(self.owner, dtype=np.int64).ravel()
        if owner.size and (owner.min() < 0 or owner.max() >= self.k):
            raise DimensionMismatch(f"assignment indices must lie in [0, {self.k})")
        object.__setattr__(self, "owner", _frozen(owner, dtype=np.int64))

    def members(self, k: int) -> np.ndarray:
        return np.flatnonzero(self.owner == k)

    def __len__(self) -> int:
        return self.owner.shape[0]


@dataclass(frozen=True)
class SoftAssignment:
    """Probabilistic clustering weights r (J x K), rows on the simplex."""
    r: np.ndarray

    def __post_init__(self):
        r = np.array(self.r, dtype=float)
        if r.ndim != 2:
            raise DimensionMismatch("soft assignment must be a J x K matrix")
        if np.any(r < -NEG_TOL) or np.any(np.abs(r.sum(axis=1) - 1.0) > SUM_TOL):
            raise InvalidDistribution("soft assignment rows must lie on the simplex")
        object.__setattr__(self, "r", _frozen(np.clip(r, 0.0, None)))

    def hard(self) -> PartitionAssignment:
        """Round each row to its largest entry (ties to the lowest index)."""
        return PartitionAssignment(np.argmax(self.r, axis=1), self.r.shape[1])


@dataclass(frozen=True)
class ItemSpec:
    """A content item: L symbol indices."""
    symbols: np.ndarray

    def __post_init__(self):
        symbols = np.array(self.symbols, dtype=np.int64).ravel()
        if symbols.size == 0:
            raise InvalidDistribution("an item needs at least one symbol")
        if symbols.min() < 0:
            raise DimensionMismatch("symbol indices must be nonnegative")
        object.__setattr__(self, "symbols", _frozen(symbols, dtype=np.int64))

    @property
    def L(self) -> int:
        return self.symbols.shape[0]

    def check_alphabet(self, n: int):
        if self.symbols.max() >= n:
            raise DimensionMismatch(f"symbol {int(self.symbols.max())} outside alphabet of size {n}")

    def empirical(self, n: int) -> np.ndarray:
        self.check_alphabet(n)
        return np.bincount(self.symbols, minlength=n) / self.L


# ─── Results ───────────────────────────────────────────────────────

@dataclass(frozen=True)
class DesignResult:
    codebooks: CodebookSet
    assignment: PartitionAssignment
    objective: float
    iterations: int
    trace: tuple[float, ...] = ()
    method: str = ""
    diagnostics: dict = field(default_factory=dict)

    @property
    def k(self) -> int:
        return self.codebooks.k

    @property
    def n(self) -> int:
        return self.codebooks.n
