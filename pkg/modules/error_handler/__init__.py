from .errors import (
    EdgeCodingError, ValidationError, DimensionMismatch, InvalidDistribution,
    AllInfinite, ConfigError, BudgetExceeded, DesignError, EmptyCluster,
    DegenerateSupport, RejectionStall, NoBoundary, DescentViolation,
    MaxItersExceeded, CodecError, BadMagic, UnsupportedVersion, TruncatedStream,
    InvalidCodeword, KraftViolation, Unencodable, ZeroProbabilitySymbol,
    CodebookMismatch, exit_code_for,
)
from .recovery import RestartSupervisor
