"""Exception hierarchy shared by the designers, the codec and the CLI.

Every class carries the process exit code the CLI maps it to.
"""


class EdgeCodingError(Exception):
    exit_code = 1

    def __init__(self, message: str = "", **context):
        super().__init__(message or self.__class__.__name__)
        self.context = context


# ─── Validation (exit 2) ───────────────────────────────────────────

class ValidationError(EdgeCodingError, ValueError):
    exit_code = 2


class DimensionMismatch(ValidationError):
    pass


class InvalidDistribution(ValidationError):
    pass


class AllInfinite(ValidationError):
    """No codebook in the set can encode the item (every divergence is +inf)."""


class ConfigError(ValidationError):
    pass


# ─── Guards (exit 3) ───────────────────────────────────────────────

class BudgetExceeded(EdgeCodingError):
    exit_code = 3


# ─── Designers ─────────────────────────────────────────────────────

class DesignError(EdgeCodingError):
    pass


class EmptyCluster(DesignError):
    pass


class DegenerateSupport(DesignError):
    """Fewer distinct SPVs with positive seeding weight than requested codebooks."""


class RejectionStall(DesignError):
    exit_code = 3


class NoBoundary(DesignError):
    pass


class DescentViolation(DesignError):
    pass


class MaxItersExceeded(DesignError):
    pass


# ─── Codec ─────────────────────────────────────────────────────────

class CodecError(EdgeCodingError, ValueError):
    exit_code = 2


class BadMagic(CodecError):
    pass


class UnsupportedVersion(CodecError):
    pass


class TruncatedStream(CodecError):
    pass


class InvalidCodeword(CodecError):
    pass


class KraftViolation(CodecError):
    pass


class Unencodable(CodecError):
    pass


class ZeroProbabilitySymbol(CodecError):
    pass


class CodebookMismatch(CodecError):
    pass


def exit_code_for(error: BaseException) -> int:
    if isinstance(error, EdgeCodingError):
        return error.exit_code
    if isinstance(error, ValueError):
        return 2
    return 1
