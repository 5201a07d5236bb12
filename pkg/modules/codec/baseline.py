"""Self-decodable baseline: each item is coded with its own SPV and ships
its code description with the payload."""
import numpy as np

from modules.core.information import entropy
from modules.core.types import Spv, validate_simplex_rows
from modules.error_handler.errors import ZeroProbabilitySymbol
from .prefix_code import lengths_from_codebook


def self_decodable_bits(p, L: int, integer: bool = False) -> float:
    """L·H(p) + Σ_n (-log2 p_n).

    With integer=True the ceiled codeword lengths replace -log2 p_n in both
    the payload and the description term.
    """
    p = p.probs if isinstance(p, Spv) else validate_simplex_rows(p, "SPV")[0]
    if np.any(p <= 0):
        bad = int(np.flatnonzero(p <= 0)[0])
        raise ZeroProbabilitySymbol(f"symbol {bad} has zero probability", symbol=bad)
    if not integer:
        return float(L * entropy(p) + (-np.log2(p)).sum())
    lengths = np.array(lengths_from_codebook(p).lengths, dtype=float)
    return float(L * np.dot(p, lengths) + lengths.sum())
