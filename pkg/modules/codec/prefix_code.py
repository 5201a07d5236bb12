"""Integer codeword lengths from codebooks, and canonical prefix codes."""
import math
from dataclasses import dataclass

import numpy as np
from bitarray import bitarray
from bitarray.util import int2ba

from modules.core.types import Codebook
from modules.error_handler.errors import InvalidCodeword, InvalidDistribution, KraftViolation, TruncatedStream

UNENCODABLE = 0


@dataclass(frozen=True)
class LengthTable:
    """Codeword length per symbol; UNENCODABLE (0) marks symbols without a codeword."""
    lengths: tuple[int, ...]

    def __post_init__(self):
        lengths = tuple(int(length) for length in self.lengths)
        if not lengths or any(length < 0 for length in lengths):
            raise InvalidDistribution("codeword lengths must be nonnegative and non-empty")
        object.__setattr__(self, "lengths", lengths)

    @property
    def n(self) -> int:
        return len(self.lengths)

    @property
    def max_length(self) -> int:
        return max(self.lengths)

    def encodable(self, symbol: int) -> bool:
        return self.lengths[symbol] != UNENCODABLE

    def kraft_sum(self) -> float:
        return sum(2.0 ** -length for length in self.lengths if length)

    def satisfies_kraft(self) -> bool:
        # exact integer form: Σ 2^(m - l) <= 2^m
        m = self.max_length
        return sum(1 << (m - length) for length in self.lengths if length) <= 1 << m

    def cost(self, symbols) -> float:
        """Payload bits for a symbol sequence; inf if any symbol is unencodable."""
        lengths = np.asarray(self.lengths)[np.asarray(symbols, dtype=np.int64)]
        if np.any(lengths == UNENCODABLE):
            return math.inf
        return float(lengths.sum())


def lengths_from_codebook(q) -> LengthTable:
    """ceil(-log2 q_n) per positive entry (at least 1 bit), UNENCODABLE for zeros.

    Rounding up keeps 2^-l_n <= q_n, so the Kraft sum cannot exceed that of q.
    """
    q = q.q if isinstance(q, Codebook) else np.asarray(q, dtype=float)
    q = Codebook(q).q
    lengths = []
    for value in q:
        value = float(value)
        if value <= 0:
            lengths.append(UNENCODABLE)
            continue
        length = max(1, math.ceil(-math.log2(value)))
        # settle log2 rounding against the exact power of two
        while 2.0 ** -length > value:
            length += 1
        while length > 1 and 2.0 ** -(length - 1) <= value:
            length -= 1
        lengths.append(length)
    return LengthTable(tuple(lengths))


@dataclass(frozen=True)
class PrefixCode:
    table: LengthTable
    codewords: tuple[bitarray | None, ...]
    symbols: tuple[int, ...]          # encodable symbols in canonical order
    length_counts: tuple[int, ...]    # codewords of each length 1..max

    def codeword(self, symbol: int) -> bitarray:
        word = self.codewords[symbol]
        if word is None:
            raise InvalidCodeword(f"symbol {symbol} has no codeword", symbol=symbol)
        return word

    def as_strings(self) -> list[str | None]:
        return [None if w is None else w.to01() for w in self.codewords]

    def write(self, symbols, out: bitarray):
        for symbol in symbols:
            out.extend(self.codeword(int(symbol)))

    def read_symbol(self, bits: bitarray, pos: int) -> tuple[int, int]:
        """Decode one symbol starting at bit `pos`; returns (symbol, next pos)."""
        code = first = index = 0
        for count in self.length_counts:
            if pos >= len(bits):
                raise TruncatedStream("stream ended inside a codeword", position=pos)
            code = (code << 1) | bits[pos]
            pos += 1
            if code - first < count:
                return self.symbols[index + code - first], pos
            index += count
            first = (first + count) << 1
        raise InvalidCodeword("bit pattern matches no codeword", position=pos)


def build_prefix_code(table: LengthTable) -> PrefixCode:
    """Canonical code: symbols sorted by (length, index) get consecutive
    codewords, shifting left whenever the length grows."""
    if not table.satisfies_kraft():
        raise KraftViolation(f"Kraft sum {table.kraft_sum():.6f} exceeds 1", lengths=table.lengths)

    order = sorted((length, n) for n, length in enumerate(table.lengths) if length)
    codewords: list[bitarray | None] = [None] * table.n
    code, previous = 0, order[0][0] if order else 0
    for length, n in order:
        code <<= length - previous
        codewords[n] = int2ba(code, length=length, endian="big")
        code += 1
        previous = length

    counts = [0] * (table.max_length if order else 0)
    for length, _ in order:
        counts[length - 1] += 1
    return PrefixCode(table, tuple(codewords), tuple(n for _, n in order), tuple(counts))


def is_prefix_free(code: PrefixCode) -> bool:
    words = sorted(w.to01() for w in code.codewords if w is not None)
    return all(not b.startswith(a) for a, b in zip(words, words[1:]))

