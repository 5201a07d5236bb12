"""Bit-exact item containers.

ESC1 (designed codebooks, shared by both ends):

    magic "ESC1" | version u8 | N u16 | K u16 | L u32 |
    ceil(log2 K) codebook-id bits | codewords, MSB first | zero pad to a byte

ESD1 (self-decodable):

    magic "ESD1" | version u8 | N u16 | L u32 | N length bytes (0 = no codeword) |
    codewords, MSB first | zero pad to a byte

All integers are big-endian.
"""
import math
import struct
from dataclasses import dataclass

import numpy as np
from bitarray import bitarray
from bitarray.util import ba2int, int2ba

from modules.core.types import CodebookSet, ItemSpec
from modules.error_handler.errors import (
    BadMagic, CodebookMismatch, InvalidCodeword, TruncatedStream, Unencodable, UnsupportedVersion,
)
from .prefix_code import UNENCODABLE, LengthTable, PrefixCode, build_prefix_code, lengths_from_codebook

MAGIC = b"ESC1"
SELF_MAGIC = b"ESD1"
VERSION = 1
HEADER = struct.Struct(">4sBHHI")
SELF_HEADER = struct.Struct(">4sBHI")
HEADER_BITS = HEADER.size * 8
MAX_STORED_LENGTH = 255


def id_bits(k: int) -> int:
    return math.ceil(math.log2(k)) if k > 1 else 0


@dataclass(frozen=True)
class Bitstream:
    n: int
    k: int
    L: int
    codebook_id: int
    payload_bits: int
    data: bytes

    @property
    def total_bits(self) -> int:
        """Header, id and payload bits, without the final padding."""
        return HEADER_BITS + id_bits(self.k) + self.payload_bits

    def __bytes__(self) -> bytes:
        return self.data


def _as_item(item) -> ItemSpec:
    return item if isinstance(item, ItemSpec) else ItemSpec(item)


def payload_costs(item, codebooks: CodebookSet) -> np.ndarray:
    """Payload bits of the item under each codebook (inf where unencodable)."""
    item = _as_item(item)
    item.check_alphabet(codebooks.n)
    return np.array([lengths_from_codebook(q).cost(item.symbols) for q in codebooks.matrix])


def encode(item, codebooks: CodebookSet) -> Bitstream:
    """Code the item with the codebook giving the fewest payload bits (ties to
    the lowest index) and name that codebook in the id field."""
    item = _as_item(item)
    costs = payload_costs(item, codebooks)
    k = int(np.argmin(costs))
    if math.isinf(costs[k]):
        raise Unencodable("no codebook covers every symbol of the item",
                          symbols=sorted(set(item.symbols.tolist())))

    bits = bitarray(endian="big")
    width = id_bits(codebooks.k)
    if width:
        bits.extend(int2ba(k, length=width, endian="big"))
    code = build_prefix_code(lengths_from_codebook(codebooks.matrix[k]))
    code.write(item.symbols, bits)

    header = HEADER.pack(MAGIC, VERSION, codebooks.n, codebooks.k, item.L)
    return Bitstream(codebooks.n, codebooks.k, item.L, k, int(costs[k]), header + bits.tobytes())


def _read_header(data: bytes, layout: struct.Struct, magic: bytes) -> tuple:
    if len(data) < 4 or data[:4] != magic:
        if len(data) < 4 and magic.startswith(data):
            raise TruncatedStream("stream ended inside the magic")
        raise BadMagic(f"expected magic {magic!r}, got {data[:4]!r}")
    if len(data) < layout.size:
        raise TruncatedStream(f"stream has {len(data)} bytes, header needs {layout.size}")
    fields = layout.unpack_from(data)
    if fields[1] != VERSION:
        raise UnsupportedVersion(f"container version {fields[1]} is not supported", version=fields[1])
    return fields


def _payload(data: bytes, offset: int) -> bitarray:
    bits = bitarray(endian="big")
    bits.frombytes(data[offset:])
    return bits


def _read_symbols(code: PrefixCode, bits: bitarray, pos: int, L: int) -> np.ndarray:
    out = np.empty(L, dtype=np.int64)
    for i in range(L):
        out[i], pos = code.read_symbol(bits, pos)
    return out


def decode(stream, codebooks: CodebookSet) -> ItemSpec:
    data = bytes(stream)
    _, _, n, k, L = _read_header(data, HEADER, MAGIC)
    if n != codebooks.n or k != codebooks.k:
        raise CodebookMismatch(
            f"stream was coded for N={n}, K={k}; codebook set has N={codebooks.n}, K={codebooks.k}",
        )
    bits = _payload(data, HEADER.size)
    width = id_bits(k)
    if len(bits) < width:
        raise TruncatedStream("stream ended inside the codebook id")
    index = ba2int(bits[:width]) if width else 0
    if index >= k:
        raise InvalidCodeword(f"codebook id {index} out of range for K={k}", codebook_id=index)
    code = build_prefix_code(lengths_from_codebook(codebooks.matrix[index]))
    return ItemSpec(_read_symbols(code, bits, width, L))


# ─── Self-decodable container ──────────────────────────────────────

def encode_self_decodable(item, p=None) -> bytes:
    """Code the item with its own SPV (its empirical distribution by default)
    and store the codeword lengths in front of the payload."""
    item = _as_item(item)
    if p is None:
        p = item.empirical(max(2, int(item.symbols.max()) + 1))
    table = lengths_from_codebook(p)
    item.check_alphabet(table.n)
    if math.isinf(table.cost(item.symbols)):
        raise Unencodable("the item uses a symbol its SPV gives zero probability")
    if table.max_length > MAX_STORED_LENGTH:
        raise Unencodable(f"codeword length {table.max_length} does not fit the length field")

    bits = bitarray(endian="big")
    build_prefix_code(table).write(item.symbols, bits)
    header = SELF_HEADER.pack(SELF_MAGIC, VERSION, table.n, item.L)
    return header + bytes(table.lengths) + bits.tobytes()


def decode_self_decodable(data: bytes) -> ItemSpec:
    data = bytes(data)
    _, _, n, L = _read_header(data, SELF_HEADER, SELF_MAGIC)
    start = SELF_HEADER.size
    if len(data) < start + n:
        raise TruncatedStream("stream ended inside the length table")
    table = LengthTable(tuple(data[start:start + n]))
    if all(length == UNENCODABLE for length in table.lengths):
        raise InvalidCodeword("length table has no codewords")
    code = build_prefix_code(table)
    return ItemSpec(_read_symbols(code, _payload(data, start + n), 0, L))


def self_decodable_stream_bits(item, p=None) -> int:
    """Unpadded size of the ESD1 container for the item."""
    item = _as_item(item)
    if p is None:
        p = item.empirical(max(2, int(item.symbols.max()) + 1))
    table = lengths_from_codebook(p)
    return (SELF_HEADER.size + table.n) * 8 + int(table.cost(item.symbols))
