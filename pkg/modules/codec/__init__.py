from .prefix_code import (
    UNENCODABLE, LengthTable, PrefixCode, lengths_from_codebook, build_prefix_code, is_prefix_free,
)
from .baseline import self_decodable_bits
from .bitstream import (
    Bitstream, encode, decode, payload_costs, encode_self_decodable, decode_self_decodable,
    self_decodable_stream_bits, HEADER_BITS,
)
