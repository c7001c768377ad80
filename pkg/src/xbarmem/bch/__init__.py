"""Shortened binary BCH codes with a compiled or pure-Python error locator."""
from ._backend import BACKEND, compiled_available, get_kernel
from .code import (
    DECODE_FAILURE,
    CodeConstructionError,
    CodeSpec,
    decode,
    decode_batch,
    encode,
    encode_batch,
    extract_data,
    make_code,
    remainders,
    syndromes,
)
from .gf import GF2m, PRIMITIVE_POLYS, field

__all__ = [
    "BACKEND", "compiled_available", "get_kernel",
    "DECODE_FAILURE", "CodeConstructionError", "CodeSpec", "decode", "decode_batch",
    "encode", "encode_batch", "extract_data", "make_code", "remainders", "syndromes",
    "GF2m", "PRIMITIVE_POLYS", "field",
]
