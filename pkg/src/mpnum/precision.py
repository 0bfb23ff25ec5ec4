"""Floating-point formats, binary16 software emulation and the promotion lattice.

Three IEEE-754 binary formats are supported.  Half values are stored as raw
16-bit patterns and converted with the bit-level routines below; single and
double values are stored natively.
"""

from __future__ import annotations

import enum
import struct
from typing import Union

import numpy as np

__all__ = [
    "Precision",
    "Placement",
    "encode_f16",
    "decode_f16",
    "encode_f16_array",
    "decode_f16_array",
    "round_to_precision",
    "round_array",
    "promote",
    "parse_precision",
    "F16_QNAN",
]

# canonical quiet NaN produced for every NaN input
F16_QNAN = 0x7E00
F16_POS_INF = 0x7C00


class Precision(enum.IntEnum):
    """Supported formats, ordered HALF < SINGLE < DOUBLE.

    The integer value is the storage width in bits, so ``max`` over
    precisions is the promotion join.
    """

    HALF = 16
    SINGLE = 32
    DOUBLE = 64

    @property
    def bits(self) -> int:
        return int(self.value)

    @property
    def exponent_bits(self) -> int:
        return _FORMAT[self][0]

    @property
    def significand_bits(self) -> int:
        """Stored fraction bits (the leading bit is implicit)."""
        return _FORMAT[self][1]

    @property
    def e_max(self) -> int:
        return (1 << (self.exponent_bits - 1)) - 1

    @property
    def e_min(self) -> int:
        return 1 - self.e_max

    @property
    def digits(self) -> int:
        """Significand precision t, including the implicit bit."""
        return self.significand_bits + 1

    @property
    def unit_roundoff(self) -> float:
        return 2.0 ** -(self.significand_bits + 1)

    @property
    def max_finite(self) -> float:
        return (2.0 - 2.0 ** -self.significand_bits) * 2.0 ** self.e_max

    @property
    def min_normal(self) -> float:
        return 2.0 ** self.e_min

    @property
    def label(self) -> str:
        return self.name.lower()

    @property
    def storage_dtype(self) -> np.dtype:
        return np.dtype(_STORAGE[self])

    @property
    def compute_dtype(self) -> np.dtype:
        """Arithmetic type of kernels; half is computed in single."""
        return np.dtype(np.float64 if self is Precision.DOUBLE else np.float32)

    def __str__(self) -> str:
        return self.label


_FORMAT = {
    Precision.HALF: (5, 10),
    Precision.SINGLE: (8, 23),
    Precision.DOUBLE: (11, 52),
}
_STORAGE = {
    Precision.HALF: np.uint16,
    Precision.SINGLE: np.float32,
    Precision.DOUBLE: np.float64,
}


class Placement(enum.Enum):
    CPU = "CPU"
    GPU = "GPU"

    def __str__(self) -> str:
        return self.value


def parse_precision(p: Union[str, Precision]) -> Precision:
    """Accept a Precision or one of "half", "single", "double" (any case)."""
    if isinstance(p, Precision):
        return p
    try:
        return Precision[str(p).strip().upper()]
    except KeyError:
        raise ValueError(f"unknown precision {p!r}; expected half, single or double") from None


def parse_placement(p: Union[str, Placement]) -> Placement:
    if isinstance(p, Placement):
        return p
    try:
        return Placement(str(p).strip().upper())
    except ValueError:
        raise ValueError(f"unknown placement {p!r}; expected CPU or GPU") from None


def promote(a: Precision, b: Precision) -> Precision:
    """Join of two precisions in the lattice HALF < SINGLE < DOUBLE."""
    return a if a >= b else b


# ---------------------------------------------------------------------------
# binary16, scalar bit-level routines

_MANT_MASK = (1 << 52) - 1


def encode_f16(x: float) -> int:
    """Nearest binary16 pattern to ``x`` (round to nearest, ties to even).

    Overflow goes to infinity, underflow below half the smallest subnormal
    goes to signed zero, and every NaN becomes the canonical quiet NaN.
    """
    (b,) = struct.unpack("<Q", struct.pack("<d", float(x)))
    sign = (b >> 63) << 15
    exp = (b >> 52) & 0x7FF
    man = b & _MANT_MASK
    if exp == 0x7FF:
        return F16_QNAN if man else sign | F16_POS_INF
    if exp == 0:
        # binary64 subnormals are far below the binary16 range
        return sign
    e = exp - 1023
    if e > 15:
        return sign | F16_POS_INF
    sig = man | (1 << 52)
    if e >= -14:
        shift = 42
        base = (e + 15) << 10
        q = sig >> shift
        base -= 1 << 10  # q carries the implicit bit
    else:
        shift = min(28 - e, 63)
        base = 0
        q = sig >> shift
    rem = sig & ((1 << shift) - 1)
    half = 1 << (shift - 1)
    if rem > half or (rem == half and q & 1):
        q += 1
    # a carry out of the fraction bumps the exponent (and may reach inf)
    return sign | (base + q)


def decode_f16(h: int) -> float:
    """Exact double value of a binary16 pattern."""
    h = int(h) & 0xFFFF
    sign = -1.0 if h & 0x8000 else 1.0
    exp = (h >> 10) & 0x1F
    frac = h & 0x3FF
    if exp == 0:
        return sign * frac * 2.0 ** -24
    if exp == 0x1F:
        return float("nan") if frac else sign * float("inf")
    return sign * (1024 + frac) * 2.0 ** (exp - 25)


def _build_decode_table() -> np.ndarray:
    h = np.arange(1 << 16, dtype=np.uint32)
    exp = ((h >> 10) & 0x1F).astype(np.int64)
    frac = (h & 0x3FF).astype(np.float64)
    sign = np.where(h & 0x8000, -1.0, 1.0)
    with np.errstate(invalid="ignore"):
        mag = np.where(exp == 0, frac * 2.0 ** -24, np.ldexp(1024.0 + frac, exp - 25))
        mag = np.where(exp == 0x1F, np.where(frac == 0, np.inf, np.nan), mag)
    table = sign * mag
    table.setflags(write=False)
    return table


DECODE_TABLE = _build_decode_table()
DECODE_TABLE32 = DECODE_TABLE.astype(np.float32)
DECODE_TABLE32.setflags(write=False)


def decode_f16_array(h: np.ndarray, dtype=np.float64) -> np.ndarray:
    """Widen an array of binary16 patterns exactly to float64 (or float32)."""
    table = DECODE_TABLE32 if np.dtype(dtype) == np.float32 else DECODE_TABLE
    return table[np.asarray(h, dtype=np.uint16)]


def encode_f16_array(x: np.ndarray) -> np.ndarray:
    """Vectorised :func:`encode_f16`; uses the active kernel backend."""
    from . import _backend

    x = np.ascontiguousarray(x, dtype=np.float64)
    return _backend.kernels().encode_f16(x.ravel()).reshape(x.shape)


def round_to_precision(x: float, p: Precision) -> float:
    """Nearest value of format ``p`` to ``x``, returned as a double."""
    p = parse_precision(p)
    if p is Precision.DOUBLE:
        return float(x)
    if p is Precision.SINGLE:
        return float(_to_single(np.float64(x)))
    return decode_f16(encode_f16(x))


def round_array(x: np.ndarray, p: Precision) -> np.ndarray:
    """Round a float array to ``p`` and return it in ``p``'s storage dtype."""
    p = parse_precision(p)
    x = np.asarray(x)
    if p is Precision.DOUBLE:
        return x.astype(np.float64, copy=True)
    if p is Precision.SINGLE:
        return _to_single(x)
    if x.dtype == np.float32:
        x = x.astype(np.float64)
    return encode_f16_array(x)


def _to_single(x):
    with np.errstate(over="ignore", invalid="ignore"):
        return np.asarray(x, dtype=np.float64).astype(np.float32)
