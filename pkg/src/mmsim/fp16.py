"""IEEE 754 binary16 arithmetic with a single-rounding fused multiply-add.

Scalars are carried as raw 16-bit patterns. The scalar routines work on exact
integers (every binary16 value is an integer multiple of 2**-24, so every
product is a multiple of 2**-48) and round once, to nearest-even.

The array routine :func:`fma_array` is the fast path used by the golden model
and the cycle simulator. It evaluates ``a*b + c`` in float64 and then narrows to
float16. The product of two binary16 values is exact in float64, and the sum
can only be inexact when the two addends are more than 53 binary orders apart,
in which case the small addend cannot move the result across a binary16
rounding boundary. The test suite checks both paths against an exact-rational
oracle.
"""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

CANONICAL_NAN = 0x7E00
POS_INF = 0x7C00
NEG_INF = 0xFC00
MAX_FINITE = 0x7BFF
POS_ZERO = 0x0000
NEG_ZERO = 0x8000

_EXP_MASK = 0x7C00
_FRAC_MASK = 0x03FF
_SIGN_MASK = 0x8000

# exponent of the binary16 quantum for subnormals, and the min normal exponent
_QUANTUM_EXP = -24
_EMIN = -14
_FRAC_BITS = 10


class MalformedLiteral(ValueError):
    """Raised when a text operand cannot be parsed as a binary16 value."""


class UnsupportedRounding(ValueError):
    """Raised when a rounding mode other than round-to-nearest-even is requested."""


class RoundingMode(enum.Enum):
    RNE = "rne"


def rounding_mode(name: str | RoundingMode) -> RoundingMode:
    """Resolve a rounding-mode request; only RNE is accepted."""
    if isinstance(name, RoundingMode):
        return name
    key = str(name).strip().lower()
    if key in ("rne", "nearest", "nearest_even", "round_to_nearest_even"):
        return RoundingMode.RNE
    raise UnsupportedRounding(f"rounding mode {name!r} is not supported (only RNE)")


class FloatClass(enum.Enum):
    ZERO = "zero"
    SUBNORMAL = "subnormal"
    NORMAL = "normal"
    INF = "inf"
    NAN = "nan"


@dataclass(frozen=True)
class F16:
    """A binary16 value identified by its bit pattern."""

    bits: int

    def __post_init__(self) -> None:
        if not isinstance(self.bits, (int, np.integer)) or not 0 <= int(self.bits) <= 0xFFFF:
            raise ValueError(f"not a 16-bit pattern: {self.bits!r}")
        object.__setattr__(self, "bits", int(self.bits))

    @classmethod
    def from_decimal(cls, text: str) -> F16:
        return f16_from_decimal(text)

    @classmethod
    def from_float(cls, value: float) -> F16:
        return cls(int(np.array(value, dtype=np.float64).astype(np.float16).view(np.uint16)))

    def __float__(self) -> float:
        return float(np.array(self.bits, dtype=np.uint16).view(np.float16))

    def hex(self) -> str:
        return f"0x{self.bits:04X}"

    @property
    def sign(self) -> int:
        return self.bits >> 15

    def is_nan(self) -> bool:
        return is_nan_bits(self.bits)

    def to_fraction(self) -> Fraction:
        return to_fraction(self.bits)

    def __repr__(self) -> str:
        return f"F16({self.hex()} = {float(self)!r})"


def is_nan_bits(bits: int) -> bool:
    return (bits & _EXP_MASK) == _EXP_MASK and (bits & _FRAC_MASK) != 0


def is_inf_bits(bits: int) -> bool:
    return (bits & 0x7FFF) == POS_INF


def _decode(bits: int) -> tuple[int, int, int]:
    """Finite pattern -> (sign, integer significand, exponent of its LSB)."""
    sign = bits >> 15
    exp_field = (bits >> _FRAC_BITS) & 0x1F
    frac = bits & _FRAC_MASK
    if exp_field == 0:
        return sign, frac, _QUANTUM_EXP
    return sign, frac | (1 << _FRAC_BITS), exp_field - 25


def to_fraction(bits: int) -> Fraction:
    """Exact rational value of a finite pattern."""
    if (bits & _EXP_MASK) == _EXP_MASK:
        raise ValueError(f"0x{bits:04X} is not finite")
    sign, sig, exp = _decode(bits)
    value = Fraction(sig) * Fraction(2) ** exp
    return -value if sign else value


def _round_magnitude(sign: int, num: int, den: int) -> int:
    """Round the positive rational num/den to binary16 (RNE) and attach `sign`."""
    # e = floor(log2(num/den))
    e = num.bit_length() - den.bit_length()
    if (num << -e if e < 0 else num) < (den << e if e > 0 else den):
        e -= 1
    qexp = max(e, _EMIN) - _FRAC_BITS
    if qexp >= 0:
        q, rem = divmod(num, den << qexp)
        half_cmp = (rem << 1) - (den << qexp)
    else:
        q, rem = divmod(num << -qexp, den)
        half_cmp = (rem << 1) - den
    if half_cmp > 0 or (half_cmp == 0 and q & 1):
        q += 1
    if q >= (1 << (_FRAC_BITS + 1)):
        q >>= 1
        qexp += 1
    s = sign << 15
    if q < (1 << _FRAC_BITS):
        return s | q
    exp_field = qexp + 25
    if exp_field >= 31:
        return s | POS_INF
    return s | (exp_field << _FRAC_BITS) | (q - (1 << _FRAC_BITS))


def fma_bits(a: int, b: int, c: int) -> int:
    """round(a*b + c) on raw patterns, one rounding, canonical NaN output."""
    if is_nan_bits(a) or is_nan_bits(b) or is_nan_bits(c):
        return CANONICAL_NAN
    prod_sign = (a ^ b) >> 15
    a_inf, b_inf, c_inf = is_inf_bits(a), is_inf_bits(b), is_inf_bits(c)
    if a_inf or b_inf:
        if (a & 0x7FFF) == 0 or (b & 0x7FFF) == 0:
            return CANONICAL_NAN
        if c_inf and (c >> 15) != prod_sign:
            return CANONICAL_NAN
        return (prod_sign << 15) | POS_INF
    if c_inf:
        return c

    _, sig_a, exp_a = _decode(a)
    _, sig_b, exp_b = _decode(b)
    c_sign, sig_c, exp_c = _decode(c)
    # common scale 2**-48: exp_a + exp_b >= -48 and exp_c >= -24
    prod = (sig_a * sig_b) << (exp_a + exp_b + 48)
    addend = sig_c << (exp_c + 48)
    total = (-prod if prod_sign else prod) + (-addend if c_sign else addend)
    if total == 0:
        if prod == 0 and addend == 0 and prod_sign == c_sign:
            return prod_sign << 15
        return POS_ZERO
    sign = 1 if total < 0 else 0
    return _round_magnitude(sign, abs(total), 1 << 48)


_LITERAL = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


def f16_from_decimal(text: str) -> F16:
    """Parse a decimal literal (or inf/-inf/nan) and round it to binary16."""
    s = str(text).strip()
    low = s.lower()
    if low in ("nan", "+nan", "-nan"):
        return F16(CANONICAL_NAN)
    if low in ("inf", "+inf", "infinity", "+infinity"):
        return F16(POS_INF)
    if low in ("-inf", "-infinity"):
        return F16(NEG_INF)
    if not _LITERAL.match(s):
        raise MalformedLiteral(f"malformed binary16 literal: {text!r}")
    sign = 1 if s.startswith("-") else 0
    value = abs(Fraction(s))
    if value == 0:
        return F16(sign << 15)
    return F16(_round_magnitude(sign, value.numerator, value.denominator))


def f16_fma(a: F16, b: F16, c: F16) -> F16:
    return F16(fma_bits(a.bits, b.bits, c.bits))


def f16_classify(a: F16 | int) -> tuple[FloatClass, int]:
    """Return (class, sign bit)."""
    bits = a.bits if isinstance(a, F16) else int(a)
    sign = bits >> 15
    exp_field = (bits >> _FRAC_BITS) & 0x1F
    frac = bits & _FRAC_MASK
    if exp_field == 0x1F:
        return (FloatClass.NAN if frac else FloatClass.INF), sign
    if exp_field == 0:
        return (FloatClass.SUBNORMAL if frac else FloatClass.ZERO), sign
    return FloatClass.NORMAL, sign


def fma_f64(a, b, c) -> np.ndarray:
    """Fused multiply-add on float64 arrays whose values are binary16-representable.

    Returns float64 values that are again binary16-representable. NaN payloads
    are not canonicalized here; use :func:`canonicalize` when converting to bits.
    """
    with np.errstate(over="ignore", invalid="ignore"):
        r = np.multiply(a, b)
        r += c
        return r.astype(np.float16).astype(np.float64)


def canonicalize(bits: np.ndarray) -> np.ndarray:
    """Replace every NaN pattern with the canonical quiet NaN (in place)."""
    nan = ((bits & _EXP_MASK) == _EXP_MASK) & ((bits & _FRAC_MASK) != 0)
    bits[nan] = CANONICAL_NAN
    return bits


def bits_to_f64(bits) -> np.ndarray:
    return np.asarray(bits, dtype=np.uint16).view(np.float16).astype(np.float64)


def f64_to_bits(values) -> np.ndarray:
    with np.errstate(over="ignore", invalid="ignore"):
        out = np.asarray(values, dtype=np.float64).astype(np.float16).view(np.uint16)
    return canonicalize(np.array(out, dtype=np.uint16))


def fma_array(a, b, c) -> np.ndarray:
    """Elementwise binary16 FMA on uint16 bit-pattern arrays (broadcasting)."""
    return f64_to_bits(fma_f64(bits_to_f64(a), bits_to_f64(b), bits_to_f64(c)))
