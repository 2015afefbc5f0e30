"""Exact fixed-point value model.

Signals are described by *quantized intervals* [low, high, step]: the exact
value range plus a power-of-two step. All arithmetic is exact (integers and
dyadic rationals only); there is no floating point anywhere in the cost or
range math, so bitwidths derived from intervals are always sound.
"""

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache


@lru_cache(maxsize=None)
def _pow2(e: int) -> Fraction:
    return Fraction(2) ** e


def _is_dyadic(x) -> bool:
    if isinstance(x, int):
        return True
    if isinstance(x, Fraction):
        d = x.denominator
        return d & (d - 1) == 0
    return False


def dyadic_parts(x) -> tuple[int, int]:
    """Split an exact dyadic value into (odd mantissa, exponent), (0, 0) for 0."""
    if isinstance(x, int):
        if x == 0:
            return 0, 0
        t = (x & -x).bit_length() - 1  # trailing zeros
        return x >> t, t
    f = x if isinstance(x, Fraction) else Fraction(x)
    if f == 0:
        return 0, 0
    m = f.numerator
    e = -(f.denominator.bit_length() - 1)
    t = (m & -m).bit_length() - 1
    return m >> t, e + t


def _clog2(x: Fraction) -> int:
    """Smallest k with 2**k >= x, for x > 0."""
    m, e = dyadic_parts(x)
    if m == 1:
        return e
    return m.bit_length() + e


@dataclass(frozen=True)
class BitWidthSpec:
    """A fixed<S, W, I> format: sign bit, total width, integer bits (incl. sign)."""

    signed: int
    width: int
    int_bits: int

    def __post_init__(self):
        if self.signed not in (0, 1):
            raise ValueError(f"signed must be 0 or 1, got {self.signed}")
        if self.width < 1:
            raise ValueError(f"width must be >= 1, got {self.width}")


@dataclass(frozen=True)
class QInterval:
    """Exact value set of a fixed-point signal: low/high bounds and step 2**step_exp.

    low and high are exact dyadic rationals; high - low is always an integer
    multiple of the step. The all-zero signal is [0, 0] at any step.
    """

    low: Fraction
    high: Fraction
    step_exp: int
    _spec: object = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if not isinstance(self.low, Fraction):
            object.__setattr__(self, "low", Fraction(self.low))
        if not isinstance(self.high, Fraction):
            object.__setattr__(self, "high", Fraction(self.high))
        if not (_is_dyadic(self.low) and _is_dyadic(self.high)):
            raise ValueError("interval bounds must be dyadic rationals")
        if self.low > self.high:
            raise ValueError(f"low {self.low} > high {self.high}")
        diff = self.high - self.low
        if diff:
            _, e = dyadic_parts(diff)
            if e < self.step_exp:
                raise ValueError("high - low must be a multiple of the step")

    @property
    def step(self) -> Fraction:
        return _pow2(self.step_exp)

    @property
    def is_zero(self) -> bool:
        return self.low == 0 and self.high == 0

    def shifted(self, k: int) -> "QInterval":
        return QInterval(self.low * _pow2(k), self.high * _pow2(k), self.step_exp + k)

    def negated(self) -> "QInterval":
        return QInterval(-self.high, -self.low, self.step_exp)

    def contains(self, value) -> bool:
        v = Fraction(value)
        if v < self.low or v > self.high:
            return False
        return (v - self.low) % self.step == 0

    def bit_range(self) -> tuple[int, int] | None:
        """Half-open [lsb, msb) bit positions this signal occupies; None if zero."""
        if self.is_zero:
            return None
        lo = self.step_exp
        return lo, lo + bitwidth_spec(self).width


def qint_from_fixed(spec: BitWidthSpec) -> QInterval:
    """Value set of a fixed<S, W, I> signal."""
    s, w, i = spec.signed, spec.width, spec.int_bits
    low = -_pow2(i - s) if s else Fraction(0)
    high = _pow2(i - s) - _pow2(i - w)
    return QInterval(low, high, i - w)


def bitwidth_spec(q: QInterval) -> BitWidthSpec:
    """Minimal fixed<S, W, I> whose value set contains the interval.

    For a constant-zero interval, a 1-bit spec covering [0, step] is returned
    (a true zero-width signal is not expressible as a fixed<> format).
    """
    spec = q._spec
    if spec is not None:
        return spec
    if q.is_zero:
        spec = BitWidthSpec(0, 1, q.step_exp + 1)
    else:
        s = 1 if q.low < 0 else 0
        i = s + _clog2(q.high + q.step) if q.high + q.step > 0 else None
        if s:
            i_neg = 1 + _clog2(-q.low)
            i = i_neg if i is None else max(i, i_neg)
        w = i - q.step_exp
        if w < 1:  # degenerate constant, e.g. [c, c] with coarse step
            w = 1
        spec = BitWidthSpec(s, w, i)
    object.__setattr__(q, "_spec", spec)
    return spec


def qint_add(a: QInterval, b: QInterval, sign: int, shift: int) -> QInterval:
    """Exact interval of a + sign * (b << shift).

    A constant-zero operand passes the other one through (shifted/negated);
    otherwise endpoints combine by interval arithmetic and the step is
    min(step_a, step_b << shift). Tight for independent operands.
    """
    if b.is_zero:
        return a
    if a.is_zero:
        q = b.shifted(shift)
        return q.negated() if sign < 0 else q
    bl, bh = b.low * _pow2(shift), b.high * _pow2(shift)
    if sign < 0:
        bl, bh = -bh, -bl
    return QInterval(a.low + bl, a.high + bh, min(a.step_exp, b.step_exp + shift))


def adder_cost(a: QInterval, b: QInterval, sign: int, shift: int) -> int:
    """Hardware cost (full/half adder count) of a + sign * (b << shift).

    When the operands' occupied bit ranges are disjoint the "add" is pure
    wiring and costs 0. Otherwise the cost is
    max(bw_a, bw_b + s) - min(0, s) + 1 with widths taken from the minimal
    containing fixed<> specs and s the shift re-based to operand a's lsb.
    """
    if overlap_bits(a, b, shift) == 0:
        return 0
    wa = bitwidth_spec(a).width
    wb = bitwidth_spec(b).width
    s = (b.step_exp + shift) - a.step_exp
    return max(wa, wb + s) - min(0, s) + 1


def overlap_bits(a: QInterval, b: QInterval, shift: int) -> int:
    """Number of bit positions occupied by both a and b << shift."""
    ra = a.bit_range()
    rb = b.bit_range()
    if ra is None or rb is None:
        return 0
    lo = max(ra[0], rb[0] + shift)
    hi = min(ra[1], rb[1] + shift)
    return max(0, hi - lo)
