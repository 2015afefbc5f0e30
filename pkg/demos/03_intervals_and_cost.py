"""Quantized intervals: exact signal ranges, bitwidths, and adder cost.

Every signal in a generated circuit carries its exact [low, high, step]
value set. Widths derived from the intervals are minimal, so no adder can
overflow by construction, and the cost model counts the full/half adder
cells each add/subtract really needs.
"""

from cmvm import (
    BitWidthSpec,
    adder_cost,
    bitwidth_spec,
    overlap_bits,
    qint_add,
    qint_from_fixed,
)

i8 = qint_from_fixed(BitWidthSpec(1, 8, 8))
print("8-bit signed integer:", (i8.low, i8.high, i8.step))

frac = qint_from_fixed(BitWidthSpec(1, 4, 2))
print("fixed<1,4,2>:", (frac.low, frac.high, frac.step))

s = qint_add(i8, i8, 1, 0)
print("\nx + y over two 8-bit inputs:", (s.low, s.high), "->",
      bitwidth_spec(s).width, "bits (a 9th bit, not a heuristic carry)")

d = qint_add(i8, i8, -1, 3)
print("x - 8y:", (d.low, d.high), "->", bitwidth_spec(d).width, "bits")

print("\ncost of a+b, both 8-bit, shift 0:", adder_cost(i8, i8, 1, 0))
i4 = qint_from_fixed(BitWidthSpec(1, 4, 4))
print("cost of a+(b<<2), 8-bit and 4-bit:", adder_cost(i8, i4, 1, 2))
print("cost when ranges do not overlap (shift 8):", adder_cost(i8, i8, 1, 8),
      "(pure wiring)")

print("\noverlapping bit positions, same width:", overlap_bits(i8, i8, 0))
print("overlap of 8-bit vs 4-bit:", overlap_bits(i8, i4, 0))
print("overlap after shifting by 8:", overlap_bits(i8, i8, 8))
