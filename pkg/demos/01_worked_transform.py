"""Walk through the optimizer on a 4x4 integer transform.

The H.264 core transform is small enough to read by eye: a naive
signed-digit reduction needs 12 adders, while two-term subexpression sharing
brings it down to 8.
"""

from cmvm import (
    BitWidthSpec,
    check_exhaustive,
    evaluate,
    init_state,
    implement_subexpr,
    matrix_to_tensor,
    qint_from_fixed,
    reduce_outputs,
    select_subexpr,
    solve_stage2,
    stats,
)

# y = C x written as y^T = x^T M with M = C^T
C = [
    [1, 1, 1, 1],
    [2, 1, -1, -2],
    [1, -1, -1, 1],
    [1, -2, 2, -1],
]
M = [list(row) for row in zip(*C)]
qints = [qint_from_fixed(BitWidthSpec(1, 8, 8))] * 4

print("transform rows:", C)

# Naive route: sum every signed digit of every output column directly.
state = init_state(matrix_to_tensor(M), qints, [0] * 4)
naive = reduce_outputs(state)
print(f"naive signed-digit reduction: {stats(naive).adders} adders")

# Optimized route, one selection at a time.
state = init_state(matrix_to_tensor(M), qints, [0] * 4, weighted=False)
step = 0
while True:
    key = select_subexpr(state)
    if key is None:
        break
    a, b, sign, shift = key
    count = state.freq[key]
    step += 1
    row = implement_subexpr(state, key)
    op = "+" if sign > 0 else "-"
    sh = f" << {shift}" if shift else ""
    print(f"  step {step}: v{row} = v{a} {op} (v{b}{sh})  shared {count} times")
print(f"two-term sharing found {step} subexpressions")

sol = solve_stage2(M, qints, [0] * 4, dc=-1, weighted=False)
print(f"optimized: {sol.stats.adders} adders, depth {sol.stats.depth}, "
      f"cost {sol.stats.cost}")

print("spot check, x = (1, 1, 1, 1):", evaluate(sol.graph, (1, 1, 1, 1)))

# Bit-exact equivalence over the full 4-bit input space.
q4 = [qint_from_fixed(BitWidthSpec(1, 4, 4))] * 4
small = solve_stage2(M, q4, [0] * 4, dc=-1, weighted=False)
report = check_exhaustive(small, M, q4)
print(f"exhaustive check over {report.vectors_checked} vectors:",
      "ok" if report.passed else "MISMATCH")
