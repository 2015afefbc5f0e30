"""Generate synthesizable Verilog from an optimized adder graph.

Shifts become wire concatenations, widths come from the exact intervals, and
with pipeline_every = k a register layer lands after every k adder levels
with all paths balanced (II = 1). No multiplier appears anywhere.
"""

from cmvm import (
    BitWidthSpec,
    check_random,
    emit_json,
    emit_testbench,
    emit_verilog,
    qint_from_fixed,
    solve,
)

M = [
    [11, 5, 29],
    [7, 25, 13],
    [3, 9, 17],
]
qints = [qint_from_fixed(BitWidthSpec(1, 8, 8))] * 3
sol = solve(M, qints, [0] * 3, dc=2)
print(f"optimized: {sol.stats.adders} adders, depth {sol.stats.depth}")

report = check_random(sol, M, qints, trials=10_000, seed=0)
print("random verification:", "ok" if report.passed else "MISMATCH")

print("\n--- combinational module ---")
print(emit_verilog(sol, pipeline_every=0, module_name="mat3"))

print("--- pipelined every 2 adder levels ---")
text = emit_verilog(sol, pipeline_every=2, module_name="mat3_pipe")
print(text)

print("--- self-checking testbench (head) ---")
tb = emit_testbench(sol, [(1, 2, 3), (-128, 127, 0)], "mat3_pipe", pipeline_every=2)
print("\n".join(tb.splitlines()[:24]))
print("    ...")

print("\n--- graph JSON (head) ---")
print("\n".join(emit_json(sol).splitlines()[:12]))
print("    ...")
