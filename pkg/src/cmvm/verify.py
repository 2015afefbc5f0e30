"""Bit-exact equivalence checking of a solution against the direct product.

The oracle is the plain exact matrix-vector product y^T = x^T M. Solutions
are checked either exhaustively over the whole input space or over seeded
pseudo-random vectors; both paths also audit that every node's runtime value
stays inside its declared quantized interval.

The random stream is splitmix64 (documented constants below), so failures
reproduce across machines and implementations.
"""

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .fxp import QInterval, dyadic_parts
from .graph import AdderGraph, InputNode

_MASK = (1 << 64) - 1


class SpaceTooLarge(ValueError):
    """The exhaustive input space exceeds the configured limit."""


def splitmix64(seed: int):
    """Infinite stream of 64-bit words from the splitmix64 generator."""
    state = seed & _MASK
    while True:
        state = (state + 0x9E3779B97F4A7C15) & _MASK
        z = state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
        yield z ^ (z >> 31)


def oracle(matrix, x):
    """Exact y^T = x^T M."""
    d_in = len(matrix)
    if len(x) != d_in:
        raise ValueError(f"x has {len(x)} entries, matrix has {d_in} rows")
    d_out = len(matrix[0]) if d_in else 0
    out = []
    for i in range(d_out):
        acc = Fraction(0)
        for j in range(d_in):
            acc += Fraction(x[j]) * Fraction(matrix[j][i])
        out.append(acc)
    return out


@dataclass
class Report:
    equivalent: bool
    vectors_checked: int
    mode: str
    first_mismatch: dict | None = None
    interval_violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.equivalent and not self.interval_violations

    def to_text(self) -> str:
        lines = [
            f"mode: {self.mode}",
            f"vectors checked: {self.vectors_checked}",
            f"equivalent: {'yes' if self.equivalent else 'NO'}",
        ]
        if self.first_mismatch:
            m = self.first_mismatch
            lines.append(
                f"first mismatch at x={m['x']}: output {m['output']} "
                f"expected {m['expected']}, got {m['got']}"
            )
        for v in self.interval_violations:
            lines.append(f"interval violation: {v}")
        return "\n".join(lines)

    def to_json(self) -> str:
        payload = {
            "equivalent": self.equivalent,
            "passed": self.passed,
            "vectors_checked": self.vectors_checked,
            "mode": self.mode,
            "first_mismatch": self.first_mismatch,
            "interval_violations": self.interval_violations,
        }
        return json.dumps(payload, indent=2, sort_keys=True)


def _int_plan(graph: AdderGraph):
    """Compile the graph to integer-unit operations.

    Every node's wire value is its exact value divided by its step; operand
    alignment shifts are then non-negative integers, so evaluation is exact in
    integer arithmetic.
    """
    plan = []
    for node in graph.nodes:
        if isinstance(node, InputNode):
            plan.append(("in", node.index))
        else:
            ea = graph.nodes[node.a].qint.step_exp
            eb = graph.nodes[node.b].qint.step_exp
            eo = node.qint.step_exp
            plan.append(
                ("add", node.a, node.b, node.sign, ea - eo, eb + node.shift - eo)
            )
    return plan


def _grid(q: QInterval):
    """(count, offset) of an interval's value grid; value = (offset+k) * step."""
    count = int((q.high - q.low) / q.step) + 1
    offset = int(q.low / q.step)
    return count, offset


def _check_vectors(solution, matrix, input_qints, units: np.ndarray, mode: str) -> Report:
    """units[n, j] are input grid indices: x_j = units[n, j] * 2**step_exp_j."""
    graph = solution.graph
    plan = _int_plan(graph)
    d_in = len(matrix)
    d_out = len(matrix[0]) if d_in else 0
    if len(graph.outputs) != d_out:
        raise ValueError("solution output count does not match the matrix")
    if len(input_qints) != d_in:
        raise ValueError("input spec length does not match the matrix rows")

    # Common exponent K such that both the oracle's products and the outputs
    # are integers when scaled by 2**-K.
    exps = []
    coeff_me = [[dyadic_parts(matrix[j][i]) for i in range(d_out)] for j in range(d_in)]
    for j in range(d_in):
        ej = input_qints[j].step_exp
        for i in range(d_out):
            m, e = coeff_me[j][i]
            if m:
                exps.append(ej + e)
    out_exp = []
    for ref in graph.outputs:
        if ref.node is None:
            out_exp.append(0)
        else:
            out_exp.append(graph.nodes[ref.node].qint.step_exp + ref.shift)
    k_base = min(exps + [e for e in out_exp], default=0)

    # magnitude bound decides whether int64 is exact; the oracle side must
    # bound partial sums (terms can cancel in the final value)
    bound = 0
    for node in graph.nodes:
        q = node.qint
        bound = max(bound, int(abs(q.low / q.step)), int(abs(q.high / q.step)))
    for i in range(d_out):
        acc = Fraction(0)
        for j in range(d_in):
            q = input_qints[j]
            acc += max(abs(q.low), abs(q.high)) * abs(Fraction(matrix[j][i]))
        bound = max(bound, int(acc * Fraction(2) ** -k_base))
    dtype = np.int64 if bound < (1 << 62) else object
    units = units.astype(dtype)

    coeffs = np.zeros((d_in, d_out), dtype=dtype)
    for j in range(d_in):
        ej = input_qints[j].step_exp
        for i in range(d_out):
            m, e = coeff_me[j][i]
            coeffs[j, i] = m * (1 << (e + ej - k_base)) if m else 0

    expected = np.dot(units, coeffs)  # oracle outputs, in 2**k_base units

    values = []
    for op in plan:
        if op[0] == "in":
            values.append(units[:, op[1]])
        else:
            _, a, b, sign, sa, sb = op
            va = values[a] << sa if sa else values[a]
            vb = values[b] << sb if sb else values[b]
            values.append(va + vb if sign > 0 else va - vb)

    got = np.zeros_like(expected)
    for i, ref in enumerate(graph.outputs):
        if ref.node is None:
            continue
        v = values[ref.node] if ref.sign > 0 else -values[ref.node]
        got[:, i] = v << (out_exp[i] - k_base)

    mismatch = None
    neq = expected != got
    if neq.any():
        n, i = np.argwhere(neq)[0]
        x = [Fraction(int(units[n, j])) * input_qints[j].step for j in range(d_in)]
        mismatch = {
            "x": [str(v) for v in x],
            "output": int(i),
            "expected": str(Fraction(int(expected[n, i])) * Fraction(2) ** k_base),
            "got": str(Fraction(int(got[n, i])) * Fraction(2) ** k_base),
        }

    violations = []
    for i, node in enumerate(graph.nodes):
        lo = Fraction(int(values[i].min())) * node.qint.step
        hi = Fraction(int(values[i].max())) * node.qint.step
        if lo < node.qint.low or hi > node.qint.high:
            violations.append(f"node {i}: observed [{lo}, {hi}] outside {node.qint}")

    return Report(
        equivalent=mismatch is None,
        vectors_checked=len(units),
        mode=mode,
        first_mismatch=mismatch,
        interval_violations=violations,
    )


def observed_node_ranges(solution, units: np.ndarray):
    """(min, max) exact value per node over the given input grid units."""
    graph = solution.graph
    plan = _int_plan(graph)
    values = []
    arr = units.astype(object)
    for op in plan:
        if op[0] == "in":
            values.append(arr[:, op[1]])
        else:
            _, a, b, sign, sa, sb = op
            va = values[a] << sa if sa else values[a]
            vb = values[b] << sb if sb else values[b]
            values.append(va + vb if sign > 0 else va - vb)
    out = []
    for i, node in enumerate(graph.nodes):
        out.append(
            (
                Fraction(int(values[i].min())) * node.qint.step,
                Fraction(int(values[i].max())) * node.qint.step,
            )
        )
    return out


def input_qints_of(solution) -> list[QInterval]:
    qs = {}
    for node in solution.graph.nodes:
        if isinstance(node, InputNode):
            qs[node.index] = node.qint
    return [qs[k] for k in sorted(qs)]


def exhaustive_units(input_qints) -> np.ndarray:
    """All input grid-unit combinations, odometer order (last input fastest)."""
    grids = [_grid(q) for q in input_qints]
    axes = [np.arange(off, off + count, dtype=np.int64) for count, off in grids]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def check_exhaustive(solution, matrix, input_spec=None, limit: int = 1 << 20) -> Report:
    """Evaluate every representable input vector; error if the space is too big."""
    input_qints = list(input_spec) if input_spec is not None else input_qints_of(solution)
    total = 1
    for count, _ in (_grid(q) for q in input_qints):
        total *= count
    if total > limit:
        raise SpaceTooLarge(f"{total} input vectors exceed the limit {limit}")
    units = exhaustive_units(input_qints)
    return _check_vectors(solution, matrix, input_qints, units, "exhaustive")


def random_units(input_qints, trials: int, seed: int) -> np.ndarray:
    grids = [_grid(q) for q in input_qints]
    gen = splitmix64(seed)
    units = np.zeros((trials, len(grids)), dtype=np.int64)
    for n in range(trials):
        for j, (count, off) in enumerate(grids):
            units[n, j] = off + next(gen) % count
    return units


def check_random(solution, matrix, input_spec=None, trials: int = 10_000, seed: int = 0) -> Report:
    """Evaluate `trials` seeded pseudo-random vectors (splitmix64 stream)."""
    input_qints = list(input_spec) if input_spec is not None else input_qints_of(solution)
    units = random_units(input_qints, trials, seed)
    return _check_vectors(solution, matrix, input_qints, units, f"random(seed={seed})")
