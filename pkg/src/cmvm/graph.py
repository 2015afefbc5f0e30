"""Adder-graph intermediate representation: nodes, evaluation, statistics.

A graph is a topologically ordered list of nodes (inputs and two-operand
add/subtract nodes) plus a list of output taps. Every node carries its exact
quantized interval, adder depth, and hardware cost, so statistics are pure
recomputations and evaluation is exact.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

from .fxp import QInterval, adder_cost, bitwidth_spec, qint_add


class DomainError(ValueError):
    """An input value fell outside its declared quantized interval."""


@dataclass(frozen=True)
class InputNode:
    index: int
    qint: QInterval
    depth: int

    cost = 0


@dataclass(frozen=True)
class AddNode:
    """value = nodes[a] + sign * (nodes[b] << shift); shift may be negative."""

    a: int
    b: int
    sign: int
    shift: int
    qint: QInterval
    depth: int
    cost: int


@dataclass(frozen=True)
class OutputRef:
    """Output tap: sign * (nodes[node] << shift); node None is constant zero."""

    node: int | None
    shift: int
    sign: int


@dataclass(frozen=True)
class AdderGraph:
    nodes: tuple
    outputs: tuple[OutputRef, ...]

    @property
    def n_inputs(self) -> int:
        return sum(1 for n in self.nodes if isinstance(n, InputNode))

    def input_nodes(self) -> list[int]:
        """Node list positions of the inputs, ordered by input index."""
        pos = {}
        for i, n in enumerate(self.nodes):
            if isinstance(n, InputNode):
                pos[n.index] = i
        return [pos[k] for k in sorted(pos)]


class GraphBuilder:
    """Appends nodes while deriving qint/depth/cost; shared across solve stages."""

    def __init__(self):
        self.nodes = []

    def add_input(self, index: int, qint: QInterval, depth: int = 0) -> int:
        self.nodes.append(InputNode(index, qint, depth))
        return len(self.nodes) - 1

    def add(self, a: int, b: int, sign: int, shift: int) -> int:
        na, nb = self.nodes[a], self.nodes[b]
        q = qint_add(na.qint, nb.qint, sign, shift)
        depth = max(na.depth, nb.depth) + 1
        cost = adder_cost(na.qint, nb.qint, sign, shift)
        self.nodes.append(AddNode(a, b, sign, shift, q, depth, cost))
        return len(self.nodes) - 1


def evaluate(graph: AdderGraph, x) -> list[Fraction]:
    """Exact outputs for one input vector; raises DomainError on out-of-range x."""
    values, _ = evaluate_with_trace(graph, x)
    return values


def evaluate_with_trace(graph: AdderGraph, x):
    """Like evaluate() but also returns every node's value (for interval audits)."""
    xs = [Fraction(v) for v in x]
    trace = []
    for node in graph.nodes:
        if isinstance(node, InputNode):
            v = xs[node.index]
            if not node.qint.contains(v):
                raise DomainError(f"input {node.index} value {v} outside {node.qint}")
            trace.append(v)
        else:
            v = trace[node.a] + node.sign * trace[node.b] * Fraction(2) ** node.shift
            trace.append(v)
    out = []
    for ref in graph.outputs:
        if ref.node is None:
            out.append(Fraction(0))
        else:
            out.append(ref.sign * trace[ref.node] * Fraction(2) ** ref.shift)
    return out, trace


@dataclass(frozen=True)
class GraphStats:
    adders: int
    depth: int
    cost: int
    registers_estimate: int


def _negation_cost(q: QInterval) -> int:
    # a pure output negation is charged as one adder of the negated width
    return bitwidth_spec(q.negated()).width


def stats(graph: AdderGraph, pipeline_every: int = 0) -> GraphStats:
    """(adders, depth, cost, registers_estimate) recomputed from the graph."""
    adders = sum(1 for n in graph.nodes if isinstance(n, AddNode))
    in_depths = [n.depth for n in graph.nodes if isinstance(n, InputNode)]
    out_depths = [
        graph.nodes[r.node].depth for r in graph.outputs if r.node is not None
    ]
    depth = max(out_depths, default=0) - max(in_depths, default=0)
    depth = max(depth, 0)
    cost = sum(n.cost for n in graph.nodes if isinstance(n, AddNode))
    for r in graph.outputs:
        if r.node is not None and r.sign < 0:
            cost += _negation_cost(graph.nodes[r.node].qint)
    regs = _register_bits(graph, pipeline_every) if pipeline_every > 0 else 0
    return GraphStats(adders, depth, cost, regs)


def pipeline_regions(graph: AdderGraph, pipeline_every: int, adder_latency=None):
    """Per-node combinational region index and the boundary count.

    By default every adder counts one latency unit, so region r holds nodes
    with depth in (r*k, (r+1)*k] and inputs live in region 0. `adder_latency`
    (an AddNode -> positive number callback) replaces the constant-latency
    assumption; a node lands in the region its accumulated arrival time
    falls in. The boundary count is ceil(max_output_arrival / k); all outputs
    are registered at the final boundary so every input-to-output path
    crosses the same number of registers.
    """
    k = pipeline_every
    if adder_latency is None:
        region = [0 if n.depth <= 0 else (n.depth - 1) // k for n in graph.nodes]
        out_t = [graph.nodes[r.node].depth for r in graph.outputs if r.node is not None]
    else:
        arrival = []
        for n in graph.nodes:
            if isinstance(n, InputNode):
                arrival.append(n.depth)
            else:
                lat = adder_latency(n)
                if lat <= 0:
                    raise ValueError("adder latency must be positive")
                arrival.append(max(arrival[n.a], arrival[n.b]) + lat)
        region = [0 if t <= 0 else math.ceil(t / k) - 1 for t in arrival]
        out_t = [arrival[r.node] for r in graph.outputs if r.node is not None]
    t_max = max(out_t, default=0)
    n_bounds = math.ceil(t_max / k) if t_max > 0 else 0
    return region, n_bounds


def _register_bits(graph: AdderGraph, pipeline_every: int) -> int:
    region, n_bounds = pipeline_regions(graph, pipeline_every)
    if n_bounds == 0:
        return 0
    # last region in which each node's value is consumed
    last_use = [region[i] for i in range(len(graph.nodes))]
    for i, n in enumerate(graph.nodes):
        if isinstance(n, AddNode):
            for op in (n.a, n.b):
                last_use[op] = max(last_use[op], region[i])
    for r in graph.outputs:
        if r.node is not None:
            last_use[r.node] = n_bounds  # outputs exit after the final boundary
    total = 0
    for i, n in enumerate(graph.nodes):
        crossings = max(0, last_use[i] - region[i])
        total += crossings * bitwidth_spec(n.qint).width
    return total


def validate(graph: AdderGraph) -> list[str]:
    """Structural audit; returns human-readable violation tags (empty if clean)."""
    issues = []
    seen_inputs = set()
    for i, n in enumerate(graph.nodes):
        if isinstance(n, InputNode):
            if n.index in seen_inputs:
                issues.append(f"duplicate-input:{n.index}")
            seen_inputs.add(n.index)
            continue
        if n.a >= i or n.b >= i or n.a < 0 or n.b < 0:
            issues.append(f"operand-after-use:{i}")
            continue
        qa, qb = graph.nodes[n.a].qint, graph.nodes[n.b].qint
        if qint_add(qa, qb, n.sign, n.shift) != n.qint:
            issues.append(f"qint-mismatch:{i}")
        if max(graph.nodes[n.a].depth, graph.nodes[n.b].depth) + 1 != n.depth:
            issues.append(f"depth-mismatch:{i}")
        if adder_cost(qa, qb, n.sign, n.shift) != n.cost:
            issues.append(f"cost-mismatch:{i}")
    if seen_inputs and seen_inputs != set(range(max(seen_inputs) + 1)):
        issues.append("missing-input")
    live = set()
    stack = []
    for r in graph.outputs:
        if r.node is not None:
            if not (0 <= r.node < len(graph.nodes)):
                issues.append("bad-output-ref")
                continue
            stack.append(r.node)
    while stack:
        i = stack.pop()
        if i in live or not (0 <= i < len(graph.nodes)):
            continue
        live.add(i)
        n = graph.nodes[i]
        if isinstance(n, AddNode):
            stack.extend((n.a, n.b))
    for i, n in enumerate(graph.nodes):
        if isinstance(n, AddNode) and i not in live:
            issues.append(f"dead-node:{i}")
    return issues
