"""Synthesizable Verilog and JSON emission for adder-graph solutions.

Verilog conventions: every node becomes one signed wire whose integer value
is the node's exact value divided by its step, so operand alignment shifts
are plain zero-padding concatenations and no '*' or DSP-inferring construct
ever appears. With pipeline_every = k > 0, registers are inserted after every
k adder levels and every signal crossing a boundary is registered, so all
input-to-output paths see the same number of registers (II = 1).

Emission is a pure function of (solution, options): byte-identical between
runs, suitable for golden-file tests.
"""

import json
from fractions import Fraction

from .cse import Solution, SolveStats
from .fxp import QInterval, bitwidth_spec, dyadic_parts
from .graph import (
    AddNode,
    AdderGraph,
    InputNode,
    OutputRef,
    evaluate,
    pipeline_regions,
    stats as graph_stats,
    validate,
)


class InvalidSolution(ValueError):
    """The solution's graph failed structural validation."""


def _width(q: QInterval) -> int:
    return bitwidth_spec(q).width


def _extend(name: str, w_in: int, shift: int, w_out: int) -> str:
    """Bits of (signal << shift) truncated/sign-extended to exactly w_out."""
    assert shift >= 0
    pad = f"{{{shift}{{1'b0}}}}" if shift else None
    extra = w_out - w_in - shift
    if extra > 0:
        ext = f"{{{extra}{{{name}[{w_in - 1}]}}}}"
        parts = [ext, name] + ([pad] if pad else [])
    elif extra == 0:
        parts = [name] + ([pad] if pad else [])
        if not pad:
            return name
    else:
        keep = w_out - shift  # low bits only; exact modulo 2**w_out
        if keep <= 0:
            return f"{{{w_out}{{1'b0}}}}"
        parts = [f"{name}[{keep - 1}:0]"] + ([pad] if pad else [])
        if len(parts) == 1:
            return parts[0]
    return "{" + ", ".join(parts) + "}"


def emit_verilog(
    solution: Solution,
    pipeline_every: int = 0,
    module_name: str = "cmvm",
    adder_latency=None,
) -> str:
    """Emit one self-contained Verilog-2001 module for the solution.

    `adder_latency` optionally replaces the constant-latency-per-adder
    assumption used to place pipeline boundaries (an AddNode -> positive
    number callback); path balancing is preserved either way.
    """
    graph = solution.graph
    issues = validate(graph)
    if issues:
        raise InvalidSolution("; ".join(issues))
    if pipeline_every < 0:
        raise InvalidSolution("pipeline_every must be >= 0")

    nodes = graph.nodes
    names = {}
    widths = {}
    for i, n in enumerate(nodes):
        names[i] = f"x{n.index}" if isinstance(n, InputNode) else f"n{i}"
        widths[i] = _width(n.qint)

    if pipeline_every > 0:
        region, n_bounds = pipeline_regions(graph, pipeline_every, adder_latency)
    else:
        region, n_bounds = [0] * len(nodes), 0
    last_use = list(region)
    for i, n in enumerate(nodes):
        if isinstance(n, AddNode):
            last_use[n.a] = max(last_use[n.a], region[i])
            last_use[n.b] = max(last_use[n.b], region[i])
    if n_bounds > 0:
        for r in graph.outputs:
            if r.node is not None:
                last_use[r.node] = n_bounds

    def at_region(i: int, r: int) -> str:
        lag = r - region[i]
        return names[i] if lag <= 0 else f"{names[i]}_p{lag}"

    out_widths = []
    for r in graph.outputs:
        if r.node is None:
            out_widths.append(1)
        else:
            q = nodes[r.node].qint.shifted(r.shift)
            out_widths.append(_width(q.negated() if r.sign < 0 else q))

    ports = []
    if n_bounds > 0:
        ports.append("    input clk")
    for i in graph.input_nodes():
        ports.append(f"    input signed [{widths[i] - 1}:0] {names[i]}")
    for k, w in enumerate(out_widths):
        ports.append(f"    output signed [{w - 1}:0] y{k}")

    lines = []
    lines.append(f"module {module_name} (")
    lines.append(",\n".join(ports))
    lines.append(");")
    lines.append("")

    for i, n in enumerate(nodes):
        if isinstance(n, AddNode):
            lines.append(f"    wire signed [{widths[i] - 1}:0] {names[i]};")
    regs = []
    for i in range(len(nodes)):
        for lag in range(1, last_use[i] - region[i] + 1):
            regs.append((i, lag))
    for i, lag in regs:
        lines.append(f"    reg signed [{widths[i] - 1}:0] {names[i]}_p{lag};")
    if lines[-1] != "":
        lines.append("")

    for i, n in enumerate(nodes):
        if not isinstance(n, AddNode):
            continue
        w_out = widths[i]
        ea = nodes[n.a].qint.step_exp
        eb = nodes[n.b].qint.step_exp
        eo = n.qint.step_exp
        a_expr = _extend(at_region(n.a, region[i]), widths[n.a], ea - eo, w_out)
        b_expr = _extend(at_region(n.b, region[i]), widths[n.b], eb + n.shift - eo, w_out)
        op = "+" if n.sign > 0 else "-"
        lines.append(f"    assign {names[i]} = {a_expr} {op} {b_expr};")
    lines.append("")

    if regs:
        lines.append("    always @(posedge clk) begin")
        for i, lag in regs:
            src = names[i] if lag == 1 else f"{names[i]}_p{lag - 1}"
            lines.append(f"        {names[i]}_p{lag} <= {src};")
        lines.append("    end")
        lines.append("")

    for k, r in enumerate(graph.outputs):
        if r.node is None:
            lines.append(f"    assign y{k} = 1'b0;")
            continue
        sig = at_region(r.node, n_bounds) if n_bounds > 0 else names[r.node]
        expr = _extend(sig, widths[r.node], 0, out_widths[k])
        if r.sign < 0:
            expr = f"-{expr}" if expr.startswith("{") else f"-{expr}"
        lines.append(f"    assign y{k} = {expr};")

    lines.append("")
    lines.append("endmodule")
    return "\n".join(lines) + "\n"


def emit_testbench(solution: Solution, vectors, module_name: str = "cmvm", pipeline_every: int = 0) -> str:
    """Self-checking testbench: applies vectors, compares against exact outputs."""
    graph = solution.graph
    in_nodes = graph.input_nodes()
    widths = [_width(graph.nodes[i].qint) for i in in_nodes]
    out_widths = []
    out_units = []
    for r in graph.outputs:
        if r.node is None:
            out_widths.append(1)
            out_units.append(Fraction(1))
        else:
            q = graph.nodes[r.node].qint.shifted(r.shift)
            q = q.negated() if r.sign < 0 else q
            out_widths.append(_width(q))
            out_units.append(q.step)

    if pipeline_every > 0:
        _, n_bounds = pipeline_regions(graph, pipeline_every)
    else:
        n_bounds = 0

    lines = [f"module {module_name}_tb;"]
    for j, w in enumerate(widths):
        lines.append(f"    reg signed [{w - 1}:0] x{j};")
    for k, w in enumerate(out_widths):
        lines.append(f"    wire signed [{w - 1}:0] y{k};")
    lines.append("    integer errors;")
    if n_bounds > 0:
        lines.append("    reg clk;")
        lines.append("    initial clk = 1'b0;")
        lines.append("    always #5 clk = ~clk;")
    lines.append("")
    conns = []
    if n_bounds > 0:
        conns.append(".clk(clk)")
    conns += [f".x{j}(x{j})" for j in range(len(widths))]
    conns += [f".y{k}(y{k})" for k in range(len(out_widths))]
    lines.append(f"    {module_name} dut ({', '.join(conns)});")
    lines.append("")
    lines.append("    initial begin")
    lines.append("        errors = 0;")

    for vec in vectors:
        expected = evaluate(graph, vec)
        for j, v in enumerate(vec):
            unit = graph.nodes[graph.input_nodes()[j]].qint.step
            lines.append(f"        x{j} = {int(Fraction(v) / unit)};")
        if n_bounds > 0:
            for _ in range(n_bounds + 1):
                lines.append("        @(posedge clk);")
            lines.append("        #1;")
        else:
            lines.append("        #10;")
        for k, e in enumerate(expected):
            lit = int(Fraction(e) / out_units[k])
            lines.append(f"        if (y{k} !== {out_widths[k]}'sd{lit & ((1 << out_widths[k]) - 1)})")
            lines.append(
                f'            begin errors = errors + 1; $display("FAIL y{k}: got %0d", y{k}); end'
            )
    lines.append('        if (errors == 0) $display("PASS");')
    lines.append('        else $display("%0d errors", errors);')
    lines.append("        $finish;")
    lines.append("    end")
    lines.append("endmodule")
    return "\n".join(lines) + "\n"


def _qint_json(q: QInterval) -> dict:
    lm, le = dyadic_parts(q.low)
    hm, he = dyadic_parts(q.high)
    return {
        "low_mantissa": lm,
        "low_exp": le,
        "high_mantissa": hm,
        "high_exp": he,
        "step_exp": q.step_exp,
    }


def _qint_from_json(d: dict) -> QInterval:
    lo = Fraction(d["low_mantissa"]) * Fraction(2) ** d["low_exp"]
    hi = Fraction(d["high_mantissa"]) * Fraction(2) ** d["high_exp"]
    return QInterval(lo, hi, d["step_exp"])


def emit_json(solution: Solution) -> str:
    """Serialize a solution (graph + stats, runtime excluded) to JSON."""
    graph = solution.graph
    inputs = []
    nodes = []
    for i, n in enumerate(graph.nodes):
        if isinstance(n, InputNode):
            inputs.append({"index": n.index, "qint": _qint_json(n.qint), "depth": n.depth})
            nodes.append(
                {"id": i, "kind": "input", "index": n.index,
                 "qint": _qint_json(n.qint), "depth": n.depth, "cost": 0}
            )
        else:
            nodes.append(
                {"id": i, "kind": "addsub", "a": n.a, "b": n.b, "sign": n.sign,
                 "shift": n.shift, "qint": _qint_json(n.qint), "depth": n.depth,
                 "cost": n.cost}
            )
    outputs = [
        {"node": r.node, "shift": r.shift, "sign": r.sign} for r in graph.outputs
    ]
    gs = graph_stats(graph)
    payload = {
        "inputs": sorted(inputs, key=lambda d: d["index"]),
        "nodes": nodes,
        "outputs": outputs,
        "stats": {"adders": gs.adders, "depth": gs.depth, "cost": gs.cost},
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def parse_json(text: str) -> Solution:
    """Inverse of emit_json; stats are recomputed, runtime is not round-tripped."""
    payload = json.loads(text)
    nodes = []
    for nd in payload["nodes"]:
        q = _qint_from_json(nd["qint"])
        if nd["kind"] == "input":
            nodes.append(InputNode(nd["index"], q, nd["depth"]))
        else:
            nodes.append(
                AddNode(nd["a"], nd["b"], nd["sign"], nd["shift"], q, nd["depth"], nd["cost"])
            )
    outputs = tuple(
        OutputRef(o["node"], o["shift"], o["sign"]) for o in payload["outputs"]
    )
    graph = AdderGraph(tuple(nodes), outputs)
    gs = graph_stats(graph)
    return Solution(graph, SolveStats(gs.adders, gs.depth, gs.cost, None))
