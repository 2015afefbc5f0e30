"""Command-line front-end: optimize, emit, bench, verify.

Exit codes: 0 success, 1 parse/usage error, 2 verification mismatch,
3 delay budget infeasible.
"""

import argparse
import json
import sys
from fractions import Fraction

from . import bench as bench_mod
from . import codegen
from .cse import BudgetInfeasible, solve
from .fxp import BitWidthSpec, qint_from_fixed
from .verify import SpaceTooLarge, check_exhaustive, check_random


class MatrixParseError(ValueError):
    pass


def parse_scalar(text: str, frac_bits: int) -> Fraction:
    """Exact decimal (or integer) literal -> dyadic rational.

    Rejects values that are not representable as mantissa * 2**exp with at
    most `frac_bits` fractional bits, e.g. 0.1.
    """
    try:
        v = Fraction(text.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise MatrixParseError(f"bad literal {text!r}: {exc}") from None
    scaled = v * (1 << frac_bits)
    if scaled.denominator != 1:
        raise MatrixParseError(
            f"{text.strip()!r} is not a fixed-point value with <= {frac_bits} fractional bits"
        )
    return v


def load_matrix(path: str, frac_bits: int = 24):
    """CSV of exact decimal literals, or JSON with explicit mantissa/exponent."""
    with open(path) as fh:
        text = fh.read()
    if path.endswith(".json"):
        try:
            payload = json.loads(text)
            rows = payload["matrix"]
            matrix = [
                [Fraction(cell["m"]) * Fraction(2) ** cell["e"] for cell in row]
                for row in rows
            ]
        except (KeyError, TypeError, ValueError) as exc:
            raise MatrixParseError(f"bad matrix JSON: {exc}") from None
    else:
        matrix = []
        for line in text.splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            matrix.append([parse_scalar(cell, frac_bits) for cell in line.split(",")])
    if not matrix:
        raise MatrixParseError("empty matrix")
    width = len(matrix[0])
    if width == 0 or any(len(row) != width for row in matrix):
        raise MatrixParseError("ragged or empty matrix rows")
    return matrix


def format_matrix_csv(matrix) -> str:
    """Exact decimal re-emission (dyadics always terminate in decimal)."""
    lines = []
    for row in matrix:
        cells = []
        for v in row:
            f = Fraction(v)
            if f.denominator == 1:
                cells.append(str(f.numerator))
            else:
                cells.append(str(f.numerator / f.denominator))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _input_qints(n: int, bits: int, signed: int):
    return [qint_from_fixed(BitWidthSpec(signed, bits, bits))] * n


def cmd_optimize(args) -> int:
    try:
        matrix = load_matrix(args.matrix, args.frac_bits)
    except (MatrixParseError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    qints = _input_qints(len(matrix), args.input_bits, args.input_signed)
    try:
        sol = solve(matrix, qints, [0] * len(matrix), args.dc, weighted=args.weighted)
    except BudgetInfeasible as exc:
        print(f"error: delay budget infeasible: {exc}", file=sys.stderr)
        return 3
    report = check_random(sol, matrix, qints, trials=args.trials, seed=args.seed)
    print(f"adders: {sol.stats.adders}")
    print(f"depth: {sol.stats.depth}")
    print(f"cost: {sol.stats.cost}")
    print(f"runtime_ms: {sol.stats.runtime_ms:.3f}")
    if args.out_json:
        with open(args.out_json, "w") as fh:
            fh.write(codegen.emit_json(sol))
        print(f"graph written to {args.out_json}")
    if not report.passed:
        print("verification FAILED (internal bug):", file=sys.stderr)
        print(report.to_text(), file=sys.stderr)
        return 2
    return 0


def cmd_emit(args) -> int:
    try:
        with open(args.graph) as fh:
            sol = codegen.parse_json(fh.read())
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: bad graph JSON: {exc}", file=sys.stderr)
        return 1
    if args.verilog:
        text = codegen.emit_verilog(sol, args.pipeline_every, args.module_name)
        with open(args.verilog, "w") as fh:
            fh.write(text)
        print(f"verilog written to {args.verilog}")
    if args.testbench:
        from .verify import input_qints_of, random_units

        qints = input_qints_of(sol)
        units = random_units(qints, args.tb_vectors, args.seed)
        vectors = [
            [int(units[n, j]) * qints[j].step for j in range(len(qints))]
            for n in range(len(units))
        ]
        text = codegen.emit_testbench(sol, vectors, args.module_name, args.pipeline_every)
        with open(args.testbench, "w") as fh:
            fh.write(text)
        print(f"testbench written to {args.testbench}")
    return 0


def cmd_bench(args) -> int:
    sizes = [int(s) for s in args.sizes.split(",") if s]
    rows = bench_mod.run_suite(
        sizes,
        bw=args.bw,
        dc=args.dc,
        trials=args.trials,
        seed=args.seed,
        weighted=args.weighted,
        jobs=args.jobs,
    )
    print(bench_mod.suite_to_csv(rows), end="")
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(bench_mod.suite_to_csv(rows))
    if args.json:
        with open(args.json, "w") as fh:
            fh.write(bench_mod.suite_to_json(rows))
    return 0


def cmd_verify(args) -> int:
    try:
        matrix = load_matrix(args.matrix, args.frac_bits)
        with open(args.graph) as fh:
            sol = codegen.parse_json(fh.read())
    except (MatrixParseError, OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    try:
        if args.exhaustive:
            report = check_exhaustive(sol, matrix)
        else:
            report = check_random(sol, matrix, trials=args.trials, seed=args.seed)
    except SpaceTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(report.to_json() if args.json else report.to_text())
    return 0 if report.passed else 2


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="cmvm",
        description="Multiplierless constant matrix-vector multiply optimizer",
    )
    sub = p.add_subparsers(dest="command", required=True)

    po = sub.add_parser("optimize", help="optimize a matrix and verify the result")
    po.add_argument("matrix", help="CSV of exact decimals, or .json with {m, e} cells")
    po.add_argument("--dc", type=int, default=2,
                    help="delay constraint; -1 disables (default 2)")
    po.add_argument("--input-bits", type=int, default=8)
    po.add_argument("--input-signed", type=int, choices=(0, 1), default=1)
    w = po.add_mutually_exclusive_group()
    w.add_argument("--weighted", dest="weighted", action="store_true", default=True,
                   help="weight subexpression frequency by operand bit overlap (default)")
    w.add_argument("--unweighted", dest="weighted", action="store_false")
    po.add_argument("--out-json", default=None)
    po.add_argument("--trials", type=int, default=10_000,
                    help="random verification vectors (default 10000)")
    po.add_argument("--seed", type=int, default=0)
    po.add_argument("--frac-bits", type=int, default=24)
    po.set_defaults(func=cmd_optimize)

    pe = sub.add_parser("emit", help="emit Verilog (and testbench) from graph JSON")
    pe.add_argument("graph")
    pe.add_argument("--verilog", default=None)
    pe.add_argument("--pipeline-every", type=int, default=0,
                    help="register after every k adder levels; 0 = combinational")
    pe.add_argument("--testbench", default=None)
    pe.add_argument("--tb-vectors", type=int, default=16)
    pe.add_argument("--module-name", default="cmvm")
    pe.add_argument("--seed", type=int, default=0)
    pe.set_defaults(func=cmd_emit)

    pb = sub.add_parser("bench", help="random-matrix benchmark suite")
    pb.add_argument("--sizes", default="2,4,8")
    pb.add_argument("--bw", type=int, default=8)
    pb.add_argument("--dc", type=int, default=-1)
    pb.add_argument("--trials", type=int, default=25)
    pb.add_argument("--seed", type=int, default=0)
    w = pb.add_mutually_exclusive_group()
    w.add_argument("--weighted", dest="weighted", action="store_true", default=True)
    w.add_argument("--unweighted", dest="weighted", action="store_false")
    pb.add_argument("--csv", default=None)
    pb.add_argument("--json", default=None)
    pb.add_argument("--jobs", type=int, default=None,
                    help="worker processes (default: CMVM_JOBS or cpu count)")
    pb.set_defaults(func=cmd_bench)

    pv = sub.add_parser("verify", help="check a graph JSON against a matrix")
    pv.add_argument("matrix")
    pv.add_argument("graph")
    g = pv.add_mutually_exclusive_group()
    g.add_argument("--exhaustive", action="store_true")
    g.add_argument("--trials", type=int, default=10_000)
    pv.add_argument("--seed", type=int, default=0)
    pv.add_argument("--json", action="store_true", help="JSON report instead of text")
    pv.add_argument("--frac-bits", type=int, default=24)
    pv.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
