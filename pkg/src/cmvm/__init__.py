"""Multiplierless constant matrix-vector multiplication optimizer.

Converts a fixed-point constant matrix into a minimal-cost, depth-bounded
shift-and-add adder graph, with bit-exact verification, statistics, and
pipelined Verilog emission.
"""

from .bench import random_matrix, run_suite, scaling_study
from .codegen import (
    InvalidSolution,
    emit_json,
    emit_testbench,
    emit_verilog,
    parse_json,
)
from .csd import CsdScalar, CsdTensor, Normalization, matrix_to_tensor, nnz_csd, normalize, to_csd
from .cse import (
    BudgetInfeasible,
    CseState,
    ImplValue,
    Solution,
    SolveStats,
    SubexprKey,
    implement_subexpr,
    init_state,
    reduce_outputs,
    select_subexpr,
    solve,
    solve_stage2,
)
from .decompose import ColumnGraphResult, column_distance, decompose, is_trivial
from .fxp import (
    BitWidthSpec,
    QInterval,
    adder_cost,
    bitwidth_spec,
    overlap_bits,
    qint_add,
    qint_from_fixed,
)
from .graph import (
    AddNode,
    AdderGraph,
    DomainError,
    GraphStats,
    InputNode,
    OutputRef,
    evaluate,
    stats,
    validate,
)
from .verify import Report, SpaceTooLarge, check_exhaustive, check_random, oracle

__version__ = "0.1.0"

__all__ = [
    "AddNode",
    "AdderGraph",
    "BitWidthSpec",
    "BudgetInfeasible",
    "ColumnGraphResult",
    "CsdScalar",
    "CsdTensor",
    "CseState",
    "DomainError",
    "GraphStats",
    "ImplValue",
    "InputNode",
    "InvalidSolution",
    "Normalization",
    "OutputRef",
    "QInterval",
    "Report",
    "Solution",
    "SolveStats",
    "SpaceTooLarge",
    "SubexprKey",
    "adder_cost",
    "bitwidth_spec",
    "check_exhaustive",
    "check_random",
    "column_distance",
    "decompose",
    "emit_json",
    "emit_testbench",
    "emit_verilog",
    "evaluate",
    "implement_subexpr",
    "init_state",
    "is_trivial",
    "matrix_to_tensor",
    "nnz_csd",
    "normalize",
    "oracle",
    "overlap_bits",
    "parse_json",
    "qint_add",
    "qint_from_fixed",
    "random_matrix",
    "reduce_outputs",
    "run_suite",
    "scaling_study",
    "select_subexpr",
    "solve",
    "solve_stage2",
    "stats",
    "to_csd",
    "validate",
]
