"""Stage 2: greedy overlap-weighted two-term common subexpression elimination.

The optimizer state is a sparse signed-digit tensor (one column per output)
plus the list of implemented values. Each update step picks the most frequent
admissible two-term subexpression a +- (b << s), implements it as one adder,
and rewrites every occurrence to a single digit referencing the new value.
Residual digits are then reduced into balanced per-output adder trees.

Depth budgets use the Kraft bound: a set of leaves at depths d_l can be
combined into a tree of max depth ceil(log2(sum 2**d_l)) and no less. With a
delay constraint dc >= 0 each output's budget is its initial bound plus dc,
and a candidate subexpression is admissible only if every affected output
stays within budget.
"""

import heapq
import time
from dataclasses import dataclass, field
from typing import NamedTuple

from .csd import CsdTensor, matrix_to_tensor, normalize
from .decompose import decompose, is_trivial
from .fxp import BitWidthSpec, QInterval, bitwidth_spec, qint_from_fixed
from .graph import AdderGraph, GraphBuilder, OutputRef, stats as graph_stats


class BudgetInfeasible(RuntimeError):
    """The delay constraint cannot be met for some output column."""


class SubexprKey(NamedTuple):
    """Identity of a two-term subexpression: value_a + sign * (value_b << shift).

    a and b index the implemented-value list; the ordering is canonical
    (operand a is the lower-power digit of an occurrence, so shift >= 0) and
    compares equal to a plain (a, b, sign, shift) tuple.
    """

    a: int
    b: int
    sign: int
    shift: int


def _clog2_int(n: int) -> int:
    """ceil(log2(n)) for n >= 1."""
    return (n - 1).bit_length()


@dataclass
class ImplValue:
    """One entry of the implemented-value list.

    The carried value is nodes[node] * 2**scale; qint/depth describe that
    value. lsb/msb cache the occupied bit range for overlap weighting. origin
    is the input index or the defining subexpression key.
    """

    node: int
    scale: int
    qint: QInterval
    depth: int
    lsb: int
    msb: int
    origin: object


@dataclass
class CseState:
    cols: list  # per output column: {row: {power: sign}}
    impl: list  # list[ImplValue]
    rowcols: list  # per row: set of columns holding a digit of that row
    freq: dict  # subexpression key -> occurrence-pair count
    weighted: bool
    builder: GraphBuilder
    budgets: list | None  # per-column max depth, or None when unconstrained
    ksum: list  # per-column Kraft sum (budget mode only)
    heap: list = field(default_factory=list)
    wcache: dict = field(default_factory=dict)
    n_digits: int = 0

    def digit_count(self) -> int:
        return self.n_digits


def _canon(j1, p1, s1, j2, p2, s2):
    """Canonical key of a co-occurring digit pair.

    Operand a is the lower-power digit (same power: lower row), so the key
    shift is always >= 0 and operand a carries no shift. The key sign is the
    relative sign; the occurrence keeps operand a's sign as its base sign, so
    v and -v instances of the same expression share one key.
    Returns (key, base_power, base_sign).
    """
    if p1 > p2 or (p1 == p2 and j1 > j2):
        j1, p1, s1, j2, p2, s2 = j2, p2, s2, j1, p1, s1
    return (j1, j2, s1 * s2, p2 - p1), p1, s1


def _weight(state: CseState, key) -> int:
    if not state.weighted:
        return 1
    w = state.wcache.get(key)
    if w is None:
        a, b, _, sh = key
        va, vb = state.impl[a], state.impl[b]
        w = max(0, min(va.msb, vb.msb + sh) - max(va.lsb, vb.lsb + sh))
        state.wcache[key] = w
    return w


def _push(state: CseState, key, count: int):
    if count >= 2:
        a, b, sg, sh = key
        wc = count * _weight(state, key)
        heapq.heappush(state.heap, (-wc, -count, a, b, 0 if sg > 0 else 1, sh))


def _pair_sweep(state: CseState, col: int, row: int, power: int, sign: int, delta: int):
    """Add/remove every pair formed by one digit against the rest of its column."""
    freq = state.freq
    for r2, powers in state.cols[col].items():
        if r2 == row:
            for p2, s2 in powers.items():
                if p2 == power:
                    continue
                key, _, _ = _canon(row, power, sign, r2, p2, s2)
                c = freq.get(key, 0) + delta
                if c:
                    freq[key] = c
                    _push(state, key, c)
                else:
                    del freq[key]
        else:
            for p2, s2 in powers.items():
                key, _, _ = _canon(row, power, sign, r2, p2, s2)
                c = freq.get(key, 0) + delta
                if c:
                    freq[key] = c
                    _push(state, key, c)
                else:
                    del freq[key]


def _add_digit(state: CseState, col: int, row: int, power: int, sign: int):
    _pair_sweep(state, col, row, power, sign, +1)
    colmap = state.cols[col]
    powers = colmap.get(row)
    if powers is None:
        colmap[row] = {power: sign}
        state.rowcols[row].add(col)
    else:
        powers[power] = sign
    state.n_digits += 1
    if state.budgets is not None:
        state.ksum[col] += 1 << state.impl[row].depth


def _remove_digit(state: CseState, col: int, row: int, power: int):
    colmap = state.cols[col]
    powers = colmap[row]
    sign = powers.pop(power)
    if not powers:
        del colmap[row]
        state.rowcols[row].discard(col)
    state.n_digits -= 1
    if state.budgets is not None:
        state.ksum[col] -= 1 << state.impl[row].depth
    _pair_sweep(state, col, row, power, sign, -1)


def _make_value(builder: GraphBuilder, node: int, scale: int, origin) -> ImplValue:
    n = builder.nodes[node]
    q = n.qint.shifted(scale)
    rng = q.bit_range()
    lsb, msb = rng if rng is not None else (0, 0)
    return ImplValue(node, scale, q, n.depth, lsb, msb, origin)


def init_state(
    tensor: CsdTensor,
    qints,
    depths,
    *,
    weighted: bool = True,
    budgets=None,
    builder: GraphBuilder | None = None,
    values: list | None = None,
    scales=None,
) -> CseState:
    """Build the CSE state: digit columns, implemented inputs, pair frequencies.

    By default each tensor row becomes a fresh graph input with the given
    qint/depth; `scales` folds a power-of-two (from row normalization) into
    each input's implemented value. Internally (two-stage composition)
    `values` supplies existing (node, scale) pairs instead, and `builder`
    carries the shared node list.
    """
    if tensor.rows != len(qints) or tensor.rows != len(depths):
        raise ValueError("tensor rows, qints, depths must agree")
    if builder is None:
        builder = GraphBuilder()
    impl = []
    if values is None:
        if scales is None:
            scales = [0] * tensor.rows
        for j in range(tensor.rows):
            node = builder.add_input(j, qints[j], depths[j])
            impl.append(_make_value(builder, node, scales[j], j))
    else:
        for j, (node, scale) in enumerate(values):
            impl.append(_make_value(builder, node, scale, j))

    state = CseState(
        cols=[{} for _ in range(tensor.cols)],
        impl=impl,
        rowcols=[set() for _ in range(tensor.rows)],
        freq={},
        weighted=weighted,
        builder=builder,
        budgets=list(budgets) if budgets is not None else None,
        ksum=[0] * tensor.cols,
    )
    by_col = [[] for _ in range(tensor.cols)]
    for (j, i, p), s in tensor.digits.items():
        by_col[i].append((j, p, s))
    for i, digs in enumerate(by_col):
        digs.sort()
        for j, p, s in digs:
            _add_digit(state, i, j, p, s)
    if state.budgets is not None:
        for i, b in enumerate(state.budgets):
            if state.ksum[i] and _clog2_int(state.ksum[i]) > b:
                raise BudgetInfeasible(f"column {i}: minimal depth exceeds budget {b}")
    return state


def _occurrences(state: CseState, key):
    """Disjoint occurrences of key, as (col, [(base_power, base_sign), ...]).

    Within a column, candidate digit pairs are scanned in ascending power and
    greedily taken while their digits are unused (only same-row chains can
    actually collide). Deterministic.
    """
    a, b, sg, sh = key
    out = []
    for col in sorted(state.rowcols[a] & state.rowcols[b]):
        pa_map = state.cols[col].get(a)
        pb_map = state.cols[col].get(b)
        if pa_map is None or pb_map is None:
            continue
        used = set()
        found = []
        for pa in sorted(pa_map):
            sb = pb_map.get(pa + sh)
            if sb is None or pa_map[pa] * sb != sg:
                continue
            da, db = (a, pa), (b, pa + sh)
            if da in used or db in used or da == db:
                continue
            used.add(da)
            used.add(db)
            found.append((pa, pa_map[pa]))
        if found:
            out.append((col, found))
    return out


def _admissible(state: CseState, key, budgets) -> bool:
    if budgets is None:
        return True
    a, b, _, _ = key
    da, db = state.impl[a].depth, state.impl[b].depth
    d_new = max(da, db) + 1
    delta = (1 << d_new) - (1 << da) - (1 << db)
    if delta == 0:
        return True
    for col, occs in _occurrences(state, key):
        if state.ksum[col] + delta * len(occs) > (1 << budgets[col]):
            return False
    return True


def select_subexpr(state: CseState, budgets=None):
    """Most frequent admissible key with count >= 2, or None when exhausted.

    Priority: highest weighted count, then highest raw count, then smallest
    key. Uses a lazy heap: stale entries are dropped on pop; every count
    change re-pushes, so the live maximum is always present.
    """
    if budgets is None:
        budgets = state.budgets
    heap = state.heap
    while heap:
        nwc, ncnt, a, b, srank, sh = heap[0]
        key = SubexprKey(a, b, 1 if srank == 0 else -1, sh)
        count = state.freq.get(key, 0)
        if count < 2 or -ncnt != count or -nwc != count * _weight(state, key):
            heapq.heappop(heap)  # stale
            continue
        if not _admissible(state, key, budgets):
            # Kraft sums only grow and occurrence shrinkage re-pushes, so a
            # rejected entry can be dropped for good.
            heapq.heappop(heap)
            continue
        return key
    return None


def implement_subexpr(state: CseState, key) -> int:
    """Implement one subexpression; returns the new value's row index.

    Appends one adder node and one implemented value, then rewrites every
    disjoint occurrence: the two digits are zeroed and one +-1 digit of the
    new row appears at the occurrence's base power. Pair frequencies are
    updated differentially. The recovery identity (every output column still
    evaluates to the same exact value) is preserved by construction.
    """
    if key not in state.freq:
        raise KeyError(f"subexpression {key} not present")
    a, b, sg, sh = key
    va, vb = state.impl[a], state.impl[b]
    node = state.builder.add(va.node, vb.node, sg, (vb.scale + sh) - va.scale)
    new_row = len(state.impl)
    state.impl.append(_make_value(state.builder, node, va.scale, key))
    state.rowcols.append(set())

    for col, occs in _occurrences(state, key):
        for pa, sa in occs:
            _remove_digit(state, col, a, pa)
            _remove_digit(state, col, b, pa + sh)
        for pa, sa in occs:
            _add_digit(state, col, new_row, pa, sa)
    return new_row


@dataclass(frozen=True)
class SolveStats:
    adders: int
    depth: int
    cost: int
    runtime_ms: float | None = None


@dataclass(frozen=True)
class Solution:
    graph: AdderGraph
    stats: SolveStats


def _reduce_columns(state: CseState, budgets=None):
    """Combine residual digits of every column into balanced adder trees.

    Terms are merged two at a time, always the two of smallest depth (ties:
    smaller width, then smaller term index), which achieves the Kraft bound
    ceil(log2(sum 2**depth)). Returns one (node, shift, sign) term per column,
    node None meaning constant zero.
    """
    if budgets is None:
        budgets = state.budgets
    builder = state.builder
    results = []
    for col, colmap in enumerate(state.cols):
        digs = []
        for row in sorted(colmap):
            for p in sorted(colmap[row]):
                digs.append((row, p, colmap[row][p]))
        # term: (depth, width, index, node, exp, sign)
        terms = []
        for idx, (row, p, s) in enumerate(digs):
            v = state.impl[row]
            w = bitwidth_spec(v.qint).width
            terms.append((v.depth, w, idx, v.node, v.scale + p, s))
        next_idx = len(terms)
        while len(terms) > 1:
            terms.sort()
            t1, t2 = terms[0], terms[1]
            terms = terms[2:]
            d1, w1, _, n1, e1, s1 = t1
            d2, w2, _, n2, e2, s2 = t2
            if s1 < 0 and s2 > 0:  # keep a positive operand first when mixed
                n1, e1, s1, n2, e2, s2 = n2, e2, s2, n1, e1, s1
            sign = 1 if s1 == s2 else -1
            out_sign = s1
            node = builder.add(n1, n2, sign, e2 - e1)
            nn = builder.nodes[node]
            terms.append(
                (nn.depth, bitwidth_spec(nn.qint).width, next_idx, node, e1, out_sign)
            )
            next_idx += 1
        if not terms:
            results.append((None, 0, 1))
            continue
        _, _, _, node, exp, sign = terms[0]
        depth = builder.nodes[node].depth
        if budgets is not None and depth > budgets[col]:
            raise BudgetInfeasible(
                f"column {col}: reduced depth {depth} exceeds budget {budgets[col]}"
            )
        results.append((node, exp, sign))
    return results


def reduce_outputs(state: CseState, dc: int = -1, budgets=None) -> AdderGraph:
    """Finish the state into an adder graph (outputs in column order).

    Depth enforcement comes from `budgets` (default: the budgets the state
    was initialized with, which already include dc); the reduction itself is
    depth-greedy and achieves each column's Kraft bound regardless.
    """
    terms = _reduce_columns(state, budgets)
    outputs = tuple(OutputRef(n, e, s) for n, e, s in terms)
    return AdderGraph(tuple(state.builder.nodes), outputs)


def _default_qints(n: int):
    return [qint_from_fixed(BitWidthSpec(1, 8, 8))] * n


def _column_budgets(tensor: CsdTensor, depths, dc: int):
    """Kraft minimal depth + dc per column (0 for empty columns)."""
    sums = [0] * tensor.cols
    for (j, i, _), _s in tensor.digits.items():
        sums[i] += 1 << depths[j]
    return [(_clog2_int(s) + dc if s else 0) for s in sums]


def _stage2_terms(
    matrix,
    qints,
    depths,
    *,
    weighted: bool,
    dc: int = -1,
    budgets=None,
    builder: GraphBuilder | None = None,
    values: list | None = None,
    prescales=None,
):
    """Normalize, CSE, and reduce one matrix; returns per-column terms + state.

    Row normalization shifts fold into the implemented values' scales; column
    shifts fold into the returned terms.
    """
    norm = normalize(matrix)
    tensor = matrix_to_tensor(norm.normalized)
    if budgets is None and dc >= 0:
        budgets = _column_budgets(tensor, depths, dc)
    if values is None:
        if prescales is None:
            prescales = [0] * tensor.rows
        scales = [r + rr for r, rr in zip(prescales, norm.row_shifts)]
        state = init_state(
            tensor, qints, depths, weighted=weighted, budgets=budgets,
            builder=builder, scales=scales,
        )
    else:
        vals = [(n, e + r) for (n, e), r in zip(values, norm.row_shifts)]
        state = init_state(
            tensor, qints, depths, weighted=weighted, budgets=budgets,
            builder=builder, values=vals,
        )
    while True:
        key = select_subexpr(state)
        if key is None:
            break
        implement_subexpr(state, key)
    terms = _reduce_columns(state)
    terms = [
        (n, e + c, s) for (n, e, s), c in zip(terms, norm.col_shifts)
    ]
    return terms, state


def _graph_of(builder: GraphBuilder, terms) -> AdderGraph:
    outputs = tuple(OutputRef(n, e, s) for n, e, s in terms)
    return AdderGraph(tuple(builder.nodes), outputs)


def _finish(graph: AdderGraph, t0: float) -> Solution:
    runtime_ms = (time.perf_counter() - t0) * 1e3
    gs = graph_stats(graph)
    return Solution(graph, SolveStats(gs.adders, gs.depth, gs.cost, runtime_ms))


def solve_stage2(matrix, qints=None, depths=None, dc: int = -1, *, weighted: bool = True) -> Solution:
    """CSE-only optimization of one matrix (no column decomposition)."""
    t0 = time.perf_counter()
    d_in = len(matrix)
    qints = list(qints) if qints is not None else _default_qints(d_in)
    depths = list(depths) if depths is not None else [0] * d_in
    builder = GraphBuilder()
    terms, state = _stage2_terms(
        matrix, qints, depths, weighted=weighted, dc=dc, builder=builder
    )
    return _finish(_graph_of(state.builder, terms), t0)


def solve(matrix, qints=None, depths=None, dc: int = -1, *, weighted: bool = True) -> Solution:
    """Full two-stage optimization: column decomposition, then CSE on both factors.

    The delay budget is global: per-output budgets are computed from the
    original matrix digits, the M1 pass gets per-edge budgets tight enough for
    the composition, and the M2 pass consumes the M1 outputs' exact intervals
    and depths.

    The decomposed route is kept only when it is not worse than single-stage
    CSE under the exact cost model (single-stage is also the fallback when
    the decomposition cannot meet the delay budgets), so enabling the
    decomposition stage never increases the solution cost.
    """
    t0 = time.perf_counter()
    d_in = len(matrix)
    qints = list(qints) if qints is not None else _default_qints(d_in)
    depths = list(depths) if depths is not None else [0] * d_in

    norm = normalize(matrix)
    mhat = norm.normalized
    res = decompose(mhat, dc)

    budgets = None
    if dc >= 0:
        tensor = matrix_to_tensor(mhat)
        budgets = _column_budgets(tensor, depths, dc)

    candidates = []
    if not is_trivial(res) and res.n_edges > 0:
        try:
            candidates.append(
                _solve_decomposed(norm, res, qints, depths, budgets, weighted)
            )
        except BudgetInfeasible:
            pass
    builder = GraphBuilder()
    terms, state = _stage2_terms(
        mhat, qints, depths, weighted=weighted,
        budgets=budgets, builder=builder, prescales=norm.row_shifts,
    )
    terms = [(n, e + c, s) for (n, e, s), c in zip(terms, norm.col_shifts)]
    candidates.append(_graph_of(state.builder, terms))

    best = candidates[0]
    best_key = None
    for g in candidates:
        gs = graph_stats(g)
        key = (gs.cost, gs.adders)
        if best_key is None or key < best_key:
            best, best_key = g, key
    return _finish(best, t0)


def _solve_decomposed(norm, res, qints, depths, budgets, weighted) -> AdderGraph:
    builder = GraphBuilder()
    d_out = len(norm.col_shifts)
    m1 = [list(row) for row in res.m1]
    m2 = [list(row) for row in res.m2]
    k = res.n_edges

    edge_budgets = None
    if budgets is not None:
        n_terms = [sum(1 for e in range(k) if m2[e][i]) for i in range(d_out)]
        edge_budgets = [None] * k
        for e in range(k):
            allowed = [
                budgets[i] - _clog2_int(n_terms[i])
                for i in range(d_out)
                if m2[e][i]
            ]
            edge_budgets[e] = min(allowed)

    terms1, _ = _stage2_terms(
        m1, qints, depths, weighted=weighted,
        budgets=edge_budgets, builder=builder, prescales=norm.row_shifts,
    )
    # fold any negated intermediate into its m2 row, so stage-two inputs are
    # plain (node, scale) values
    values = []
    val_qints = []
    val_depths = []
    for e, (node, exp, sign) in enumerate(terms1):
        if node is None:
            raise AssertionError("decomposition produced an empty edge column")
        if sign < 0:
            m2[e] = [-v for v in m2[e]]
        values.append((node, exp))
        nd = builder.nodes[node]
        val_qints.append(nd.qint.shifted(exp))
        val_depths.append(nd.depth)

    terms2, state = _stage2_terms(
        m2, val_qints, val_depths, weighted=weighted,
        budgets=budgets, builder=builder, values=values,
    )
    terms2 = [(n, e + c, s) for (n, e, s), c in zip(terms2, norm.col_shifts)]
    return _graph_of(state.builder, terms2)
