"""Stage 1: factor M into M1 * M2 over a depth-capped approximate MST.

Each column of M becomes a graph vertex; the root vertex is the zero vector.
Prim's algorithm grows a spanning tree where the distance between two columns
is the cheaper CSD digit count of their sum or difference. Every tree edge
contributes one column to M1 (the signed difference vector); M2 records, per
original column, the +-1 contribution of each edge on its root path.
"""

from dataclasses import dataclass

from .csd import nnz_csd


@dataclass(frozen=True)
class ColumnGraphResult:
    """Exact factorization m1 @ m2 == M with m2 entries in {-1, 0, +1}.

    parent[i] is the tree parent of column i (-1 for the root); sigma[i] the
    attachment sign (child = edge + sigma * parent); tree_depth[i] counts the
    nonzero edges on the root path (zero-weight duplicate attachments are free);
    edge_weight[i] the CSD digit count of column i's own edge; edge_col[i] the
    m1 column realizing that edge, or None for a zero edge.
    """

    m1: tuple[tuple[int, ...], ...]
    m2: tuple[tuple[int, ...], ...]
    parent: tuple[int, ...]
    tree_depth: tuple[int, ...]
    sigma: tuple[int, ...]
    edge_weight: tuple[int, ...]
    edge_col: tuple

    @property
    def n_edges(self) -> int:
        return len(self.m1[0]) if self.m1 else 0


def column_distance(u, v) -> int:
    """min CSD digit count of u + v and u - v."""
    if len(u) != len(v):
        raise ValueError("length mismatch")
    return min(
        nnz_csd([a + b for a, b in zip(u, v)]),
        nnz_csd([a - b for a, b in zip(u, v)]),
    )


def _attach_choice(child, parent):
    """(distance, sigma, edge_vector) for attaching child below parent."""
    diff = [c - p for c, p in zip(child, parent)]
    summ = [c + p for c, p in zip(child, parent)]
    n_diff, n_sum = nnz_csd(diff), nnz_csd(summ)
    if n_diff <= n_sum:
        return n_diff, 1, diff
    return n_sum, -1, summ


def decompose(matrix, dc: int = -1) -> ColumnGraphResult:
    """Greedy Prim growth subject to a max tree depth of 2**dc (dc = -1: none).

    Tie-breaking is fixed (smallest distance, then column index, then parent
    index) so results are deterministic. Vertices already at the depth cap can
    still take zero-distance children: an exact duplicate or negated duplicate
    costs no adder layer and contributes no m1 column.
    """
    d_in = len(matrix)
    d_out = len(matrix[0]) if d_in else 0
    cols = [[matrix[j][i] for j in range(d_in)] for i in range(d_out)]
    cap = None if dc < 0 else 1 << dc

    zero = [0] * d_in
    depth = [0] * d_out
    parent = [-1] * d_out
    sigma = [1] * d_out
    weight = [0] * d_out
    edge_vec = [None] * d_out
    # best[c] = (dist, parent_index, sigma, edge_vector); parent -1 is the root
    best = {}
    for c in range(d_out):
        d, s, w = _attach_choice(cols[c], zero)
        best[c] = (d, -1, s, w)

    order = []
    for _ in range(d_out):
        c = min(best, key=lambda i: (best[i][0], i, best[i][1]))
        d, p, s, w = best.pop(c)
        parent[c] = p
        sigma[c] = s
        weight[c] = d
        edge_vec[c] = None if d == 0 else w
        depth[c] = (0 if p < 0 else depth[p]) + (0 if d == 0 else 1)
        order.append(c)
        at_cap = cap is not None and depth[c] >= cap
        for other, (od, op, _osig, _ow) in best.items():
            nd, ns, nw = _attach_choice(cols[other], cols[c])
            if at_cap and nd != 0:
                continue
            if (nd, c) < (od, op):
                best[other] = (nd, c, ns, nw)

    edge_col = [None] * d_out
    m1_cols = []
    for c in order:
        if edge_vec[c] is not None:
            edge_col[c] = len(m1_cols)
            m1_cols.append(edge_vec[c])

    k = len(m1_cols)
    m2 = [[0] * d_out for _ in range(k)]
    for c in range(d_out):
        coeff = 1
        cur = c
        while cur >= 0:
            if edge_col[cur] is not None:
                m2[edge_col[cur]][c] = coeff
            coeff *= sigma[cur]
            cur = parent[cur]

    m1 = tuple(tuple(m1_cols[e][j] for e in range(k)) for j in range(d_in))
    return ColumnGraphResult(
        m1=m1,
        m2=tuple(tuple(row) for row in m2),
        parent=tuple(parent),
        tree_depth=tuple(depth),
        sigma=tuple(sigma),
        edge_weight=tuple(weight),
        edge_col=tuple(edge_col),
    )


def is_trivial(result: ColumnGraphResult) -> bool:
    """True when m2 is a permuted identity: every column hangs off the root
    with sign +1 through its own nonzero edge, so the M2 CSE pass is pure
    output wiring."""
    return all(
        p == -1 and s == 1 and e is not None
        for p, s, e in zip(result.parent, result.sigma, result.edge_col)
    )
