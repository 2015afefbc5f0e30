"""Column-graph decomposition: factor M into M1 @ M2 over a spanning tree.

Columns that are close in signed-digit distance are chained: each tree edge
costs only the digits of the difference vector, and M2 (entries in -1/0/+1)
rebuilds the original columns from partial sums.
"""

import numpy as np

from cmvm import column_distance, decompose, is_trivial

M = [
    [0, 1, 3],
    [1, 2, 4],
    [2, 3, 5],
]
cols = list(zip(*M))

print("columns:", cols)
print("pairwise signed-digit distances:")
print("  to zero:", [column_distance(c, (0, 0, 0)) for c in cols])
print("  v1-v2:", column_distance(cols[0], cols[1]))
print("  v2-v3:", column_distance(cols[1], cols[2]))

res = decompose(M, dc=-1)
print("\ntree parents (-1 is the zero root):", res.parent)
print("edge weights:", res.edge_weight)
print("tree depths:", res.tree_depth)
print("M1 =", [list(r) for r in res.m1])
print("M2 =", [list(r) for r in res.m2])
print("M1 @ M2 == M:", (np.array(res.m1) @ np.array(res.m2) == np.array(M)).all())
print("trivial decomposition:", is_trivial(res))

# A negated duplicate column costs nothing: it rides through M2 alone.
D = [[1, -1], [2, -2]]
res = decompose(D, dc=-1)
print("\nduplicate example", D, "-> M1 =", [list(r) for r in res.m1],
      ", M2 =", [list(r) for r in res.m2])

# With a depth cap of 2**0 = 1 every column must hang off the root.
res = decompose(M, dc=0)
print("\nwith dc=0 the tree is a star:", res.parent, "->",
      "trivial" if is_trivial(res) else "nontrivial")
