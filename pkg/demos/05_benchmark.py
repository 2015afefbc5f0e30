"""Random-matrix benchmark: adder counts, depth, and runtime scaling.

Matrices follow the usual benchmarking convention: entries sampled uniformly
from [2**(bw-1)+1, 2**bw - 1], 8-bit signed inputs. Means are reproducible
for a fixed seed; timings obviously are not.
"""

from cmvm import run_suite, scaling_study
from cmvm.bench import suite_to_csv

rows = run_suite(sizes=[2, 4, 8], bw=8, dc=-1, trials=10, seed=0, jobs=1)
print(suite_to_csv(rows), end="")

rows = run_suite(sizes=[8], bw=8, dc=0, trials=10, seed=0, jobs=1)
r = rows[0]
print(f"\nwith a strict delay cap (dc=0): {r.mean_adders:.1f} adders at "
      f"depth {r.mean_step:.1f} (the depth floor costs extra adders)")

res = scaling_study(sizes=(4, 8, 16), bw=8, trials=2, seed=0, fit_min_size=8)
for m, ms in zip(res.sizes, res.mean_cpu_ms):
    print(f"m={m:3d}: {ms:8.1f} ms")
print(f"log-log slope of time vs N=m*m*bw (m >= 8): {res.slope:.2f}")
