"""Where C0 sits decides how hard the farthest point is to find.

Three equal balls of radius 1.2 around an equilateral triangle.  We move C0
from outside the triangle, onto an edge, and inside, and compare each solve
with the brute-force sampling oracle.
"""
import numpy as np

from ballmax import oracle, solver
from ballmax.convex import classify_c0
from ballmax.geometry import Instance

centers = np.array([[0.0, 0.0], [2.0, 0.0], [1.0, np.sqrt(3.0)]])
r = 1.2

# %% one C0 per regime
for c0 in ([1.0, -1.0], [1.0, 0.0], [1.0, 0.3], [1.0, 0.5773503]):
    inst = Instance.from_arrays(centers, r, c0)
    cls = classify_c0(inst)
    rep = solver.solve(inst)
    o = oracle.boundary_sample_max(inst, 10**5, seed=0)
    print(f"C0={c0!s:28} {cls.case:9} -> {rep.case:16} R*={rep.rstar:.10f} "
          f"oracle={o.best:.10f} maximizers={len(rep.maximizers)}")

# %% on the edge the answer is a formula: sqrt(|C0|^2 - sum alpha_k (|C_k|^2 - r^2))
inst = Instance.from_arrays(centers, r, [1.0, 0.0])
cls = classify_c0(inst)
print("\nedge point: support", cls.sigma, "weights", cls.alpha, "-> R̄ =", solver.rbar(inst, cls))
print("sqrt(0.44) =", np.sqrt(0.44))

# %% outside, sliding C0 away along the optimal ray adds distance one-for-one
c0 = np.array([1.0, -1.0])
base = solver.solve(Instance.from_arrays(centers, r, c0))
step = c0 - base.maximizer
for t in (1.0, 4.0):
    rep = solver.solve(Instance.from_arrays(centers, r, c0 + t * step))
    print(f"t={t}: R* = {rep.rstar:.10f}, expected {base.rstar + t * np.linalg.norm(step):.10f}")
