"""How many farthest points are there when C0 is on the hull boundary?

On a full facet (p = n) there are one or two; on a lower-dimensional face
(p < n) there is one, or a whole arc.  The sampling oracle sees the arc as a
cluster count that keeps growing as the budget doubles.
"""
import numpy as np

from ballmax import oracle, solver
from ballmax.generators import random_instance
from ballmax.geometry import Instance

# %% a flat triangle: the edge's bisector leaves Q at two symmetric points
flat = Instance.from_arrays([[0.0, 0.0], [2.0, 0.0], [1.0, 0.3]], 1.6, [1.0, 0.0])
rep = solver.solve(flat)
print("flat triangle:", rep.multiplicity, [np.round(x, 7) for x in rep.maximizers])
print("  oracle clusters:", oracle.boundary_sample_max(flat, 40_000).clusters)

# %% a tetrahedron with C0 at an edge midpoint: a circle arc of maximizers
q4 = Instance.from_arrays(
    [[0, 0, 0], [2, 0, 0], [1, 1.7320508, 0], [1, 0.5773503, 1.4]], 1.2, [1.0, 0.0, 0.0]
)
rep = solver.solve(q4)
print("\nedge midpoint in 3-d:", rep.case, rep.multiplicity, "R* =", rep.rstar)
counts = oracle.cluster_growth(q4, 30_000)
print("  oracle clusters at 30k, 60k, 120k samples:", counts, "-> infinite?", oracle.looks_infinite(counts))

# %% the closed form is only an upper bound; it is attained when the
# optimal level set reaches into the interior of Q
rng = np.random.default_rng(0)
hit = miss = 0
for _ in range(40):
    inst = random_instance(rng, 2, 5, "boundary")
    rep = solver.solve(inst, verify=False)
    attained = abs(rep.rstar - rep.rbar) <= 1e-8
    hit += attained
    miss += not attained
    if not attained and miss == 1:
        print(f"\nexample with R* < R̄: R* = {rep.rstar:.6f}, R̄ = {rep.rbar:.6f}; notes: {rep.notes}")
print(f"R̄ attained in {hit}/40 random boundary instances")
