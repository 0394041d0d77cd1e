"""Subset Sum hidden in a farthest-point problem.

S = (1, 2), T = 2 has the single solution x = (0, 1).  The cube becomes four
balls, the constraint S^T x <= T a fifth, and the solution is the corner
farthest from C0 at exactly distance R0.
"""
import numpy as np

from ballmax import ssp

g = ssp.build_geometry(ssp.SspInstance(np.array([1.0, 2.0]), 2, 0.8, 1.5))
print("C0 =", g.c0, " C_s =", g.cs, " R0 =", g.r0)

# %% every feasible corner and its distance
for x in [(0, 0), (1, 0), (0, 1), (1, 1)]:
    solved, d = ssp.corner_check(g, x)
    print(x, "solves" if solved else "      ", f"dist {d:.7f}", "in Q_r" if ssp.membership_Qr(g, x) else "cut off")
print("decide_small:", ssp.decide_small(g))

# %% an unsolvable instance falls short of R0
s = np.array([3.0, 5.0])
beta, r = ssp.safe_parameters(s, 4)
d = ssp.decide_small(ssp.build_geometry(ssp.SspInstance(s, 4, beta, r), verify_inclusion=False))
print(f"\nS=(3,5), T=4: best corner {d.max:.5f} vs R0 {d.r0:.5f} (gap {d.gap:.4f})")

# %% randomized recovery: perturb C0, rebuild balls from level-set facets,
# and look for (0, 1) among the farthest points from the original centers
hits = sum(ssp.recovery_experiment(g, [0, 1], 1e-2, seed).recovered for seed in range(10))
print(f"\nrecovered the solution in {hits}/10 trials")

# %% one shared level for all perturbed points moves the answers only slightly
for eps in (1e-2, 1e-3, 1e-4):
    sw = ssp.uniform_rho_solve(g, [0, 1], eps, g.r0, seed=0)
    print(f"eps={eps:g}: max delta = {sw.max_delta:.2e}")
