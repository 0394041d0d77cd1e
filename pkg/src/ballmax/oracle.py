"""Brute-force ground truth for cross-checking the solver.

Nothing here calls into the solver or the level-set code: the sampling
oracle only uses the sphere primitives from :mod:`ballmax.geometry`, and the
corner oracle re-enumerates binary vectors from scratch.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import ScaleGuardError, ValidationError
from .geometry import (
    affinely_independent,
    farthest_on_intersection,
    nearest_on_intersection,
    sample_sphere,
    sphere_intersection,
    sphere_vertex_candidates,
)

MIN_BUDGET = 10_000
CLUSTER_RADIUS = 1e-4
KEEP_TOL = 1e-6
TIE_BAND = 1e-6
MAX_CORNER_DIM = 20


@dataclass
class OracleResult:
    best: float
    argmax: list
    clusters: int
    budget: int
    merge_radius: float = CLUSTER_RADIUS
    kept: int = 0
    notes: list = field(default_factory=list)


def _cluster(points, radius):
    reps = []
    for p in points:
        if all(np.linalg.norm(p - q) > radius for q in reps):
            reps.append(p)
    return reps


def _local_polish(x, own, centers, r, c0, band):
    """Move a sampled point onto the nearby sphere intersections.

    Tries every subset of nearly active spheres that contains the sphere
    the point was drawn from.  For a full subset the nearby vertices are
    candidates; otherwise the nearest and the farthest (from ``c0``) points
    of the intersection are, when they stay within ``band`` of ``x``.
    """
    n = centers.shape[1]
    res = np.abs(np.linalg.norm(centers - x, axis=1) - r)
    near = [k for k in np.flatnonzero(res <= band) if k != own]
    best, best_d = x, np.linalg.norm(x - c0)
    for size in range(0, min(len(near), n - 1) + 1):
        for combo in itertools.combinations(near, size):
            sub = [own, *combo]
            c = centers[sub]
            if not affinely_independent(c):
                continue
            if len(sub) == n:
                cands = sphere_vertex_candidates(c, r)
            else:
                s = sphere_intersection(c, r)
                if s.empty:
                    continue
                cands = [nearest_on_intersection(s, x), farthest_on_intersection(s, c0)]
            for y in cands:
                if np.linalg.norm(y - x) > 4 * band:
                    continue
                if np.max(np.sum((centers - y) ** 2, axis=1)) - r * r > 1e-10 * max(1.0, r * r):
                    continue
                d = np.linalg.norm(y - c0)
                if d > best_d + 1e-13:
                    best, best_d = y, d
    return best, best_d


def boundary_sample_max(inst, budget=MIN_BUDGET, seed=0) -> OracleResult:
    """Sample every sphere, keep points of ``Q``, polish and cluster the maxima.

    Parameters
    ----------
    inst : Instance
        Desk-scale instance with ``n`` in {2, 3}.
    budget : int
        Total number of sphere samples, split evenly across spheres.
    seed : int
        Seed for the jittered grids.
    """
    budget = int(budget)
    if budget < MIN_BUDGET:
        raise ValidationError(f"oracle budget {budget} below minimum {MIN_BUDGET}")
    centers = inst.system.centers
    r = inst.system.radius
    c0 = inst.c0
    m, n = centers.shape
    if n not in (2, 3):
        raise ValidationError(f"sampling oracle supports n in {{2, 3}}, got {n}")
    rng = np.random.default_rng(seed)
    per = max(budget // m, 1)
    spacing = r * (2 * np.pi / per if n == 2 else np.sqrt(4 * np.pi / per))
    band = 3.0 * spacing

    pts, owner = [], []
    for k in range(m):
        s = sample_sphere(centers[k], r, per, rng)
        hv = np.max(np.sum((s[:, None, :] - centers[None]) ** 2, axis=-1), axis=1) - r * r
        ok = hv <= KEEP_TOL
        pts.append(s[ok])
        owner.append(np.full(int(ok.sum()), k))
    pts = np.vstack(pts)
    owner = np.concatenate(owner)
    if len(pts) == 0:
        return OracleResult(-np.inf, [], 0, budget, kept=0, notes=["no sample inside Q"])

    dist = np.linalg.norm(pts - c0, axis=1)
    raw_best = dist.max()
    top = np.flatnonzero(dist >= raw_best - 2 * spacing)
    top = top[np.argsort(-dist[top])][:4000]
    polished = [_local_polish(pts[i], owner[i], centers, r, c0, band) for i in top]
    best = max(d for _, d in polished)
    winners = [y for y, d in polished if d >= best - TIE_BAND]
    reps = _cluster(winners, CLUSTER_RADIUS)
    return OracleResult(float(best), reps, len(reps), budget, kept=len(pts))


def cluster_growth(inst, budget=MIN_BUDGET, seed=0, doublings=2):
    """Cluster counts at ``budget, 2 budget, ...``; growth flags an infinite argmax set."""
    return [boundary_sample_max(inst, budget * 2**k, seed).clusters for k in range(doublings + 1)]


def looks_infinite(counts):
    return len(counts) > 1 and all(b > a for a, b in zip(counts, counts[1:]))


def _exact(v):
    v = float(v)
    if v.is_integer():
        return int(v)
    return Fraction(v)


def exhaustive_corner_oracle(geom) -> OracleResult:
    """Maximize ``||x - C0||`` over binary ``x`` with ``S^T x <= T``.

    ``S^T x`` is evaluated in exact rational arithmetic.  When no corner is
    feasible the result has ``best = -inf`` and no argmax.
    """
    s = [_exact(v) for v in geom.instance.s]
    t = _exact(geom.instance.t)
    n = len(s)
    if n > MAX_CORNER_DIM:
        raise ScaleGuardError(f"corner enumeration limited to n <= {MAX_CORNER_DIM}, got {n}")
    c0 = np.asarray(geom.c0, dtype=float)
    best, arg = -np.inf, []
    for bits in itertools.product((0, 1), repeat=n):
        if sum(si for si, b in zip(s, bits) if b) > t:
            continue
        d = float(np.linalg.norm(np.array(bits, dtype=float) - c0))
        if d > best + 1e-12:
            best, arg = d, [bits]
        elif d >= best - 1e-12:
            arg.append(bits)
    corners = [np.array(b, dtype=float) for b in arg]
    return OracleResult(best, corners, len(corners), 2**n, merge_radius=0.0, kept=2**n)
