"""The level-set polytopes ``P_{R^2} = {x : h(x) - g(x) <= -R^2}``.

Expanding the squares, ``||x-C_k||^2 - r^2 - ||x-C0||^2 <= -R^2`` becomes
one halfspace per center,

    2 (C0 - C_k)^T x  <=  ||C0||^2 - ||C_k||^2 + r^2 - R^2,

so ``P`` shrinks as ``R`` grows (only the offsets move).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .convex import INCONCLUSIVE, convex_feasible
from .errors import InconclusiveError, ScaleGuardError, ValidationError

INTERIOR_SHRINK = 1e-7


@dataclass(frozen=True)
class LevelSetPolytope:
    instance: object
    level: float
    normals: np.ndarray
    offsets: np.ndarray

    def halfspaces(self, indices=None):
        idx = range(len(self.offsets)) if indices is None else indices
        return [(self.normals[k], float(self.offsets[k])) for k in idx]

    def residuals(self, x):
        return self.normals @ np.asarray(x, dtype=float) - self.offsets

    def contains(self, x, tol=1e-9):
        return bool(np.all(self.residuals(x) <= tol))


@dataclass(frozen=True)
class LevelSetSplit:
    """Halfspaces of the support centers (``p0``) and of all others (``pminus``)."""

    p0: list
    pminus: list
    p0_indices: tuple
    pminus_indices: tuple


def build(inst, level) -> LevelSetPolytope:
    """Halfspace description of ``P_{R^2}`` at ``R = level``.

    Raises
    ------
    ValidationError
        If ``C0`` coincides with a center (that halfspace would be void).
    """
    c, c0, r = inst.system.centers, inst.c0, inst.system.radius
    level = float(level)
    if level < 0:
        raise ValidationError(f"level must be nonnegative, got {level}")
    normals = 2.0 * (c0 - c)
    hit = np.flatnonzero(np.all(normals == 0.0, axis=1))
    if hit.size:
        raise ValidationError(f"C0 coincides with center {hit[0] + 1}")
    offsets = c0 @ c0 - np.sum(c**2, axis=1) + r * r - level * level
    return LevelSetPolytope(inst, level, normals, offsets)


def split(poly, support) -> LevelSetSplit:
    m = len(poly.offsets)
    sup = tuple(int(k) for k in support)
    if any(k < 0 or k >= m for k in sup) or len(set(sup)) != len(sup):
        raise ValidationError(f"bad support indices {sup} for {m} halfspaces")
    rest = tuple(k for k in range(m) if k not in sup)
    return LevelSetSplit(poly.halfspaces(sup), poly.halfspaces(rest), sup, rest)


def meet_interior_Q(parts, inst, level, shrink=INTERIOR_SHRINK):
    """Whether ``P^0 ∩ P^- ∩ int(Q)`` is nonempty at the given level.

    The open interior is approximated by shrinking every ball radius by
    ``shrink``.
    """
    r = inst.system.radius - shrink
    if r <= 0:
        return False
    balls = [(c, r) for c in inst.system.centers]
    out = convex_feasible(balls, list(parts.p0) + list(parts.pminus))
    if out.status == INCONCLUSIVE:
        raise InconclusiveError(f"interior-contact test inconclusive at level {level}")
    return out.feasible


def contained_in_Q(poly, max_dim=3, tol=1e-9):
    """Desk-scale test of ``P_{R^2} ⊆ Q`` by vertex enumeration of ``P``.

    ``Q`` is bounded, so an unbounded ``P`` is never contained; an empty
    ``P`` always is.  Otherwise ``P`` is a polytope and it suffices that
    every vertex (a feasible intersection of ``n`` facet hyperplanes) lies
    in ``Q``.  The general test is a distance maximization over a polytope,
    hence the size guard.
    """
    from .lp import OPTIMAL, UNBOUNDED, LpProblem, lp_solve

    sys = poly.instance.system
    n = sys.n
    if n > max_dim:
        raise ScaleGuardError(f"containment check limited to n <= {max_dim}, got n={n}")
    a, b = poly.normals, poly.offsets
    for j in range(n):
        for sgn in (1.0, -1.0):
            obj = np.zeros(n)
            obj[j] = -sgn
            out = lp_solve(LpProblem(obj, a, b))
            if out.status == UNBOUNDED:
                return False
            if out.status != OPTIMAL:
                return True  # empty
    for rows in itertools.combinations(range(len(b)), n):
        sub = a[list(rows)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        v = np.linalg.solve(sub, b[list(rows)])
        if np.all(a @ v - b <= tol) and sys.h(v) > tol:
            return False
    return True
