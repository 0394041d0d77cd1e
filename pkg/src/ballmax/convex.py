"""Convex subroutines: the piecewise-affine program behind ``h - g``,
convex-hull classification of the query point, minimum enclosing balls and
ball/halfspace feasibility.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize, nnls

from .errors import InconclusiveError, ValidationError
from .geometry import as_points, as_vector
from .lp import INFEASIBLE, OPTIMAL, UNBOUNDED, LpProblem, lp_solve

log = logging.getLogger(__name__)

BOUNDARY_GAP_TOL = 1e-8
FEASIBILITY_TOL = 1e-9

INTERIOR = "interior"
BOUNDARY = "boundary"
OUTSIDE = "outside"


class HgMinimum(NamedTuple):
    value: float
    point: np.ndarray | None
    status: str


def minimize_h_minus_g(inst) -> HgMinimum:
    """Minimize ``h(x) - g(x)`` as an LP in ``(x, t)``.

    ``h - g = max_k 2 (C0 - C_k)^T x + ||C_k||^2 - ||C0||^2 - r^2`` is
    piecewise affine; the LP is unbounded exactly when ``C0`` lies outside
    the convex hull of the centers.
    """
    c, c0, r = inst.system.centers, inst.c0, inst.system.radius
    m, n = c.shape
    a = np.hstack([2.0 * (c0 - c), -np.ones((m, 1))])
    b = -(np.sum(c**2, axis=1) - c0 @ c0 - r * r)
    obj = np.zeros(n + 1)
    obj[-1] = 1.0
    out = lp_solve(LpProblem(obj, a, b))
    if out.status == UNBOUNDED:
        return HgMinimum(-np.inf, None, UNBOUNDED)
    if out.status != OPTIMAL:
        raise InconclusiveError(f"h - g minimization returned {out.status}")
    return HgMinimum(out.value, out.x[:n], OPTIMAL)


@dataclass
class HullClassification:
    """Position of ``C0`` relative to ``conv(C_1..C_m)``.

    ``support`` holds 0-based center indices and ``alpha`` the matching
    positive convex weights (boundary case only).  ``gap`` is the optimum of
    the supporting-hyperplane program: negative outside, zero on the
    boundary, positive inside.
    """

    case: str
    support: tuple = ()
    alpha: np.ndarray = field(default_factory=lambda: np.zeros(0))
    gap: float = np.nan
    normal: np.ndarray | None = None

    @property
    def p(self):
        return len(self.support)

    @property
    def sigma(self):
        """1-based support indices."""
        return tuple(i + 1 for i in self.support)


def support_gap(centers, y):
    """``min over ||a||_inf = 1`` of ``max_k a^T (C_k - y)``.

    The sup-norm sphere is covered by ``2n`` LPs that pin one coordinate of
    ``a`` to ``+-1``.  Returns the optimal value and a minimizing normal.
    """
    c = as_points(centers)
    m, n = c.shape
    d = c - y
    a_ub = np.hstack([d, -np.ones((m, 1))])
    b_ub = np.zeros(m)
    obj = np.zeros(n + 1)
    obj[-1] = 1.0
    best, best_a = np.inf, None
    for j in range(n):
        for s in (1.0, -1.0):
            lo = np.concatenate([-np.ones(n), [-np.inf]])
            hi = np.concatenate([np.ones(n), [np.inf]])
            lo[j] = hi[j] = s
            out = lp_solve(LpProblem(obj, a_ub, b_ub, lower=lo, upper=hi))
            if out.status != OPTIMAL:
                raise InconclusiveError(f"supporting-hyperplane LP returned {out.status}")
            if out.value < best:
                best, best_a = out.value, out.x[:n]
    return float(best), best_a


def convex_weights(points, y):
    """Convex weights ``lam >= 0, sum lam = 1, sum lam_k p_k = y`` or ``None``."""
    p = as_points(points)
    m, n = p.shape
    a_eq = np.vstack([p.T, np.ones((1, m))])
    b_eq = np.concatenate([np.asarray(y, float), [1.0]])
    out = lp_solve(LpProblem(np.zeros(m), a_eq=a_eq, b_eq=b_eq, lower=np.zeros(m)))
    if out.status == INFEASIBLE:
        return None
    if out.status != OPTIMAL:
        raise InconclusiveError(f"convex-combination LP returned {out.status}")
    return np.clip(out.x, 0.0, None)


def in_convex_hull(points, y, tol=1e-9):
    lam = convex_weights(points, y)
    if lam is None:
        return False
    p = as_points(points)
    return bool(np.linalg.norm(lam @ p - y) <= tol * max(1.0, np.abs(p).max()))


def _refine_alpha(c, c0, support):
    """Least-squares weights on ``support``; drop nonpositive ones until stable."""
    sup = sorted(support)
    while sup:
        a = np.vstack([c[sup].T, np.ones((1, len(sup)))])
        rhs = np.concatenate([c0, [1.0]])
        alpha, *_ = np.linalg.lstsq(a, rhs, rcond=None)
        if np.all(alpha > 1e-12):
            return tuple(sup), alpha
        sup = [k for k, w in zip(sup, alpha) if w > 1e-12]
    raise InconclusiveError("could not recover a positive facet decomposition")


def classify_c0(inst, gap_tol=BOUNDARY_GAP_TOL) -> HullClassification:
    """Classify ``C0`` as interior, boundary or outside the centers' hull.

    On the boundary the positive decomposition ``C0 = sum alpha_k C_sigma_k``
    is recovered from a basic solution of the convex-combination LP over the
    centers touching the optimal supporting hyperplane, then refined by
    least squares.

    Raises
    ------
    ValidationError
        If the decomposition needs more than ``n`` centers, which violates
        the general-position hypothesis.
    """
    c, c0 = inst.system.centers, inst.c0
    m, n = c.shape
    scale = max(1.0, float(np.abs(c - c0).max()))
    gap, normal = support_gap(c, c0)
    tol = gap_tol * scale
    if gap < -tol:
        return HullClassification(OUTSIDE, gap=gap, normal=normal)
    if gap > tol:
        return HullClassification(INTERIOR, gap=gap)

    heights = (c - c0) @ normal
    active = np.flatnonzero(heights >= -1e3 * tol)
    lam = convex_weights(c[active], c0)
    if lam is None:
        lam_all = convex_weights(c, c0)
        if lam_all is None:
            if gap <= 0:
                # within the gap band but outside by sign: a hair outside the hull
                return HullClassification(OUTSIDE, gap=gap, normal=normal)
            raise InconclusiveError("boundary point not representable as a convex combination")
        support = np.flatnonzero(lam_all > 1e-10)
    else:
        support = active[lam > 1e-10]
    support = [int(k) for k in support]
    sup, alpha = _refine_alpha(c, c0, support)
    resid = np.linalg.norm(alpha @ c[list(sup)] - c0)
    if resid > 1e-8 * scale:
        raise InconclusiveError(f"facet decomposition residual {resid:.3e} too large")
    if len(sup) > n:
        raise ValidationError(
            f"C0 needs {len(sup)} > n={n} centers: general-position hypothesis violated"
        )
    return HullClassification(BOUNDARY, sup, alpha, gap=gap, normal=normal)


# -- minimum enclosing ball ------------------------------------------------


def _circumball(pts):
    if len(pts) == 0:
        return None, -1.0
    p = np.asarray(pts)
    base = p[0]
    if len(p) == 1:
        return base.copy(), 0.0
    d = p[1:] - base
    gram = d @ d.T
    rhs = 0.5 * np.sum(d**2, axis=1)
    lam = np.linalg.lstsq(gram, rhs, rcond=None)[0]
    center = base + lam @ d
    return center, float(np.max(np.sum((p - center) ** 2, axis=1)))


def meb(centers):
    """Minimum enclosing ball by Welzl's move-to-front recursion.

    Returns ``(center, radius)``.
    """
    pts = [row for row in as_points(centers)]
    n = len(pts[0])

    def inside(ball, q):
        ctr, r2 = ball
        if ctr is None:
            return False
        return float(np.sum((q - ctr) ** 2)) <= r2 * (1 + 1e-12) + 1e-18

    def mtf(end, boundary):
        ball = _circumball(boundary)
        if len(boundary) == n + 1:
            return ball
        i = 0
        while i < end:
            q = pts[i]
            if not inside(ball, q):
                ball = mtf(i, boundary + [q])
                pts.insert(0, pts.pop(i))
            i += 1
        return ball

    ctr, r2 = mtf(len(pts), [])
    return ctr, float(np.sqrt(max(r2, 0.0)))


# -- ball / halfspace feasibility -----------------------------------------

FEASIBLE = "feasible"
INCONCLUSIVE = "inconclusive"


@dataclass
class Feasibility:
    """Outcome of :func:`convex_feasible`.

    ``upper`` is the best max-residual found (attained at ``witness``);
    ``lower`` a certified lower bound on the minimum max-residual.
    """

    status: str
    witness: np.ndarray | None
    upper: float
    lower: float
    iterations: int = 0

    @property
    def feasible(self):
        return self.status == FEASIBLE

    def __iter__(self):
        yield self.feasible
        yield self.witness if self.feasible else None


class _Residuals:
    def __init__(self, balls, halfspaces):
        bc = [as_vector(c, "ball center") for c, _ in balls]
        ha = [as_vector(a, "normal") for a, _ in halfspaces]
        dims = {v.size for v in bc + ha}
        if len(dims) != 1:
            raise ValidationError(f"inconsistent constraint dimensions {sorted(dims)}")
        self.n = dims.pop()
        self.bc = np.array(bc).reshape(len(bc), self.n)
        self.br2 = np.array([float(r) ** 2 for _, r in balls])
        self.ha = np.array(ha).reshape(len(ha), self.n)
        self.hb = np.array([float(b) for _, b in halfspaces])

    def values(self, x):
        return np.concatenate(
            [np.sum((x - self.bc) ** 2, axis=1) - self.br2, self.ha @ x - self.hb]
        )

    def grads(self, x):
        return np.vstack([2.0 * (x - self.bc), self.ha])

    def dual_bound(self, lam):
        """``min_x sum lam_i g_i(x)`` for ``lam >= 0, sum lam = 1`` (weak duality)."""
        kb = len(self.bc)
        lb, lh = lam[:kb], lam[kb:]
        big = lb.sum()
        lin = lh @ self.ha if len(lh) else np.zeros(self.n)
        const = lb @ (np.sum(self.bc**2, axis=1) - self.br2) - lh @ self.hb
        pull = lb @ self.bc if kb else np.zeros(self.n)
        if big <= 1e-14:
            return const if np.linalg.norm(lin) <= 1e-12 else -np.inf
        x = (2.0 * pull - lin) / (2.0 * big)
        return float(big * (x @ x) - 2.0 * pull @ x + lin @ x + const)

    def certify(self, x):
        """Dual lower bound from a KKT multiplier estimate at ``x``."""
        vals = self.values(x)
        top = vals.max()
        band = 1e-6 * max(1.0, abs(top))
        best = -np.inf
        for widen in (1.0, 1e2, 1e4):
            act = np.flatnonzero(vals >= top - widen * band)
            g = self.grads(x)[act]
            a = np.vstack([g.T, 10.0 * np.ones((1, len(act)))])
            rhs = np.concatenate([np.zeros(self.n), [10.0]])
            w, _ = nnls(a, rhs)
            if w.sum() <= 0:
                continue
            lam = np.zeros(len(vals))
            lam[act] = w / w.sum()
            best = max(best, self.dual_bound(lam))
        return best


def _halfspaces_only(res, tol):
    n = res.n
    k = len(res.hb)
    a = np.hstack([res.ha, -np.ones((k, 1))])
    obj = np.zeros(n + 1)
    obj[-1] = 1.0
    lo = np.concatenate([np.full(n, -np.inf), [-1.0]])
    out = lp_solve(LpProblem(obj, a, res.hb, lower=lo))
    if out.status == INFEASIBLE:
        return Feasibility(INFEASIBLE, None, np.inf, np.inf)
    x = out.x[:n]
    val = float(res.values(x).max())
    if val <= tol:
        return Feasibility(FEASIBLE, x, val, -np.inf)
    # t is free above -1, so the LP optimum is the exact minimum max-residual
    return Feasibility(INFEASIBLE, None, val, out.value)


def _slsqp(res, x0):
    n = res.n

    def cons(z):
        return z[-1] - res.values(z[:n])

    def cons_jac(z):
        g = res.grads(z[:n])
        return np.hstack([-g, np.ones((g.shape[0], 1))])

    obj_grad = np.zeros(n + 1)
    obj_grad[-1] = 1.0
    z0 = np.concatenate([x0, [res.values(x0).max() + 1.0]])
    out = minimize(
        lambda z: z[-1],
        z0,
        jac=lambda z: obj_grad,
        constraints=[{"type": "ineq", "fun": cons, "jac": cons_jac}],
        method="SLSQP",
        options={"ftol": 1e-15, "maxiter": 500},
    )
    return out.x[:n], out.nit


def _polyak(res, x0, tol, cap):
    x = x0.copy()
    best_x, best_f = x.copy(), np.inf
    for it in range(cap):
        vals = res.values(x)
        i = int(np.argmax(vals))
        f = vals[i]
        if f < best_f:
            best_x, best_f = x.copy(), f
        if f <= tol:
            return best_x, it
        g = res.grads(x)[i]
        gg = g @ g
        if gg == 0.0:
            break
        x = x - (f / gg) * g
    return best_x, cap


def convex_feasible(balls, halfspaces=(), tol=FEASIBILITY_TOL, method="slsqp", max_iter=100_000):
    """Decide whether closed balls and halfspaces have a common point.

    Minimizes the largest constraint residual (``||x-c||^2 - r^2`` for balls,
    ``a^T x - b`` for halfspaces).  The problem is feasible when that minimum
    is at most ``tol``.  Infeasibility is only reported with a dual lower
    bound above ``tol``; otherwise the status is ``inconclusive``.

    Parameters
    ----------
    balls : sequence of (center, radius)
    halfspaces : sequence of (normal, offset), meaning ``normal . x <= offset``
    method : {"slsqp", "polyak"}
        Epigraph SLSQP (default) or the Polyak subgradient step with
        residual target zero.
    """
    res = _Residuals(list(balls), list(halfspaces))
    if len(res.bc) == 0:
        return _halfspaces_only(res, tol)
    x0 = res.bc.mean(axis=0)
    upper, witness, iters = np.inf, None, 0
    starts = [x0]
    for attempt in range(3):
        start = starts[min(attempt, len(starts) - 1)]
        if method == "slsqp":
            x, it = _slsqp(res, start)
        elif method == "polyak":
            x, it = _polyak(res, start, tol, max_iter)
        else:
            raise ValidationError(f"unknown method {method!r}")
        iters += it
        f = float(res.values(x).max())
        if f < upper:
            upper, witness = f, x
        if upper <= tol:
            return Feasibility(FEASIBLE, witness, upper, -np.inf, iters)
        lower = res.certify(witness)
        if lower > tol:
            return Feasibility(INFEASIBLE, None, upper, lower, iters)
        # restart from the best point, nudged toward the ball centers
        starts.append(0.5 * (witness + x0))
    log.debug("convex_feasible inconclusive: upper=%g lower=%g", upper, lower)
    return Feasibility(INCONCLUSIVE, None, upper, lower, iters)


def strictly_inside_hull(centers, points, margin=1e-6):
    """Boolean mask: each point lies in ``conv(centers)`` with distance margin.

    Uses the facet equations of the hull (unit outward normals), so the
    margin is a Euclidean distance to the nearest facet hyperplane.
    """
    from scipy.spatial import ConvexHull, QhullError

    c = as_points(centers)
    pts = as_points(points)
    if c.shape[1] == 1:
        lo, hi = c.min(), c.max()
        return (pts[:, 0] > lo + margin) & (pts[:, 0] < hi - margin)
    try:
        hull = ConvexHull(c)
    except QhullError:
        return np.zeros(len(pts), dtype=bool)
    eq = hull.equations
    return np.all(pts @ eq[:, :-1].T + eq[:, -1] < -margin, axis=1)
