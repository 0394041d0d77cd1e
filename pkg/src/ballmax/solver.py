"""Farthest point from ``C0`` in an intersection of equal-radius balls.

Three regimes, picked by where ``C0`` sits relative to the centers' hull:

* outside: bisection on the level ``R`` with ball/halfspace feasibility of
  ``Q ∩ P_{R^2}``; the maximizer is unique;
* boundary: closed form.  With ``C0 = sum alpha_k C_sigma_k`` the optimal
  distance is ``sqrt(||C0||^2 - sum alpha_k (||C_sigma_k||^2 - r^2))`` and
  the maximizers lie on the axis of points equidistant to the ``C_sigma_k``;
* interior: exhaustive vertex enumeration (desk scale only, the problem is
  NP-hard in general).
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field

import numpy as np

from . import levelset
from .convex import (
    BOUNDARY,
    INCONCLUSIVE,
    INTERIOR,
    OUTSIDE,
    classify_c0,
    convex_feasible,
    in_convex_hull,
    strictly_inside_hull,
)
from .errors import InconclusiveError, ScaleGuardError, ValidationError
from .geometry import (
    affinely_independent,
    as_points,
    as_vector,
    axis_clip,
    farthest_on_intersection,
    nearest_on_intersection,
    orthogonal_complement,
    sample_sphere,
    sphere_intersection,
    sphere_vertex_candidates,
)

log = logging.getLogger(__name__)

CASE_INTERIOR = "interior"
CASE_BOUNDARY_EQ = "boundary_p_eq_n"
CASE_BOUNDARY_LT = "boundary_p_lt_n"
CASE_EXTERIOR = "exterior"

ONE = "one"
TWO = "two"
INFINITE = "infinite"
FINITE_LIST = "finite_list"

MEMBER_TOL = 1e-8
TIE_TOL = 1e-7
VERTEX_TOL = 1e-7
BISECT_WIDTH = 1e-10
BISECT_CAP = 60
DESK_MAX_DIM = 3
DESK_MAX_CENTERS = 12


@dataclass
class Certificate:
    residuals: np.ndarray
    active: tuple

    @property
    def is_vertex_for(self):
        return len(self.active)


@dataclass
class SolveReport:
    case: str
    rstar: float
    maximizers: list
    multiplicity: str
    certificates: list
    support: tuple = ()
    alpha: np.ndarray | None = None
    rbar: float | None = None
    interior_contact: bool | None = None
    inclusion_verified: bool | None = None
    uniqueness: str | None = None
    notes: list = field(default_factory=list)

    @property
    def maximizer(self):
        return self.maximizers[0]

    def vertex_certified(self, n, tol=VERTEX_TOL):
        """Every maximizer lies on at least ``n`` spheres within ``tol``."""
        return all(int(np.sum(np.abs(c.residuals) <= tol)) >= n for c in self.certificates)


@dataclass(frozen=True)
class FacetAxis:
    """``base + span(directions)``: points equidistant to the support centers."""

    base: np.ndarray
    directions: np.ndarray
    rbar: float


def _certify(inst, points):
    out = []
    for x in points:
        res = inst.system.sphere_residuals(x)
        out.append(Certificate(res, tuple(int(k) for k in np.flatnonzero(np.abs(res) <= VERTEX_TOL))))
    return out


def _dedupe(points, radius=TIE_TOL):
    kept = []
    for p in points:
        if all(np.linalg.norm(p - q) > radius for q in kept):
            kept.append(p)
    return kept


def _require_boundary(cls):
    if cls.case != BOUNDARY:
        raise ValidationError(f"boundary classification required, got {cls.case!r}")


def rbar(inst, cls) -> float:
    """Optimal distance for a boundary ``C0``.

    ``sqrt(||C0||^2 - sum alpha_k (||C_sigma_k||^2 - r^2))``; a radicand
    below ``-1e-9`` means ``Q`` is empty or the decomposition is wrong.
    """
    _require_boundary(cls)
    c = inst.system.centers[list(cls.support)]
    r = inst.system.radius
    rad = float(inst.c0 @ inst.c0 - cls.alpha @ (np.sum(c**2, axis=1) - r * r))
    if rad < -1e-9:
        raise ValidationError(f"negative radicand {rad:.3e}: Q is empty or decomposition invalid")
    return float(np.sqrt(max(rad, 0.0)))


def facet_axis(inst, cls) -> FacetAxis:
    """Affine set of points equidistant to the support centers.

    The base point solves the ``p - 1`` sphere-difference equations pinned
    to the affine hull of the support; the directions span the orthogonal
    complement of ``{C_sigma_p - C_sigma_k}``.
    """
    _require_boundary(cls)
    c = inst.system.centers[list(cls.support)]
    if not affinely_independent(c):
        raise ValidationError("support centers are affinely dependent")
    s = sphere_intersection(c, inst.system.radius)
    return FacetAxis(s.center, s.basis, rbar(inst, cls))


def _polish(inst, w, required=(), near=1e-4):
    """Snap an approximate maximizer onto the sphere intersections around it.

    Candidates come from every subset of nearly active spheres (always
    containing ``required``) of size at most ``n``: the vertices for size
    ``n``, otherwise the farthest and the nearest point of the intersection.
    The best valid candidate (inside ``Q``) by distance to ``C0`` wins;
    ``w`` itself is returned only when no candidate is valid.
    """
    sys = inst.system
    n = sys.n
    res = sys.sphere_residuals(w)
    near_set = sorted(set(np.flatnonzero(np.abs(res) <= near).tolist()) | set(required))
    optional = [k for k in near_set if k not in required]
    best, best_key = w, (-np.inf, 0.0)
    for extra in range(0, n - len(required) + 1):
        if extra > len(optional):
            break
        for combo in itertools.combinations(optional, extra):
            sub = list(required) + list(combo)
            if not sub:
                continue
            c = sys.centers[sub]
            if not affinely_independent(c):
                continue
            if len(sub) == n:
                cands = sphere_vertex_candidates(c, sys.radius)
            else:
                s = sphere_intersection(c, sys.radius)
                cands = [] if s.empty else [farthest_on_intersection(s, inst.c0), nearest_on_intersection(s, w)]
            for x in cands:
                if sys.h(x) > 1e-10 * max(1.0, sys.radius**2):
                    continue
                key = (np.linalg.norm(x - inst.c0), -np.linalg.norm(x - w))
                if key[0] > best_key[0] + 1e-12 or (
                    abs(key[0] - best_key[0]) <= 1e-12 and key[1] > best_key[1]
                ):
                    best, best_key = x, key
    return best


def critical_points(inst, max_dim=DESK_MAX_DIM, max_centers=DESK_MAX_CENTERS):
    """Exhaustive first-order enumeration of the maximization over ``Q``.

    A maximizer of the distance over ``Q`` is a critical point of the
    distance restricted to the intersection of its active spheres: a vertex
    when ``n`` spheres are active, otherwise the farthest point of that
    intersection.  Enumerating every subset of at most ``n`` spheres finds
    the global optimum.  Returns ``(rstar, maximizers)``.
    """
    sys = inst.system
    _guard(sys, max_dim, max_centers)
    cands = []
    for k in range(1, sys.n + 1):
        for sub in itertools.combinations(range(sys.m), k):
            c = sys.centers[list(sub)]
            if not affinely_independent(c):
                continue
            if k == sys.n:
                cands.extend(sphere_vertex_candidates(c, sys.radius))
            else:
                s = sphere_intersection(c, sys.radius)
                if not s.empty:
                    cands.append(farthest_on_intersection(s, inst.c0))
    cands = [x for x in cands if sys.h(x) <= MEMBER_TOL]
    if not cands:
        raise ValidationError("Q is empty")
    d = np.array([np.linalg.norm(x - inst.c0) for x in cands])
    best = d.max()
    return float(best), _dedupe([x for x, di in zip(cands, d) if di >= best - TIE_TOL])


def _guard(sys, max_dim, max_centers):
    if sys.n > max_dim or sys.m > max_centers:
        raise ScaleGuardError(
            f"desk-scale routine limited to n <= {max_dim}, m <= {max_centers}; "
            f"got n={sys.n}, m={sys.m}"
        )


def enumerate_vertices(system, max_dim=DESK_MAX_DIM, max_centers=DESK_MAX_CENTERS):
    """All points of ``Q`` lying on at least ``n`` spheres (deduplicated)."""
    _guard(system, max_dim, max_centers)
    out = []
    for sub in itertools.combinations(range(system.m), system.n):
        c = system.centers[list(sub)]
        if not affinely_independent(c):
            continue
        for x in sphere_vertex_candidates(c, system.radius):
            if system.h(x) <= MEMBER_TOL:
                out.append(x)
    return _dedupe(out)


def sample_boundary(system, per_sphere, seed=0):
    """Points of ``∂Q``: sphere samples that fall inside every other ball."""
    rng = np.random.default_rng(seed)
    pts = []
    for c in system.centers:
        s = sample_sphere(c, system.radius, per_sphere, rng)
        keep = np.max(np.sum((s[:, None, :] - system.centers[None]) ** 2, axis=-1), axis=1)
        pts.append(s[keep <= system.radius**2 + 1e-12])
    return np.vstack(pts) if pts else np.zeros((0, system.n))


def verify_inclusion(system, margin=1e-6, per_sphere=None, seed=0):
    """Desk-scale check of ``Q ⊆ int(conv(centers))``.

    Tests every vertex of ``Q`` and dense boundary samples for strict hull
    membership.  Returns ``None`` when the system is too large to check.
    """
    if system.n not in (2, 3) or system.m > DESK_MAX_CENTERS:
        return None
    verts = enumerate_vertices(system)
    per = per_sphere or (720 if system.n == 2 else 4000)
    pts = sample_boundary(system, per, seed)
    if verts:
        pts = np.vstack([pts, np.array(verts)])
    if len(pts) == 0:
        return None
    return bool(np.all(strictly_inside_hull(system.centers, pts, margin)))


def _feasible_at(inst, level, balls=None):
    poly = levelset.build(inst, level)
    balls = balls or [(c, inst.system.radius) for c in inst.system.centers]
    return convex_feasible(balls, poly.halfspaces())


def solve_exterior(inst, tol=BISECT_WIDTH, cap=BISECT_CAP) -> SolveReport:
    """Largest ``R`` with ``Q ∩ P_{R^2}`` nonempty, by bisection.

    The witness at the last feasible level is snapped onto its active
    spheres.  A feasibility check that is inconclusive with a best residual
    below ``1e-7 r^2`` means the level equals the optimum up to round-off,
    so the bisection stops there; a larger residual raises.
    """
    sys, c0 = inst.system, inst.c0
    balls = [(c, sys.radius) for c in sys.centers]
    out = convex_feasible(balls)
    if not out.feasible:
        raise ValidationError("Q is empty")
    lo, hi = 0.0, float(np.max(np.linalg.norm(sys.centers - c0, axis=1)) + sys.radius)
    witness = out.witness
    for _ in range(cap):
        if hi - lo <= tol:
            break
        mid = 0.5 * (lo + hi)
        f = _feasible_at(inst, mid, balls)
        if f.status == INCONCLUSIVE:
            if f.upper <= 1e-7 * sys.radius**2:
                break
            raise InconclusiveError(f"feasibility of Q ∩ P at level {mid:.12g} inconclusive")
        if f.feasible:
            lo, witness = mid, f.witness
        else:
            hi = mid
    x = _polish(inst, witness)
    rstar = float(np.linalg.norm(x - c0))
    notes = []
    if rstar < lo - 1e-6:
        notes.append(f"polished distance {rstar:.12g} below bisection level {lo:.12g}")
    return SolveReport(CASE_EXTERIOR, rstar, [x], ONE, _certify(inst, [x]), notes=notes)


def solve_interior(inst, max_dim=DESK_MAX_DIM, max_centers=DESK_MAX_CENTERS) -> SolveReport:
    """Farthest vertex of ``Q``; every tie within ``TIE_TOL`` is reported."""
    verts = enumerate_vertices(inst.system, max_dim, max_centers)
    if not verts:
        raise ValidationError("Q has no vertices (empty or degenerate)")
    d = np.array([np.linalg.norm(v - inst.c0) for v in verts])
    best = float(d.max())
    top = [v for v, di in zip(verts, d) if di >= best - TIE_TOL]
    mult = ONE if len(top) == 1 else FINITE_LIST
    return SolveReport(CASE_INTERIOR, best, top, mult, _certify(inst, top))


def _fallback(inst, report_kw, reason):
    rstar, xs = critical_points(inst)
    notes = report_kw.pop("notes", []) + [reason + "; resolved by exhaustive critical-point enumeration"]
    mult = ONE if len(xs) == 1 else FINITE_LIST
    return SolveReport(rstar=rstar, maximizers=xs, multiplicity=mult, certificates=_certify(inst, xs), notes=notes, **report_kw)


def _slice_representative(inst, axis, w, support, rays=64):
    """Point of ``Q`` on every support sphere, reached from ``w`` inside the slice.

    ``w`` lies in ``Q`` and on the equidistant flat, but possibly in the
    interior of ``Q`` where the distance to ``C0`` is below ``rbar``.  Rays
    inside the flat are clipped against ``Q``; an exit point on the support
    spheres attains ``rbar``.  The radial direction from the flat's center
    is tried first, then a fixed spread of directions.
    """
    sys = inst.system
    basis = axis.directions
    # drop round-off that left the flat
    w = axis.base + basis.T @ (basis @ (w - axis.base))
    radial = basis @ (w - axis.base)
    dirs = [radial] if np.linalg.norm(radial) > 1e-12 else []
    rng = np.random.default_rng(0)
    dirs += list(rng.standard_normal((rays, basis.shape[0])))
    best, best_d = None, -np.inf
    for coef in dirs:
        v = coef @ basis
        v /= np.linalg.norm(v)
        iv = axis_clip(w, v, sys)
        if iv.empty or not np.isfinite(iv.t_hi):
            continue
        x = _polish(inst, w + iv.t_hi * v, required=support)
        d = np.linalg.norm(x - inst.c0)
        if sys.h(x) <= MEMBER_TOL and d > best_d:
            best, best_d = x, d
        if abs(d - axis.rbar) <= 1e-10:
            break
    return w if best is None else best


def solve_boundary(inst, cls=None, inclusion=None) -> SolveReport:
    """Closed-form solve for ``C0`` on the boundary of the centers' hull."""
    cls = cls or classify_c0(inst)
    _require_boundary(cls)
    sys, c0, n = inst.system, inst.c0, inst.n
    axis = facet_axis(inst, cls)
    rb = axis.rbar
    sup = tuple(cls.support)
    p = len(sup)
    poly = levelset.build(inst, rb)
    parts = levelset.split(poly, sup)
    contact = bool(levelset.meet_interior_Q(parts, inst, rb))
    kw = dict(
        case=CASE_BOUNDARY_EQ if p == n else CASE_BOUNDARY_LT,
        support=sup,
        alpha=cls.alpha,
        rbar=rb,
        interior_contact=contact,
        inclusion_verified=inclusion,
    )
    if p == n:
        v = axis.directions[0]
        iv = axis_clip(axis.base, v, sys)
        if iv.empty:
            return _fallback(inst, kw, "axis misses Q")
        ends = _dedupe([axis.base + iv.t_lo * v, axis.base + iv.t_hi * v])
        d = np.array([np.linalg.norm(x - c0) for x in ends])
        best = float(d.max())
        top = [x for x, di in zip(ends, d) if di >= best - TIE_TOL]
        if abs(best - rb) > 1e-8:
            return _fallback(inst, kw, f"axis endpoint distance {best:.12g} differs from rbar {rb:.12g}")
        mult = ONE if len(top) == 1 else TWO
        uniq = None
        if inclusion:
            uniq = "proved"
            if mult != ONE:
                kw.setdefault("notes", []).append("two maximizers despite verified inclusion")
        elif mult == ONE:
            uniq = "observed"
        return SolveReport(rstar=best, maximizers=top, multiplicity=mult, certificates=_certify(inst, top), uniqueness=uniq, **kw)

    out = convex_feasible([(c, sys.radius) for c in sys.centers], poly.halfspaces())
    if not out.feasible:
        return _fallback(inst, kw, "Q ∩ P at rbar empty")
    x = _slice_representative(inst, axis, out.witness, sup)
    rstar = float(np.linalg.norm(x - c0))
    if abs(rstar - rb) > 1e-8:
        return _fallback(inst, kw, f"slice representative distance {rstar:.12g} differs from rbar {rb:.12g}")
    mult = INFINITE if contact else ONE
    return SolveReport(rstar=rstar, maximizers=[x], multiplicity=mult, certificates=_certify(inst, [x]), **kw)


def solve(inst, verify=True) -> SolveReport:
    """Classify ``C0`` and dispatch to the matching regime."""
    cls = classify_c0(inst)
    if cls.case == OUTSIDE:
        return solve_exterior(inst)
    if cls.case == INTERIOR:
        rep = solve_interior(inst)
        rep.uniqueness = None
        return rep
    inclusion = verify_inclusion(inst.system) if verify else None
    return solve_boundary(inst, cls, inclusion)


def unique_farthest_certificate(xstar, centers, r, tol=1e-8) -> bool:
    """Check the hypotheses that make ``xstar`` the unique farthest point.

    ``centers`` holds ``C_1..C_{n+1}``.  True when ``xstar`` lies outside
    ``conv(C_1..C_{n+1})`` and ``C_{n+1} - xstar`` is a strictly positive
    combination of ``C_k - xstar``, ``k <= n``; then ``xstar`` is the unique
    maximizer of the distance to ``C_{n+1}`` over the first ``n`` balls.
    """
    x = as_vector(xstar, "xstar")
    c = as_points(centers)
    n = x.size
    if c.shape != (n + 1, n):
        raise ValidationError(f"need {n + 1} centers in R^{n}, got shape {c.shape}")
    res = np.linalg.norm(c - x, axis=1) - r
    if np.any(np.abs(res) > tol):
        raise ValidationError(f"xstar is not on every sphere (max residual {np.abs(res).max():.3e})")
    if in_convex_hull(c, x):
        return False
    mat = (c[:n] - x).T
    try:
        alpha = np.linalg.solve(mat, c[n] - x)
    except np.linalg.LinAlgError:
        return False
    return bool(np.all(alpha > 0))


def multiplicity_ok(report):
    """Whether the reported multiplicity is one the theory allows for the case."""
    allowed = {
        CASE_EXTERIOR: {ONE},
        CASE_BOUNDARY_EQ: {ONE, TWO},
        CASE_BOUNDARY_LT: {ONE, INFINITE},
        CASE_INTERIOR: {ONE, FINITE_LIST},
    }
    return report.multiplicity in allowed[report.case]
