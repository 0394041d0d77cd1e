"""Closed-form vector geometry for intersections of equal-radius balls.

Everything here is a direct formula: balls, spheres, rays, orthogonal
complements and sphere intersections.  Higher level modules build on these
primitives and never re-derive them.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError

DEFAULT_TOL = 1e-9
TANGENCY_TOL = 1e-12

# exhaustive general-position checks are only attempted below these sizes
GP_MAX_DIM = 4
GP_MAX_CENTERS = 12


def as_vector(x, name="vector"):
    v = np.asarray(x, dtype=float)
    if v.ndim != 1 or v.size == 0:
        raise ValidationError(f"{name} must be a non-empty 1-d array, got shape {v.shape}")
    if not np.all(np.isfinite(v)):
        raise ValidationError(f"{name} has non-finite entries")
    return v


def as_points(pts, name="points"):
    a = np.asarray(pts, dtype=float)
    if a.ndim == 1:
        a = a[None, :]
    if a.ndim != 2 or a.shape[1] == 0:
        raise ValidationError(f"{name} must be a 2-d array of points, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError(f"{name} has non-finite entries")
    return a


@dataclass(frozen=True)
class BallSystem:
    """Closed balls of one common radius.

    Parameters
    ----------
    centers : (m, n) array_like
        Ball centers, pairwise distinct.
    radius : float
        Common radius, strictly positive.

    Notes
    -----
    The ball polytope is ``Q = {x : ||x - C_k|| <= r for all k}``.  The
    hypothesis ``m > n`` is *not* enforced here (small sanity systems with a
    single ball are useful); see :attr:`m_exceeds_n`.
    """

    centers: np.ndarray
    radius: float

    def __post_init__(self):
        c = as_points(self.centers, "centers").copy()
        c.setflags(write=False)
        r = float(self.radius)
        if not np.isfinite(r) or r <= 0:
            raise ValidationError(f"radius must be positive, got {self.radius}")
        if len(c) > 1:
            d = np.linalg.norm(c[:, None, :] - c[None, :, :], axis=-1)
            d[np.diag_indices(len(c))] = np.inf
            if d.min() == 0.0:
                i, j = np.unravel_index(np.argmin(d), d.shape)
                raise ValidationError(f"centers {i + 1} and {j + 1} coincide")
        object.__setattr__(self, "centers", c)
        object.__setattr__(self, "radius", r)

    @property
    def m(self):
        return self.centers.shape[0]

    @property
    def n(self):
        return self.centers.shape[1]

    @property
    def m_exceeds_n(self):
        return self.m > self.n

    def h(self, x):
        """max_k ||x - C_k||^2 - r^2; nonpositive exactly on Q."""
        x = np.asarray(x, dtype=float)
        return float(np.max(np.sum((self.centers - x) ** 2, axis=-1)) - self.radius**2)

    def sphere_residuals(self, x):
        """Signed ``||x - C_k|| - r`` for every ball."""
        x = np.asarray(x, dtype=float)
        return np.linalg.norm(self.centers - x, axis=-1) - self.radius

    def contains(self, x, tol=DEFAULT_TOL):
        return self.h(x) <= tol

    def general_position(self, tol=1e-9):
        """Whether no convex-hull facet carries more than ``n`` centers.

        Returns ``True``/``False`` when the check was carried out and
        ``None`` ("unverified") above the desk-scale limits.
        """
        if self.n > GP_MAX_DIM or self.m > GP_MAX_CENTERS:
            return None
        return _general_position(self.centers, tol)


def _general_position(points, tol):
    m, n = points.shape
    if n == 1:
        return True
    if m <= n:
        return False
    from scipy.spatial import ConvexHull, QhullError

    try:
        hull = ConvexHull(points)
    except QhullError:
        # lower-dimensional point cloud: every "facet" is degenerate
        return False
    scale = max(1.0, float(np.abs(points).max()))
    for eq in hull.equations:
        on_facet = np.abs(points @ eq[:-1] + eq[-1]) <= tol * scale
        if on_facet.sum() > n:
            return False
    return True


@dataclass(frozen=True)
class Instance:
    """A ball system together with the query point ``C0``."""

    system: BallSystem
    c0: np.ndarray
    tol: float = DEFAULT_TOL
    label: str | None = field(default=None, compare=False)

    def __post_init__(self):
        c0 = as_vector(self.c0, "c0").copy()
        if c0.size != self.system.n:
            raise ValidationError(
                f"c0 has dimension {c0.size}, system has dimension {self.system.n}"
            )
        c0.setflags(write=False)
        object.__setattr__(self, "c0", c0)

    @classmethod
    def from_arrays(cls, centers, radius, c0, **kw):
        return cls(BallSystem(centers, radius), c0, **kw)

    @property
    def n(self):
        return self.system.n

    @property
    def m(self):
        return self.system.m


def _check_dim(inst, x):
    x = np.asarray(x, dtype=float)
    if x.shape != (inst.n,):
        raise ValidationError(f"point has shape {x.shape}, expected ({inst.n},)")
    return x


def h_value(inst, x):
    """Return ``max_k ||x - C_k||^2 - r^2``."""
    return inst.system.h(_check_dim(inst, x))


def g_value(inst, x):
    """Return ``||x - C0||^2``."""
    x = _check_dim(inst, x)
    return float(np.sum((x - inst.c0) ** 2))


@dataclass(frozen=True)
class RayInterval:
    """Parameter range ``[t_lo, t_hi]`` along ``origin + t * dir``."""

    t_lo: float = np.nan
    t_hi: float = np.nan
    empty: bool = False

    @classmethod
    def empty_interval(cls):
        return cls(np.nan, np.nan, True)

    def __post_init__(self):
        if not self.empty and not self.t_lo <= self.t_hi:
            raise ValidationError(f"bad interval [{self.t_lo}, {self.t_hi}]")

    def intersect(self, other):
        if self.empty or other.empty:
            return RayInterval.empty_interval()
        lo, hi = max(self.t_lo, other.t_lo), min(self.t_hi, other.t_hi)
        if lo > hi:
            return RayInterval.empty_interval()
        return RayInterval(lo, hi)

    def __contains__(self, t):
        return not self.empty and self.t_lo <= t <= self.t_hi


def ray_ball_interval(origin, direction, center, r):
    """Parameters ``t`` for which ``origin + t*direction`` lies in the ball.

    Solves ``||origin + t d - c||^2 = r^2``.  A tangent line (discriminant
    within ``TANGENCY_TOL``) yields a degenerate interval with one point.
    """
    o, d, c = (np.asarray(v, dtype=float) for v in (origin, direction, center))
    a = float(d @ d)
    if a == 0.0:
        raise ValidationError("ray direction must be nonzero")
    w = o - c
    b = float(d @ w)
    cc = float(w @ w) - r * r
    # discriminant of a t^2 + 2 b t + cc, scaled by 1/a so that it is a
    # squared length along the unit direction
    disc = (b * b - a * cc) / a
    if disc < -TANGENCY_TOL:
        return RayInterval.empty_interval()
    if disc <= TANGENCY_TOL:
        t = -b / a
        return RayInterval(t, t)
    s = np.sqrt(disc * a)
    if b == 0:
        t1, t2 = -s / a, s / a
    else:
        # numerically stable root pair
        q = -(b + np.copysign(s, b))
        t1, t2 = q / a, cc / q
    return RayInterval(min(t1, t2), max(t1, t2))


def axis_clip(origin, direction, system):
    """Parameter range where the line ``origin + t*direction`` lies in ``Q``."""
    out = RayInterval(-np.inf, np.inf)
    for c in system.centers:
        out = out.intersect(ray_ball_interval(origin, direction, c, system.radius))
        if out.empty:
            break
    return out


def orthogonal_complement(vectors, n=None):
    """Orthonormal basis (rows) of the complement of ``span(vectors)``.

    Raises
    ------
    ValidationError
        If the input vectors are linearly dependent.
    """
    vs = np.asarray(vectors, dtype=float)
    if vs.size == 0:
        if n is None:
            raise ValidationError("dimension needed for an empty vector list")
        return np.eye(n)
    vs = np.atleast_2d(vs)
    k, dim = vs.shape
    if n is not None and n != dim:
        raise ValidationError(f"vectors have dimension {dim}, expected {n}")
    if k > dim:
        raise ValidationError("more vectors than dimensions: linearly dependent")
    u, s, vt = np.linalg.svd(vs, full_matrices=True)
    scale = max(s[0], 1.0)
    if s[-1] <= 1e-12 * scale:
        raise ValidationError("input vectors are linearly dependent")
    return vt[k:].copy()


def bisector_difference_coeffs(y, z, c1, c2):
    """Affine coefficients of ``t -> ||p(t)-c1||^2 - ||p(t)-c2||^2``.

    ``p(t) = y + t (z - y)``.  The quadratic terms cancel identically, so
    the difference is ``slope * t + intercept``.
    """
    y, z, c1, c2 = (np.asarray(v, dtype=float) for v in (y, z, c1, c2))
    u = z - y
    slope = 2.0 * float(u @ (c2 - c1))
    intercept = float((y - c1) @ (y - c1) - (y - c2) @ (y - c2))
    return slope, intercept


def affine_circumcenter(points):
    """Point of ``aff(points)`` equidistant to all points.

    Solves the pairwise sphere-difference equations restricted to the affine
    hull.  Raises if the points are affinely dependent.
    """
    p = as_points(points)
    base = p[0]
    if len(p) == 1:
        return base.copy()
    diffs = p[1:] - base
    gram = diffs @ diffs.T
    rhs = 0.5 * np.sum(diffs**2, axis=1)
    try:
        cond = np.linalg.cond(gram)
    except np.linalg.LinAlgError:
        cond = np.inf
    if not np.isfinite(cond) or cond > 1e12:
        raise ValidationError("points are affinely dependent")
    lam = np.linalg.solve(gram, rhs)
    return base + lam @ diffs


@dataclass(frozen=True)
class SphereIntersection:
    """``{center + radius * u : u unit vector in span(basis)}``.

    ``basis`` rows are orthonormal and orthogonal to the affine hull of the
    generating centers.  ``radius == 0`` means a single point; an empty
    intersection is flagged by ``empty``.
    """

    center: np.ndarray
    radius: float
    basis: np.ndarray
    empty: bool = False


def sphere_intersection(centers, r):
    """Common points of the spheres ``||x - C_k|| = r`` (affinely independent ``C_k``)."""
    c = as_points(centers)
    k, n = c.shape
    if k > n:
        raise ValidationError("more than n spheres: use sphere_vertex_candidates on subsets")
    cc = affine_circumcenter(c)
    basis = orthogonal_complement(c[1:] - c[0], n) if k > 1 else np.eye(n)
    rho2 = float(np.sum((c[0] - cc) ** 2))
    disc = r * r - rho2
    if disc < -TANGENCY_TOL:
        return SphereIntersection(cc, np.nan, basis, empty=True)
    rad = 0.0 if disc <= TANGENCY_TOL else float(np.sqrt(disc))
    return SphereIntersection(cc, rad, basis)


def sphere_vertex_candidates(centers, r):
    """Points lying on all ``n`` spheres ``||x - C_k|| = r`` in ``R^n``.

    Returns a list of 0, 1 (tangency) or 2 points.  Raises
    :class:`ValidationError` for affinely dependent centers.
    """
    c = as_points(centers)
    k, n = c.shape
    if k != n:
        raise ValidationError(f"need exactly n={n} centers, got {k}")
    s = sphere_intersection(c, r)
    if s.empty:
        return []
    if s.radius == 0.0:
        return [s.center]
    v = s.basis[0]
    return [s.center + s.radius * v, s.center - s.radius * v]


def farthest_on_intersection(s, point):
    """Farthest point from ``point`` on a sphere intersection.

    When ``point`` projects onto the intersection center every point is
    equally far; an arbitrary representative is returned.
    """
    if s.empty:
        return None
    if s.radius == 0.0:
        return s.center.copy()
    w = s.basis @ (np.asarray(point, dtype=float) - s.center)
    nw = np.linalg.norm(w)
    if nw <= 1e-15:
        u = s.basis[0]
    else:
        u = -(w / nw) @ s.basis
    return s.center + s.radius * u


def nearest_on_intersection(s, point):
    """Closest point to ``point`` on a sphere intersection."""
    if s.empty:
        return None
    if s.radius == 0.0:
        return s.center.copy()
    w = s.basis @ (np.asarray(point, dtype=float) - s.center)
    nw = np.linalg.norm(w)
    u = s.basis[0] if nw <= 1e-15 else (w / nw) @ s.basis
    return s.center + s.radius * u


def sample_sphere(center, r, count, rng):
    """Jittered near-uniform grid on a circle (n=2) or sphere (n=3)."""
    center = np.asarray(center, dtype=float)
    n = center.size
    if n == 2:
        ang = (np.arange(count) + rng.uniform(0, 1, count)) * (2 * np.pi / count)
        dirs = np.column_stack([np.cos(ang), np.sin(ang)])
    elif n == 3:
        # Fibonacci lattice with jitter in both coordinates
        i = np.arange(count) + rng.uniform(0, 1, count)
        z = 1.0 - 2.0 * i / count
        phi = np.pi * (3.0 - np.sqrt(5.0)) * np.arange(count) + rng.uniform(0, 0.5, count)
        rho = np.sqrt(np.clip(1.0 - z * z, 0.0, None))
        dirs = np.column_stack([rho * np.cos(phi), rho * np.sin(phi), z])
    else:
        raise ValidationError(f"sphere sampling supports n in {{2, 3}}, got {n}")
    return center + r * dirs


def affinely_independent(points, tol=1e-12):
    p = as_points(points)
    if len(p) == 1:
        return True
    d = p[1:] - p[0]
    if len(d) > p.shape[1]:
        return False
    s = np.linalg.svd(d, compute_uv=False)
    return bool(s[-1] > tol * max(1.0, s[0]))


def iter_subsets(m, sizes):
    for k in sizes:
        yield from itertools.combinations(range(m), k)
