"""Subset Sum as farthest-point search over a ball polytope.

The unit cube is replaced by ``2n`` balls whose caps on the circumsphere
``B(C, sqrt(n)/2)`` reproduce the facets ``x_k >= 0`` and ``x_k <= 1``, and a
slab ball reproduces ``S^T x <= T``.  Every binary ``x`` with ``S^T x = T``
then sits at the same distance ``R0`` from ``C0 = C - beta/2 S``, and every
other feasible corner is strictly closer.

The randomized "trimming" experiments perturb ``C0`` into ``n + 1`` points,
rebuild ball polytopes from their level-set facets and look for the known
solution among the farthest points from the original centers.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import solver
from .convex import in_convex_hull, strictly_inside_hull
from .errors import InconclusiveError, ScaleGuardError, ValidationError
from .geometry import BallSystem, Instance, as_vector

log = logging.getLogger(__name__)

GEOM_TOL = 1e-9
MAX_DECIDE_DIM = 20
MAX_CORNER_CHECK_DIM = 12
REJECTION_CAP = 10_000
RECOVERY_TOL = 1e-6


def _exact(v):
    # every float is a dyadic rational, so this is lossless
    return Fraction(float(v))


@dataclass(frozen=True)
class SspInstance:
    """Subset Sum data ``(S, T)`` plus the embedding parameters ``beta`` and ``r``."""

    s: np.ndarray
    t: float
    beta: float
    r: float

    def __post_init__(self):
        s = as_vector(self.s, "S")
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "t", float(self.t))
        if not np.any(s != 0):
            raise ValidationError("S must be nonzero")
        if not self.beta > 0:
            raise ValidationError(f"beta must be positive, got {self.beta}")
        if not self.r > 0:
            raise ValidationError(f"r must be positive, got {self.r}")
        lo, hi = float(s[s < 0].sum()), float(s[s > 0].sum())
        if not lo <= self.t <= hi:
            raise ValidationError(
                f"hyperplane S^T x = {self.t} misses the unit cube (S^T x ranges over [{lo}, {hi}])"
            )

    @property
    def n(self):
        return self.s.size

    @property
    def integral(self):
        return bool(np.all(self.s == np.round(self.s)) and self.t == round(self.t))

    def dot_exact(self, x):
        """``S^T x`` as an exact rational (an ``int`` for integral data)."""
        if self.integral:
            return sum(int(si) * int(xi) for si, xi in zip(self.s, x))
        return sum(_exact(si) * int(xi) for si, xi in zip(self.s, x))

    def t_exact(self):
        return int(self.t) if self.integral else _exact(self.t)


@dataclass(frozen=True)
class SspGeometry:
    instance: SspInstance
    c: np.ndarray
    d: float
    centers_plus: np.ndarray
    centers_minus: np.ndarray
    ps: np.ndarray
    ds: float
    cs: np.ndarray
    c0: np.ndarray
    r0: float
    dlow: float
    inclusion_verified: bool | None

    @property
    def n(self):
        return self.instance.n

    @property
    def r(self):
        return self.instance.r

    @property
    def centers(self):
        """``C_{1+}..C_{n+}, C_{1-}..C_{n-}, C_s`` stacked in that order."""
        return np.vstack([self.centers_plus, self.centers_minus, self.cs[None]])

    @property
    def labels(self):
        n = self.n
        return [f"{k + 1}+" for k in range(n)] + [f"{k + 1}-" for k in range(n)] + ["s"]

    @property
    def system(self):
        return BallSystem(self.centers, self.r)


def build_geometry(inst: SspInstance, verify_inclusion=True) -> SspGeometry:
    """Place the cube balls, the slab ball and ``C0``; compute ``R0``.

    Raises
    ------
    ValidationError
        Naming the violated inequality when ``r`` or ``beta`` is too small.
    """
    n, s, t, r, beta = inst.n, inst.s, inst.t, inst.r, inst.beta
    half = np.sqrt(n) / 2
    c = np.full(n, 0.5)
    rad = r * r - (n - 1) / 4
    if rad <= 0:
        raise ValidationError(f"r^2 - (n-1)/4 = {rad:.6g} <= 0: r too small for the cube balls")
    d = float(np.sqrt(rad) - 0.5)
    if d < half - GEOM_TOL:
        raise ValidationError(f"d = {d:.10g} < sqrt(n)/2 = {half:.10g}: r too small")
    eye = np.eye(n)
    plus, minus = c + d * eye, c - d * eye
    ss = float(s @ s)
    ps = c + ((t - s @ c) / ss) * s
    cp2 = float(np.sum((c - ps) ** 2))
    rad_s = r * r - n / 4 + cp2
    if rad_s <= 0:
        raise ValidationError(f"r^2 - n/4 + ||C - P_s||^2 = {rad_s:.6g} <= 0: r too small for the slab ball")
    ds = float(np.sqrt(rad_s))
    shat = s / np.sqrt(ss)
    cs = ps - ds * shat
    c0 = c - 0.5 * beta * s
    if np.linalg.norm(c0 - c) < half - GEOM_TOL:
        raise ValidationError(
            f"||C0 - C|| = {np.linalg.norm(c0 - c):.10g} < sqrt(n)/2 = {half:.10g}: beta too small"
        )
    # positions along C + tau * shat
    tau0, taus = float((c0 - c) @ shat), float((cs - c) @ shat)
    if not taus < tau0 < 0:
        raise ValidationError(
            f"C0 not strictly between C and C_s on the S line (tau_s={taus:.6g}, tau_0={tau0:.6g})"
        )
    r0 = float(np.sqrt(np.sum((c0 - ps) ** 2) + n / 4 - cp2))
    geom = SspGeometry(inst, c, d, plus, minus, ps, ds, cs, c0, r0, float(half), None)
    if verify_inclusion:
        geom = _with_inclusion(geom)
    return geom


def _with_inclusion(geom):
    ok = solver.verify_inclusion(geom.system) if geom.n in (2, 3) else None
    return SspGeometry(**{**geom.__dict__, "inclusion_verified": ok})


def geometry_residuals(geom):
    """Residuals of the construction identities, all expected near zero."""
    n, r = geom.n, geom.r
    return {
        "cube_radius": (geom.d + 0.5) ** 2 + (n - 1) / 4 - r * r,
        "slab_radius": geom.ds**2 + n / 4 - float(np.sum((geom.c - geom.ps) ** 2)) - r * r,
    }


def _check_binary(x, n):
    x = np.asarray(x)
    if x.shape != (n,) or not np.all((x == 0) | (x == 1)):
        raise ValidationError(f"expected a 0/1 vector of length {n}, got {x.tolist()}")
    return x.astype(int)


def corner_check(geom, x):
    """``(S^T x == T, ||x - C0||)`` for a binary ``x``, with the sum compared exactly."""
    inst = geom.instance
    x = _check_binary(x, inst.n)
    solved = inst.dot_exact(x) == inst.t_exact()
    dist = float(np.linalg.norm(x - geom.c0))
    if solved and abs(dist - geom.r0) > 1e-9:
        raise InconclusiveError(f"solution corner at distance {dist!r}, expected R0 = {geom.r0!r}")
    return solved, dist


def membership_Qr(geom, x, tol=GEOM_TOL):
    x = as_vector(x, "x")
    return bool(np.all(np.linalg.norm(geom.centers - x, axis=1) <= geom.r + tol))


@dataclass
class Decision:
    max: float
    corners: list
    r0: float

    @property
    def gap(self):
        return self.r0 - self.max

    @property
    def equals_r0(self):
        return abs(self.gap) <= 1e-9


def _corner_sums(inst, bits):
    """Exact ``S^T x`` over all rows of ``bits``; int64 when it cannot overflow."""
    if inst.integral and np.abs(inst.s).sum() < 2**62:
        return bits @ inst.s.astype(np.int64), int(inst.t)
    fr = [_exact(v) for v in inst.s]
    den = 1
    for f in fr + [_exact(inst.t)]:
        den = den * f.denominator // np.gcd(den, f.denominator)
    si = [int(f * den) for f in fr]
    ti = int(_exact(inst.t) * den)
    if sum(abs(v) for v in si) < 2**62:
        return bits @ np.array(si, dtype=np.int64), ti
    return np.array([sum(a for a, b in zip(si, row) if b) for row in bits], dtype=object), ti


def decide_small(geom) -> Decision:
    """Exhaustive farthest feasible corner: ``max ||x - C0||`` over ``S^T x <= T``.

    A solvable instance gives exactly ``R0``; an unsolvable one stays below.
    """
    n = geom.n
    if n > MAX_DECIDE_DIM:
        raise ScaleGuardError(f"exhaustive corner search limited to n <= {MAX_DECIDE_DIM}, got {n}")
    bits = ((np.arange(2**n, dtype=np.int64)[:, None] >> np.arange(n)) & 1).astype(np.int64)
    sums, t = _corner_sums(geom.instance, bits)
    ok = np.array([v <= t for v in sums]) if sums.dtype == object else sums <= t
    c0 = geom.c0
    # ||x - c0||^2 = ||c0||^2 + sum_j x_j (1 - 2 c0_j) for binary x
    d2 = float(c0 @ c0) + bits[ok] @ (1.0 - 2.0 * c0)
    d = np.sqrt(np.maximum(d2, 0.0))
    best = float(d.max())
    top = bits[ok][d >= best - 1e-12]
    return Decision(best, [tuple(int(v) for v in row) for row in top], geom.r0)


def sample_circumsphere(geom, count, rng):
    u = rng.standard_normal((count, geom.n))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    return geom.c + 0.5 * np.sqrt(geom.n) * u


def cap_residuals(geom, count=1000, seed=0):
    """Largest deviation from the exact cap identities on circumsphere samples.

    On ``∂B(C, sqrt(n)/2)``: ``||w - C_{k+}||^2 - r^2 = -2 d w_k``,
    ``||w - C_{k-}||^2 - r^2 = -2 d (1 - w_k)`` and
    ``||w - C_s||^2 - r^2 = 2 (d_s - tau) (S^T w - T) / ||S||`` where
    ``tau = (T - S^T C) / ||S||``.  Returns one maximum per facet label, plus
    the count of sign disagreements between ball and halfspace membership.
    """
    rng = np.random.default_rng(seed)
    w = sample_circumsphere(geom, count, rng)
    r2 = geom.r**2
    s, t = geom.instance.s, geom.instance.t
    ns = np.linalg.norm(s)
    tau = (t - s @ geom.c) / ns
    out, mismatches = {}, 0
    for k in range(geom.n):
        for lbl, ctr, rhs, half in (
            (f"{k + 1}+", geom.centers_plus[k], -2 * geom.d * w[:, k], w[:, k]),
            (f"{k + 1}-", geom.centers_minus[k], -2 * geom.d * (1 - w[:, k]), 1 - w[:, k]),
        ):
            lhs = np.sum((w - ctr) ** 2, axis=1) - r2
            out[lbl] = float(np.abs(lhs - rhs).max())
            mismatches += _sign_mismatch(lhs, half)
    lhs = np.sum((w - geom.cs) ** 2, axis=1) - r2
    rhs = 2 * (geom.ds - tau) * (w @ s - t) / ns
    out["s"] = float(np.abs(lhs - rhs).max())
    mismatches += _sign_mismatch(lhs, t - w @ s)
    out["mismatches"] = mismatches
    return out


def _sign_mismatch(ball, half, band=1e-8):
    # inside ball <=> inside halfspace, ignoring points within band of the boundary
    clear = np.abs(half) > band
    return int(np.sum(clear & ((ball <= 0) != (half >= 0))))


@dataclass
class TrimmingSystem:
    points: np.ndarray
    levels: np.ndarray
    centers: np.ndarray  # (n + 1, 2n + 1, n)
    radius: float
    centers_outside_hull: bool
    base_centers: np.ndarray  # the original 2n + 1 centers

    @property
    def system(self):
        return BallSystem(self.centers.reshape(-1, self.centers.shape[-1]), self.radius)

    def contains(self, x, tol=GEOM_TOL):
        x = as_vector(x, "x")
        return bool(np.all(np.linalg.norm(self.centers - x, axis=-1) <= self.radius + tol))

    def cap_residual(self, count=200, seed=0):
        """Max of ``| ||w - C_k||^2 - r^2 |`` over circumsphere points on each facet hyperplane."""
        rng = np.random.default_rng(seed)
        n = self.centers.shape[-1]
        c = np.full(n, 0.5)
        worst = 0.0
        for p, level in enumerate(self.levels):
            normals, offsets = _facets(self.base_centers, self.points[p], self.radius, level)
            for k in range(len(offsets)):
                w = _hyperplane_circle_points(c, np.sqrt(n) / 2, normals[k], offsets[k], count, rng)
                if w is None:
                    continue
                res = np.abs(np.sum((w - self.centers[p, k]) ** 2, axis=1) - self.radius**2)
                worst = max(worst, float(res.max()))
        return worst


def _facets(centers, c0p, r, level):
    normals = 2.0 * (c0p - centers)
    offsets = c0p @ c0p - np.sum(centers**2, axis=1) + r * r - level * level
    return normals, offsets


def _hyperplane_circle_points(c, rad, a, b, count, rng):
    """Points of ``∂B(c, rad) ∩ {a^T x = b}`` (``None`` when they miss)."""
    na = np.linalg.norm(a)
    foot = c - ((a @ c - b) / na**2) * a
    rem = rad**2 - np.sum((foot - c) ** 2)
    if rem <= 0:
        return None
    u = rng.standard_normal((count, c.size))
    u -= np.outer(u @ a / na**2, a)
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    return foot + np.sqrt(rem) * u


def build_trimming(geom, points, levels, radius=None) -> TrimmingSystem:
    """Ball polytopes rebuilt from the level-set facets of each perturbed point.

    For every point ``C_{0,p}`` and each of the ``2n + 1`` halfspaces of its
    level-set polytope at ``levels[p]``, the cube center ``C`` is projected
    onto the facet hyperplane and a ball of radius ``radius`` (default: the
    geometry's ``r``) is placed behind it so that its sphere meets the
    circumsphere exactly along the hyperplane.

    Raises
    ------
    ValidationError
        When ``radius`` is too small for some facet; the facet is named.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    lv = np.asarray(levels, dtype=float).ravel()
    n = geom.n
    if pts.shape[1] != n or len(lv) != len(pts):
        raise ValidationError("points and levels must match in count and dimension")
    r = geom.r if radius is None else float(radius)
    c = geom.c
    base = geom.centers
    labels = geom.labels
    out = np.empty((len(pts), len(base), n))
    for p, (c0p, level) in enumerate(zip(pts, lv)):
        normals, offsets = _facets(base, c0p, geom.r, level)
        for k, (a, b) in enumerate(zip(normals, offsets)):
            na2 = float(a @ a)
            foot = c - ((a @ c - b) / na2) * a
            rad = r * r - n / 4 + float(np.sum((c - foot) ** 2))
            if rad < 0:
                raise ValidationError(
                    f"facet {labels[k]} of point {p + 1}: radicand {rad:.6g} < 0, radius {r} too small"
                )
            out[p, k] = foot - np.sqrt(rad) * a / np.sqrt(na2)
    flat = out.reshape(-1, n)
    try:
        inside = strictly_inside_hull(flat, base, margin=0.0)
        cond = not bool(np.any(inside))
    except Exception:  # degenerate hull (all points equal): nothing is interior
        cond = True
    return TrimmingSystem(pts, lv, out, r, cond, base)


@dataclass
class Trial:
    recovered: bool
    index: int | None
    label: str | None
    points: np.ndarray
    levels: np.ndarray
    maximizers: list
    distances: list
    cases: list
    centers_outside_hull: bool
    on_facets: bool
    attempts: int
    notes: list = field(default_factory=list)


def _sample_points(geom, epsilon, rng, cap=REJECTION_CAP):
    """``n + 1`` uniform points in ``B(C0, eps)`` whose hull contains ``C0``."""
    n = geom.n
    if not epsilon > 0:
        raise ValidationError(f"epsilon must be positive, got {epsilon}")
    for attempt in range(1, cap + 1):
        u = rng.standard_normal((n + 1, n))
        u /= np.linalg.norm(u, axis=1, keepdims=True)
        pts = geom.c0 + epsilon * u * rng.uniform(0, 1, (n + 1, 1)) ** (1.0 / n)
        if in_convex_hull(pts, geom.c0, tol=0.0):
            return pts, attempt
    raise InconclusiveError(f"rejection sampling exceeded {cap} attempts")


def _farthest_in(system, target):
    inst = Instance(system, as_vector(target))
    try:
        return solver.solve(inst, verify=False)
    except ScaleGuardError:
        # the target fell inside the trimming centers' hull; the vertex
        # enumeration is still cheap at this size
        return solver.solve_interior(inst, max_dim=system.n, max_centers=system.m)


def _validate_solution(geom, xstar):
    x = _check_binary(np.asarray(xstar).round().astype(int) if np.allclose(xstar, np.round(xstar)) else xstar, geom.n)
    solved, _ = corner_check(geom, x)
    if not solved:
        raise ValidationError(f"{x.tolist()} does not solve S^T x = T")
    return x.astype(float)


def _solve_all(geom, trim):
    sys = trim.system
    maxs, dists, cases = [], [], []
    for ci in geom.centers:
        rep = _farthest_in(sys, ci)
        maxs.append(rep.maximizer)
        dists.append(rep.rstar)
        cases.append(rep.case)
    return maxs, dists, cases


def recovery_experiment(geom, xstar, epsilon=None, seed=0) -> Trial:
    """One randomized recovery trial at the exact levels ``R_{0,p} = ||x* - C_{0,p}||``.

    The farthest point of the trimming system from each original center is
    computed; the trial succeeds when one of them is ``xstar``.
    """
    x = _validate_solution(geom, xstar)
    eps = 1e-2 * geom.r0 if epsilon is None else float(epsilon)
    rng = np.random.default_rng(seed)
    pts, attempts = _sample_points(geom, eps, rng)
    levels = np.linalg.norm(x - pts, axis=1)
    notes = []
    if np.any(np.abs(levels - geom.r0) > eps + 1e-12):
        raise InconclusiveError("a level R_{0,p} left [R0 - eps, R0 + eps]")
    trim = build_trimming(geom, pts, levels)
    maxs, dists, cases = _solve_all(geom, trim)
    hits = [i for i, m in enumerate(maxs) if np.linalg.norm(m - x) <= RECOVERY_TOL]
    # the solution's own facets: original spheres through x, and their perturbed copies
    own = np.flatnonzero(np.abs(np.linalg.norm(geom.centers - x, axis=1) - geom.r) <= 1e-9)
    on = bool(
        np.all(np.abs(np.linalg.norm(trim.centers[:, own] - x, axis=-1) - trim.radius) <= 1e-6)
    )
    if not trim.centers_outside_hull:
        notes.append("an original center lies inside the trimming centers' hull")
    idx = hits[0] if hits else None
    return Trial(
        bool(hits),
        idx,
        geom.labels[idx] if hits else None,
        pts,
        levels,
        maxs,
        dists,
        cases,
        trim.centers_outside_hull,
        on,
        attempts,
        notes,
    )


@dataclass
class RhoSweep:
    rho: float
    deltas: np.ndarray
    reference: Trial
    maximizers: list

    @property
    def max_delta(self):
        return float(np.max(self.deltas))


def uniform_rho_solve(geom, xstar, epsilon=None, rho=None, seed=0) -> RhoSweep:
    """Compare farthest points of ``T_rho`` (one shared level) with the exact-level ones.

    ``delta_i = | ||C_i - x_i(rho)|| - ||C_i - x_i(R_{0,1..n+1})|| |`` for
    every original center ``C_i``.  The perturbed points are drawn with the
    same seed as :func:`recovery_experiment`.
    """
    eps = 1e-2 * geom.r0 if epsilon is None else float(epsilon)
    rho = geom.r0 if rho is None else float(rho)
    if abs(rho - geom.r0) > eps + 1e-12:
        raise ValidationError(f"rho = {rho} outside [R0 - eps, R0 + eps]")
    ref = recovery_experiment(geom, xstar, eps, seed)
    trim = build_trimming(geom, ref.points, np.full(len(ref.points), rho))
    maxs, dists, _ = _solve_all(geom, trim)
    deltas = np.abs(np.array(dists) - np.array(ref.distances))
    return RhoSweep(rho, deltas, ref, maxs)


def random_solvable(rng, n, high=50):
    """Integer ``S`` in ``[1, high]^n`` and ``T`` = sum over a random nonempty subset."""
    s = rng.integers(1, high + 1, size=n)
    x = np.zeros(n, dtype=int)
    while not x.any():
        x = rng.integers(0, 2, size=n)
    return s, int(s @ x), x


def random_unsolvable(rng, n, high=50, tries=1000):
    """Integer ``S`` and a ``T`` inside ``[min S, sum S]`` that no subset hits."""
    for _ in range(tries):
        s = rng.integers(1, high + 1, size=n)
        sums = {0}
        for v in s:
            sums |= {a + int(v) for a in sums}
        gaps = [t for t in range(int(s.min()), int(s.sum())) if t not in sums]
        if gaps:
            return s, int(rng.choice(gaps))
    raise ValidationError("could not draw an unsolvable instance")


def safe_parameters(s, t, margin=1.5):
    """``beta`` and ``r`` that satisfy every construction inequality.

    ``beta`` puts ``C0`` at ``margin * sqrt(n)/2`` from ``C``; ``r`` is grown
    until ``C0`` falls strictly between ``C`` and ``C_s``.
    """
    s = np.asarray(s, dtype=float)
    n = s.size
    beta = margin * np.sqrt(n) / np.linalg.norm(s)
    r = np.sqrt(n)
    for _ in range(200):
        try:
            build_geometry(SspInstance(s, t, beta, r), verify_inclusion=False)
            return float(beta), float(r)
        except ValidationError:
            r *= 1.25
    raise ValidationError("no valid radius found")


def all_solutions(inst, cap=MAX_CORNER_CHECK_DIM):
    if inst.n > cap:
        raise ScaleGuardError(f"solution listing limited to n <= {cap}")
    t = inst.t_exact()
    return [b for b in itertools.product((0, 1), repeat=inst.n) if inst.dot_exact(b) == t]
