"""Dense two-phase simplex with Bland's anti-cycling rule.

Small problems only (a few hundred rows).  The solver works on the full
tableau ``B^-1 [A | b]`` and recomputes reduced costs every pivot, which is
wasteful but simple and deterministic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InconclusiveError, ValidationError

OPTIMAL = "optimal"
UNBOUNDED = "unbounded"
INFEASIBLE = "infeasible"

PIVOT_TOL = 1e-9
COST_TOL = 1e-10


@dataclass
class LpProblem:
    """``min c^T x`` s.t. ``A_ub x <= b_ub``, ``A_eq x = b_eq``, ``lower <= x <= upper``."""

    objective: np.ndarray
    a_ub: np.ndarray | None = None
    b_ub: np.ndarray | None = None
    a_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float).ravel()
        n = c.size
        if n == 0:
            raise ValidationError("LP needs at least one variable")
        self.objective = c
        self.a_ub, self.b_ub = _rows(self.a_ub, self.b_ub, n, "ub")
        self.a_eq, self.b_eq = _rows(self.a_eq, self.b_eq, n, "eq")
        lo = np.full(n, -np.inf) if self.lower is None else np.asarray(self.lower, float)
        hi = np.full(n, np.inf) if self.upper is None else np.asarray(self.upper, float)
        if lo.shape != (n,) or hi.shape != (n,):
            raise ValidationError("bounds must match the number of variables")
        if np.any(lo > hi):
            raise ValidationError("lower bound exceeds upper bound")
        self.lower, self.upper = lo, hi

    @property
    def n(self):
        return self.objective.size


def _rows(a, b, n, tag):
    if a is None:
        return np.zeros((0, n)), np.zeros(0)
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.asarray(b, dtype=float).ravel()
    if a.size == 0:
        return np.zeros((0, n)), np.zeros(0)
    if a.shape[1] != n or a.shape[0] != b.size:
        raise ValidationError(
            f"{tag} constraints have shape {a.shape} / {b.shape}, expected (k, {n}) / (k,)"
        )
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValidationError(f"{tag} constraints have non-finite entries")
    return a, b


@dataclass
class LpOutcome:
    status: str
    x: np.ndarray | None = None
    value: float = np.nan
    duals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    eq_duals: np.ndarray = field(default_factory=lambda: np.zeros(0))
    ray: np.ndarray | None = None
    farkas: np.ndarray | None = None
    iterations: int = 0

    @property
    def optimal(self):
        return self.status == OPTIMAL


class _Tableau:
    def __init__(self, a, b, basis):
        self.t = np.hstack([a, b[:, None]])
        self.basis = list(basis)
        self.iterations = 0

    @property
    def rhs(self):
        return self.t[:, -1]

    def reduced_costs(self, cost):
        cb = cost[self.basis]
        return cost - cb @ self.t[:, :-1]

    def pivot(self, row, col):
        t = self.t
        t[row] /= t[row, col]
        colv = t[:, col].copy()
        colv[row] = 0.0
        t -= np.outer(colv, t[row])
        self.basis[row] = col
        self.iterations += 1

    def run(self, cost, allowed, cap):
        """Bland-rule simplex; returns None at optimum or the unbounded column."""
        while True:
            if self.iterations > cap:
                raise InconclusiveError("simplex iteration cap exceeded")
            rc = self.reduced_costs(cost)
            enter = None
            for j in np.flatnonzero(allowed):
                if rc[j] < -COST_TOL:
                    enter = j
                    break
            if enter is None:
                return None
            col = self.t[:, enter]
            rows = np.flatnonzero(col > PIVOT_TOL)
            if rows.size == 0:
                return enter
            ratios = self.rhs[rows] / col[rows]
            best = ratios.min()
            ties = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
            leave = min(ties, key=lambda i: self.basis[i])
            self.pivot(leave, enter)


def lp_solve(problem: LpProblem) -> LpOutcome:
    """Solve a small dense LP.

    Returns an :class:`LpOutcome` with status ``optimal``, ``unbounded``
    (with a recession ``ray``) or ``infeasible`` (with phase-one dual
    weights in ``farkas``).  Never fails silently: an exhausted iteration
    budget raises :class:`InconclusiveError`.
    """
    p = problem
    n = p.n
    # x = shift + M y, y >= 0
    cols, shift = [], np.zeros(n)
    bound_rows = []
    for j in range(n):
        lo, hi = p.lower[j], p.upper[j]
        e = np.zeros(n)
        e[j] = 1.0
        if np.isfinite(lo):
            shift[j] = lo
            cols.append(e)
            if np.isfinite(hi):
                bound_rows.append((len(cols) - 1, hi - lo))
        elif np.isfinite(hi):
            shift[j] = hi
            cols.append(-e)
        else:
            cols.append(e)
            cols.append(-e)
    mmap = np.column_stack(cols)
    ny = mmap.shape[1]

    a_ub = p.a_ub @ mmap
    b_ub = p.b_ub - p.a_ub @ shift
    if bound_rows:
        extra = np.zeros((len(bound_rows), ny))
        for i, (k, _) in enumerate(bound_rows):
            extra[i, k] = 1.0
        a_ub = np.vstack([a_ub, extra])
        b_ub = np.concatenate([b_ub, [w for _, w in bound_rows]])
    a_eq = p.a_eq @ mmap
    b_eq = p.b_eq - p.a_eq @ shift
    k_ub, k_eq = len(b_ub), len(b_eq)
    rows = k_ub + k_eq

    if rows == 0:
        cy = mmap.T @ p.objective
        if np.any(cy < -COST_TOL):
            j = int(np.argmax(cy < -COST_TOL))
            d = np.zeros(ny)
            d[j] = 1.0
            return LpOutcome(UNBOUNDED, ray=mmap @ d)
        return LpOutcome(OPTIMAL, shift.copy(), float(p.objective @ shift))

    a = np.zeros((rows, ny + k_ub))
    a[:k_ub, :ny] = a_ub
    a[:k_ub, ny:] = np.eye(k_ub)
    a[k_ub:, :ny] = a_eq
    b = np.concatenate([b_ub, b_eq])
    sign = np.where(b < 0, -1.0, 1.0)
    a *= sign[:, None]
    b = b * sign

    needs_art = [i for i in range(rows) if i >= k_ub or sign[i] < 0]
    n_art = len(needs_art)
    full = np.hstack([a, np.zeros((rows, n_art))])
    basis = [ny + i if i < k_ub else -1 for i in range(rows)]
    for k, i in enumerate(needs_art):
        full[i, ny + k_ub + k] = 1.0
        basis[i] = ny + k_ub + k
    # columns forming the initial identity, used to read off B^-1
    init_cols = list(basis)
    ncol = full.shape[1]
    tab = _Tableau(full, b, basis)
    cap = 50 * (rows + ncol) + 1000
    art = np.zeros(ncol, dtype=bool)
    art[ny + k_ub:] = True

    if n_art:
        cost1 = art.astype(float)
        tab.run(cost1, np.ones(ncol, dtype=bool), cap)
        phase1 = float(cost1[tab.basis] @ tab.rhs)
        if phase1 > 1e-9 * max(1.0, float(np.abs(b).max())):
            binv = tab.t[:, init_cols]
            y = cost1[tab.basis] @ binv
            # lam >= 0 with lam^T A_ub = 0 and lam^T b_ub < 0 when only ub rows are present
            lam = -(y * sign)[: len(p.b_ub)]
            return LpOutcome(INFEASIBLE, farkas=lam, iterations=tab.iterations)
        # drive artificials out of the basis
        keep = np.ones(rows, dtype=bool)
        for i in range(rows):
            if art[tab.basis[i]]:
                cand = np.flatnonzero((np.abs(tab.t[i, :-1]) > PIVOT_TOL) & ~art)
                if cand.size:
                    tab.pivot(i, cand[0])
                else:
                    keep[i] = False
        if not keep.all():
            tab.t = tab.t[keep]
            tab.basis = [bi for bi, kk in zip(tab.basis, keep) if kk]
            init_cols = [c for c, kk in zip(init_cols, keep) if kk]
            sign = sign[keep]
            row_ids = np.flatnonzero(keep)
        else:
            row_ids = np.arange(rows)
    else:
        row_ids = np.arange(rows)

    cost2 = np.zeros(ncol)
    cost2[:ny] = mmap.T @ p.objective
    unb = tab.run(cost2, ~art, cap)
    if unb is not None:
        d = np.zeros(ncol)
        d[unb] = 1.0
        for i, bi in enumerate(tab.basis):
            d[bi] = -tab.t[i, unb]
        return LpOutcome(UNBOUNDED, ray=mmap @ d[:ny], iterations=tab.iterations)

    ysol = np.zeros(ncol)
    ysol[tab.basis] = tab.rhs
    x = shift + mmap @ ysol[:ny]
    binv = tab.t[:, init_cols]
    ydual = cost2[tab.basis] @ binv
    yfull = np.zeros(rows)
    yfull[row_ids] = ydual * sign
    duals = -yfull[: len(p.b_ub)]
    eq_duals = yfull[k_ub:]
    return LpOutcome(
        OPTIMAL,
        x,
        float(p.objective @ x),
        duals=duals,
        eq_duals=eq_duals,
        iterations=tab.iterations,
    )
