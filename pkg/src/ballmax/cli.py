"""Command-line interface: JSON in, JSON out.

Exit codes: 0 ok, 2 invalid input, 3 problem too large for a desk-scale
routine, 4 numerically inconclusive.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import oracle, solver, ssp
from .convex import BOUNDARY, classify_c0
from .errors import BallmaxError, ScaleGuardError, ValidationError
from .serialize import REPORT_SCHEMA, dumps, instance_to_dict, load_instance, solve_report_dict


def _seed(args):
    if args.seed is not None:
        return args.seed
    env = os.environ.get("BALLMAX_SEED")
    if env is None:
        return 0
    try:
        return int(env)
    except ValueError:
        raise ValidationError(f"BALLMAX_SEED must be an integer, got {env!r}") from None


def _vector(text, name):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValidationError(f"--{name} expects comma-separated numbers, got {text!r}") from None


def _header(command):
    return {"schema": REPORT_SCHEMA, "command": command}


def cmd_classify(args):
    inst = load_instance(args.instance)
    cls = classify_c0(inst)
    out = _header(args.argv) | {"case": cls.case}
    if cls.case == BOUNDARY:
        out |= {"sigma": list(cls.sigma), "alpha": cls.alpha}
    return out


def _solve_one(path, tol, with_oracle, budget, seed):
    t0 = time.perf_counter()
    inst = load_instance(path)
    cls = classify_c0(inst)
    if cls.case == "outside":
        rep = solver.solve_exterior(inst, tol=tol)
    elif cls.case == "interior":
        rep = solver.solve_interior(inst)
        rep.notes.append("interior case: exhaustive vertex enumeration (exponential in general)")
    else:
        rep = solver.solve_boundary(inst, cls, solver.verify_inclusion(inst.system))
    out = {"file": path, "input": instance_to_dict(inst)}
    out |= {"tolerances": {"bisection": tol, "member": solver.MEMBER_TOL, "tie": solver.TIE_TOL}}
    out |= solve_report_dict(rep)
    if with_oracle:
        o = oracle.boundary_sample_max(inst, budget, seed)
        out["oracle"] = {
            "best": o.best,
            "clusters": o.clusters,
            "budget": o.budget,
            "seed": seed,
            "difference": rep.rstar - o.best,
            "agrees": bool(abs(rep.rstar - o.best) <= 1e-4),
        }
    out["wall_time_s"] = time.perf_counter() - t0
    return out


def _solve_safe(job):
    try:
        return 0, _solve_one(*job)
    except BallmaxError as exc:
        return exc.exit_code, {"file": job[0], "error": str(exc), "exit_code": exc.exit_code}


def cmd_solve(args):
    seed = _seed(args)
    jobs = [(p, args.tol, args.oracle, args.budget, seed) for p in args.instances]
    if len(jobs) == 1:
        body = _solve_one(*jobs[0])
        return _header(args.argv) | body
    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            results = list(pool.map(_solve_safe, jobs))
    else:
        results = [_solve_safe(j) for j in jobs]
    code = max(c for c, _ in results)
    out = _header(args.argv) | {"reports": [r for _, r in results]}
    return out, code


def _ssp_instance(args):
    s = _vector(args.s, "s")
    return ssp.SspInstance(np.array(s), args.t, args.beta, args.r)


def _geometry_dict(g):
    return {
        "n": g.n,
        "s": g.instance.s,
        "t": g.instance.t,
        "beta": g.instance.beta,
        "r": g.r,
        "c": g.c,
        "d": g.d,
        "centers_plus": g.centers_plus,
        "centers_minus": g.centers_minus,
        "ps": g.ps,
        "ds": g.ds,
        "cs": g.cs,
        "c0": g.c0,
        "r0": g.r0,
        "dlow": g.dlow,
        "inclusion_verified": g.inclusion_verified,
        "residuals": ssp.geometry_residuals(g),
    }


def _unique_solution(g):
    sols = ssp.all_solutions(g.instance)
    if len(sols) != 1:
        raise ValidationError(f"experiment needs a unique solution, found {len(sols)}; pass --x")
    return np.array(sols[0], dtype=float)


def cmd_ssp(args):
    out = _header(args.argv)
    if args.action == "decide":
        # scale guard before any geometry work
        if len(_vector(args.s, "s")) > ssp.MAX_DECIDE_DIM:
            raise ScaleGuardError(f"decide supports n <= {ssp.MAX_DECIDE_DIM}")
    g = ssp.build_geometry(_ssp_instance(args), verify_inclusion=args.action == "build")
    if args.action == "build":
        return out | {"geometry": _geometry_dict(g)}
    if args.action == "decide":
        d = ssp.decide_small(g)
        return out | {
            "max": d.max,
            "r0": d.r0,
            "gap": d.gap,
            "equals_r0": d.equals_r0,
            "corners": [list(c) for c in d.corners],
        }
    if args.action == "check":
        body = {"caps": ssp.cap_residuals(g, 1000, _seed(args)), "residuals": ssp.geometry_residuals(g)}
        if args.x is not None:
            x = [int(round(v)) for v in _vector(args.x, "x")]
            solved, dist = ssp.corner_check(g, x)
            body["corner"] = {"x": x, "is_solution": solved, "distance": dist, "in_Qr": ssp.membership_Qr(g, x)}
        return out | body
    # experiment
    seed = _seed(args)
    x = np.array(_vector(args.x, "x")) if args.x is not None else _unique_solution(g)
    eps = args.eps if args.eps is not None else 1e-2 * g.r0
    t0 = time.perf_counter()
    tr = ssp.recovery_experiment(g, x, eps, seed)
    body = {
        "seed": seed,
        "eps": eps,
        "xstar": x,
        "recovered": tr.recovered,
        "index": None if tr.index is None else tr.index + 1,
        "label": tr.label,
        "points": tr.points,
        "levels": tr.levels,
        "cases": tr.cases,
        "maximizers": tr.maximizers,
        "distances": tr.distances,
        "centers_outside_hull": tr.centers_outside_hull,
        "on_facets": tr.on_facets,
        "attempts": tr.attempts,
        "notes": tr.notes,
    }
    if args.rho is not None:
        sw = ssp.uniform_rho_solve(g, x, eps, args.rho, seed)
        body["uniform_rho"] = {"rho": sw.rho, "deltas": sw.deltas, "max_delta": sw.max_delta}
    body["wall_time_s"] = time.perf_counter() - t0
    return out | body


def boundary_points(system, samples):
    """Evenly spaced points of each circle that lie in every ball (n = 2).

    Returns ``(points, owner)`` with 0-based owning-circle indices, ordered
    by circle then angle.
    """
    if system.n != 2:
        raise ValidationError(f"boundary emission needs n = 2, got n = {system.n}")
    ang = 2 * np.pi * np.arange(samples) / samples
    ring = np.column_stack([np.cos(ang), np.sin(ang)])
    pts, owner = [], []
    for k, c in enumerate(system.centers):
        p = c + system.radius * ring
        d2 = np.sum((p[:, None, :] - system.centers[None]) ** 2, axis=-1)
        keep = np.max(d2, axis=1) <= system.radius**2 * (1 + 1e-12)
        pts.append(p[keep])
        owner.append(np.full(int(keep.sum()), k))
    return np.vstack(pts), np.concatenate(owner)


def cmd_emit_boundary(args, stream):
    inst = load_instance(args.instance)
    pts, owner = boundary_points(inst.system, args.samples)
    w = csv.writer(stream, lineterminator="\n")
    w.writerow(["x1", "x2", "active_ball_index"])
    for (x1, x2), k in zip(pts, owner):
        w.writerow([format(x1, ".17g"), format(x2, ".17g"), int(k) + 1])


def build_parser():
    p = argparse.ArgumentParser(prog="ballmax", description="Farthest point in an intersection of equal balls.")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("classify", help="locate C0 relative to the centers' convex hull")
    c.add_argument("instance")

    s = sub.add_parser("solve", help="farthest point of Q from C0")
    s.add_argument("instances", nargs="+")
    s.add_argument("--tol", type=float, default=solver.BISECT_WIDTH, help="bisection width on R")
    s.add_argument("--oracle", action="store_true", help="attach a boundary-sampling comparison")
    s.add_argument("--budget", type=int, default=oracle.MIN_BUDGET * 10, help="oracle sample budget")
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--jobs", type=int, default=1, help="parallel workers across instance files")

    q = sub.add_parser("ssp", help="Subset Sum reduction")
    q.add_argument("action", choices=["build", "check", "decide", "experiment"])
    q.add_argument("--s", required=True, help="comma-separated S")
    q.add_argument("--t", type=float, required=True)
    q.add_argument("--beta", type=float, required=True)
    q.add_argument("--r", type=float, required=True)
    q.add_argument("--eps", type=float, default=None)
    q.add_argument("--rho", type=float, default=None)
    q.add_argument("--x", default=None, help="comma-separated binary corner")
    q.add_argument("--seed", type=int, default=None)

    e = sub.add_parser("emit-boundary", help="CSV of boundary points of Q (n = 2)")
    e.add_argument("instance")
    e.add_argument("--samples", type=int, default=360, help="points per circle")
    return p


def main(argv=None, stdout=None):
    stdout = stdout or sys.stdout
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    args.argv = argv
    code = 0
    try:
        if args.command == "emit-boundary":
            cmd_emit_boundary(args, stdout)
            return 0
        handler = {"classify": cmd_classify, "solve": cmd_solve, "ssp": cmd_ssp}[args.command]
        out = handler(args)
        if isinstance(out, tuple):
            out, code = out
    except BallmaxError as exc:
        print(dumps({"schema": REPORT_SCHEMA, "error": str(exc), "exit_code": exc.exit_code}), file=sys.stderr)
        return exc.exit_code
    stdout.write(dumps(out) + "\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
