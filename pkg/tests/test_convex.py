import numpy as np
import pytest
from hypothesis import given, strategies as st

from ballmax.convex import (
    BOUNDARY,
    INCONCLUSIVE,
    INFEASIBLE,
    INTERIOR,
    OUTSIDE,
    classify_c0,
    convex_feasible,
    meb,
    minimize_h_minus_g,
)
from ballmax.errors import ValidationError
from ballmax.generators import random_instance
from ballmax.geometry import Instance
from ballmax.lp import UNBOUNDED

from conftest import Q3_CENTERS, q3_at

CIRCUMCENTER = np.array([1.0, 1.0 / np.sqrt(3.0)])


def test_hg_interior_point():
    out = minimize_h_minus_g(q3_at(CIRCUMCENTER))
    assert np.allclose(out.point, CIRCUMCENTER, atol=1e-9)


def test_hg_boundary_value():
    assert minimize_h_minus_g(q3_at([1.0, 0.0])).value == pytest.approx(-0.44)


def test_hg_outside_unbounded():
    assert minimize_h_minus_g(q3_at([1.0, -1.0])).status == UNBOUNDED


def test_classify_examples():
    b = classify_c0(q3_at([1.0, 0.0]))
    assert b.case == BOUNDARY
    assert b.sigma == (1, 2)
    assert np.allclose(b.alpha, [0.5, 0.5])
    assert classify_c0(q3_at(CIRCUMCENTER)).case == INTERIOR
    assert classify_c0(q3_at([1.0, -1.0])).case == OUTSIDE


def test_classify_square_face_uses_basic_support():
    # C0 at the center of a square hull face carrying four centers: the
    # system is not in general position, but a basic solution of the
    # combination LP still needs at most n centers
    c = [[0, 0, 0], [2, 0, 0], [0, 2, 0], [2, 2, 0], [1, 1, 2]]
    inst = Instance.from_arrays(c, 2.5, [1, 1, 0])
    assert inst.system.general_position() is False
    cls = classify_c0(inst)
    assert cls.case == BOUNDARY and cls.p <= 3
    assert np.allclose(cls.alpha @ np.asarray(c, float)[list(cls.support)], [1, 1, 0])


@given(st.integers(0, 2**31), st.sampled_from([2, 3]))
def test_boundary_decomposition_reconstructs(seed, n):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, n, int(rng.integers(n + 1, 8)), "boundary")
    cls = classify_c0(inst)
    assert cls.case == BOUNDARY
    assert np.all(cls.alpha > 0)
    assert cls.alpha.sum() == pytest.approx(1.0, abs=1e-12)
    recon = cls.alpha @ inst.system.centers[list(cls.support)]
    assert np.linalg.norm(recon - inst.c0) <= 1e-8
    assert cls.p <= n and len(set(cls.support)) == cls.p


@given(st.integers(0, 2**31), st.sampled_from([2, 3]), st.sampled_from(["interior", "boundary", "outside"]))
def test_unbounded_iff_outside(seed, n, case):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, n, int(rng.integers(n + 1, 8)), case)
    unbounded = minimize_h_minus_g(inst).status == UNBOUNDED
    assert unbounded == (classify_c0(inst).case == OUTSIDE)


# -- minimum enclosing ball ------------------------------------------------


def test_meb_examples():
    c, r = meb(Q3_CENTERS)
    assert np.allclose(c, CIRCUMCENTER) and r == pytest.approx(2 / np.sqrt(3))
    c, r = meb([[0, 0], [2, 0]])
    assert np.allclose(c, [1, 0]) and r == pytest.approx(1.0)
    c, r = meb([[5, 5]])
    assert np.allclose(c, [5, 5]) and r == 0.0


@given(st.integers(0, 2**31), st.integers(2, 4))
def test_meb_encloses_and_is_tight(seed, n):
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(int(rng.integers(1, 12)), n))
    c, r = meb(pts)
    d = np.linalg.norm(pts - c, axis=1)
    assert d.max() <= r * (1 + 1e-9) + 1e-12
    # the center lies in the hull of the points touching the ball
    touch = pts[d >= r * (1 - 1e-7)]
    from ballmax.convex import in_convex_hull

    assert in_convex_hull(touch, c, tol=1e-6)


def test_interior_minimizer_independent_of_c0():
    # the minimizer of h - g is the same point for two interior query points
    a = minimize_h_minus_g(q3_at(CIRCUMCENTER)).point
    b = minimize_h_minus_g(q3_at([1.0, 0.3])).point
    assert np.allclose(a, b, atol=1e-9)


@given(st.integers(0, 2**31), st.sampled_from([2, 3]))
def test_interior_minimizer_is_balanced_point(seed, n):
    """What does hold for every interior C0: at the minimizer of ``h - g``
    the active centers are equidistant from it and ``C0`` lies in their hull."""
    from ballmax.convex import in_convex_hull

    rng = np.random.default_rng(seed)
    inst = random_instance(rng, n, int(rng.integers(n + 1, 8)), "interior")
    x = minimize_h_minus_g(inst).point
    c = inst.system.centers
    lin = 2 * (inst.c0 - c) @ x + np.sum(c**2, axis=1)
    act = lin >= lin.max() - 1e-8 * max(1.0, np.abs(lin).max())
    d = np.linalg.norm(c[act] - x, axis=1)
    assert np.ptp(d) <= 1e-7
    assert in_convex_hull(c[act], inst.c0, tol=1e-7)


# -- feasibility -----------------------------------------------------------


def _balls(centers, r):
    return [(c, r) for c in centers]


def test_feasible_q3():
    out = convex_feasible(_balls(Q3_CENTERS, 1.2))
    assert out.feasible
    assert np.linalg.norm(out.witness - CIRCUMCENTER) < 0.5


def test_infeasible_q3_with_halfspace():
    out = convex_feasible(_balls(Q3_CENTERS, 1.2), [([0.0, 1.0], -1.0)])
    assert out.status == INFEASIBLE
    assert out.lower > 0


def test_feasible_touching_halfspace():
    out = convex_feasible([([0.0, 0.0], 1.0)], [([-1.0, 0.0], -1.0)])
    assert out.feasible
    assert np.allclose(out.witness, [1.0, 0.0], atol=1e-4)


def test_polyak_reports_inconclusive_not_infeasible():
    out = convex_feasible(_balls(Q3_CENTERS, 1.2), [([0.0, 1.0], -1.0)], method="polyak", max_iter=2000)
    assert out.status in (INCONCLUSIVE, INFEASIBLE)
    assert not out.feasible


def test_halfspaces_only():
    assert convex_feasible([], [([1.0, 0.0], 1.0), ([-1.0, 0.0], 0.0)]).feasible
    assert not convex_feasible([], [([1.0, 0.0], 0.0), ([-1.0, 0.0], -1.0)]).feasible


@given(st.integers(0, 2**31))
def test_feasible_witness_satisfies_constraints(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 4))
    c = rng.normal(size=(int(rng.integers(1, 6)), n))
    r = float(rng.uniform(0.5, 3))
    hs = [(rng.normal(size=n), float(rng.normal())) for _ in range(rng.integers(0, 4))]
    out = convex_feasible(_balls(c, r), hs)
    if out.feasible:
        x = out.witness
        assert np.all(np.sum((c - x) ** 2, axis=1) - r * r <= 1e-8)
        assert all(a @ x - b <= 1e-8 for a, b in hs)
    elif out.status == INFEASIBLE:
        assert out.lower > 0
