import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ballmax import ssp
from ballmax.errors import ScaleGuardError, ValidationError

SQRT17 = np.sqrt(1.7)


@pytest.fixture(scope="module")
def g1():
    return ssp.build_geometry(ssp.SspInstance(np.array([1.0, 1.0]), 1, 1.0, 1.4))


@pytest.fixture(scope="module")
def g2():
    return ssp.build_geometry(ssp.SspInstance(np.array([1.0, 2.0]), 2, 0.8, 1.5))


def _solvable_geometry(rng, n):
    s, t, x = ssp.random_solvable(rng, n)
    beta, r = ssp.safe_parameters(s, t)
    return ssp.build_geometry(ssp.SspInstance(s, t, beta, r), verify_inclusion=False), x


# instance validation


def test_instance_rejects_zero_s():
    with pytest.raises(ValidationError):
        ssp.SspInstance(np.zeros(2), 0, 1.0, 1.4)


def test_instance_rejects_hyperplane_missing_cube():
    with pytest.raises(ValidationError, match="misses the unit cube"):
        ssp.SspInstance(np.array([1.0, 1.0]), 3, 1.0, 1.4)


def test_instance_exact_dot():
    inst = ssp.SspInstance(np.array([3.0, 5.0]), 8, 1.0, 2.0)
    assert inst.integral and inst.dot_exact([1, 1]) == 8 == inst.t_exact()


# geometry


def test_geometry_symmetric(g1):
    assert np.allclose(g1.c0, [0.0, 0.0])
    assert g1.d == pytest.approx(0.8076697, abs=1e-7)
    assert g1.ds == pytest.approx(1.2083046, abs=1e-7)
    assert np.allclose(g1.cs, [-0.3544004, -0.3544004], atol=1e-7)
    assert g1.r0 == pytest.approx(1.0, abs=1e-12)


def test_geometry_skewed(g2):
    assert np.allclose(g2.ps, [0.6, 0.7])
    assert g2.ds == pytest.approx(1.3416408, abs=1e-7)
    assert np.allclose(g2.cs, [0.0, -0.5], atol=1e-12)
    assert np.allclose(g2.c0, [0.1, -0.3])
    assert g2.r0 == pytest.approx(SQRT17, abs=1e-12)


def test_geometry_identities(g1, g2):
    for g in (g1, g2):
        assert all(abs(v) <= 1e-9 for v in ssp.geometry_residuals(g).values())
        assert g.d >= g.dlow >= np.sqrt(g.n) / 2 - 1e-12
        assert np.linalg.norm(g.c0 - g.c) >= np.sqrt(g.n) / 2


def test_geometry_inclusion_not_verified_at_example_radii(g1, g2):
    # corner (0, 1) of Q_r sticks out of the centers' hull at these radii
    assert g1.inclusion_verified is False and g2.inclusion_verified is False


def test_beta_too_small():
    with pytest.raises(ValidationError, match="beta too small"):
        ssp.build_geometry(ssp.SspInstance(np.array([1.0, 1.0]), 1, 0.5, 1.4))


def test_radius_too_small():
    with pytest.raises(ValidationError, match="r too small"):
        ssp.build_geometry(ssp.SspInstance(np.array([1.0, 1.0]), 1, 1.0, 0.8))


def test_r0_independent_of_r():
    s = np.array([2.0, 3.0, 4.0])
    a = ssp.build_geometry(ssp.SspInstance(s, 5, 0.6, 2.0), verify_inclusion=False)
    b = ssp.build_geometry(ssp.SspInstance(s, 5, 0.6, 3.5), verify_inclusion=False)
    assert np.allclose(a.c0, b.c0, atol=1e-12)
    assert a.r0 == pytest.approx(b.r0, abs=1e-12)


# corners and membership


def test_corner_check(g1, g2):
    assert ssp.corner_check(g1, [1, 0]) == (True, pytest.approx(1.0))
    solved, d = ssp.corner_check(g1, [1, 1])
    assert not solved and d == pytest.approx(np.sqrt(2.0))
    assert ssp.corner_check(g2, [0, 1]) == (True, pytest.approx(1.3038405, abs=1e-7))


def test_corner_check_rejects_non_binary(g1):
    with pytest.raises(ValidationError):
        ssp.corner_check(g1, [0.5, 1])


def test_membership(g2):
    assert ssp.membership_Qr(g2, [0.0, 1.0])
    assert np.linalg.norm(np.array([0.0, 1.0]) - g2.cs) == pytest.approx(1.5, abs=1e-12)
    assert not ssp.membership_Qr(g2, [1.0, 1.0])
    assert ssp.membership_Qr(g2, g2.c)


def test_decide_examples(g1, g2):
    d1 = ssp.decide_small(g1)
    assert d1.max == pytest.approx(1.0, abs=1e-12) and sorted(d1.corners) == [(0, 1), (1, 0)]
    d2 = ssp.decide_small(g2)
    assert d2.max == pytest.approx(1.3038405, abs=1e-7) and d2.corners == [(0, 1)]
    assert d2.equals_r0


def test_decide_unsolvable_gap():
    s = np.array([3.0, 5.0])
    beta, r = ssp.safe_parameters(s, 4)
    d = ssp.decide_small(ssp.build_geometry(ssp.SspInstance(s, 4, beta, r), verify_inclusion=False))
    assert d.max < d.r0
    assert d.gap == pytest.approx(0.1517, abs=1e-3)


def test_decide_scale_guard():
    n = 21
    g = ssp.build_geometry(ssp.SspInstance(np.ones(n), 3, 1.0, 4.0), verify_inclusion=False)
    with pytest.raises(ScaleGuardError):
        ssp.decide_small(g)


@pytest.mark.parametrize("n", range(2, 13, 2))
def test_corner_preservation(n):
    g, _ = _solvable_geometry(np.random.default_rng(n), n)
    bits = ((np.arange(2**n)[:, None] >> np.arange(n)) & 1).astype(float)
    for ctr in np.vstack([g.centers_plus, g.centers_minus]):
        assert np.linalg.norm(bits - ctr, axis=1).max() <= g.r + 1e-9


@given(st.integers(2, 8), st.integers(0, 2**32 - 1))
@settings(max_examples=30)
def test_solution_corner_optimality(n, seed):
    g, x = _solvable_geometry(np.random.default_rng(seed), n)
    assert ssp.membership_Qr(g, x)
    assert np.linalg.norm(x - g.cs) == pytest.approx(g.r, abs=1e-9)
    assert ssp.decide_small(g).max == pytest.approx(g.r0, abs=1e-9)


@pytest.mark.parametrize("n", range(2, 9))
def test_cap_identities(n):
    g, _ = _solvable_geometry(np.random.default_rng(100 + n), n)
    res = ssp.cap_residuals(g, 1000, seed=n)
    assert res.pop("mismatches") == 0
    assert max(res.values()) <= 1e-8


# trimming


def test_trimming_slab_collapse(g2):
    t = ssp.build_trimming(g2, [g2.c0], [g2.r0])
    assert np.allclose(t.centers[0, -1], [0.0, -0.5], atol=1e-9)
    assert t.cap_residual(200) <= 1e-8


@pytest.mark.xfail(
    strict=True,
    reason="at eps=0 only the slab ball collapses back; the cube-facet trimming balls differ from C_k+-",
)
def test_trimming_collapse_membership(g2):
    t = ssp.build_trimming(g2, [g2.c0] * 3, [g2.r0] * 3)
    rng = np.random.default_rng(0)
    pts = rng.uniform(-1.5, 2.5, size=(1000, 2))
    agree = sum(t.contains(x) == ssp.membership_Qr(g2, x) for x in pts)
    assert agree == 1000


def test_trimming_radius_too_small(g2):
    with pytest.raises(ValidationError, match="radicand"):
        ssp.build_trimming(g2, [g2.c0], [g2.r0], radius=0.3)


def test_trimming_shape(g2):
    rng = np.random.default_rng(4)
    pts = g2.c0 + 1e-2 * rng.uniform(-1, 1, size=(3, 2))
    t = ssp.build_trimming(g2, pts, np.full(3, g2.r0))
    assert t.centers.shape == (3, 5, 2)
    assert t.system.m == 15


def test_recovery_finds_solution(g2):
    tr = ssp.recovery_experiment(g2, [0, 1], 1e-2, seed=7)
    assert tr.recovered and tr.label in g2.labels
    assert np.all(np.abs(tr.levels - g2.r0) <= 1e-2)
    assert len(tr.maximizers) == 5


def test_recovery_zero_epsilon(g2):
    with pytest.raises(ValidationError):
        ssp.recovery_experiment(g2, [0, 1], 0.0, seed=0)


def test_recovery_rejects_non_solution(g2):
    with pytest.raises(ValidationError, match="does not solve"):
        ssp.recovery_experiment(g2, [1, 1], 1e-2)


def test_uniform_rho(g2):
    sw = ssp.uniform_rho_solve(g2, [0, 1], 1e-2, g2.r0, seed=0)
    assert np.all(np.isfinite(sw.deltas))
    assert sw.max_delta <= 0.1


def test_uniform_rho_range(g2):
    with pytest.raises(ValidationError):
        ssp.uniform_rho_solve(g2, [0, 1], 1e-2, g2.r0 + 0.1)


def test_random_generators():
    rng = np.random.default_rng(1)
    s, t, x = ssp.random_solvable(rng, 6)
    assert s @ x == t
    s, t = ssp.random_unsolvable(rng, 6)
    assert not ssp.all_solutions(ssp.SspInstance(s, t, 1.0, 10.0))
