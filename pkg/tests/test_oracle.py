from types import SimpleNamespace

import numpy as np
import pytest

from ballmax import oracle, ssp
from ballmax.errors import ScaleGuardError, ValidationError
from ballmax.geometry import Instance

from conftest import RBAR_Q3, q3_at, q4_at

CENTROID = np.array([1.0, 1.0 / np.sqrt(3.0)])


def test_q3_boundary_large_budget():
    inst = q3_at([1.0, 0.0])
    o = oracle.boundary_sample_max(inst, 10**6, seed=0)
    assert o.best == pytest.approx(0.6633250, abs=1e-4)
    assert o.clusters == 1
    assert np.allclose(o.argmax[0], [1.0, RBAR_Q3], atol=1e-4)


def test_q3_centroid_three_clusters():
    o = oracle.boundary_sample_max(q3_at(CENTROID), 10**5, seed=0)
    assert o.clusters == 3
    assert o.best == pytest.approx(0.0859747, abs=1e-6)


def test_q4_cluster_count_grows():
    # an arc of maximizers: every doubling resolves more of it
    counts = oracle.cluster_growth(q4_at([1.0, 0.0, 0.0]), 3 * 10**4, seed=0)
    assert oracle.looks_infinite(counts)
    assert oracle.boundary_sample_max(q4_at([1.0, 0.0, 0.0]), 10**4).best == pytest.approx(RBAR_Q3, abs=1e-4)


def test_samples_stay_in_q():
    inst = q3_at([1.0, -0.5])
    o = oracle.boundary_sample_max(inst, 10**4, seed=3)
    for x in o.argmax:
        assert inst.system.h(x) <= 1e-6
    assert o.merge_radius == oracle.CLUSTER_RADIUS


def test_deterministic_given_seed():
    inst = q4_at([1.0, 0.2, 0.1])
    a = oracle.boundary_sample_max(inst, 10**4, seed=9)
    b = oracle.boundary_sample_max(inst, 10**4, seed=9)
    assert a.best == b.best and all(np.array_equal(x, y) for x, y in zip(a.argmax, b.argmax))


def test_budget_floor():
    with pytest.raises(ValidationError):
        oracle.boundary_sample_max(q3_at([1.0, 0.0]), 9_999)


def test_dimension_limit():
    inst = Instance.from_arrays(np.vstack([np.zeros(4), np.eye(4)]), 1.0, np.zeros(4))
    with pytest.raises(ValidationError):
        oracle.boundary_sample_max(inst, 10**4)


def test_empty_q_gives_no_samples():
    inst = Instance.from_arrays([[0.0, 0.0], [3.0, 0.0], [1.5, 2.0]], 1.0, [1.5, 0.5])
    o = oracle.boundary_sample_max(inst, 10**4)
    assert o.best == -np.inf and o.clusters == 0


def test_looks_infinite():
    assert oracle.looks_infinite([3, 4, 11])
    assert not oracle.looks_infinite([2, 2, 2])
    assert not oracle.looks_infinite([5])


def test_corner_oracle_two_corners():
    g = ssp.build_geometry(ssp.SspInstance(np.array([1.0, 1.0]), 1, 1.0, 1.4))
    o = oracle.exhaustive_corner_oracle(g)
    assert o.best == pytest.approx(1.0, abs=1e-12)
    assert sorted(tuple(c) for c in o.argmax) == [(0.0, 1.0), (1.0, 0.0)]


def test_corner_oracle_one_corner():
    g = ssp.build_geometry(ssp.SspInstance(np.array([1.0, 2.0]), 2, 0.8, 1.5))
    o = oracle.exhaustive_corner_oracle(g)
    assert o.best == pytest.approx(1.3038405, abs=1e-7)
    assert [tuple(c) for c in o.argmax] == [(0.0, 1.0)]


def test_corner_oracle_no_feasible_corner():
    # T < 0 with positive S rules out every corner, including the origin
    geom = SimpleNamespace(instance=SimpleNamespace(s=np.array([1.0, 2.0]), t=-1.0), c0=np.zeros(2))
    o = oracle.exhaustive_corner_oracle(geom)
    assert o.best == -np.inf and o.argmax == []


def test_corner_oracle_exact_sums():
    # 2**53 + 1 rounds to 2**53 in floating point; exact sums reject (1, 1)
    big = float(2**53)
    geom = SimpleNamespace(instance=SimpleNamespace(s=np.array([big, 1.0]), t=big), c0=np.zeros(2))
    o = oracle.exhaustive_corner_oracle(geom)
    assert o.best == pytest.approx(1.0)
    assert sorted(tuple(c) for c in o.argmax) == [(0.0, 1.0), (1.0, 0.0)]


def test_corner_oracle_scale_guard():
    geom = SimpleNamespace(instance=SimpleNamespace(s=np.ones(21), t=3.0), c0=np.zeros(21))
    with pytest.raises(ScaleGuardError):
        oracle.exhaustive_corner_oracle(geom)
