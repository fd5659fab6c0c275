import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nhimlab import (
    ChartPoint,
    ChartTopology,
    ContractError,
    Dimensions,
    TangentVector,
    manifold_distance,
    mat_row_sup_norm,
    tensor_row_sup_norm,
    vec_sup_norm,
)

TWO_PI = 2.0 * np.pi


def test_vec_sup_norm_values():
    assert vec_sup_norm([1.0, -3.0, 2.0]) == 3.0
    assert vec_sup_norm([0.0, 0.0]) == 0.0
    assert vec_sup_norm([-0.5, 0.5]) == 0.5


def test_vec_sup_norm_empty_rejected():
    with pytest.raises(ContractError):
        vec_sup_norm([])


def test_mat_row_sup_norm_values():
    assert mat_row_sup_norm([[1.0, -2.0], [0.5, 0.5]]) == 3.0
    assert mat_row_sup_norm(np.eye(3)) == 1.0
    assert mat_row_sup_norm(np.zeros((2, 4))) == 0.0


def test_mat_row_sup_norm_rejects_bad_shapes():
    with pytest.raises(ContractError):
        mat_row_sup_norm([1.0, 2.0])
    with pytest.raises(ContractError):
        mat_row_sup_norm(np.zeros((0, 3)))


def test_tensor_row_sup_norm_reduces_to_lower_orders():
    assert tensor_row_sup_norm([1.0, -3.0]) == 3.0
    assert tensor_row_sup_norm([[1.0, -2.0], [0.5, 0.5]]) == 3.0
    t = np.zeros((2, 2, 2))
    t[0] = [[1.0, -1.0], [2.0, 0.0]]
    t[1] = [[0.5, 0.5], [0.5, 0.5]]
    assert tensor_row_sup_norm(t) == 4.0


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=6),
       st.floats(-100.0, 100.0))
def test_sup_norm_homogeneous(coords, c):
    v = np.array(coords)
    assert np.isclose(vec_sup_norm(c * v), abs(c) * vec_sup_norm(v), rtol=1e-12, atol=0)


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=6),
       st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=6))
def test_sup_norm_triangle(a, b):
    n = min(len(a), len(b))
    va, vb = np.array(a[:n]), np.array(b[:n])
    assert vec_sup_norm(va + vb) <= vec_sup_norm(va) + vec_sup_norm(vb) + 1e-9


def test_operator_norm_bounds_action():
    rng = np.random.default_rng(3)
    for _ in range(50):
        a = rng.normal(size=(4, 5))
        v = rng.normal(size=5)
        assert vec_sup_norm(a @ v) <= mat_row_sup_norm(a) * vec_sup_norm(v) + 1e-12
    # equality is attained by the sign pattern of a maximal row
    a = rng.normal(size=(4, 5))
    row = int(np.argmax(np.sum(np.abs(a), axis=1)))
    v = np.sign(a[row])
    assert np.isclose(vec_sup_norm(a @ v), mat_row_sup_norm(a), rtol=1e-12)


def test_dimensions_split_join_round_trip():
    dims = Dimensions(2, 1, 3)
    z = np.arange(6.0)
    s, u, x = dims.split(z)
    assert s.tolist() == [0.0, 1.0] and u.tolist() == [2.0] and x.tolist() == [3.0, 4.0, 5.0]
    assert np.array_equal(dims.join(s, u, x), z)
    with pytest.raises(ContractError):
        dims.split(np.zeros(5))
    with pytest.raises(ContractError):
        Dimensions(0, 1, 1)


def test_topology_canonicalize():
    topo = ChartTopology.of(["angle", "linear"])
    out = topo.canonicalize([TWO_PI + 0.3, -5.0])
    assert np.isclose(out[0], 0.3) and out[1] == -5.0
    # a tiny negative angle must not round up to the full period
    out = topo.canonicalize([-1e-17, 0.0])
    assert 0.0 <= out[0] < TWO_PI
    twice = topo.canonicalize(out)
    assert np.array_equal(twice, out)


def test_topology_validation():
    with pytest.raises(ContractError):
        ChartTopology(())
    with pytest.raises(ContractError):
        ChartTopology(("spiral",))
    assert ChartTopology.angles(2).is_angle.all()
    assert not ChartTopology.lines(2).is_angle.any()


def test_chart_point_norm_and_ball():
    p = ChartPoint([0.1, -0.3], [0.2], [1.0], ChartTopology.lines(1))
    assert p.normal_norm == 0.3
    assert p.in_ball(0.5)
    assert not p.in_ball(0.3)  # membership is strict
    q = ChartPoint([0.0], [0.0], [TWO_PI + 1.0], ChartTopology.angles(1))
    assert np.isclose(q.x[0], 1.0)
    with pytest.raises(ValueError):
        q.x[0] = 2.0


def test_tangent_vector_blocks():
    v = TangentVector([1.0, -2.0], [0.5], [0.0, 3.0])
    assert v.block_norms() == (2.0, 0.5, 3.0)
    assert v.sup_norm() == 3.0
    w = v.scaled(0.5)
    assert w.block_norms() == (1.0, 0.25, 1.5)


def test_manifold_distance():
    lin = ChartTopology.lines(1)
    ang = ChartTopology.angles(1)
    assert manifold_distance([0.2], [0.5], lin) == 0.3 or np.isclose(
        manifold_distance([0.2], [0.5], lin), 0.3)
    assert np.isclose(manifold_distance([0.1], [TWO_PI - 0.1], ang), 0.2)
    assert manifold_distance([1.3], [1.3], ang) == 0.0
    mixed = ChartTopology.of(["angle", "linear"])
    d = manifold_distance([0.1, 0.0], [TWO_PI - 0.1, 0.05], mixed)
    assert np.isclose(d, 0.2)
    with pytest.raises(ContractError):
        manifold_distance([0.1], [0.1, 0.2], ang)


@given(st.floats(-50.0, 50.0), st.floats(-50.0, 50.0))
def test_angle_distance_symmetric_and_bounded(a, b):
    topo = ChartTopology.angles(1)
    d1 = manifold_distance([a], [b], topo)
    d2 = manifold_distance([b], [a], topo)
    assert np.isclose(d1, d2, atol=1e-9)
    assert d1 <= np.pi + 1e-9
