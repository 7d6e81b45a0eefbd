import numpy as np
import pytest
from scipy.optimize import check_grad

from monocert.errors import InvalidParameter
from monocert.oracle import (
    FOUND_THRESHOLD,
    ProbePoint,
    _objective,
    brute_force_scan,
    search_feasible_point,
    shadow_values,
)
from monocert.system import VertexAssignment, build_reduced_system, enumerate_assignments

CHAIN10 = VertexAssignment.parse("1,2,3,4,5,6,7,8,9")
V11_HARD = VertexAssignment.parse("1,1,2,2,2,3,7,8,8,9")


def test_v2_not_found():
    assert search_feasible_point(VertexAssignment(2, (1,)), 1, 20) is None
    assert search_feasible_point(VertexAssignment(2, (1,)), 3, 20) is None


@pytest.mark.parametrize("d", [2, 3])
def test_certified_assignment_not_found(d):
    assert search_feasible_point(CHAIN10, d, 1000 if d == 3 else 100) is None


@pytest.mark.parametrize("d", [2, 3])
def test_hard_v11_system_has_witness(d):
    p = search_feasible_point(V11_HARD, d, 100, seed=0)
    assert p is not None
    assert p.penalty() <= FOUND_THRESHOLD
    assert np.all(p.constraint_values() <= 1e-9)
    assert np.max(np.abs(p.coordinates.sum(axis=0))) <= 1e-9
    assert np.max(np.abs(p.coordinates)) == pytest.approx(1.0)


@pytest.mark.parametrize("V", range(2, 7))
def test_no_line_witness_up_to_six_vertices(V):
    for a in enumerate_assignments(V):
        assert search_feasible_point(a, 1, 1000) is None, a


def test_hard_v11_system_has_no_line_witness():
    assert search_feasible_point(V11_HARD, 1, 100) is None


def test_witness_agrees_with_reduced_matrices():
    """Constraint values from coordinates equal the quadratic forms of the builder."""
    p = search_feasible_point(V11_HARD, 2, 100)
    sys = build_reduced_system(V11_HARD)
    x = p.coordinates[:-1]
    forms = np.einsum("kd,ikl,ld->i", x, sys.float_matrices(), x)
    assert np.allclose(forms, p.constraint_values(), atol=1e-12)


def test_deterministic_given_seed():
    a = search_feasible_point(V11_HARD, 2, 100, seed=5)
    b = search_feasible_point(V11_HARD, 2, 100, seed=5)
    assert np.array_equal(a.coordinates, b.coordinates)


def test_objective_gradient():
    f = _objective(V11_HARD, 3, 2, 0.01)
    x0 = np.random.default_rng(1).standard_normal(2 * 10 * 3)
    err = check_grad(lambda x: f(x)[0], lambda x: f(x)[1], x0)
    assert err < 1e-6 * max(1.0, np.linalg.norm(f(x0)[1]))


def test_invalid_parameters():
    a = VertexAssignment(3, (1, 1))
    with pytest.raises(InvalidParameter):
        search_feasible_point(a, 4, 10)
    with pytest.raises(InvalidParameter):
        search_feasible_point(a, 2, 0)
    with pytest.raises(InvalidParameter):
        search_feasible_point(a, 2, 10, margin=-1)
    with pytest.raises(InvalidParameter):
        brute_force_scan(VertexAssignment(5, (1, 1, 1, 1)))
    with pytest.raises(InvalidParameter):
        brute_force_scan(a, d=2)
    with pytest.raises(InvalidParameter):
        brute_force_scan(a, grid_radius=0)


def test_brute_force_frozen_values():
    assert brute_force_scan(VertexAssignment(2, (1,)), grid_radius=5) == 2
    assert brute_force_scan(VertexAssignment(3, (1, 1)), grid_radius=10) == 1
    assert brute_force_scan(VertexAssignment(3, (1, 2)), grid_radius=10) == 1


@pytest.mark.parametrize("V", [2, 3, 4])
def test_brute_force_all_small_assignments_positive(V):
    expected = {2: 2, 3: 1, 4: 1}[V]
    for a in enumerate_assignments(V):
        assert brute_force_scan(a, grid_radius=6) == expected


def test_probe_point_roundtrip_and_validation():
    r = np.array([[1.0, 0.5], [-0.25, -1.0], [-0.75, 0.5]])
    p = ProbePoint(3, 2, r)
    q = ProbePoint.from_text(p.to_text())
    assert np.array_equal(p.coordinates, q.coordinates)
    with pytest.raises(InvalidParameter):
        ProbePoint(3, 2, r + 0.1)
    with pytest.raises(InvalidParameter):
        ProbePoint(3, 2, r / 2)
    with pytest.raises(InvalidParameter):
        ProbePoint(2, 2, r)


def test_shadow_values_example():
    a = VertexAssignment(3, (1, 1))
    r = np.array([[1.0], [2.0], [-3.0]])
    assert list(shadow_values(a, r)) == [(2 - 1) * 2, (-3 - 1) * -3]
