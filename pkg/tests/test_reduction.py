import numpy as np
import pytest

from tricenter.core import CartesianState
from tricenter.errors import ChartSingularError, DomainError, SingularityError
from tricenter.kepler import DelaunayElements, delaunay_to_cartesian
from tricenter.normal_form import normalized_hamiltonian
from tricenter.reduction import (
    ReducedPoint,
    SecondReducedPoint,
    chart_hamiltonian_second,
    integrate_reduced_first,
    integrate_reduced_second,
    reduced_hamiltonian_first,
    reduced_second_order_first,
    reduced_vector_field_first,
    second_chart_ab,
    second_chart_inverse,
    second_order_second,
    second_reduced_hamiltonian,
    second_reduced_vector_field,
    to_reduced_first,
    to_second_reduced,
)
from tricenter.verify import (
    REFLECT,
    bracket_induced_flow_first,
    bracket_induced_flow_second,
    random_elements,
)

S3 = np.sqrt(3.0)


def _state(d):
    return delaunay_to_cartesian(DelaunayElements.from_array(d))


def test_circular_equatorial_invariants():
    r = to_reduced_first(CartesianState([1, 0, 0], [0, 1, 0]))
    assert np.allclose(r.x, [0, 0, 1]) and np.allclose(r.y, [0, 0, 1])
    assert r.L == pytest.approx(1.0)


def test_polar_circular_invariants():
    w = np.array([S3 / 2, 0.5, 0.0])
    q = np.array([-0.5, S3 / 2, 0.0])
    r = to_reduced_first(CartesianState(q, np.cross(w, q)))
    assert np.allclose(r.x, w, atol=1e-15) and np.allclose(r.y, w, atol=1e-15)


def test_casimirs_of_random_states(rng):
    for d in random_elements(rng, 500, e_range=(0.0, 0.95)):
        r = to_reduced_first(_state(d))
        assert max(map(abs, r.casimir_defects())) < 1e-12 * max(1.0, r.L**2)


def test_unbound_state_rejected():
    with pytest.raises(DomainError):
        to_reduced_first(CartesianState([1, 0, 0], [0, 2, 0]))


def test_pullback_equals_normalized_hamiltonian(rng):
    for d in random_elements(rng, 100):
        r = to_reduced_first(_state(d))
        assert reduced_hamiltonian_first(r, 0.3) == pytest.approx(normalized_hamiltonian(d, 0.3), abs=1e-10)


def test_first_value_at_pole():
    L = 1.2
    r = ReducedPoint([0, 0, L], [0, 0, L], L)
    assert reduced_hamiltonian_first(r, 0.1) == pytest.approx(-0.5 / L**2 - 0.01 / (6 * L**6), rel=1e-14)


def test_first_singular_at_rectilinear_limit():
    with pytest.raises(SingularityError):
        reduced_hamiltonian_first(ReducedPoint([0, 0, 1], [0, 0, -1], 1.0), 0.1)
    with pytest.raises(SingularityError):
        reduced_vector_field_first(ReducedPoint([0, 1, 0], [0, -1, 0], 1.0), 0.1)


def _random_reduced(rng, L=1.1):
    u, v = rng.normal(size=3), rng.normal(size=3)
    return ReducedPoint(L * u / np.linalg.norm(u), L * v / np.linalg.norm(v), L)


def test_first_field_is_minus_bracket_flow(rng):
    for _ in range(20):
        r = _random_reduced(rng)
        v = np.concatenate(reduced_vector_field_first(r, 1.0))
        assert np.allclose(v, -bracket_induced_flow_first(r), rtol=0, atol=1e-9 * np.linalg.norm(v))


def test_first_field_scales_with_epsilon_squared(rng):
    r = _random_reduced(rng)
    a = np.concatenate(reduced_vector_field_first(r, 0.1))
    b = np.concatenate(reduced_vector_field_first(r, 0.2))
    assert np.allclose(b, 4 * a, rtol=1e-14)


def test_first_field_tangent(rng):
    for _ in range(50):
        r = _random_reduced(rng)
        dx, dy = reduced_vector_field_first(r, 1.0)
        assert abs(r.x @ dx) < 1e-12 and abs(r.y @ dy) < 1e-12


def test_second_reduction_examples():
    b = to_second_reduced(ReducedPoint([0, 0, 1.3], [0, 0, 1.3], 1.3))
    assert np.allclose(b.beta, [0, 0, 1.3]) and b.G == pytest.approx(1.3)
    assert to_second_reduced(ReducedPoint([1, 0, 0], [-1, 0, 0], 1.0)).degenerate


def test_second_value_at_pole():
    b = SecondReducedPoint([0, 0, 0.7], 1.0)
    assert second_reduced_hamiltonian(b, 0.1) == pytest.approx(-0.5 + 0.01 / (6 * 0.7**3), rel=1e-14)


def test_second_singular_at_origin():
    with pytest.raises(SingularityError):
        second_order_second([0.0, 0.0, 0.0], 1.0)


@pytest.mark.xfail(strict=True, reason="the two displayed reduced Hamiltonians differ by "
                                       "a reflection and a sign")
def test_second_equals_first_at_average(rng):
    r = _random_reduced(rng)
    beta = 0.5 * (r.x + r.y)
    assert second_order_second(beta, r.L) == pytest.approx(reduced_second_order_first(r.x, r.y, r.L))


@pytest.mark.xfail(strict=True, reason="the second-reduced Hamiltonian is the reflected "
                                       "negative of the first-reduced one")
def test_second_equals_normalized_hamiltonian(rng):
    d = random_elements(rng, 1)[0]
    r = to_reduced_first(_state(d))
    b = to_second_reduced(r)
    assert second_reduced_hamiltonian(b, 0.5) == pytest.approx(normalized_hamiltonian(d, 0.5), abs=1e-10)


def test_second_is_reflected_negative_of_first(rng):
    for _ in range(100):
        r = _random_reduced(rng)
        beta = 0.5 * (r.x + r.y)
        assert second_order_second(REFLECT @ beta, r.L) == pytest.approx(
            -reduced_second_order_first(r.x, r.y, r.L), rel=1e-13)


def test_second_field_equilibria_and_factor(rng):
    for _ in range(50):
        G = rng.uniform(0.3, 1.0)
        u = rng.normal(size=3)
        b = SecondReducedPoint(G * u / np.linalg.norm(u), 1.2, G)
        v = second_reduced_vector_field(b)
        w = bracket_induced_flow_second(b)
        assert np.allclose(v, -12 * b.L**3 * G**5 * w, atol=1e-9 * np.linalg.norm(v))
        assert abs(b.beta @ v) < 1e-14


def test_chart_round_trip(rng):
    for _ in range(100):
        G = rng.uniform(0.3, 1.0)
        u = rng.normal(size=3)
        beta = G * u / np.linalg.norm(u)
        for s in (1, -1):
            if G + s * beta[2] < 1e-3:
                continue
            a, bb = second_chart_ab(SecondReducedPoint(beta, 1.0, G), s)
            assert np.allclose(second_chart_inverse(a, bb, G, 1.0, s).beta, beta, atol=1e-12)


def test_chart_center_and_antipode():
    assert second_chart_ab(SecondReducedPoint([0, 0, 0.8], 1.0), 1) == (0.0, 0.0)
    assert second_chart_ab(SecondReducedPoint([0, 0, -0.8], 1.0), -1) == (0.0, 0.0)
    with pytest.raises(ChartSingularError):
        second_chart_ab(SecondReducedPoint([0, 0, -0.8], 1.0), 1)
    with pytest.raises(DomainError):
        second_chart_ab(SecondReducedPoint([0, 0, 0.8], 1.0), 2)


def test_chart_hamiltonian_constant():
    G, L, eps = 0.8, 1.0, 0.1
    value = chart_hamiltonian_second(0.0, 0.0, G, L, eps)
    assert value == pytest.approx(-0.5 / L**2 + eps**2 / (6 * G**3 * L**3), rel=1e-14)


def test_reduced_flows_keep_casimirs(rng):
    r0 = _random_reduced(rng)
    _, rows = integrate_reduced_first(r0, 100.0, epsilon=np.sqrt(2.0))
    assert np.max(np.abs(np.sum(rows[:, :3] ** 2, 1) - r0.L**2)) < 1e-9
    b0 = SecondReducedPoint([0.3, -0.4, 0.5], 1.0)
    _, rows = integrate_reduced_second(b0, 100.0)
    assert np.max(np.abs(np.sum(rows**2, 1) - b0.G**2)) < 1e-9
