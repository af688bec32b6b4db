import numpy as np
import pytest

from tricenter.core import (
    CartesianState,
    SystemConfig,
    Trajectory,
    expansion_terms,
    full_hamiltonian,
    full_vector_field,
    integrate,
    potential,
    read_csv,
    triangle_centers,
    truncated_hamiltonian,
    write_csv,
    write_trajectory_csv,
)
from tricenter.errors import CollisionError, DomainError, SingularityError
from tricenter.numdiff import gradient


def test_triangle_is_equilateral():
    c = triangle_centers(0.3)
    sides = [np.linalg.norm(c[i] - c[j]) for i, j in ((0, 1), (1, 2), (0, 2))]
    assert np.allclose(sides, 0.3, atol=1e-15)


@pytest.mark.parametrize("bad", [-0.1, np.nan, np.inf])
def test_config_rejects_bad_epsilon(bad):
    with pytest.raises(DomainError):
        SystemConfig(bad)


def test_config_accepts_kepler_limit():
    cfg = SystemConfig(0.0)
    assert np.all(cfg.centers == 0)


def test_potential_on_center_raises():
    with pytest.raises(SingularityError):
        potential([0.1, 0.0, 0.0], SystemConfig(0.1))


def test_vector_field_is_hamiltonian():
    cfg = SystemConfig(0.2)
    s = CartesianState([0.7, -0.4, 0.3], [0.1, 0.9, -0.2])
    dq, dp = full_vector_field(s, cfg)
    grad = gradient(lambda z: full_hamiltonian(CartesianState.from_array(z), cfg), s.as_array(), 1e-4, 3)
    assert np.allclose(dq, grad[3:], atol=1e-10)
    assert np.allclose(dp, -grad[:3], atol=1e-10)


def test_expansion_matches_series():
    s = CartesianState([1.2, 0.5, -0.4], [0.0, 0.8, 0.1])
    h0, h1, h2 = expansion_terms(s)
    assert h0 == pytest.approx(full_hamiltonian(s, SystemConfig(0.0)), abs=1e-15)
    for eps in (1e-2, 5e-3):
        rem = full_hamiltonian(s, SystemConfig(eps)) - truncated_hamiltonian(s, eps)
        assert abs(rem) < 2 * eps**3


def test_kepler_period_returns():
    s = CartesianState([1.0, 0.0, 0.0], [0.0, 1.0, 0.0])
    traj = integrate(s, 2 * np.pi, SystemConfig(0.0), samples=11)
    assert np.linalg.norm(np.concatenate([traj.q[-1], traj.p[-1]]) - s.as_array()) < 1e-8


def test_energy_column_matches_hamiltonian():
    cfg = SystemConfig(0.1)
    s = CartesianState([0.9, 0.3, 0.2], [-0.3, 1.05, 0.1])
    traj = integrate(s, 5.0, cfg, samples=6)
    for st, en in zip(traj.states, traj.energies):
        assert en == pytest.approx(full_hamiltonian(st, cfg), abs=1e-14)
    assert traj.max_relative_energy_drift < 1e-10


def test_collision_is_reported():
    s = CartesianState([1.0, 0.0, 0.0], [-0.2, 0.0, 0.0])
    with pytest.raises(CollisionError) as info:
        integrate(s, 10.0, SystemConfig(0.0))
    assert 0 < info.value.t < 10


def test_integrate_needs_positive_time():
    with pytest.raises(DomainError):
        integrate(CartesianState([1, 0, 0], [0, 1, 0]), 0.0, SystemConfig(0.0))


def test_trajectory_validates_times():
    with pytest.raises(DomainError):
        Trajectory(np.array([0.0, 0.0]), np.zeros((2, 3)), np.zeros((2, 3)), np.zeros(2))


def test_csv_round_trip(tmp_path):
    s = CartesianState([1.0, 0.0, 0.0], [0.0, 1.0, 0.1])
    traj = integrate(s, 1.0, SystemConfig(0.05), samples=5)
    path = tmp_path / "traj.csv"
    write_trajectory_csv(traj, path)
    cols, data = read_csv(path)
    assert cols == ["t", "q1", "q2", "q3", "p1", "p2", "p3", "energy"]
    assert np.array_equal(data[:, 1:4], traj.q)


def test_read_empty_csv(tmp_path):
    path = tmp_path / "empty.csv"
    path.write_text("")
    with pytest.raises(DomainError):
        read_csv(path)
    write_csv(tmp_path / "one.csv", "a,b", np.array([[1.0, 2.0]]))
    assert read_csv(tmp_path / "one.csv")[1].shape == (1, 2)
