import numpy as np
import pytest

from tricenter import kam
from tricenter.errors import DomainError

CASES = [(s, p) for s in kam.SPACES for p in kam.PAIRS]


def _actions(space, rng):
    if space == "first":
        return np.array([rng.uniform(0.8, 1.3), *rng.uniform(0, 1, 2)])
    return np.array([1.0, rng.uniform(0.2, 1.0), rng.uniform(0, 1)])


@pytest.mark.parametrize("space,pair", CASES)
def test_rank(space, pair, rng):
    for _ in range(20):
        a = _actions(space, rng)
        for tol in (1e-8, 1e-10, 1e-12):
            assert kam.rank(kam.m_omega(space, pair, a), tol) == kam.EXPECTED_RANK[(space, pair)]


@pytest.mark.parametrize("space,pair", CASES)
def test_closed_form_columns(space, pair, rng):
    for _ in range(10):
        a = _actions(space, rng)
        m = kam.m_omega(space, pair, a)
        assert np.allclose(kam.m_omega_numeric(space, pair, a), m, rtol=1e-7, atol=1e-7)


@pytest.mark.parametrize("space,pair", CASES)
def test_gradient_identity(space, pair, rng):
    for _ in range(10):
        a = _actions(space, rng)
        resid = np.abs(kam.omega(space, pair, a) - kam.gradient_omega(space, pair, a))
        if (space, pair) == ("first", (3, 4)):
            assert np.max(resid[:4]) < 1e-8
        else:
            assert np.max(resid) < 1e-8


def test_sign_tension_entries():
    analysis = kam.analyze("first", (3, 4), [1.0, 0.4, 0.7])
    assert analysis.sign_tension == (5, 6)
    assert kam.analyze("first", (1, 2), [1.0, 0.4, 0.7]).sign_tension == ()


def test_hierarchy_orders():
    h = kam.hierarchy("second", (1, 2), [1.0, 0.5, 0.0])
    assert h[0] == -0.5
    assert h[1] == pytest.approx(1 / (3 * 0.125))
    assert kam.action_angle_hamiltonian("second", (1, 2), [1.0, 0.5, 0.0], 0.0) == -0.5


def test_validation():
    with pytest.raises(DomainError):
        kam.omega("third", (1, 2), [1, 0, 0])
    with pytest.raises(DomainError):
        kam.omega("first", (1, 3), [1, 0, 0])
    with pytest.raises(DomainError):
        kam.omega("second", (1, 2), [1, 0, 0])
    with pytest.raises(DomainError):
        kam.rank(np.eye(3), 2.0)


def test_to_dict_is_json_ready():
    import json

    json.dumps(kam.analyze("second", (3, 4), [1.0, 0.8, 0.5]).to_dict())
