"""Exact three-center Hamiltonian, its small-triangle expansion, and the flow.

A massless particle moves in the field of three equal masses (1/3 each)
placed at the vertices of an equilateral triangle of side ``epsilon``::

    xi_1 = (0, 0, 0),  xi_2 = (eps, 0, 0),  xi_3 = (eps/2, eps*sqrt(3)/2, 0)

With unit total gravitational parameter the Hamiltonian is
``H = |p|^2/2 - V(q)`` with ``V(q) = sum_i mu_i / |q - xi_i|``.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.integrate import solve_ivp

from .errors import CollisionError, DomainError, NumericalError, SingularityError

SQRT3 = np.sqrt(3.0)

#: Distance below which a state is considered to sit on a center.
COLLISION_GUARD = 1e-12


def triangle_centers(epsilon):
    """Vertices of the equilateral triangle of side ``epsilon``."""
    return np.array([[0.0, 0.0, 0.0],
                     [epsilon, 0.0, 0.0],
                     [0.5 * epsilon, 0.5 * SQRT3 * epsilon, 0.0]])


@dataclass(frozen=True)
class SystemConfig:
    """Physical and numerical parameters of the three-center problem.

    ``epsilon = 0`` is accepted and collapses the three centers onto the
    origin, i.e. the Kepler problem.
    """

    epsilon: float
    rel_tol: float = 1e-12
    abs_tol: float = 1e-14
    mu: tuple = (1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0)
    centers: Optional[np.ndarray] = field(default=None, compare=False)

    def __post_init__(self):
        if not np.isfinite(self.epsilon) or self.epsilon < 0:
            raise DomainError(f"epsilon must be a finite number >= 0, got {self.epsilon!r}")
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise DomainError("integrator tolerances must be positive")
        if len(self.mu) != 3:
            raise DomainError("exactly three mass parameters are required")
        if self.centers is None:
            centers = triangle_centers(self.epsilon)
        else:
            centers = np.array(self.centers, dtype=float).reshape(3, 3)
        centers.setflags(write=False)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "mu", tuple(float(m) for m in self.mu))


@dataclass(frozen=True)
class CartesianState:
    """Position ``q`` and momentum ``p`` of the test particle (unit mass)."""

    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        q = np.array(self.q, dtype=float).reshape(3)
        p = np.array(self.p, dtype=float).reshape(3)
        q.setflags(write=False)
        p.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    def as_array(self):
        """Return ``(q1, q2, q3, p1, p2, p3)`` as a fresh array."""
        return np.concatenate([self.q, self.p])

    @classmethod
    def from_array(cls, z):
        z = np.asarray(z, dtype=float)
        return cls(z[:3], z[3:6])


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution of the full system with its energy record."""

    times: np.ndarray
    q: np.ndarray
    p: np.ndarray
    energies: np.ndarray
    dense: Optional[Callable] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        n = len(self.times)
        if not (len(self.q) == len(self.p) == len(self.energies) == n):
            raise DomainError("times, states and energies must have equal length")
        if n > 1 and np.any(np.diff(self.times) <= 0):
            raise DomainError("sample times must be strictly increasing")

    @property
    def states(self):
        return [CartesianState(q, p) for q, p in zip(self.q, self.p)]

    @property
    def max_relative_energy_drift(self):
        e0 = self.energies[0]
        return float(np.max(np.abs(self.energies - e0)) / abs(e0))


def _check_distances(q, cfg):
    d = np.linalg.norm(q - cfg.centers, axis=1)
    if np.min(d) < COLLISION_GUARD:
        raise SingularityError(f"position {q} lies within {COLLISION_GUARD} of a center")
    return d


def potential(q, cfg):
    """Attractive potential ``V(q) = sum mu_i / |q - xi_i|``."""
    q = np.asarray(q, dtype=float)
    d = _check_distances(q, cfg)
    return float(np.dot(cfg.mu, 1.0 / d))


def full_hamiltonian(s, cfg):
    """Exact energy ``|p|^2/2 - V(q)``."""
    return 0.5 * float(s.p @ s.p) - potential(s.q, cfg)


def expansion_terms(s):
    """Coefficients ``(H0, H1, H2)`` of ``H = H0 + eps H1 + eps^2/2 H2 + O(eps^3)``."""
    q1, q2, q3 = s.q
    r = float(np.linalg.norm(s.q))
    if r < COLLISION_GUARD:
        raise SingularityError("expansion undefined at q = 0")
    h0 = 0.5 * float(s.p @ s.p) - 1.0 / r
    h1 = -(3.0 * q1 + SQRT3 * q2) / (6.0 * r**3)
    h2 = -(7.0 * q1**2 + 6.0 * SQRT3 * q1 * q2 + q2**2 - 8.0 * q3**2) / (12.0 * r**5)
    return h0, h1, h2


def truncated_hamiltonian(s, epsilon):
    """Second-order truncation ``H0 + eps H1 + eps^2/2 H2``."""
    h0, h1, h2 = expansion_terms(s)
    return h0 + epsilon * h1 + 0.5 * epsilon**2 * h2


def _force(q, cfg):
    diff = q - cfg.centers
    d = np.linalg.norm(diff, axis=1)
    return -(np.asarray(cfg.mu)[:, None] * diff / d[:, None] ** 3).sum(axis=0)


def full_vector_field(s, cfg):
    """Hamilton's equations: ``dq = p`` and ``dp = grad V(q)``."""
    _check_distances(s.q, cfg)
    return s.p.copy(), _force(s.q, cfg)


def _energy_rows(q, p, cfg):
    diff = q[:, None, :] - cfg.centers[None, :, :]
    d = np.linalg.norm(diff, axis=2)
    return 0.5 * np.sum(p * p, axis=1) - (1.0 / d) @ np.asarray(cfg.mu)


def integrate(s0, t_end, cfg, samples=1001, t_eval=None, collision_radius=1e-8):
    """Integrate the full system from ``s0`` over ``[0, t_end]``.

    Uses the explicit Runge-Kutta pair DOP853 (order 8 with a dense
    interpolant) at the tolerances carried by ``cfg``. The returned
    trajectory is sampled at ``t_eval`` when given, otherwise at ``samples``
    equally spaced times including both end points; its ``dense`` attribute
    evaluates the continuous solution.

    Raises
    ------
    CollisionError
        If the particle comes within ``collision_radius`` of a center or the
        step size underflows near one.
    NumericalError
        For any other integrator failure.
    """
    if not t_end > 0:
        raise DomainError("t_end must be positive")
    _check_distances(s0.q, cfg)
    if t_eval is None:
        t_eval = np.linspace(0.0, t_end, int(samples))
    t_eval = np.asarray(t_eval, dtype=float)
    mu = np.asarray(cfg.mu)
    centers = cfg.centers

    def rhs(_t, z):
        diff = z[:3] - centers
        d = np.sqrt(np.einsum("ij,ij->i", diff, diff))
        acc = -(mu[:, None] * diff / d[:, None] ** 3).sum(axis=0)
        return np.concatenate([z[3:], acc])

    def near_center(_t, z):
        return np.min(np.linalg.norm(z[:3] - centers, axis=1)) - collision_radius

    near_center.terminal = True
    near_center.direction = -1

    sol = solve_ivp(rhs, (0.0, float(t_end)), s0.as_array(), method="DOP853",
                    rtol=cfg.rel_tol, atol=cfg.abs_tol, t_eval=t_eval,
                    dense_output=True, events=near_center)
    if sol.status == 1:
        raise CollisionError(f"collision with a center at t = {sol.t_events[0][0]!r}",
                             float(sol.t_events[0][0]))
    if sol.status != 0:
        t_fail = float(sol.t[-1]) if sol.t.size else 0.0
        z = sol.sol(t_fail) if sol.sol is not None else s0.as_array()
        if np.min(np.linalg.norm(z[:3] - centers, axis=1)) < 1e-3:
            raise CollisionError(f"step size underflow near a center at t = {t_fail!r}", t_fail)
        raise NumericalError(f"integration failed at t = {t_fail!r}: {sol.message}")
    q = sol.y[:3].T.copy()
    p = sol.y[3:].T.copy()
    return Trajectory(sol.t.copy(), q, p, _energy_rows(q, p, cfg), dense=sol.sol)


TRAJECTORY_HEADER = "t,q1,q2,q3,p1,p2,p3,energy"


def trajectory_table(traj):
    """Trajectory as an ``(n, 8)`` array in CSV column order."""
    return np.column_stack([traj.times, traj.q, traj.p, traj.energies])


def write_trajectory_csv(traj, path):
    """Write ``t,q1,q2,q3,p1,p2,p3,energy`` rows at 17 significant digits."""
    write_csv(path, TRAJECTORY_HEADER, trajectory_table(traj))


def write_csv(path, header, rows):
    """Write a numeric table with a one-line header at 17 significant digits."""
    np.savetxt(path, np.atleast_2d(rows), fmt="%.17g", delimiter=",",
               header=header, comments="")


def read_csv(path):
    """Read a numeric table written by :func:`write_csv`.

    Returns ``(columns, data)``; raises ``DomainError`` on an empty table.
    """
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if not header:
            raise DomainError(f"{path} is empty")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    if data.size == 0:
        raise DomainError(f"{path} has no data rows")
    return header.split(","), data
