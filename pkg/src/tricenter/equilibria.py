"""Relative equilibria, their linear stability, and periodic-orbit reconstruction.

First reduced space: the six isolated equilibria ``E_i = delta (u, u)`` with
``delta = L`` for odd and ``-L`` for even index and
``u = (0,0,1)``, ``(sqrt3/2, 1/2, 0)``, ``(1/2, -sqrt3/2, 0)`` for the pairs
(1,2), (3,4), (5,6). Near them the symplectic chart

    Q1 = x2/sqrt(L + s x3),  Q2 = y2/sqrt(L + s y3),
    P1 = -s x1/sqrt(L + s x3),  P2 = -s y1/sqrt(L + s y3)

is used with ``s = +1`` for odd and ``s = -1`` for even index. Time is
rescaled by ``d tau = eps^2/2 dt`` so the charted Hamiltonian is the
second-order coefficient of the reduced Hamiltonian (no ``eps``).

Second reduced space: equilibria on the ``beta`` sphere of radius ``G`` with
the chart ``(a, b)`` centered at the pole of sign ``s``.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import minimize_scalar

from .core import CartesianState, SystemConfig, integrate
from .errors import ChartSingularError, DomainError
from .numdiff import hessian
from .reduction import (
    SQRT3,
    ReducedPoint,
    SecondReducedPoint,
    reduced_second_order_first,
    reduced_vector_field_first,
    second_chart_ab,
    second_chart_inverse,
    second_order_second,
    second_reduced_vector_field,
)

SPACES = ("first", "second")

#: Centroid of the unit triangle; the first-order Lie transform of the
#: expansion is the translation ``q -> q + eps * CENTROID``.
CENTROID = np.array([0.5, SQRT3 / 6.0, 0.0])

_FIRST_DIRECTIONS = {
    1: np.array([0.0, 0.0, 1.0]),
    3: np.array([SQRT3 / 2, 0.5, 0.0]),
    5: np.array([0.5, -SQRT3 / 2, 0.0]),
}
_SECOND_DIRECTIONS = {
    1: np.array([0.0, 0.0, 1.0]),
    3: np.array([SQRT3 / 2, -0.5, 0.0]),
    5: np.array([0.5, SQRT3 / 2, 0.0]),
}

J4 = np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])
#: Poisson matrix of the (a, b) chart under J(beta): {a, b} = -1.
J2_SECOND = np.array([[0.0, -1.0], [1.0, 0.0]])

IMAG_TOL = 1e-10
GAP_TOL = 1e-8
COND_TOL = 1e8
DEFINITE_TOL = 1e-10


@dataclass(frozen=True)
class EquilibriumSpec:
    """One isolated relative equilibrium."""

    space: str
    index: int
    L: float
    G: Optional[float] = None
    coordinates: np.ndarray = field(default=None, compare=False)

    @property
    def chart_sign(self):
        """+1 for odd indices (upper chart sign), -1 for even ones."""
        return 1 if self.index % 2 == 1 else -1

    @property
    def pair(self):
        return (self.index + 1) // 2


def equilibrium(space, index, L, G=None):
    """Build the equilibrium ``E_index`` of the requested reduced space."""
    if space not in SPACES:
        raise DomainError(f"space must be one of {SPACES}")
    if index not in range(1, 7):
        raise DomainError("equilibrium index must be in 1..6")
    if not L > 0:
        raise DomainError("L must be positive")
    sign = 1.0 if index % 2 == 1 else -1.0
    base = 2 * ((index + 1) // 2) - 1
    if space == "first":
        u = _FIRST_DIRECTIONS[base] * sign * L
        coords = np.concatenate([u, u])
        G_val = None
    else:
        G_val = float(L if G is None else G)
        if not 0 < G_val <= L:
            raise DomainError("second-reduced equilibria need 0 < G <= L")
        coords = _SECOND_DIRECTIONS[base] * sign * G_val
    coords = coords.copy()
    coords.setflags(write=False)
    return EquilibriumSpec(space, index, float(L), G_val, coords)


def equilibria(space, L, G=None):
    return [equilibrium(space, i, L, G) for i in range(1, 7)]


def residual_field(e):
    """Reduced vector field at the equilibrium (should vanish)."""
    if e.space == "first":
        dx, dy = reduced_vector_field_first(ReducedPoint(e.coordinates[:3], e.coordinates[3:], e.L), 1.0)
        return np.concatenate([dx, dy])
    return second_reduced_vector_field(SecondReducedPoint(e.coordinates, e.L, e.G))


@dataclass(frozen=True)
class FirstChart:
    """Local canonical chart ``(Q1, Q2, P1, P2)`` on ``S^2 x S^2``."""

    L: float
    sign: int

    def forward(self, x, y):
        s, L = self.sign, self.L
        dx, dy = L + s * x[2], L + s * y[2]
        if dx <= 1e-14 or dy <= 1e-14:
            raise ChartSingularError("point lies on the excluded pole of the chart")
        rx, ry = np.sqrt(dx), np.sqrt(dy)
        return np.array([x[1] / rx, y[1] / ry, -s * x[0] / rx, -s * y[0] / ry])

    def inverse(self, z):
        Q1, Q2, P1, P2 = z
        s, L = self.sign, self.L
        v2, w2 = P1 * P1 + Q1 * Q1, P2 * P2 + Q2 * Q2
        if v2 > 2 * L or w2 > 2 * L:
            raise ChartSingularError("chart coordinates outside the disk of radius sqrt(2L)")
        rv, rw = np.sqrt(2 * L - v2), np.sqrt(2 * L - w2)
        x = np.array([-s * P1 * rv, Q1 * rv, s * (L - v2)])
        y = np.array([-s * P2 * rw, Q2 * rw, s * (L - w2)])
        return x, y


def chart_first(e):
    """Chart of :class:`FirstChart` type adapted to the equilibrium ``e``."""
    if e.space != "first":
        raise DomainError("chart_first needs a first-reduced equilibrium")
    return FirstChart(e.L, e.chart_sign)


def charted_hamiltonian(e):
    """Time-rescaled Hamiltonian in local chart coordinates and its origin.

    Returns ``(f, z0)`` with ``f`` a function of the chart coordinates and
    ``z0`` the equilibrium's chart coordinates.
    """
    if e.space == "first":
        chart = chart_first(e)
        z0 = chart.forward(e.coordinates[:3], e.coordinates[3:])
        return (lambda z: reduced_second_order_first(*chart.inverse(z), e.L)), z0
    s = e.chart_sign
    z0 = np.array(second_chart_ab(SecondReducedPoint(e.coordinates, e.L, e.G), s))
    return (lambda z: second_order_second(second_chart_inverse(z[0], z[1], e.G, e.L, s).beta, e.L)), z0


def hessian_at(e, step=None, levels=5):
    """Hessian of the charted Hamiltonian at the equilibrium.

    Extrapolated central differences; the default step ``0.05 sqrt(L)``
    (``0.05 sqrt(G)`` on the second space) follows the chart's natural length
    scale, with four Richardson eliminations.
    """
    f, z0 = charted_hamiltonian(e)
    if step is None:
        step = 0.05 * np.sqrt(e.L if e.space == "first" else e.G)
    return hessian(f, z0, step, levels)


@dataclass(frozen=True)
class StabilityReport:
    """Linear stability data of one relative equilibrium."""

    space: str
    index: int
    L: float
    hessian: np.ndarray
    hessian_det: float
    linearization: np.ndarray
    char_poly: np.ndarray
    eigenvalues: np.ndarray
    restricted_forms: tuple
    diagonalizable: bool
    verdict: str
    period: float
    epsilon: float
    reeb_multipliers: Optional[np.ndarray]

    def to_dict(self):
        def cplx(v):
            return [[float(z.real), float(z.imag)] for z in np.asarray(v, dtype=complex)]

        return {
            "space": self.space,
            "index": self.index,
            "L": self.L,
            "epsilon": self.epsilon,
            "hessian": self.hessian.tolist(),
            "hessian_det": self.hessian_det,
            "linearization": self.linearization.tolist(),
            "char_poly": self.char_poly.tolist(),
            "eigenvalues": cplx(self.eigenvalues),
            "restricted_forms": [list(map(float, r)) for r in self.restricted_forms],
            "diagonalizable": self.diagonalizable,
            "verdict": self.verdict,
            "period": self.period,
            "reeb_multipliers": None if self.reeb_multipliers is None else cplx(self.reeb_multipliers),
        }


def krein_gelfand(A, S):
    """Parametric-stability test of ``A = J S`` with quadratic form ``S``.

    Returns ``(verdict, eigenvalues, restricted_forms, diagonalizable)``.
    Eigenvalues with positive imaginary part are grouped when they coincide
    to ``GAP_TOL``; ``restricted_forms`` lists, per group, the eigenvalues of
    ``S`` restricted to the real invariant subspace spanned by the real and
    imaginary parts of the group's eigenvectors. The equilibrium is
    parametrically stable when every such restriction is definite.
    """
    lam, V = np.linalg.eig(A)
    scale = max(1.0, float(np.max(np.abs(lam))))
    gaps = [abs(lam[i] - lam[j]) for i in range(len(lam)) for j in range(i + 1, len(lam))]
    if min(gaps) > GAP_TOL * scale:
        diagonalizable = True
    else:
        diagonalizable = bool(np.linalg.cond(V) < COND_TOL)
    if np.any(np.abs(lam.real) > IMAG_TOL):
        return "unstable", lam, (), diagonalizable
    if not diagonalizable:
        return "unstable", lam, (), diagonalizable
    upper = [k for k in np.argsort(-lam.imag) if lam[k].imag > IMAG_TOL]
    groups = []
    for k in upper:
        if groups and abs(lam[k] - lam[groups[-1][0]]) <= GAP_TOL * scale:
            groups[-1].append(k)
        else:
            groups.append([k])
    restricted = []
    definite = True
    for group in groups:
        B = np.column_stack([part for k in group for part in (V[:, k].real, V[:, k].imag)])
        Q, _ = np.linalg.qr(B)
        Sk = Q.T @ S @ Q
        ev = np.linalg.eigvalsh(0.5 * (Sk + Sk.T))
        restricted.append(tuple(ev))
        tol = DEFINITE_TOL * max(1.0, float(np.max(np.abs(ev))))
        if not (np.all(ev > tol) or np.all(ev < -tol)):
            definite = False
    nonsingular = bool(np.min(np.abs(lam)) > IMAG_TOL)
    verdict = "parametrically-stable" if (definite and nonsingular) else "weakly-stable"
    return verdict, lam, tuple(restricted), diagonalizable


def classify(e, epsilon=0.0):
    """Hessian, linearization, spectrum, Krein-Gel'fand verdict and multipliers."""
    S = hessian_at(e)
    J = J4 if e.space == "first" else J2_SECOND
    A = J @ S
    verdict, lam, restricted, diag = krein_gelfand(A, S)
    order = np.lexsort((lam.real, lam.imag))
    lam = lam[order]
    period = 2.0 * np.pi * e.L**3
    multipliers = None
    if e.space == "first":
        multipliers = _multipliers(lam, epsilon, period)
    return StabilityReport(e.space, e.index, e.L, S, float(np.linalg.det(S)), A,
                           np.real(np.poly(A)), lam, restricted, diag, verdict,
                           period, float(epsilon), multipliers)


def _multipliers(lam, epsilon, period):
    return np.concatenate([[1.0 + 0j, 1.0 + 0j], 1.0 + epsilon**2 * lam * period])


def reeb_data(e, epsilon, report=None):
    """Period ``2 pi L^3`` and first-order characteristic multipliers.

    The multipliers are ``1, 1`` and ``1 + eps^2 lambda_j T`` for the four
    eigenvalues of the rescaled-time linearization.
    """
    if e.space != "first":
        raise DomainError("Reeb data are defined for first-reduced equilibria")
    if report is None:
        report = classify(e, epsilon)
    period = 2.0 * np.pi * e.L**3
    return period, _multipliers(report.eigenvalues, epsilon, period)


def reconstruct_orbit(e, epsilon, first_order=True):
    """Initial condition of the periodic orbit generated by ``e``.

    The circular Kepler orbit of radius ``L^2`` whose angular momentum is
    ``beta = (x + y)/2`` starts at the ascending node (the ``q1`` axis when
    the orbit is equatorial). With ``first_order`` the position is shifted by
    ``eps * CENTROID``: the first-order near-identity transformation of the
    expansion is exactly this translation, so the circle is centered on the
    triangle's centroid instead of on the first center.
    """
    if e.space != "first":
        raise DomainError("reconstruction is defined for first-reduced equilibria")
    beta = 0.5 * (e.coordinates[:3] + e.coordinates[3:])
    G = float(np.linalg.norm(beta))
    w = beta / G
    node = np.cross([0.0, 0.0, 1.0], w)
    if np.linalg.norm(node) < 1e-12:
        node = np.array([1.0, 0.0, 0.0])
    else:
        node /= np.linalg.norm(node)
    radius = e.L**2
    q = radius * node
    p = np.cross(w, node) * (G / radius)
    if first_order:
        q = q + epsilon * CENTROID
    return CartesianState(q, p)


def _config(epsilon, cfg):
    if cfg is None:
        return SystemConfig(epsilon)
    if cfg.epsilon != epsilon:
        raise DomainError("cfg.epsilon differs from the requested epsilon")
    return cfg


def near_return_distance(e, epsilon, cfg=None, span=1.2, samples=2401, first_order=True):
    """Distance curve ``f(t) = |z(0) - z(t)|`` over ``[0, span T]``.

    Returns ``((t, f), f_at_T)`` where ``f_at_T`` is the minimum of ``f`` over
    ``[0.9 T, 1.1 T]``, refined on the dense interpolant.
    """
    cfg = _config(epsilon, cfg)
    s0 = reconstruct_orbit(e, epsilon, first_order)
    period = 2.0 * np.pi * e.L**3
    traj = integrate(s0, span * period, cfg, samples=samples)
    z0 = s0.as_array()
    states = np.column_stack([traj.q, traj.p])
    f = np.linalg.norm(states - z0, axis=1)
    f_at_T = _window_minimum(traj, z0, f, 0.9 * period, 1.1 * period)
    return (traj.times, f), f_at_T


def _window_minimum(traj, z0, f, lo, hi):
    t = traj.times
    mask = (t >= lo) & (t <= hi)
    idx = np.flatnonzero(mask)
    k = idx[np.argmin(f[idx])]
    a = max(t[max(k - 1, 0)], lo)
    b = min(t[min(k + 1, len(t) - 1)], hi)
    res = minimize_scalar(lambda s: np.linalg.norm(traj.dense(s) - z0), bounds=(a, b),
                          method="bounded", options={"xatol": 1e-14 * max(1.0, b)})
    return float(min(res.fun, f[k]))


def return_envelope(e, epsilon, periods=10, cfg=None, samples_per_period=400, first_order=True):
    """Near-return distances after each of ``periods`` revolutions.

    Entry ``k`` is the minimum of ``f`` within a quarter period of ``(k+1) T``;
    its growth with ``k`` is the instability signature.
    """
    cfg = _config(epsilon, cfg)
    s0 = reconstruct_orbit(e, epsilon, first_order)
    period = 2.0 * np.pi * e.L**3
    t_end = (periods + 0.3) * period
    traj = integrate(s0, t_end, cfg, samples=int(samples_per_period * (periods + 0.3)) + 1)
    z0 = s0.as_array()
    f = np.linalg.norm(np.column_stack([traj.q, traj.p]) - z0, axis=1)
    env = [_window_minimum(traj, z0, f, (k - 0.25) * period, (k + 0.25) * period)
           for k in range(1, periods + 1)]
    return np.array(env)
