"""First and second reduced spaces of the normalized problem.

First reduction: the Kepler symmetry is divided out with the invariants
``x = G + L A`` and ``y = G - L A`` (angular momentum ``G``, Laplace-Runge-Lenz
vector ``A``). They satisfy ``|x| = |y| = L`` and the brackets
``{x_i, x_j} = 2 eps_ijk x_k``, ``{y_i, y_j} = 2 eps_ijk y_k``, ``{x_i, y_j} = 0``
(with ``{f, g} = f_q g_p - f_p g_q``).

Second reduction: the periapsis symmetry is divided out with
``beta = (x + y)/2``, the angular-momentum vector, on the sphere ``|beta| = G``.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .core import SQRT3
from .errors import ChartSingularError, DomainError, SingularityError

#: Reduced-space points closer than this to a degenerate locus raise errors.
DEGENERACY_GUARD = 1e-12


@dataclass(frozen=True)
class ReducedPoint:
    """Point ``(x, y)`` of the first reduced space ``S^2 x S^2`` of radius ``L``."""

    x: np.ndarray
    y: np.ndarray
    L: float

    def __post_init__(self):
        x = np.array(self.x, dtype=float).reshape(3)
        y = np.array(self.y, dtype=float).reshape(3)
        x.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "L", float(self.L))

    def casimir_defects(self):
        """``(|x|^2 - L^2, |y|^2 - L^2)``."""
        return float(self.x @ self.x - self.L**2), float(self.y @ self.y - self.L**2)


@dataclass(frozen=True)
class SecondReducedPoint:
    """Angular-momentum vector ``beta`` on the sphere of radius ``G``."""

    beta: np.ndarray
    L: float
    G: float = None

    def __post_init__(self):
        b = np.array(self.beta, dtype=float).reshape(3)
        b.setflags(write=False)
        object.__setattr__(self, "beta", b)
        object.__setattr__(self, "L", float(self.L))
        if self.G is None:
            object.__setattr__(self, "G", float(np.linalg.norm(b)))

    @property
    def degenerate(self):
        """True at the rectilinear limit ``beta = 0`` (outside ``G > 0``)."""
        return bool(np.linalg.norm(self.beta) < DEGENERACY_GUARD)


def to_reduced_first(s):
    """First-reduced invariants of a bound Cartesian state."""
    q, p = s.q, s.p
    r = float(np.linalg.norm(q))
    energy = 0.5 * float(p @ p) - 1.0 / r
    if not energy < 0:
        raise DomainError("state is not bound (Kepler energy >= 0)")
    L = 1.0 / np.sqrt(-2.0 * energy)
    Gv = np.cross(q, p)
    Av = np.cross(p, Gv) - q / r
    return ReducedPoint(Gv + L * Av, Gv - L * Av, L)


def _alpha(x, y):
    s = x + y
    alpha = 0.5 * float(s @ s)
    if alpha < DEGENERACY_GUARD:
        raise SingularityError("reduced Hamiltonian is singular at x + y = 0")
    return s, alpha


def quadrupole_form_first(s):
    """``s1^2 + 2 sqrt3 s1 s2 - s2^2 - 8 s3^2`` for ``s = x + y``."""
    return s[0] ** 2 + 2 * SQRT3 * s[0] * s[1] - s[1] ** 2 - 8 * s[2] ** 2


def reduced_second_order_first(x, y, L):
    """Second-order coefficient of the first-reduced Hamiltonian.

    ``N(x + y) / (3 (2 alpha)^{5/2} L^3)`` with ``alpha = |x + y|^2 / 2``; the
    full Hamiltonian is ``-1/(2L^2) + eps^2/2`` times this value.
    """
    s, alpha = _alpha(np.asarray(x, float), np.asarray(y, float))
    return quadrupole_form_first(s) / (3.0 * (2.0 * alpha) ** 2.5 * L**3)


def reduced_hamiltonian_first(r, epsilon):
    """Normalized Hamiltonian on the first reduced space."""
    return -0.5 / r.L**2 + 0.5 * epsilon**2 * reduced_second_order_first(r.x, r.y, r.L)


def reduced_vector_field_first(r, epsilon):
    """Closed-form equations of motion on ``S^2 x S^2``; returns ``(dx, dy)``.

    They coincide with ``dx = 2 grad_x H x x`` and ``dy = 2 grad_y H x y`` for
    the normalized Hamiltonian ``H``, i.e. the flow ``x' = {x, H}`` of the
    bracket ``{x_i, x_j} = 2 eps_ijk x_k``.
    """
    x, y, L = r.x, r.y, r.L
    a, al = _alpha(x, y)
    a1, a2, a3 = a
    x1, x2, x3 = x
    y1, y2, y3 = y
    pre = epsilon**2 / (24.0 * np.sqrt(2.0) * al**3.5 * L**3)
    dx1 = (x2 * a3 * (32 * al + 5 * a1**2 + 10 * SQRT3 * a2 * a1 - 5 * a2**2 - 40 * a3**2)
           + x3 * (-5 * a2 * a1**2 + 2 * SQRT3 * (2 * al - 5 * a2**2) * a1
                   + a2 * (-4 * al + 5 * a2**2 + 40 * a3**2)))
    dx2 = (5 * x3 * a1**3 + 5 * (2 * SQRT3 * x3 * a2 - x1 * a3) * a1**2
           - (5 * x3 * a2**2 + 10 * SQRT3 * x1 * a3 * a2 + 4 * x3 * (al + 10 * a3**2)) * a1
           - 4 * SQRT3 * al * x3 * a2 + 5 * x1 * a2**2 * a3 + 8 * x1 * a3 * (5 * a3**2 - 4 * al))
    dx3 = (-5 * x2 * a1**3 + 5 * (x1 - 2 * SQRT3 * x2) * a2 * a1**2
           + (5 * (2 * SQRT3 * x1 + x2) * a2**2 + 40 * x2 * a3**2
              - 4 * SQRT3 * al * x1 + 4 * al * x2) * a1
           + a2 * (4 * al * (x1 + SQRT3 * x2) - 5 * x1 * (a2**2 + 8 * a3**2)))
    n = quadrupole_form_first(a)
    b1, b2, b3 = a  # derivatives of alpha with respect to y equal those with respect to x
    dy1 = -5 * n * (y3 * b2 - y2 * b3) + 4 * al * (SQRT3 * y3 * a1 - y3 * a2 + 8 * y2 * a3)
    dy2 = 5 * n * (y3 * b1 - y1 * b3) - 4 * al * (y3 * a1 + SQRT3 * y3 * a2 + 8 * y1 * a3)
    dy3 = -5 * n * (y2 * b1 - y1 * b2) + 4 * al * ((y2 - SQRT3 * y1) * a1 + (y1 + SQRT3 * y2) * a2)
    return pre * np.array([dx1, dx2, dx3]), pre * np.array([dy1, dy2, dy3])


def to_second_reduced(r):
    """``beta = (x + y)/2``; the result is flagged degenerate when ``beta = 0``."""
    return SecondReducedPoint(0.5 * (r.x + r.y), r.L)


def quadrupole_form_second(b):
    """``-b1^2 + 2 sqrt3 b1 b2 + b2^2 + 8 b3^2``."""
    return -b[0] ** 2 + 2 * SQRT3 * b[0] * b[1] + b[1] ** 2 + 8 * b[2] ** 2


def second_order_second(beta, L):
    """Second-order coefficient of the second-reduced Hamiltonian."""
    beta = np.asarray(beta, dtype=float)
    n2 = float(beta @ beta)
    if n2 < DEGENERACY_GUARD**2:
        raise SingularityError("second-reduced Hamiltonian is singular at beta = 0")
    return quadrupole_form_second(beta) / (24.0 * L**3 * n2**2.5)


def second_reduced_hamiltonian(b, epsilon):
    """Normalized Hamiltonian on the ``beta`` sphere."""
    return -0.5 / b.L**2 + 0.5 * epsilon**2 * second_order_second(b.beta, b.L)


def poisson_matrix(beta):
    """``J(beta) = hat(beta)``, so ``J v = beta x v``."""
    b1, b2, b3 = beta
    return np.array([[0.0, -b3, b2], [b3, 0.0, -b1], [-b2, b1, 0.0]])


def second_reduced_vector_field(b):
    """Time-rescaled polynomial equations of motion on the ``beta`` sphere.

    Along the sphere this field equals ``-(12 L^3 G^5) J(beta) grad K`` where
    ``K`` is the second-order coefficient; only its direction is meaningful.
    """
    b1, b2, b3 = b.beta
    return np.array([b3 * (SQRT3 * b1 - 7 * b2),
                     b3 * (9 * b1 - SQRT3 * b2),
                     -SQRT3 * b1**2 - 2 * b1 * b2 + SQRT3 * b2**2])


def second_chart_ab(b, sign=1):
    """Forward chart ``beta -> (a, b)`` centered at ``(0, 0, sign G)``."""
    sign = _sign(sign)
    G = b.G
    b1, b2, b3 = b.beta
    den = G + sign * b3
    if den <= DEGENERACY_GUARD:
        raise ChartSingularError("point is the antipode of the chart center")
    root = np.sqrt(2.0 / den)
    return b1 * root, sign * b2 * root


def second_chart_inverse(a, bb, G, L, sign=1):
    """Inverse of :func:`second_chart_ab`."""
    sign = _sign(sign)
    rad = 4.0 * G - a * a - bb * bb
    if rad < 0:
        raise ChartSingularError("chart coordinates outside the disk a^2 + b^2 <= 4G")
    root = np.sqrt(rad)
    beta = np.array([0.5 * a * root, sign * 0.5 * bb * root,
                     sign * 0.5 * (2.0 * G - a * a - bb * bb)])
    return SecondReducedPoint(beta, L, G)


def chart_hamiltonian_second(a, bb, G, L, epsilon, sign=1):
    """Hamiltonian of the ``beta`` sphere written in the ``(a, b)`` chart.

    The additive constant is ``-1/(2L^2)`` so that the value agrees with
    :func:`second_reduced_hamiltonian` at the corresponding point.
    """
    sign = _sign(sign)
    quad = 7 * bb**2 - sign * 2 * SQRT3 * a * bb + 9 * a**2
    num = 32 * G**2 - 4 * G * quad + (a**2 + bb**2) * quad
    return -0.5 / L**2 + 0.5 * epsilon**2 * num / (96.0 * G**5 * L**3)


def _sign(sign):
    if sign not in (1, -1):
        raise DomainError("chart sign must be +1 or -1")
    return sign


REDUCED_FIRST_HEADER = "t,x1,x2,x3,y1,y2,y3"
REDUCED_SECOND_HEADER = "t,b1,b2,b3"


def integrate_reduced_first(r0, t_end, epsilon=1.0, samples=201, rtol=1e-12, atol=1e-14):
    """Integrate the first-reduced equations; returns ``(t, rows)``.

    ``rows`` has columns ``x1..x3, y1..y3``.
    """
    def rhs(_t, z):
        dx, dy = reduced_vector_field_first(ReducedPoint(z[:3], z[3:], r0.L), epsilon)
        return np.concatenate([dx, dy])

    t = np.linspace(0.0, t_end, samples)
    sol = solve_ivp(rhs, (0.0, t_end), np.concatenate([r0.x, r0.y]), method="DOP853",
                    rtol=rtol, atol=atol, t_eval=t)
    if sol.status != 0:
        raise SingularityError(f"reduced integration failed: {sol.message}")
    return sol.t, sol.y.T


def integrate_reduced_second(b0, t_end, samples=201, rtol=1e-12, atol=1e-14):
    """Integrate the polynomial ``beta`` equations; returns ``(t, rows)``."""
    def rhs(_t, z):
        return second_reduced_vector_field(SecondReducedPoint(z, b0.L, b0.G))

    t = np.linspace(0.0, t_end, samples)
    sol = solve_ivp(rhs, (0.0, t_end), b0.beta.copy(), method="DOP853",
                    rtol=rtol, atol=atol, t_eval=t)
    if sol.status != 0:
        raise SingularityError(f"reduced integration failed: {sol.message}")
    return sol.t, sol.y.T
