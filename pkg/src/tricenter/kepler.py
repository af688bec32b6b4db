"""Delaunay action-angle chart of the Kepler problem.

Conventions (unit gravitational parameter):

* ``L = sqrt(a)``, ``G = |q x p|``, ``H = (q x p)_z``; ``e = sqrt(1 - G^2/L^2)``
  and ``eta = G/L``.
* The orbital frame is obtained from the perifocal frame by the rotation
  ``R3(h) R1(i) R3(g)`` with ``cos i = H/G``. With this choice the
  angular-momentum vector is ``G (sin i sin h, -sin i cos h, cos i)``.

All array-level helpers broadcast over leading axes; an element array has its
six components ``(ell, g, h, L, G, H)`` on the last axis.
"""

import json
from dataclasses import asdict, dataclass

import numpy as np

from .core import CartesianState
from .errors import DomainError, NumericalError

TWO_PI = 2.0 * np.pi

#: Below these thresholds the chart angles are undefined and flagged.
CIRCULAR_THRESHOLD = 1e-12
EQUATORIAL_THRESHOLD = 1e-12

ELEMENT_KEYS = ("ell", "g", "h", "L", "G", "H")


@dataclass(frozen=True)
class DelaunayElements:
    """Delaunay elements ``(ell, g, h, L, G, H)``.

    ``chart_singular`` is set by :func:`cartesian_to_delaunay` for
    near-circular or near-equatorial states, where some angles are
    conventional rather than defined.
    """

    ell: float
    g: float
    h: float
    L: float
    G: float
    H: float
    chart_singular: bool = False

    @property
    def e(self):
        return float(np.sqrt(max(0.0, 1.0 - (self.G / self.L) ** 2)))

    @property
    def eta(self):
        return self.G / self.L

    def as_array(self):
        return np.array([self.ell, self.g, self.h, self.L, self.G, self.H])

    @classmethod
    def from_array(cls, d):
        return cls(*(float(v) for v in np.asarray(d, dtype=float)[:6]))

    def to_json(self):
        rec = {k: float(v) for k, v in asdict(self).items() if k in ELEMENT_KEYS}
        return json.dumps(rec, indent=2)

    @classmethod
    def from_json(cls, text):
        rec = json.loads(text)
        return cls(*(float(rec[k]) for k in ELEMENT_KEYS))


def as_element_array(d):
    """Return an ``(..., 6)`` float array from elements or array input."""
    if isinstance(d, DelaunayElements):
        return d.as_array()
    return np.asarray(d, dtype=float)


def check_domain(L, G, H, allow_boundary=False):
    """Raise ``DomainError`` unless ``|H| < G < L`` elementwise.

    With ``allow_boundary`` the closure ``|H| <= G <= L, G > 0`` is accepted.
    """
    L, G, H = np.broadcast_arrays(L, G, H)
    if allow_boundary:
        ok = (np.abs(H) <= G) & (G <= L) & (G > 0)
    else:
        ok = (np.abs(H) < G) & (G < L) & (G > 0)
    if not np.all(ok):
        rel = "<=" if allow_boundary else "<"
        raise DomainError(f"Delaunay actions must satisfy |H| {rel} G {rel} L, G > 0")


def solve_kepler(ell, e, tol=1e-14, max_iter=100):
    """Solve Kepler's equation ``E - e sin E = ell`` for the eccentric anomaly.

    Works elementwise on arrays. Newton's method is started from
    ``ell + 0.85 e sign(sin ell)``; entries that fail to converge fall back to
    bisection on ``[M - e, M + e]``, which always brackets the root. The
    returned ``E`` satisfies the equation for the given (unreduced) ``ell``.
    """
    ell = np.asarray(ell, dtype=float)
    e = np.asarray(e, dtype=float)
    if np.any((e < 0) | (e >= 1)):
        raise DomainError("eccentricity must lie in [0, 1)")
    if tol <= 0:
        raise DomainError("tolerance must be positive")
    ell_b, e_b = np.broadcast_arrays(ell, e)
    shift = TWO_PI * np.floor((ell_b + np.pi) / TWO_PI)
    M = ell_b - shift
    E = M + 0.85 * e_b * np.sign(np.sin(M))
    converged = np.zeros(M.shape, dtype=bool)
    for _ in range(max_iter):
        f = E - e_b * np.sin(E) - M
        converged = np.abs(f) <= tol
        if np.all(converged):
            break
        step = f / (1.0 - e_b * np.cos(E))
        E = np.where(converged, E, E - step)
    f = E - e_b * np.sin(E) - M
    bad = (np.abs(f) > tol) | ~np.isfinite(E)
    if np.any(bad):
        lo = (M - e_b)[bad]
        hi = (M + e_b)[bad]
        ee = e_b[bad]
        mm = M[bad]
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            fm = mid - ee * np.sin(mid) - mm
            lo = np.where(fm < 0, mid, lo)
            hi = np.where(fm < 0, hi, mid)
        root = 0.5 * (lo + hi)
        if np.any(np.abs(root - ee * np.sin(root) - mm) > max(tol, 1e-15 * (1 + np.max(np.abs(mm))))):
            raise NumericalError("Kepler equation did not converge")
        E = E.copy()
        E[bad] = root
    out = E + shift
    return float(out) if out.ndim == 0 else out


def _rotation_columns(g, h, cos_i, sin_i):
    """First two columns of ``R3(h) R1(i) R3(g)`` (perifocal x and y axes)."""
    cg, sg, ch, sh = np.cos(g), np.sin(g), np.cos(h), np.sin(h)
    px = np.stack([ch * cg - sh * cos_i * sg,
                   sh * cg + ch * cos_i * sg,
                   sin_i * sg], axis=-1)
    py = np.stack([-ch * sg - sh * cos_i * cg,
                   -sh * sg + ch * cos_i * cg,
                   sin_i * cg], axis=-1)
    return px, py


def elements_to_cartesian_array(d):
    """Array version of :func:`delaunay_to_cartesian`; returns ``(q, p)``."""
    d = as_element_array(d)
    ell, g, h, L, G, H = np.moveaxis(d, -1, 0)
    eta = G / L
    e = np.sqrt(np.clip(1.0 - eta**2, 0.0, None))
    E = np.asarray(solve_kepler(ell, e))
    cos_i = H / G
    sin_i = np.sqrt(np.clip(1.0 - cos_i**2, 0.0, None))
    a = L**2
    cE, sE = np.cos(E), np.sin(E)
    Edot = 1.0 / (L**3 * (1.0 - e * cE))
    x_pf, y_pf = a * (cE - e), a * eta * sE
    vx_pf, vy_pf = -a * sE * Edot, a * eta * cE * Edot
    px, py = _rotation_columns(g, h, cos_i, sin_i)
    q = x_pf[..., None] * px + y_pf[..., None] * py
    p = vx_pf[..., None] * px + vy_pf[..., None] * py
    return q, p


def delaunay_to_cartesian(d, allow_boundary=False):
    """Kepler state with the given Delaunay elements.

    ``allow_boundary`` admits circular (``G = L``) and equatorial
    (``|H| = G``) orbits, where the state is the continuous limit of the map.
    """
    arr = as_element_array(d)
    check_domain(arr[3], arr[4], arr[5], allow_boundary)
    q, p = elements_to_cartesian_array(arr)
    return CartesianState(q, p)


def angular_momentum_direction(h, cos_i):
    """Unit angular-momentum vector ``(sin i sin h, -sin i cos h, cos i)``."""
    sin_i = np.sqrt(np.clip(1.0 - cos_i**2, 0.0, None))
    return np.array([sin_i * np.sin(h), -sin_i * np.cos(h), cos_i])


def cartesian_to_delaunay(s):
    """Delaunay elements of a bound Kepler state.

    For near-circular states (``e < 1e-12``) the periapsis is undefined; it is
    placed at the ascending node (``g = 0``) so ``ell`` is the argument of
    latitude. For near-equatorial states (``G - |H| < 1e-12``) the node is
    placed on the ``q1`` axis (``h = 0``). Either case sets
    ``chart_singular``. Angles are returned in ``[0, 2 pi)``.
    """
    q, p = s.q, s.p
    r = float(np.linalg.norm(q))
    energy = 0.5 * float(p @ p) - 1.0 / r
    if not energy < 0:
        raise DomainError("state is not bound (Kepler energy >= 0)")
    L = 1.0 / np.sqrt(-2.0 * energy)
    Gv = np.cross(q, p)
    G = float(np.linalg.norm(Gv))
    if G == 0.0:
        raise DomainError("rectilinear state (zero angular momentum)")
    H = float(Gv[2])
    Av = np.cross(p, Gv) - q / r
    e = float(np.linalg.norm(Av))
    w = Gv / G

    circular = e < CIRCULAR_THRESHOLD
    equatorial = (G - abs(H)) < EQUATORIAL_THRESHOLD

    if equatorial:
        node = np.array([1.0, 0.0, 0.0])
        h = 0.0
    else:
        node = np.array([-Gv[1], Gv[0], 0.0])
        node /= np.linalg.norm(node)
        h = float(np.arctan2(Gv[0], -Gv[1]))
    node_perp = np.cross(w, node)

    if circular:
        g = 0.0
        u = float(np.arctan2(q @ node_perp, q @ node))
        ell = u
    else:
        a_hat = Av / e
        g = float(np.arctan2(a_hat @ node_perp, a_hat @ node))
        f = float(np.arctan2(np.cross(a_hat, q) @ w, a_hat @ q))
        E = np.arctan2(np.sqrt(1.0 - e * e) * np.sin(f), e + np.cos(f))
        ell = float(E - e * np.sin(E))
    return DelaunayElements(ell % TWO_PI, g % TWO_PI, h % TWO_PI, float(L), G, H,
                            chart_singular=bool(circular or equatorial))
