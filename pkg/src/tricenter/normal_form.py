"""Delaunay form of the expanded Hamiltonian and its first Lie-Deprit step.

Every function here accepts either a :class:`DelaunayElements` value or an
array whose last axis holds ``(ell, g, h, L, G, H)``, and broadcasts over
the leading axes. That lets the quadratures and finite-difference brackets
run on whole grids at once.

Bracket convention, frozen after checking the homological equation::

    {F, K} = sum over (angle, action) pairs of
             dF/d angle * dK/d action - dF/d action * dK/d angle

With it ``{ell, L} = 1`` and ``{H0, W1} + H1 = 0`` where ``H0 = -1/(2L^2)``,
i.e. ``dW1/d ell = L^3 H1``.
"""

import numpy as np

from .errors import DomainError, SingularityError
from .kepler import as_element_array, check_domain, solve_kepler
from .numdiff import richardson

SQRT3 = np.sqrt(3.0)
TWO_PI = 2.0 * np.pi

#: Eccentricity below which the 1/e factor of the generator is rejected.
W1_MIN_ECCENTRICITY = 1e-6


def _unpack(d):
    arr = as_element_array(d)
    if arr.shape[-1] != 6:
        raise DomainError("Delaunay arrays need six components on the last axis")
    ell, g, h, L, G, H = np.moveaxis(arr, -1, 0)
    return ell, g, h, L, G, H


def _anomalies(ell, L, G):
    eta = G / L
    e = np.sqrt(np.clip(1.0 - eta**2, 0.0, None))
    E = np.asarray(solve_kepler(ell, e))
    return e, eta, E


def _scalar(x):
    x = np.asarray(x)
    return float(x) if x.ndim == 0 else x


def h0_delaunay(d):
    """Kepler energy ``-1/(2 L^2)``."""
    L = _unpack(d)[3]
    return _scalar(-0.5 / L**2)


def h1_delaunay(d):
    """First-order term (dipole about the first center) in Delaunay form."""
    ell, g, h, L, G, H = _unpack(d)
    check_domain(L, G, H)
    e, eta, E = _anomalies(ell, L, G)
    cE, sE = np.cos(E), np.sin(E)
    cg, sg, ch, sh = np.cos(g), np.sin(g), np.cos(h), np.sin(h)
    a = 3.0 * ch + SQRT3 * sh
    b = SQRT3 * ch - 3.0 * sh
    bracket = (cg * (G * (cE - e) * a + eta * H * sE * b)
               - sg * (H * (e - cE) * b + eta * G * sE * a))
    return _scalar(bracket / (6.0 * G * L**4 * (e * cE - 1.0) ** 3))


# Monomial table of the second-order term. Each row is
#   (coefficient, power of H/G,
#    powers of c, w, eta, sin E, cos g, sin g, cos h, sin h,
#    power of 1/D)
# with c = cos E - e, w = 1 - e^2, D = 1 - e cos E; every term carries 1/L^6.
_H2_TERMS = (
    (1 / 2, 2, 2, 0, 0, 0, 2, 0, 0, 0, 5),
    (1 / 8, 2, 0, 0, 0, 0, 0, 0, 2, 0, 3),
    (1 / 8, 2, 0, 1, 0, 2, 2, 0, 2, 0, 5),
    (1 / 8, 2, 2, 0, 0, 0, 0, 2, 2, 0, 5),
    (1 / 2, 2, 0, 1, 0, 2, 0, 2, 0, 0, 5),
    (1 / 8, 2, 2, 0, 0, 0, 2, 0, 0, 2, 5),
    (1 / 8, 2, 0, 1, 0, 2, 0, 2, 0, 2, 5),
    (1 / 2, 2, 1, 0, 1, 1, 1, 1, 2, 0, 5),
    (SQRT3 / 4, 2, 0, 1, 0, 2, 2, 0, 1, 1, 5),
    (SQRT3 / 4, 2, 2, 0, 0, 0, 0, 2, 1, 1, 5),
    (SQRT3 / 4, 2, 0, 0, 0, 0, 0, 0, 1, 1, 3),
    (-1 / 2, 2, 0, 0, 0, 0, 0, 0, 0, 0, 3),
    (-1 / 8, 2, 0, 0, 0, 0, 0, 0, 0, 2, 3),
    (SQRT3, 2, 1, 0, 1, 1, 1, 1, 1, 1, 5),
    (-2, 2, 1, 0, 1, 1, 1, 1, 0, 0, 5),
    (-1 / 2, 2, 0, 1, 0, 2, 2, 0, 0, 0, 5),
    (-1 / 2, 2, 2, 0, 0, 0, 0, 2, 0, 0, 5),
    (-1 / 2, 2, 1, 0, 1, 1, 1, 1, 0, 2, 5),
    (-SQRT3 / 4, 2, 0, 1, 0, 2, 0, 2, 1, 1, 5),
    (-SQRT3 / 4, 2, 2, 0, 0, 0, 2, 0, 1, 1, 5),
    (-1 / 8, 2, 2, 0, 0, 0, 2, 0, 2, 0, 5),
    (-1 / 8, 2, 0, 1, 0, 2, 0, 2, 2, 0, 5),
    (-1 / 8, 2, 0, 1, 0, 2, 2, 0, 0, 2, 5),
    (-1 / 8, 2, 2, 0, 0, 0, 0, 2, 0, 2, 5),
    (SQRT3 / 2, 1, 1, 0, 1, 1, 0, 2, 2, 0, 5),
    (SQRT3 / 2, 1, 1, 0, 1, 1, 2, 0, 0, 2, 5),
    (SQRT3 / 2, 1, 2, 0, 0, 0, 1, 1, 0, 2, 5),
    (SQRT3 / 2, 1, 0, 1, 0, 2, 1, 1, 2, 0, 5),
    (1, 1, 1, 0, 1, 1, 2, 0, 1, 1, 5),
    (1, 1, 2, 0, 0, 0, 1, 1, 1, 1, 5),
    (-1, 1, 1, 0, 1, 1, 0, 2, 1, 1, 5),
    (-1, 1, 0, 1, 0, 2, 1, 1, 1, 1, 5),
    (-SQRT3 / 2, 1, 1, 0, 1, 1, 0, 2, 0, 2, 5),
    (-SQRT3 / 2, 1, 0, 1, 0, 2, 1, 1, 0, 2, 5),
    (-SQRT3 / 2, 1, 1, 0, 1, 1, 2, 0, 2, 0, 5),
    (-SQRT3 / 2, 1, 2, 0, 0, 0, 1, 1, 2, 0, 5),
    (1 / 2, 0, 0, 1, 0, 2, 2, 0, 0, 0, 5),
    (1 / 8, 0, 0, 1, 0, 2, 2, 0, 2, 0, 5),
    (1 / 8, 0, 2, 0, 0, 0, 0, 2, 2, 0, 5),
    (1 / 2, 0, 2, 0, 0, 0, 0, 2, 0, 0, 5),
    (1 / 8, 0, 0, 0, 0, 0, 0, 0, 0, 2, 3),
    (1 / 2, 0, 1, 0, 1, 1, 1, 1, 2, 0, 5),
    (2, 0, 1, 0, 1, 1, 1, 1, 0, 0, 5),
    (SQRT3 / 4, 0, 0, 1, 0, 2, 2, 0, 1, 1, 5),
    (SQRT3 / 4, 0, 2, 0, 0, 0, 0, 2, 1, 1, 5),
    (SQRT3, 0, 1, 0, 1, 1, 1, 1, 1, 1, 5),
    (-SQRT3 / 4, 0, 0, 0, 0, 0, 0, 0, 1, 1, 3),
    (1 / 6, 0, 0, 0, 0, 0, 0, 0, 0, 0, 3),
    (-1 / 8, 0, 0, 0, 0, 0, 0, 0, 2, 0, 3),
    (-1 / 2, 0, 2, 0, 0, 0, 2, 0, 0, 0, 5),
    (-1 / 2, 0, 0, 1, 0, 2, 0, 2, 0, 0, 5),
    (-1 / 2, 0, 1, 0, 1, 1, 1, 1, 0, 2, 5),
    (-SQRT3 / 4, 0, 0, 1, 0, 2, 0, 2, 1, 1, 5),
    (-SQRT3 / 4, 0, 2, 0, 0, 0, 2, 0, 1, 1, 5),
    (-1 / 8, 0, 2, 0, 0, 0, 2, 0, 2, 0, 5),
    (-1 / 8, 0, 0, 1, 0, 2, 0, 2, 2, 0, 5),
    (-1 / 8, 0, 0, 1, 0, 2, 2, 0, 0, 2, 5),
    (-1 / 8, 0, 2, 0, 0, 0, 0, 2, 0, 2, 5),
)

# Two H-independent terms that the Cartesian composition check shows are
# required: they mirror rows 6 and 7 of the (H/G)^2 block. Without them the
# table differs from the Cartesian second-order term by an O(1) amount.
_H2_COMPLETION = (
    (1 / 8, 0, 2, 0, 0, 0, 2, 0, 0, 2, 5),
    (1 / 8, 0, 0, 1, 0, 2, 0, 2, 0, 2, 5),
)


def _h2_from_table(d, rows):
    ell, g, h, L, G, H = _unpack(d)
    check_domain(L, G, H)
    e, eta, E = _anomalies(ell, L, G)
    cE = np.cos(E)
    bases = (cE - e, 1.0 - e**2, eta, np.sin(E),
             np.cos(g), np.sin(g), np.cos(h), np.sin(h))
    k = H / G
    D = 1.0 - e * cE
    total = np.zeros(np.broadcast(ell, g, h, L, G, H).shape)
    for coef, hpow, *powers, dpow in rows:
        term = coef * k**hpow / D**dpow
        for base, pw in zip(bases, powers):
            if pw:
                term = term * base**pw
        total = total + term
    return _scalar(total / L**6)


def h2_delaunay(d, complete=True):
    """Second-order term (quadrupole about the first center) in Delaunay form.

    With ``complete=False`` only the 58 tabulated monomials are summed, which
    omits two terms; this variant exists to document that omission.
    """
    rows = _H2_TERMS + _H2_COMPLETION if complete else _H2_TERMS
    return _h2_from_table(d, rows)


def w1(d):
    """First-order Lie generator solving ``{H0, W1} + H1 = 0``.

    Raises ``SingularityError`` for ``e < 1e-6`` (explicit 1/e factor).
    """
    ell, g, h, L, G, H = _unpack(d)
    check_domain(L, G, H)
    e, eta, E = _anomalies(ell, L, G)
    if np.any(e < W1_MIN_ECCENTRICITY):
        raise SingularityError("generator W1 is singular for near-circular orbits")
    cE, sE = np.cos(E), np.sin(E)
    cg, sg, ch, sh = np.cos(g), np.sin(g), np.cos(h), np.sin(h)
    num = (G * (SQRT3 * sh + 3.0 * ch) * (e * sE * cg + eta * sg)
           - H * (SQRT3 * ch - 3.0 * sh) * (eta * cg - e * sE * sg))
    return _scalar(num / (6.0 * e * G * L * (e * cE - 1.0)))


def _partials(F, d, step, levels):
    """Extrapolated central differences of ``F`` along each of the six axes."""
    d = as_element_array(d)
    out = []
    for i in range(6):
        estimates = []
        for k in range(levels):
            s = step / 2**k
            dp = d.copy()
            dm = d.copy()
            dp[..., i] += s
            dm[..., i] -= s
            estimates.append((np.asarray(F(dp)) - np.asarray(F(dm))) / (2.0 * s))
        out.append(richardson(estimates))
    return out


def poisson_bracket(F, K, d, step=1e-4, levels=2):
    """Canonical bracket ``{F, K}`` in Delaunay variables by finite differences.

    Angles ``(ell, g, h)`` pair with actions ``(L, G, H)``. Derivatives are
    central differences extrapolated over ``levels`` step halvings.
    """
    dF = _partials(F, d, step, levels)
    dK = _partials(K, d, step, levels)
    total = sum(dF[k] * dK[k + 3] - dF[k + 3] * dK[k] for k in range(3))
    return _scalar(total)


def _quadrature_nodes(d, n, grid):
    d = as_element_array(d)
    if n < 32 or n & (n - 1):
        raise DomainError("quadrature size must be a power of two >= 32")
    nodes = TWO_PI * np.arange(n) / n
    pts = np.repeat(d[..., None, :], n, axis=-2).copy()
    if grid == "mean":
        pts[..., 0] = nodes
        weights = np.full(d.shape[:-1] + (n,), 1.0 / n)
    elif grid == "eccentric":
        e = np.sqrt(np.clip(1.0 - (d[..., 4] / d[..., 3]) ** 2, 0.0, None))[..., None]
        pts[..., 0] = nodes - e * np.sin(nodes)
        weights = (1.0 - e * np.cos(nodes)) / n
    else:
        raise DomainError(f"unknown quadrature grid {grid!r}")
    return pts, weights


def average_over_ell(F, d, n=128, grid="mean"):
    """Average of ``F`` over the mean anomaly, other elements held fixed.

    ``grid="mean"`` is the trapezoid rule on ``n`` equally spaced mean
    anomalies. ``grid="eccentric"`` applies the trapezoid rule after the
    substitution ``ell = E - e sin E`` (weight ``1 - e cos E``); it converges
    much faster at high eccentricity because the integrand's complex
    singularities sit farther from the real ``E`` axis.
    """
    pts, weights = _quadrature_nodes(d, n, grid)
    values = np.asarray(F(pts))
    return _scalar(np.sum(values * weights, axis=-1))


def second_order_coefficient(d):
    """Displayed second-order normal-form coefficient ``H_0^2(h, L, G, H)``.

    ``-(8 H^2 + (G^2 - H^2)(sqrt3 sin 2h + cos 2h)) / (24 G^5 L^3)``
    """
    _, _, h, L, G, H = _unpack(d)
    if np.any(G == 0):
        raise SingularityError("normal form is singular at G = 0")
    return _scalar(-(8.0 * H**2 + (G**2 - H**2) * (SQRT3 * np.sin(2 * h) + np.cos(2 * h)))
                   / (24.0 * G**5 * L**3))


def normalized_hamiltonian(d, epsilon):
    """Closed-form normalized Hamiltonian ``-1/(2L^2) + eps^2/2 H_0^2``."""
    L = _unpack(d)[3]
    return _scalar(-0.5 / L**2 + 0.5 * epsilon**2 * np.asarray(second_order_coefficient(d)))


def axisymmetric_second_order(d):
    """Mean-anomaly average of ``H2 + {H1, W1}`` evaluated in closed form.

    ``-(3 H^2 - G^2) / (12 G^5 L^3)``. About the triangle's centroid the
    dipole of the three centers vanishes and their quadrupole is symmetric
    under rotations about the ``q3`` axis, so the averaged second-order term
    is the classical oblateness (J2-type) average and does not depend on the
    node ``h``.
    """
    _, _, _, L, G, H = _unpack(d)
    if np.any(G == 0):
        raise SingularityError("average is singular at G = 0")
    return _scalar(-(3.0 * H**2 - G**2) / (12.0 * G**5 * L**3))


def second_order_integrand(d, step=1e-4, levels=2):
    """``H2 + {H1, W1}`` evaluated pointwise (finite-difference bracket)."""
    return np.asarray(h2_delaunay(d)) + np.asarray(poisson_bracket(h1_delaunay, w1, d, step, levels))


def second_order_average(d, n=128, step=1e-4, levels=2, grid="eccentric"):
    """Quadrature of ``< H2 + {H1, W1} >_ell`` at the given ``(g, h, L, G, H)``."""
    return average_over_ell(lambda x: second_order_integrand(x, step, levels), d, n, grid)


def verify_second_order(d, n=128, step=1e-4, levels=2, grid="eccentric"):
    """Residual between the quadrature average and the displayed coefficient.

    Returns ``|< H2 + {H1, W1} >_ell - H_0^2|`` (elementwise for grids).
    """
    arr = as_element_array(d)
    e = np.sqrt(np.clip(1.0 - (arr[..., 4] / arr[..., 3]) ** 2, 0.0, None))
    if np.any(e < 1e-4):
        raise SingularityError("second-order check requires e >= 1e-4")
    avg = np.asarray(second_order_average(arr, n, step, levels, grid))
    return _scalar(np.abs(avg - np.asarray(second_order_coefficient(arr))))
