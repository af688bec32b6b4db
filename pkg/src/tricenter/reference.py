"""Published closed forms used as verification targets.

These values are never used to compute anything; the verification suites and
tests compare the numerically computed objects against them.
"""

import numpy as np

SQRT3 = np.sqrt(3.0)


def _block(diag, off, lower_diag):
    """Symmetric 4x4 matrix with 2x2 blocks ``[[A, B], [B, C]]``."""
    a, b = diag
    c, d = lower_diag
    u, v = off
    return np.array([[a, b, u, v], [b, a, v, u], [u, v, c, d], [v, u, d, c]])


def hessian(index, L):
    """Displayed Hessian of the charted Hamiltonian at ``E_index``.

    The off-diagonal blocks carry a sign that depends on the chart. For
    ``E_1``..``E_4`` the upper display sign belongs to the odd index. For
    ``E_5, E_6`` the computed Hessians match the display with the lower sign
    at ``E_5`` and the upper sign at ``E_6``.
    """
    if index in (1, 2):
        m = _block((-5 / 24, 19 / 24), (-1 / (8 * SQRT3), -1 / (8 * SQRT3)), (-1 / 8, 7 / 8))
        flip = index == 2
    elif index in (3, 4):
        m = _block((-31 / 192, -73 / 192), (9 * SQRT3 / 64, 15 * SQRT3 / 64), (-85 / 192, -163 / 192))
        flip = index == 4
    elif index in (5, 6):
        m = _block((-107 / 192, -29 / 192), (37 / (64 * SQRT3), 19 / (64 * SQRT3)), (-11 / 64, 3 / 64))
        flip = index == 5
    else:
        raise ValueError("index must be in 1..6")
    if flip:
        m[:2, 2:] *= -1
        m[2:, :2] *= -1
    return m / L**7


def hessian_det(index, L):
    """``5/(12 L^28)``, ``5/(288 L^28)`` and ``-1/(96 L^28)`` per pair."""
    pair = (index + 1) // 2
    return {1: 5 / 12, 2: 5 / 288, 3: -1 / 96}[pair] / L**28


def char_poly(index, L):
    """Coefficients ``[1, 0, c2, 0, c0]`` of the characteristic polynomial."""
    pair = (index + 1) // 2
    c2, c0 = {1: (17 / 12, 5 / 12), 2: (49 / 144, 5 / 288), 3: (-5 / 48, -1 / 96)}[pair]
    return np.array([1.0, 0.0, c2 / L**14, 0.0, c0 / L**28])


def eigenvalue_moduli(index, L):
    """Displayed frequencies ``(alpha_1, alpha_2)`` for the stable pairs."""
    pair = (index + 1) // 2
    if pair == 1:
        return np.array([1.0, np.sqrt(5) / (2 * SQRT3)]) / L**7
    if pair == 2:
        return np.array([np.sqrt(5 / 2) / 3, 1 / 4]) / L**7
    raise ValueError("the pair (5, 6) has a real eigenvalue pair")


#: Stability verdicts claimed for the six first-reduced equilibria.
VERDICTS = {1: "parametrically-stable", 2: "parametrically-stable",
            3: "parametrically-stable", 4: "parametrically-stable",
            5: "unstable", 6: "unstable"}
