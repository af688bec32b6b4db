"""Frequency maps of the action-angle normal forms and the KAM rank condition.

Near each stable pair of relative equilibria the normal form is a hierarchy

    K = h0(L) + eta^8 h1 + eta^9 h2 + eta^10 h3,     eta = eps^(1/4),

with actions ``(L, I1, I2)`` on the first reduced space and ``(L, G, I)`` on
the second. The frequency vector stacks the gradients of each ``h_k`` with
respect to the actions first appearing at that order, and ``M_Omega`` holds
the vector together with its derivatives in all three actions. A rank equal
to the number of independent frequencies certifies the nondegeneracy
hypothesis of the multi-scale KAM theorem.
"""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError
from .numdiff import gradient, jacobian

SQRT3 = np.sqrt(3.0)
SQRT5 = np.sqrt(5.0)
SQRT7 = np.sqrt(7.0)
SQRT10 = np.sqrt(10.0)
SQRT15 = np.sqrt(15.0)

SPACES = ("first", "second")
PAIRS = ((1, 2), (3, 4))

#: Which actions each order's gradient is taken with respect to
#: (indices into the action tuple).
BLOCKS = {
    "first": ((0,), (0,), (1, 2), (1, 2)),
    "second": ((0,), (1,), (2,), (2,)),
}

#: Expected ranks of M_Omega.
EXPECTED_RANK = {("first", (1, 2)): 4, ("first", (3, 4)): 4,
                 ("second", (1, 2)): 3, ("second", (3, 4)): 3}

ACTION_NAMES = {"first": ("L", "I1", "I2"), "second": ("L", "G", "I")}


def _normalize(space, pair):
    if space not in SPACES:
        raise DomainError(f"space must be one of {SPACES}")
    pair = tuple(pair)
    if pair not in PAIRS:
        raise DomainError(f"pair must be one of {PAIRS}")
    return space, pair


def _check_actions(space, actions):
    actions = np.asarray(actions, dtype=float)
    if actions.shape != (3,):
        raise DomainError("three actions are required")
    if actions[0] <= 0:
        raise DomainError("L must be positive")
    if space == "second" and actions[1] <= 0:
        raise DomainError("G must be positive")
    return actions


def hierarchy(space, pair, actions):
    """Values ``(h0, h1, h2, h3)`` of the normal-form orders."""
    space, pair = _normalize(space, pair)
    a, b, c = _check_actions(space, actions)
    if space == "first":
        L, I1, I2 = a, b, c
        h0 = -1.0 / (2 * L**2)
        if pair == (1, 2):
            return (h0, -1.0 / (3 * L**6),
                    -(6 * I1 - SQRT15 * I2) / (6 * L**7),
                    -(6 * I1**2 - 2 * SQRT15 * I1 * I2 + I2**2) / (3 * L**8))
        return (h0, 1.0 / (8 * L**6),
                -(4 * SQRT7 * I1 - 9 * I2) / (24 * L**7),
                (1990 * I1**2 + 1822 * SQRT10 * I1 * I2 + 735 * I2**2) / (1920 * L**8))
    L, G, I = a, b, c
    h0 = -1.0 / (2 * L**2)
    if pair == (1, 2):
        return (h0, 1.0 / (3 * G**3 * L**3),
                -np.sqrt(5 / 3) * I / (2 * G**4 * L**3),
                I**2 / (3 * G**5 * L**3))
    return (h0, -1.0 / (12 * G**3 * L**3),
            np.sqrt(5 / 2) * I / (3 * G**4 * L**3),
            199 * I**2 / (192 * G**5 * L**3))


def action_angle_hamiltonian(space, pair, actions, eta):
    """Truncated normal form ``h0 + eta^8 h1 + eta^9 h2 + eta^10 h3``."""
    h0, h1, h2, h3 = hierarchy(space, pair, actions)
    return h0 + eta**8 * h1 + eta**9 * h2 + eta**10 * h3


def omega(space, pair, actions):
    """Closed-form frequency vector (length 6 on the first space, 4 on the second)."""
    space, pair = _normalize(space, pair)
    a, b, c = _check_actions(space, actions)
    if space == "first":
        L, I1, I2 = a, b, c
        if pair == (1, 2):
            return np.array([1 / L**3, 2 / L**7, -1 / L**7, np.sqrt(5 / 3) / (2 * L**7),
                             -2 * (6 * I1 - SQRT15 * I2) / (3 * L**8),
                             2 * (SQRT15 * I1 - I2) / (3 * L**8)])
        return np.array([1 / L**3, -3 / (4 * L**7), -SQRT7 / (6 * L**7), 3 / (8 * L**7),
                         -(1990 * I1 + 911 * SQRT10 * I2) / (960 * L**8),
                         -(911 * SQRT10 * I1 + 735 * I2) / (960 * L**8)])
    L, G, I = a, b, c
    if pair == (1, 2):
        return np.array([1 / L**3, -1 / (G**4 * L**3), -np.sqrt(5 / 3) / (2 * G**4 * L**3),
                         2 * I / (3 * G**5 * L**3)])
    return np.array([1 / L**3, 1 / (4 * G**4 * L**3), np.sqrt(5 / 2) / (3 * G**4 * L**3),
                     199 * I / (96 * G**5 * L**3)])


def m_omega(space, pair, actions):
    """Closed-form matrix ``(Omega, dOmega/da1, dOmega/da2, dOmega/da3)``."""
    space, pair = _normalize(space, pair)
    a, b, c = _check_actions(space, actions)
    w = omega(space, pair, actions)
    if space == "first":
        L, I1, I2 = a, b, c
        if pair == (1, 2):
            dL = [-3 / L**4, -14 / L**8, 7 / L**8, -7 * np.sqrt(5 / 3) / (2 * L**8),
                  16 * (6 * I1 - SQRT15 * I2) / (3 * L**9),
                  16 * (I2 - SQRT15 * I1) / (3 * L**9)]
            dI1 = [0, 0, 0, 0, -4 / L**8, 2 * np.sqrt(5 / 3) / L**8]
            dI2 = [0, 0, 0, 0, 2 * np.sqrt(5 / 3) / L**8, -2 / (3 * L**8)]
        else:
            dL = [-3 / L**4, 21 / (4 * L**8), 7 * SQRT7 / (6 * L**8), -21 / (8 * L**8),
                  (1990 * I1 + 911 * SQRT10 * I2) / (120 * L**9),
                  (911 * SQRT10 * I1 + 735 * I2) / (120 * L**9)]
            dI1 = [0, 0, 0, 0, -199 / (96 * L**8), -911 / (96 * SQRT10 * L**8)]
            dI2 = [0, 0, 0, 0, -911 / (96 * SQRT10 * L**8), -49 / (64 * L**8)]
        return np.column_stack([w, dL, dI1, dI2])
    L, G, I = a, b, c
    if pair == (1, 2):
        dL = [-3 / L**4, 3 / (G**4 * L**4), SQRT15 / (2 * G**4 * L**4), -2 * I / (G**5 * L**4)]
        dG = [0, 4 / (G**5 * L**3), 2 * np.sqrt(5 / 3) / (G**5 * L**3), -10 * I / (3 * G**6 * L**3)]
        dI = [0, 0, 0, 2 / (3 * G**5 * L**3)]
    else:
        dL = [-3 / L**4, -3 / (4 * G**4 * L**4), -np.sqrt(5 / 2) / (G**4 * L**4),
              -199 * I / (32 * G**5 * L**4)]
        dG = [0, -1 / (G**5 * L**3), -2 * SQRT10 / (3 * G**5 * L**3), -995 * I / (96 * G**6 * L**3)]
        dI = [0, 0, 0, 199 / (96 * G**5 * L**3)]
    return np.column_stack([w, dL, dG, dI])


def m_omega_numeric(space, pair, actions, step=1e-3):
    """``M_Omega`` with columns 2..4 from finite differences of :func:`omega`.

    The step is ``step`` times the smallest action the frequencies are
    singular in (``L``, and also ``G`` on the second space).
    """
    actions = np.asarray(actions, dtype=float)
    scale = actions[0] if space == "first" else min(actions[0], actions[1])
    jac = jacobian(lambda x: omega(space, pair, x), actions, h=step * scale, levels=3)
    return np.column_stack([omega(space, pair, actions), jac])


def gradient_omega(space, pair, actions, step=1e-4):
    """Frequency vector rebuilt from gradients of the normal-form orders."""
    space, pair = _normalize(space, pair)
    actions = np.asarray(actions, dtype=float)
    out = []
    for k, block in enumerate(BLOCKS[space]):
        g = gradient(lambda x: hierarchy(space, pair, x)[k], actions, h=step)
        out.extend(g[list(block)])
    return np.array(out)


def rank(m, tol=1e-10):
    """Number of singular values above ``tol`` times the largest one."""
    if not 0 < tol < 1:
        raise DomainError("tolerance must lie in (0, 1)")
    s = np.linalg.svd(np.asarray(m, dtype=float), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > tol * s[0]))


@dataclass(frozen=True)
class FrequencyAnalysis:
    """Frequency data and rank verdict for one equilibrium pair."""

    space: str
    pair: tuple
    actions: tuple
    omega: np.ndarray
    m_omega: np.ndarray
    singular_values: np.ndarray
    rank: int
    tol: float
    gradient_residual: np.ndarray

    @property
    def sign_tension(self):
        """Entries where the frequency equals minus the normal-form gradient."""
        ref = gradient_omega(self.space, self.pair, self.actions)
        flips = (np.abs(self.omega + ref) <= 1e-8 * (1 + np.abs(ref))) & (np.abs(ref) > 1e-12)
        return tuple(int(i) + 1 for i in np.flatnonzero(flips & (self.gradient_residual > 1e-8)))

    def to_dict(self):
        return {
            "space": self.space,
            "pair": list(self.pair),
            "actions": dict(zip(ACTION_NAMES[self.space], map(float, self.actions))),
            "omega": self.omega.tolist(),
            "m_omega": self.m_omega.tolist(),
            "singular_values": self.singular_values.tolist(),
            "rank": self.rank,
            "tol": self.tol,
            "gradient_residual": self.gradient_residual.tolist(),
            "sign_tension_entries": list(self.sign_tension),
        }


def analyze(space, pair, actions, tol=1e-10):
    """Assemble :class:`FrequencyAnalysis` for the given pair and actions."""
    space, pair = _normalize(space, pair)
    actions = tuple(float(v) for v in _check_actions(space, actions))
    w = omega(space, pair, actions)
    m = m_omega(space, pair, actions)
    s = np.linalg.svd(m, compute_uv=False)
    resid = np.abs(w - gradient_omega(space, pair, actions))
    return FrequencyAnalysis(space, pair, actions, w, m, s, rank(m, tol), tol, resid)
