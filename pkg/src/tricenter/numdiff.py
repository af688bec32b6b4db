"""Central finite differences with Richardson extrapolation.

The helpers here are used both by the library (Hessians of charted
Hamiltonians) and by the verification oracles (Poisson brackets, gradient
identities). Central differences have an error expansion in even powers of
the step, so halving the step and eliminating ``h**2``, ``h**4``, ... terms
gives a Romberg-style table.
"""

import numpy as np


def richardson(values):
    """Extrapolate a sequence of central-difference estimates to zero step.

    Parameters
    ----------
    values : sequence of array_like
        Estimates computed with steps ``h, h/2, h/4, ...``. Each must have an
        error expansion in even powers of the step.

    Returns
    -------
    ndarray
        The highest-order extrapolated estimate.
    """
    table = [np.asarray(v, dtype=float) for v in values]
    for j in range(1, len(table)):
        factor = 4.0**j
        table = [(factor * table[k + 1] - table[k]) / (factor - 1.0)
                 for k in range(len(table) - 1)]
    return table[0]


def derivative(f, x, h=1e-3, levels=2):
    """First derivative of a scalar function of one variable."""
    estimates = []
    for k in range(levels):
        s = h / 2**k
        estimates.append((f(x + s) - f(x - s)) / (2.0 * s))
    return float(richardson(estimates))


def gradient(f, x, h=1e-3, levels=2):
    """Gradient of ``f`` at ``x`` by extrapolated central differences."""
    x = np.asarray(x, dtype=float)
    g = np.empty_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e.flat[i] = 1.0
        g.flat[i] = derivative(lambda t: f(x + t * e), 0.0, h, levels)
    return g


def jacobian(f, x, h=1e-3, levels=2):
    """Jacobian of a vector-valued ``f`` at ``x``; rows index outputs."""
    x = np.asarray(x, dtype=float)
    cols = []
    for i in range(x.size):
        e = np.zeros_like(x)
        e.flat[i] = 1.0
        estimates = []
        for k in range(levels):
            s = h / 2**k
            fp = np.asarray(f(x + s * e), dtype=float)
            fm = np.asarray(f(x - s * e), dtype=float)
            estimates.append((fp - fm) / (2.0 * s))
        cols.append(richardson(estimates))
    return np.stack(cols, axis=-1)


def hessian(f, x, h=1e-2, levels=4):
    """Hessian of a scalar function by extrapolated four-point stencils.

    Each entry uses the symmetric stencil
    ``[f(+h,+h) - f(+h,-h) - f(-h,+h) + f(-h,-h)] / (4 h^2)``, which for
    ``i == j`` reduces to a second difference with step ``2h``. Both have even
    error expansions, so ``levels`` halvings remove the leading
    ``levels - 1`` error orders. The result is symmetrized.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    out = np.zeros((n, n))
    stencil = ((1, 1, 1.0), (1, -1, -1.0), (-1, 1, -1.0), (-1, -1, 1.0))
    for i in range(n):
        for j in range(i, n):
            estimates = []
            for k in range(levels):
                s = h / 2**k
                acc = 0.0
                for a, b, w in stencil:
                    z = x.copy()
                    z[i] += a * s
                    z[j] += b * s
                    acc += w * f(z)
                estimates.append(acc / (4.0 * s * s))
            out[i, j] = out[j, i] = float(richardson(estimates))
    return out
