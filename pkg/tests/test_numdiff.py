import numpy as np

from tricenter.numdiff import derivative, gradient, hessian, jacobian, richardson


def test_richardson_removes_quadratic_error():
    h = np.array([0.1, 0.05])
    assert richardson(1.0 + h**2) == 1.0


def test_derivatives_of_smooth_functions():
    assert abs(derivative(np.sin, 0.3, 1e-2, 3) - np.cos(0.3)) < 1e-12
    x = np.array([0.2, -0.5, 1.1])
    f = lambda v: np.exp(v[0]) * np.sin(v[1]) + v[2] ** 3
    g = gradient(f, x, 1e-2, 3)
    assert np.allclose(g, [np.exp(x[0]) * np.sin(x[1]), np.exp(x[0]) * np.cos(x[1]), 3 * x[2] ** 2])
    J = jacobian(lambda v: np.array([v[0] * v[1], v[2]]), x)
    assert np.allclose(J, [[x[1], x[0], 0], [0, 0, 1]])
    H = hessian(f, x, 1e-2, 4)
    ref = np.array([[np.exp(x[0]) * np.sin(x[1]), np.exp(x[0]) * np.cos(x[1]), 0],
                    [np.exp(x[0]) * np.cos(x[1]), -np.exp(x[0]) * np.sin(x[1]), 0],
                    [0, 0, 6 * x[2]]])
    assert np.allclose(H, ref, atol=1e-10)
