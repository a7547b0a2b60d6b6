"""Orthonormal oscillator eigenfunctions on a position grid.

The three-term recurrence on the *normalized* functions is the only stable
route for n in the hundreds; raw Hermite polynomials overflow around n ~ 300.
"""

import numpy as np


def hermite_functions(n_max, q):
    """First ``n_max`` orthonormal Hermite functions evaluated on ``q``.

    h_0(q) = pi^{-1/4} exp(-q^2/2)
    h_1(q) = sqrt(2) q h_0(q)
    h_{n+1}(q) = sqrt(2/(n+1)) q h_n(q) - sqrt(n/(n+1)) h_{n-1}(q)

    Returns an array of shape (n_max, len(q)). Rows are orthonormal with
    respect to dq integration. For |q| beyond the double-precision underflow
    point of h_0 (~38.6) the returned values are exactly zero, which is the
    correct answer to machine precision for every n below ~(q^2-1)/2.
    """
    q = np.atleast_1d(np.asarray(q, dtype=float))
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    out = np.empty((n_max, q.size))
    out[0] = np.pi ** -0.25 * np.exp(-0.5 * q * q)
    if n_max > 1:
        out[1] = np.sqrt(2.0) * q * out[0]
    for n in range(1, n_max - 1):
        out[n + 1] = np.sqrt(2.0 / (n + 1)) * q * out[n] - np.sqrt(n / (n + 1.0)) * out[n - 1]
    return out
