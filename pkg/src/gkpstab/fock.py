"""Truncated-Fock-basis operator algebra.

Operators live on the span of the first ``dim`` number states and are plain
dense complex ``numpy`` arrays. Nothing here assumes Hermiticity or unitarity;
those are queryable predicates with explicit tolerances.

Identities that hold in infinite dimension (canonical commutators, products of
displacement-type exponentials) fail near the truncation corner. They are
asserted on a leading "interior" block instead; `interior_margin` computes how
far the corner artifacts reach for exponential-band operators.
"""

import numpy as np
from scipy.linalg import expm as _scipy_expm

from .errors import (
    DimensionError,
    InvalidInputError,
    OperatorOverflowError,
    ShapeMismatchError,
)


def _check_dim(dim):
    if not isinstance(dim, (int, np.integer)) or dim < 2:
        raise DimensionError(f"Fock truncation must be an integer >= 2, got {dim!r}")


def make_ladder(dim):
    """Annihilation operator a with <n-1|a|n> = sqrt(n)."""
    _check_dim(dim)
    return np.diag(np.sqrt(np.arange(1.0, dim)), k=1).astype(complex)


def make_quadratures(dim):
    """Position/momentum pair Q = (a+a†)/√2, P = (a−a†)/(i√2).

    Both are Hermitian by construction (real symmetric and purely imaginary
    antisymmetric, respectively). [Q,P] = i holds exactly except in the last
    row/column of the truncation.
    """
    a = make_ladder(dim)
    ad = a.conj().T
    q = (a + ad) / np.sqrt(2.0)
    p = (a - ad) / (1j * np.sqrt(2.0))
    return q, p


def number_operator(dim):
    """Photon-number operator a†a (diagonal)."""
    _check_dim(dim)
    return np.diag(np.arange(dim, dtype=float)).astype(complex)


def matrix_exponential(m):
    """exp(m) by scaling-and-squaring with the order-13 diagonal Padé approximant.

    Raises InvalidInputError on non-finite entries and OperatorOverflowError
    (naming the operator norm) if the squaring phase overflows, which happens
    for strongly non-normal inputs such as i*eta*R at large eps*dim.
    """
    m = np.asarray(m, dtype=complex)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ShapeMismatchError(f"matrix_exponential needs a square matrix, got {m.shape}")
    if not np.isfinite(m).all():
        raise InvalidInputError("matrix_exponential: input has non-finite entries")
    with np.errstate(over="ignore", invalid="ignore"):
        out = _scipy_expm(m)
    if not np.all(np.isfinite(out.view(float))):
        norm = np.linalg.norm(m, 1)
        raise OperatorOverflowError(
            f"matrix exponential overflowed (input 1-norm {norm:.3e}); "
            "reduce the truncation dim or the regularization strength"
        )
    return out


def frobenius_inner(a, b):
    """Frobenius inner product Tr(a† b)."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ShapeMismatchError(f"frobenius_inner: shapes {a.shape} and {b.shape} differ")
    return complex(np.vdot(a, b))


def dagger(a):
    """Conjugate transpose."""
    return np.asarray(a).conj().T


def is_hermitian(a, tol=1e-12):
    a = np.asarray(a)
    return bool(np.abs(a - a.conj().T).max() <= tol)


def is_unitary(a, tol=1e-10):
    a = np.asarray(a)
    d = a.shape[0]
    return bool(np.abs(a.conj().T @ a - np.eye(d)).max() <= tol)


def hermitian_part(a):
    """(a + a†)/2."""
    return 0.5 * (a + a.conj().T)


def interior_block(a, margin):
    """Leading (dim-margin) x (dim-margin) submatrix (a view, not a copy)."""
    a = np.asarray(a)
    dim = a.shape[0]
    if not 0 <= margin < dim:
        raise DimensionError(f"margin must satisfy 0 <= margin < dim, got {margin} for dim {dim}")
    k = dim - margin
    return a[:k, :k]


def interior_margin(dim, eta, order=1, cushion=16):
    """Margin inside which corner artifacts of exponential-band operators stay.

    The matrix of e^{i*eta*Q} couples |n> to |n±k> for k up to about the
    classical band edge 2*(eta/√2)*√dim = √2*eta*√dim; products of `order`
    such factors reach `order` times as far. Entries further than that from
    the truncation corner are clean to near machine precision (the band has
    an Airy-type super-exponential edge), measured directly on the commutator
    and Lyapunov-derivative identities.
    """
    _check_dim(dim)
    m = int(np.ceil(order * np.sqrt(2.0) * eta * np.sqrt(dim))) + cushion
    return min(m, dim - 2)


def max_abs(a):
    """Entrywise max modulus, the norm used by the interior-block checks."""
    return float(np.abs(a).max())
