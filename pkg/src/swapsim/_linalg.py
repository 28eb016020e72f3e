"""Dense linear algebra for small symmetric positive-definite matrices.

Everything in the covariance pipeline reduces to Cholesky factorizations of
``gamma + I``-type matrices of size at most 32x32.  Two element types are
supported transparently: float64 (routed to LAPACK) and ``object`` arrays of
``mpmath.mpf`` (routed to a handwritten Cholesky), so the same pipeline code
can be re-run in extended precision when float64 cancellation becomes the
accuracy bottleneck.
"""

import math

import mpmath
import numpy as np

from .exceptions import IllConditionedError, PhysicalityError

#: Condition numbers above this make the Schur-complement inverse untrustworthy.
COND_LIMIT = 1e12


def is_object_array(a):
    return isinstance(a, np.ndarray) and a.dtype == object


def sqrt(x):
    return mpmath.sqrt(x) if isinstance(x, mpmath.mpf) else math.sqrt(x)


def cos(x):
    return mpmath.cos(x) if isinstance(x, mpmath.mpf) else math.cos(x)


def sin(x):
    return mpmath.sin(x) if isinstance(x, mpmath.mpf) else math.sin(x)


def exp(x):
    return mpmath.exp(x) if isinstance(x, mpmath.mpf) else math.exp(x)


def acos(x):
    return mpmath.acos(x) if isinstance(x, mpmath.mpf) else math.acos(x)


def dtype_for(*values):
    """Array dtype that can hold the given scalars without truncation."""
    if any(isinstance(v, mpmath.mpf) for v in values):
        return object
    return np.float64


def _cholesky_object(a):
    n = a.shape[0]
    low = np.empty((n, n), dtype=object)
    low[:] = mpmath.mpf(0)
    for i in range(n):
        for j in range(i + 1):
            s = a[i, j]
            for k in range(j):
                s -= low[i, k] * low[j, k]
            if i == j:
                if s <= 0:
                    raise PhysicalityError(
                        "matrix is not positive definite (Cholesky pivot <= 0)"
                    )
                low[i, i] = mpmath.sqrt(s)
            else:
                low[i, j] = s / low[j, j]
    return low


def cholesky_pd(a):
    """Lower Cholesky factor of a symmetric positive-definite matrix."""
    if is_object_array(a):
        return _cholesky_object(a)
    try:
        return np.linalg.cholesky(a)
    except np.linalg.LinAlgError as err:
        raise PhysicalityError(f"matrix is not positive definite: {err}") from err


def det_pd(a):
    """Determinant of a symmetric positive-definite matrix via Cholesky."""
    if a.shape[0] == 0:
        return mpmath.mpf(1) if is_object_array(a) else 1.0
    low = cholesky_pd(a)
    d = low[0, 0] ** 2
    for i in range(1, a.shape[0]):
        d = d * low[i, i] ** 2
    return d


def _guard_condition(low):
    """Reject factorizations whose pivot spread implies cond > COND_LIMIT.

    For SPD matrices the squared ratio of extreme Cholesky pivots lower-bounds
    the 2-norm condition number, which is all the guard needs.
    """
    diag = [low[i, i] for i in range(low.shape[0])]
    hi, lo = max(diag), min(diag)
    if lo <= 0 or float(hi / lo) ** 2 > COND_LIMIT:
        raise IllConditionedError(
            f"condition number above {COND_LIMIT:g}; refusing to invert"
        )


def solve_pd(a, b):
    """Solve ``a @ x = b`` for SPD ``a`` with a condition-number guard."""
    low = cholesky_pd(a)
    _guard_condition(low)
    if not is_object_array(a):
        y = np.linalg.solve(low, b)
        return np.linalg.solve(low.T, y)
    n = low.shape[0]
    b = np.asarray(b, dtype=object)
    squeeze = b.ndim == 1
    if squeeze:
        b = b[:, None]
    x = b.copy()
    for j in range(x.shape[1]):
        for i in range(n):  # forward
            s = x[i, j]
            for k in range(i):
                s -= low[i, k] * x[k, j]
            x[i, j] = s / low[i, i]
        for i in range(n - 1, -1, -1):  # backward
            s = x[i, j]
            for k in range(i + 1, n):
                s -= low[k, i] * x[k, j]
            x[i, j] = s / low[i, i]
    return x[:, 0] if squeeze else x


def symplectic_form(n_modes, dtype=np.float64):
    """Symplectic form Omega for xxpp ordering: [[0, I], [-I, 0]]."""
    eye = np.eye(n_modes)
    zero = np.zeros((n_modes, n_modes))
    omega = np.block([[zero, eye], [-eye, zero]])
    return omega.astype(dtype) if dtype is not object else omega


def as_float_matrix(a):
    """float64 view of a possibly-object matrix (for cheap validity checks)."""
    if is_object_array(a):
        return np.array([[float(x) for x in row] for row in a], dtype=np.float64)
    return np.asarray(a, dtype=np.float64)
