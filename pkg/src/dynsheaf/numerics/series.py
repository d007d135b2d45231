"""Truncated power series: complex arrays ``a[0] + a[1] t + ... + a[n-1] t^(n-1)``.

Every operation returns a series of the same truncation length as its inputs.
"""

import numpy as np


def _arr(a, n=None):
    a = np.asarray(a, dtype=np.complex128).ravel()
    if n is None:
        return a.copy()
    out = np.zeros(n, dtype=np.complex128)
    m = min(n, len(a))
    out[:m] = a[:m]
    return out


def mul(a, b, n=None):
    a, b = _arr(a), _arr(b)
    n = n if n is not None else min(len(a), len(b))
    if n == 0:
        return np.zeros(0, dtype=np.complex128)
    return _arr(np.convolve(a[:n], b[:n]), n)


def power(a, k, n=None):
    a = _arr(a)
    n = n if n is not None else len(a)
    out = _arr([1.0], n)
    for _ in range(k):
        out = mul(out, a, n)
    return out


def reciprocal(a, n=None):
    """``1/a`` for ``a[0] != 0``."""
    a = _arr(a)
    n = n if n is not None else len(a)
    a = _arr(a, n)
    if a[0] == 0:
        raise ZeroDivisionError("series reciprocal needs a nonzero constant term")
    out = np.zeros(n, dtype=np.complex128)
    out[0] = 1.0 / a[0]
    for k in range(1, n):
        out[k] = -np.dot(a[1:k + 1], out[k - 1::-1][:k]) / a[0]
    return out


def divide(a, b, n=None):
    n = n if n is not None else min(len(a), len(b))
    return mul(a, reciprocal(b, n), n)


def compose(a, b, n=None):
    """``a(b(t))`` for ``b[0] == 0``."""
    a, b = _arr(a), _arr(b)
    n = n if n is not None else min(len(a), len(b))
    b = _arr(b, n)
    if n and abs(b[0]) > 0:
        raise ValueError("inner series must vanish at 0")
    out = np.zeros(n, dtype=np.complex128)
    for c in _arr(a, n)[::-1]:
        out = mul(out, b, n)
        out[0] += c
    return out


def deriv(a):
    a = _arr(a)
    if len(a) <= 1:
        return np.zeros(len(a), dtype=np.complex128)
    d = a[1:] * np.arange(1, len(a))
    return _arr(d, len(a))


def inverse(a, n=None):
    """Compositional inverse of ``a`` with ``a[0] == 0 != a[1]``, by Newton lifting."""
    a = _arr(a)
    n = n if n is not None else len(a)
    a = _arr(a, n)
    if n < 2 or a[1] == 0:
        raise ZeroDivisionError("compositional inverse needs a nonzero linear term")
    x = np.zeros(n, dtype=np.complex128)
    x[1] = 1.0 / a[1]
    ident = _arr([0.0, 1.0], n)
    da = deriv(a)
    prec = 2
    while True:
        prec = min(2 * prec, n)
        err = compose(a, x, n) - ident
        x = x - divide(err, compose(da, x, n), n)
        if prec == n:
            err = compose(a, x, n) - ident
            x = x - divide(err, compose(da, x, n), n)
            return x


def valuation(a, tol):
    """Index of the first coefficient with modulus above ``tol`` (``len(a)`` if none)."""
    a = _arr(a)
    idx = np.flatnonzero(np.abs(a) > tol)
    return int(idx[0]) if len(idx) else len(a)
