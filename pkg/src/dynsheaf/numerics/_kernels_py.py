"""Pure numpy fallback for the compiled kernels in ``_kernels.pyx``.

Same algorithm, same stopping rule, same update order (Jacobi sweeps).
"""

import numpy as np

_CHUNK = 512


def _ratios(a, z, eta):
    n = len(a) - 1
    ratio = np.zeros(len(z), dtype=np.complex128)
    done = np.zeros(len(z), dtype=bool)
    inside = np.abs(z) <= 1.0

    if inside.any():
        x = z[inside]
        ax = np.abs(x)
        p = np.full(len(x), a[n], dtype=np.complex128)
        dp = np.zeros(len(x), dtype=np.complex128)
        bound = np.full(len(x), abs(a[n]))
        for k in range(n - 1, -1, -1):
            dp = dp * x + p
            p = p * x + a[k]
            bound = bound * ax + abs(a[k])
        ok = np.abs(p) <= eta * bound
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(dp == 0, p, p / np.where(dp == 0, 1, dp))
        ratio[inside] = r
        done[inside] = ok

    outside = ~inside
    if outside.any():
        y = 1.0 / z[outside]
        ay = np.abs(y)
        p = np.full(len(y), a[0], dtype=np.complex128)
        dp = np.zeros(len(y), dtype=np.complex128)
        bound = np.full(len(y), abs(a[0]))
        for k in range(1, n + 1):
            dp = dp * y + p
            p = p * y + a[k]
            bound = bound * ay + abs(a[k])
        ok = np.abs(p) <= eta * bound
        with np.errstate(divide="ignore", invalid="ignore"):
            q = y * (n - y * dp / np.where(ok, 1, p))
            r = np.where(q == 0, z[outside], 1.0 / np.where(q == 0, 1, q))
        ratio[outside] = r
        done[outside] = ok
    return ratio, done


def aberth(coeffs, z0, maxiter, eta):
    a = np.asarray(coeffs, dtype=np.complex128)
    z = np.array(z0, dtype=np.complex128)
    n = len(a) - 1
    conv = np.zeros(n, dtype=bool)
    it = 0
    while it < maxiter:
        act = np.flatnonzero(~conv)
        ratio, done = _ratios(a, z[act], eta)
        conv[act[done]] = True
        act, ratio = act[~done], ratio[~done]
        if len(act) == 0:
            break
        s = np.zeros(len(act), dtype=np.complex128)
        for lo in range(0, len(act), _CHUNK):
            rows = act[lo:lo + _CHUNK]
            diff = z[rows, None] - z[None, :]
            diff[np.arange(len(rows)), rows] = np.inf
            s[lo:lo + _CHUNK] = (1.0 / diff).sum(axis=1)
        w = ratio / (1.0 - ratio * s)
        z[act] = z[act] - w
        it += 1
    return z, conv, it


def horner(coeffs, points):
    a = np.asarray(coeffs, dtype=np.complex128)
    x = np.asarray(points, dtype=np.complex128)
    n = len(a) - 1
    val = np.zeros(len(x), dtype=np.complex128)
    der = np.zeros(len(x), dtype=np.complex128)
    if n < 0:
        return val, der
    val[:] = a[n]
    for k in range(n - 1, -1, -1):
        der = der * x + val
        val = val * x + a[k]
    return val, der
