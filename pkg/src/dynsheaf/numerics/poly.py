"""Dense complex polynomials, lowest degree first."""

import numpy as np

from . import _backend

# Default relative level for ``trimmed``: leading coefficients below this
# fraction of the largest one are rounding debris from cancellations.
TRIM_REL = 1e-14


class Poly:
    """Immutable polynomial with complex coefficients ``c[0] + c[1] z + ...``.

    The zero polynomial has an empty coefficient array and degree -1.  Only
    exactly vanishing leading coefficients are dropped at construction; use
    :meth:`trimmed` where cancellation is expected.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs=()):
        c = np.array(coeffs, dtype=np.complex128).ravel()
        if len(c):
            big = np.max(np.abs(c))
            if not np.isfinite(big):
                raise ValueError("non-finite polynomial coefficient")
            nz = np.flatnonzero(c != 0)
            c = c[: nz[-1] + 1] if len(nz) else c[:0]
        c.setflags(write=False)
        self._c = c

    def trimmed(self, rel=TRIM_REL):
        """Copy without leading coefficients below ``rel`` times the largest one."""
        if self.is_zero():
            return self
        big = np.max(np.abs(self._c))
        nz = np.flatnonzero(np.abs(self._c) > rel * big)
        return Poly(self._c[: nz[-1] + 1] if len(nz) else self._c[:0])

    @classmethod
    def monomial(cls, k, coeff=1.0):
        c = np.zeros(k + 1, dtype=np.complex128)
        c[k] = coeff
        return cls(c)

    @classmethod
    def from_roots(cls, roots, lead=1.0):
        c = np.array([lead], dtype=np.complex128)
        for r in roots:
            c = np.convolve(c, [-r, 1.0])
        return cls(c)

    @property
    def coeffs(self):
        return self._c

    @property
    def degree(self):
        return len(self._c) - 1

    @property
    def lead(self):
        return self._c[-1] if len(self._c) else 0j

    def is_zero(self):
        return len(self._c) == 0

    def coeff(self, k):
        return self._c[k] if 0 <= k < len(self._c) else 0j

    def padded(self, n):
        """Coefficients padded with zeros to length ``n``."""
        out = np.zeros(max(n, len(self._c)), dtype=np.complex128)
        out[: len(self._c)] = self._c
        return out

    # arithmetic
    def __add__(self, other):
        other = _as_poly(other)
        n = max(len(self._c), len(other._c))
        return Poly(self.padded(n) + other.padded(n))

    __radd__ = __add__

    def __neg__(self):
        return Poly(-self._c)

    def __sub__(self, other):
        return self + (-_as_poly(other))

    def __rsub__(self, other):
        return _as_poly(other) - self

    def __mul__(self, other):
        if isinstance(other, Poly):
            if self.is_zero() or other.is_zero():
                return Poly()
            return Poly(np.convolve(self._c, other._c))
        return Poly(self._c * complex(other))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Poly(self._c / complex(scalar))

    def __pow__(self, k):
        out = Poly([1.0])
        for _ in range(int(k)):
            out = out * self
        return out

    def __eq__(self, other):
        if not isinstance(other, Poly):
            return NotImplemented
        return len(self._c) == len(other._c) and bool(np.all(self._c == other._c))

    def __hash__(self):
        return hash(self._c.tobytes())

    def __repr__(self):
        return f"Poly({np.array2string(self._c, precision=6)})"

    def allclose(self, other, tol=1e-10):
        other = _as_poly(other)
        n = max(len(self._c), len(other._c))
        a, b = self.padded(n), other.padded(n)
        scale = max(1.0, float(np.max(np.abs(a), initial=0)), float(np.max(np.abs(b), initial=0)))
        return bool(np.all(np.abs(a - b) <= tol * scale))

    # evaluation
    def __call__(self, z):
        if np.ndim(z) == 0:
            acc = 0j
            for c in self._c[::-1]:
                acc = acc * z + c
            return acc
        vals, _ = _backend.horner(self._c, np.asarray(z, dtype=np.complex128).ravel())
        return vals.reshape(np.shape(z))

    def eval_with_derivative(self, points):
        pts = np.asarray(points, dtype=np.complex128).ravel()
        if self.is_zero():
            return np.zeros_like(pts), np.zeros_like(pts)
        return _backend.horner(self._c, pts)

    def deriv(self):
        if len(self._c) <= 1:
            return Poly()
        return Poly(self._c[1:] * np.arange(1, len(self._c)))

    def compose(self, inner):
        """``self(inner(z))`` by Horner's scheme on polynomials."""
        inner = _as_poly(inner)
        out = Poly()
        for c in self._c[::-1]:
            out = out * inner + c
        return out

    def taylor_shift(self, a):
        """Coefficients of ``self(a + t)`` as a polynomial in ``t``."""
        c = np.array(self._c, dtype=np.complex128)
        n = len(c)
        for i in range(n):
            for k in range(n - 2, i - 1, -1):
                c[k] += a * c[k + 1]
        return Poly(c)

    def deflate(self, r):
        """Quotient of synthetic division by ``z - r`` (the remainder is discarded)."""
        c = self._c
        if len(c) <= 1:
            return Poly()
        q = np.zeros(len(c) - 1, dtype=np.complex128)
        acc = 0j
        for k in range(len(c) - 1, 0, -1):
            acc = acc * r + c[k]
            q[k - 1] = acc
        return Poly(q)

    def reversed(self, n):
        """``z**n * self(1/z)``; requires ``n >= degree``."""
        if n < self.degree:
            raise ValueError("reversal degree below polynomial degree")
        return Poly(self.padded(n + 1)[::-1])

    def scaled_argument(self, s):
        """Coefficients of ``self(s * z)``."""
        return Poly(self._c * s ** np.arange(len(self._c)))

    def to_json(self):
        return [[float(c.real), float(c.imag)] for c in self._c]

    @classmethod
    def from_json(cls, data):
        return cls([complex(re, im) for re, im in data])


def _as_poly(x):
    if isinstance(x, Poly):
        return x
    return Poly([complex(x)])


def cancel_sub(a, b, rel=64 * np.finfo(float).eps):
    """``a - b`` with coefficients that cancel to rounding level set to exactly zero.

    A coefficient is dropped when it is below ``rel`` times the size of the
    two operands it came from, so the test is local to each coefficient.
    """
    a, b = _as_poly(a), _as_poly(b)
    n = max(len(a.coeffs), len(b.coeffs))
    x, y = a.padded(n), b.padded(n)
    d = x - y
    d[np.abs(d) <= rel * (np.abs(x) + np.abs(y))] = 0
    return Poly(d)


def homogeneous_substitute(p, degree, num, den):
    """``sum_i p_i num^i den^(degree-i)``: ``p`` read as a binary form of the given degree.

    Used for composition of rational maps, where ``num/den`` is substituted.
    """
    if p.degree > degree:
        raise ValueError("polynomial exceeds homogeneous degree")
    num_pows = [Poly([1.0])]
    den_pows = [Poly([1.0])]
    for _ in range(degree):
        num_pows.append(num_pows[-1] * num)
        den_pows.append(den_pows[-1] * den)
    out = Poly()
    for i in range(p.degree + 1):
        c = p.coeff(i)
        if c != 0:
            out = out + c * num_pows[i] * den_pows[degree - i]
    return out
