"""Points of the Riemann sphere and the chordal metric."""

import math
from dataclasses import dataclass

from .tolerances import DEFAULT


def chordal(a, b):
    """Chordal distance, bounded by 1; ``complex('inf')`` stands for the point at infinity."""
    a_inf = math.isinf(abs(a))
    b_inf = math.isinf(abs(b))
    if a_inf and b_inf:
        return 0.0
    if a_inf:
        return 1.0 / math.sqrt(1.0 + abs(b) ** 2)
    if b_inf:
        return 1.0 / math.sqrt(1.0 + abs(a) ** 2)
    return abs(a - b) / (math.sqrt(1.0 + abs(a) ** 2) * math.sqrt(1.0 + abs(b) ** 2))


@dataclass(frozen=True, eq=False)
class ProjPoint:
    """A point ``[a : b]`` of the projective line, stored with ``|a|^2 + |b|^2 = 1``.

    The phase is fixed by making ``b`` real and nonnegative (``a = 1`` at
    infinity), so two representatives of the same point compare bit-equal.
    Equality is chordal closeness under the default ``eps_point``.
    """

    a: complex
    b: complex

    def __post_init__(self):
        a, b = complex(self.a), complex(self.b)
        r = math.hypot(abs(a), abs(b))
        if r == 0 or not math.isfinite(r):
            raise ValueError("[0 : 0] is not a point")
        a, b = a / r, b / r
        if b != 0:
            ph = b / abs(b)
            a, b = a / ph, complex(abs(b), 0.0)
        else:
            a = 1 + 0j
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @classmethod
    def from_complex(cls, z):
        if math.isinf(abs(z)):
            return cls.infinity()
        return cls(z, 1.0)

    @classmethod
    def infinity(cls):
        return cls(1.0, 0.0)

    def is_infinity(self, tol=DEFAULT):
        return abs(self.b) < tol.eps_point

    @property
    def value(self):
        """Affine coordinate, ``complex('inf')`` at infinity."""
        if self.b == 0:
            return complex("inf")
        return self.a / self.b

    def chordal(self, other):
        # |a1 b2 - a2 b1| for unit representatives
        return abs(self.a * other.b - other.a * self.b)

    def close(self, other, tol=DEFAULT):
        return self.chordal(other) < tol.eps_point

    def __eq__(self, other):
        if not isinstance(other, ProjPoint):
            return NotImplemented
        return self.close(other)

    __hash__ = None

    def sort_key(self):
        if self.b == 0:
            return (1, 0.0, 0.0)
        z = self.value
        return (0, round(z.real, 9), round(z.imag, 9))

    def to_json(self):
        return [self.a.real, self.a.imag, self.b.real, self.b.imag]

    @classmethod
    def from_json(cls, q):
        return cls(complex(q[0], q[1]), complex(q[2], q[3]))

    def __repr__(self):
        if self.b == 0:
            return "ProjPoint(inf)"
        z = self.value
        return f"ProjPoint({z.real:.10g}{z.imag:+.10g}j)"
