"""Divisors on the Riemann sphere, pullback, dynamical pairs and the divisors built from them."""

from dataclasses import dataclass

import numpy as np

from .errors import (
    DeltaMismatch,
    FiberDegreeMismatch,
    PreconditionViolation,
    SuperattractingPresent,
)
from .numerics.geometry import ProjPoint
from .numerics.poly import cancel_sub
from .numerics.roots import homogeneous_roots
from .numerics.tolerances import DEFAULT


def _as_point(x):
    return x if isinstance(x, ProjPoint) else ProjPoint.from_complex(complex(x))


class Divisor:
    """Finite formal sum ``sum m_x [x]`` of points of the sphere.

    Points closer than ``eps_point`` are merged at construction, zero
    multiplicities are dropped, and the support is kept in a canonical order.
    """

    __slots__ = ("_items", "_tol")

    def __init__(self, items=(), tol=DEFAULT):
        merged = []
        for x, m in items:
            x = _as_point(x)
            m = int(m)
            for k, (y, n) in enumerate(merged):
                if x.close(y, tol):
                    merged[k] = (y, n + m)
                    break
            else:
                merged.append((x, m))
        merged = [(x, m) for x, m in merged if m != 0]
        merged.sort(key=lambda xm: xm[0].sort_key())
        self._items = tuple(merged)
        self._tol = tol

    @classmethod
    def point(cls, x, m=1, tol=DEFAULT):
        return cls([(x, m)], tol)

    @property
    def items(self):
        return self._items

    @property
    def support(self):
        return [x for x, _ in self._items]

    @property
    def degree(self):
        return sum(m for _, m in self._items)

    def __len__(self):
        return len(self._items)

    def __iter__(self):
        return iter(self._items)

    def mult(self, x):
        x = _as_point(x)
        for y, m in self._items:
            if x.close(y, self._tol):
                return m
        return 0

    def is_effective(self):
        return all(m > 0 for _, m in self._items)

    def __add__(self, other):
        return Divisor(self._items + tuple(other.items), self._tol)

    def __neg__(self):
        return Divisor([(x, -m) for x, m in self._items], self._tol)

    def __sub__(self, other):
        return self + (-other)

    def __rmul__(self, k):
        return Divisor([(x, k * m) for x, m in self._items], self._tol)

    def _union_support(self, other):
        pts = list(self.support)
        for y in other.support:
            if not any(y.close(x, self._tol) for x in pts):
                pts.append(y)
        return pts

    def meet(self, other):
        """Pointwise minimum of multiplicities (absent points count as 0)."""
        return Divisor([(x, min(self.mult(x), other.mult(x))) for x in self._union_support(other)], self._tol)

    def join(self, other):
        return Divisor([(x, max(self.mult(x), other.mult(x))) for x in self._union_support(other)], self._tol)

    def __le__(self, other):
        return all(self.mult(x) <= other.mult(x) for x in self._union_support(other))

    def __ge__(self, other):
        return other <= self

    def __eq__(self, other):
        if not isinstance(other, Divisor):
            return NotImplemented
        return self <= other and other <= self

    __hash__ = None

    def positive_part(self):
        return Divisor([(x, m) for x, m in self._items if m > 0], self._tol)

    def to_json(self):
        return [{"point": x.to_json(), "mult": m} for x, m in self._items]

    @classmethod
    def from_json(cls, data, tol=DEFAULT):
        return cls([(ProjPoint.from_json(e["point"]), e["mult"]) for e in data], tol)

    def __repr__(self):
        if not self._items:
            return "Divisor(0)"
        terms = " + ".join(f"{m}[{x.value:.6g}]" if x.b != 0 else f"{m}[inf]" for x, m in self._items)
        return f"Divisor({terms})"


def divisor_algebra(a, b):
    """Sum, meet, order verdict and degrees of two divisors."""
    return {
        "sum": a + b,
        "meet": a.meet(b),
        "le": a <= b,
        "degree": (a.degree, b.degree),
    }


@dataclass(frozen=True, eq=False)
class EDivisorPair:
    """A pair ``(delta0, delta1)`` with ``delta1 <= delta0 ^ f* delta0`` for a bound map."""

    delta0: Divisor
    delta1: Divisor

    @classmethod
    def checked(cls, f, delta0, delta1, tol=DEFAULT):
        if not e_dynamical_check(f, delta0, delta1, tol):
            raise PreconditionViolation("pair is not E-dynamical for the given map")
        return cls(delta0, delta1)

    @property
    def degree_difference(self):
        return self.delta0.degree - self.delta1.degree

    def to_json(self):
        return {"delta0": self.delta0.to_json(), "delta1": self.delta1.to_json()}


def fiber(f, y, tol=DEFAULT):
    """Preimages of ``y`` with local degrees, as ``[(ProjPoint, deg_x f)]``.

    Solves the binary form ``b P - a Q`` of degree ``D`` for ``y = [a : b]``.
    """
    y = _as_point(y)
    a, b = f.P * y.b, f.Q * y.a
    h = cancel_sub(a, b)
    n = max(len(a.coeffs), len(b.coeffs))
    return homogeneous_roots(h, f.D, tol, np.abs(a.padded(n)) + np.abs(b.padded(n)))


def pullback_divisor(f, d, tol=DEFAULT):
    out = []
    for y, m in d:
        out.extend((x, m * e) for x, e in fiber(f, y, tol))
    res = Divisor(out, tol)
    if res.degree != f.D * d.degree:
        raise FiberDegreeMismatch(f"pullback has degree {res.degree}, expected {f.D * d.degree}")
    return res


def dynamical_check(f, delta, tol=DEFAULT):
    """``delta <= f* delta``."""
    return delta <= pullback_divisor(f, delta, tol)


def e_dynamical_check(f, delta0, delta1, tol=DEFAULT):
    """``delta1 <= delta0 ^ f* delta0``."""
    return delta1 <= delta0.meet(pullback_divisor(f, delta0, tol))


def _rigid_mult(c):
    kind = c.kind
    if kind in ("attracting", "irrationally_indifferent"):
        return 2
    if kind == "repelling":
        return 1
    if kind == "parabolic":
        n = c.parabolic.N
        return 2 * n + 1 if c.parabolic.repelling else 2 * n + 2
    raise SuperattractingPresent("superattracting cycles have no rigid multiplicity")


def rigid_divisor(f, cycles, sharp=True, tol=DEFAULT):
    """Rigid divisor on the given cycles: every cycle point gets the table multiplicity.

    Only the sharp (equality) version is a single divisor; ``sharp=False``
    returns the same minimal choice.
    """
    for c in cycles:
        if c.kind == "superattracting":
            raise SuperattractingPresent("superattracting cycle in a rigid divisor")
    return Divisor([(x, _rigid_mult(c)) for c in cycles for x in c.points], tol)


def rigid_cycles_divisor_xf(f, cycles, tol=DEFAULT):
    """Variant used on the site X/f: multiplicity 2 on every nonrepelling cycle, superattracting included."""
    out = []
    for c in cycles:
        if c.kind == "repelling":
            continue
        out.extend((x, 2) for x in c.points)
    return Divisor(out, tol)


def lambda_divisor(f, n, crit, post, tol=DEFAULT):
    """``Lambda^n = sum over C_f and S_n of deg_x f [x]``."""
    support = list(crit.critical_points)
    for x in post.sets[min(n, len(post.sets)) - 1]:
        if not any(x.close(y, tol) for y in support):
            support.append(x)
    return Divisor([(x, f.local_degree(x, tol)) for x in support], tol)


def lambda_truncated(f, n=None, tol=DEFAULT, post=None):
    """The pair ``(Lambda^{N+1}, Lambda^N)``; ``N`` defaults to the stabilization horizon plus one."""
    from .map_core import critical_data, postcritical

    crit = critical_data(f, tol)
    if post is None:
        post = postcritical(f, tol=tol, strict=True)
    if n is None:
        n = post.suggested_N
    if n > len(post.sets) - 1:
        post = postcritical(f, N_max=n + 1, tol=tol, strict=False, stop_early=False)
    lam0 = lambda_divisor(f, n + 1, crit, post, tol)
    lam1 = lambda_divisor(f, n, crit, post, tol)
    pair = EDivisorPair(lam0, lam1)
    if not e_dynamical_check(f, lam0, lam1, tol):
        raise PreconditionViolation("truncated critical divisor pair failed the E-dynamical check")
    return pair


def claim_divisor(f, cycles, n=None, tol=DEFAULT, post=None):
    """Lambda pair plus the sharp rigid summands of the given (non-superattracting) cycles.

    A cycle inside the postcritical set ``S_N`` already carries multiplicity
    one from ``Lambda``, so its summand is the sharp rigid divisor minus the
    reduced cycle.
    """
    from .map_core import postcritical

    if post is None:
        post = postcritical(f, tol=tol, strict=True)
    if n is None:
        n = post.suggested_N
    base = lambda_truncated(f, n, tol, post)
    d0, d1 = base.delta0, base.delta1
    for c in cycles:
        if c.kind == "superattracting":
            raise SuperattractingPresent("claim divisor excludes superattracting cycles")
        m = _rigid_mult(c)
        in_post = any(x.close(y, tol) for x in c.points for y in post.sets[n - 1])
        extra = Divisor([(x, m - 1 if in_post else m) for x in c.points], tol)
        d0 = d0 + extra
        d1 = d1 + extra
    pair = EDivisorPair(d0, d1)
    if not e_dynamical_check(f, d0, d1, tol):
        raise PreconditionViolation("claim divisor pair failed the E-dynamical check")
    if pair.degree_difference != post.delta:
        raise DeltaMismatch(
            f"deg delta0 - deg delta1 = {pair.degree_difference} but delta_f = {post.delta}"
        )
    return pair
