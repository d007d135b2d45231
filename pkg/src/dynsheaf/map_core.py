"""Rational self-maps of the Riemann sphere: charts, iteration, critical and postcritical data."""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .divisors import Divisor
from .errors import (
    DegreeCap,
    DegreeZero,
    NotStabilized,
    RamificationDegreeMismatch,
    SingularMobius,
)
from .numerics import series
from .numerics.geometry import ProjPoint
from .numerics.poly import Poly, cancel_sub, homogeneous_substitute
from .numerics.roots import homogeneous_roots, roots_with_multiplicity
from .numerics.tolerances import DEFAULT


class ReductionWarning(UserWarning):
    """A common factor of numerator and denominator was cancelled."""


@dataclass(frozen=True, eq=False)
class RationalMap:
    """``f = P/Q`` with ``P, Q`` coprime and ``Q`` monic; ``D = max(deg P, deg Q)``."""

    P: Poly
    Q: Poly
    warnings: tuple = ()
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def D(self):
        return max(self.P.degree, self.Q.degree)

    def forms(self):
        """Coefficient vectors of ``P, Q`` padded to length ``D + 1`` (the binary forms)."""
        return self.P.padded(self.D + 1), self.Q.padded(self.D + 1)

    def __call__(self, z):
        """Affine evaluation ``P(z)/Q(z)`` (``inf`` at poles)."""
        p, q = self.P(z), self.Q(z)
        if np.ndim(z) == 0:
            return complex("inf") if q == 0 else p / q
        with np.errstate(divide="ignore", invalid="ignore"):
            return np.where(q == 0, complex("inf"), p / np.where(q == 0, 1, q))

    def apply(self, x):
        """Image of a :class:`ProjPoint`, evaluated in whichever chart keeps ``|coordinate| <= 1``."""
        d = self.D
        if abs(x.a) <= abs(x.b):
            z = x.a / x.b
            return ProjPoint(self.P(z), self.Q(z))
        w = x.b / x.a
        return ProjPoint(self.P.reversed(d)(w), self.Q.reversed(d)(w))

    def derivative_poly(self):
        """Numerator ``P'Q - PQ'`` of ``f'`` (denominator ``Q^2``)."""
        return cancel_sub(self.P.deriv() * self.Q, self.P * self.Q.deriv())

    def local_degree(self, x, tol=DEFAULT):
        """``deg_x f``: one plus the order of vanishing of the derivative in local charts."""
        return local_degree(self, x, tol)

    def to_json(self):
        return {"P": self.P.to_json(), "Q": self.Q.to_json(), "degree": self.D}

    def __repr__(self):
        return f"RationalMap(P={self.P!r}, Q={self.Q!r})"


def _shared_roots(P, Q, tol):
    """Roots common to ``P`` and ``Q`` (chordally within ``eps_point``) with shared multiplicity."""
    out = []
    proots = [[ProjPoint.from_complex(r.point), r.multiplicity] for r in roots_with_multiplicity(P, tol)]
    for r in roots_with_multiplicity(Q, tol):
        x = ProjPoint.from_complex(r.point)
        for pr in proots:
            if pr[1] and x.chordal(pr[0]) < tol.eps_point:
                k = min(r.multiplicity, pr[1])
                pr[1] -= k
                out.append((r.point, k))
                break
    return out


def make_map(P, Q, tol=DEFAULT):
    """Reduced, normalized rational map ``P/Q``.

    Common factors are cancelled and reported through :class:`ReductionWarning`
    as well as the map's ``warnings`` record.
    """
    P = P if isinstance(P, Poly) else Poly(P)
    Q = Q if isinstance(Q, Poly) else Poly(Q)
    if P.is_zero() and Q.is_zero():
        raise DegreeZero("numerator and denominator both vanish")
    if P.is_zero() or Q.is_zero():
        raise DegreeZero("constant map")
    notes = []
    if Q.degree >= 1 and P.degree >= 1:
        for r, k in _shared_roots(P, Q, tol):
            for _ in range(k):
                P, Q = P.deflate(r), Q.deflate(r)
            notes.append(f"cancelled common factor (z - ({r:.6g}))^{k}")
    for note in notes:
        warnings.warn(note, ReductionWarning, stacklevel=2)
    lead = Q.lead
    P, Q = P / lead, Q / lead
    if max(P.degree, Q.degree) < 1:
        raise DegreeZero("map reduces to a constant")
    return RationalMap(P, Q, tuple(notes))


def compose(f, g):
    """``f o g`` (no reduction: composition of reduced maps is reduced)."""
    P = homogeneous_substitute(f.P, f.D, g.P, g.Q)
    Q = homogeneous_substitute(f.Q, f.D, g.P, g.Q)
    lead = Q.lead
    return RationalMap(P / lead, Q / lead)


def iterate(f, k, tol=DEFAULT):
    """``f^k``; refuses results of degree above ``tol.degree_cap``."""
    if k < 1:
        raise ValueError("iteration count must be positive")
    if f.D ** k > tol.degree_cap:
        raise DegreeCap(f"degree {f.D}^{k} exceeds the cap {tol.degree_cap}")
    out = f
    for _ in range(k - 1):
        out = compose(f, out)
    return out


# local charts

def chart_of(x, tol=DEFAULT):
    """``("z", x0)`` for the affine chart centred at ``x0``, or ``("w", w0)`` in ``w = 1/z``."""
    if x.is_infinity(tol):
        return ("w", x.b / x.a)
    return ("z", x.a / x.b)


def _source_forms(f, x, order, tol):
    kind, c = chart_of(x, tol)
    if kind == "z":
        num, den = f.P.taylor_shift(c), f.Q.taylor_shift(c)
    else:
        num, den = f.P.reversed(f.D).taylor_shift(c), f.Q.reversed(f.D).taylor_shift(c)
    return num.padded(order)[:order], den.padded(order)[:order]


def chart_series(f, x, order, tol=DEFAULT):
    """Taylor coefficients (``order`` of them) of ``f`` in the charts centred at ``x`` and ``f(x)``.

    Returns ``(fx, F)`` with ``F[0] = 0``.
    """
    fx = f.apply(x)
    num, den = _source_forms(f, x, order, tol)
    kind, c = chart_of(fx, tol)
    if kind == "z":
        F = series.divide(num - c * den, den, order)
    else:
        F = series.divide(den, num, order) - np.eye(1, order, 0)[0] * c
    F[0] = 0
    return fx, F


def eval_and_local_derivative(f, x, tol=DEFAULT):
    """``(f(x), derivative)`` with the derivative taken in the charts of :func:`chart_of`."""
    fx, F = chart_series(f, x, 2, tol)
    return fx, complex(F[1])


def local_degree(f, x, tol=DEFAULT):
    """``1 + mult_x(Gamma_f)``, read off the clustered zeros of ``P'Q - PQ'``.

    Near a superattracting point the chart derivative can be tiny without
    vanishing, so the ramification divisor is the reliable source.
    """
    if f.D < 2:
        return 1
    key = ("ramification", tol)
    if key not in f._cache:
        f._cache[key] = critical_data(f, tol).ramification
    return 1 + f._cache[key].mult(x)


def _series_local_degree(f, x, tol=DEFAULT):
    # valuation of the chart series; used only as an independent check at infinity
    order = f.D + 2
    _, F = chart_series(f, x, order, tol)
    scale = max(1.0, float(np.max(np.abs(F))))
    v = series.valuation(F, 1e3 * tol.eps_rank * scale)
    if v >= order:
        raise RamificationDegreeMismatch("local degree exceeds the map degree")
    return v


# critical data

@dataclass(frozen=True, eq=False)
class CriticalData:
    critical_points: tuple
    ramification: Divisor
    critical_values: tuple

    def to_json(self):
        return {
            "critical_points": [x.to_json() for x in self.critical_points],
            "ramification": self.ramification.to_json(),
            "critical_values": [x.to_json() for x in self.critical_values],
        }


def _distinct(points, tol):
    out = []
    for x in points:
        if not any(x.close(y, tol) for y in out):
            out.append(x)
    return out


def critical_data(f, tol=DEFAULT):
    """Critical points, ramification divisor and critical values.

    Finite critical points are the zeros of ``P'Q - PQ'``; read as a binary
    form of degree ``2D - 2``, its degree deficiency is the multiplicity at
    infinity, which is cross-checked against the local degree in ``w = 1/z``.
    """
    if f.D < 2:
        raise ValueError("critical data needs degree at least 2")
    n = 2 * f.D - 2
    roots = homogeneous_roots(f.derivative_poly(), n, tol)
    gamma = Divisor(roots, tol)
    if gamma.degree != n:
        raise RamificationDegreeMismatch(f"deg Gamma_f = {gamma.degree}, expected {n}")
    inf = ProjPoint.infinity()
    if _series_local_degree(f, inf, tol) - 1 != gamma.mult(inf):
        raise RamificationDegreeMismatch("ramification at infinity disagrees with the w-chart")
    crit = tuple(gamma.support)
    values = tuple(_distinct([f.apply(x) for x in crit], tol))
    return CriticalData(crit, gamma, tuple(sorted(values, key=ProjPoint.sort_key)))


# postcritical sets

@dataclass(frozen=True, eq=False)
class PostcriticalReport:
    """Postcritical sets ``S_1 ⊆ S_2 ⊆ ...`` and their increments.

    ``sets[n - 1]`` is ``S_n``; ``increments[n - 1]`` is ``a_n = #S_{n+1} - #S_n``.
    ``horizon`` is the first index of the detected 3-step plateau and
    ``suggested_N = horizon + 1``.
    """

    sets: tuple
    increments: tuple
    delta: int
    stabilized: bool
    horizon: int
    warnings: tuple = field(default=())

    @property
    def suggested_N(self):
        return self.horizon + 1

    def to_json(self):
        return {
            "sizes": [len(s) for s in self.sets],
            "increments": list(self.increments),
            "delta_f": self.delta,
            "stabilized": self.stabilized,
            "horizon": self.horizon,
            "N": self.suggested_N,
        }


def postcritical(f, N_max=40, tol=DEFAULT, strict=False, stop_early=True, plateau=3):
    """Iterate the critical values until the increments ``a_n`` stay constant for ``plateau`` steps.

    Without stabilization the report carries ``stabilized=False`` and the last
    increment; with ``strict`` a :class:`NotStabilized` error is raised instead.
    """
    if N_max < 2:
        raise ValueError("N_max must be at least 2")
    crit = critical_data(f, tol)
    orbit = list(crit.critical_values)
    current = list(orbit)
    sets = [tuple(current)]
    incs = []
    horizon = None
    notes = []
    for n in range(1, N_max + 1):
        orbit = [f.apply(x) for x in orbit]
        nxt = list(current)
        for y in orbit:
            if not any(y.close(s, tol) for s in nxt):
                nxt.append(y)
        incs.append(len(nxt) - len(current))
        current = nxt
        sets.append(tuple(current))
        if horizon is None and len(incs) >= plateau and len(set(incs[-plateau:])) == 1:
            # the plateau starts here; later orbit points may already blur under eps_point
            horizon = n - plateau + 1
            if stop_early:
                break
    for a, b in zip(incs, incs[1:]):
        if b > a:
            notes.append("increments not monotone: orbit points merged under eps_point")
            break
    stabilized = horizon is not None
    if not stabilized:
        horizon = len(incs)
    delta = incs[horizon - 1] if incs else 0
    rep = PostcriticalReport(
        tuple(tuple(sorted(s, key=ProjPoint.sort_key)) for s in sets),
        tuple(incs),
        delta,
        stabilized,
        horizon,
        tuple(notes),
    )
    if not stabilized and strict:
        raise NotStabilized(f"increments did not settle within {N_max} steps", report=rep)
    return rep


# Moebius conjugation

def mobius_conjugate(f, M, tol=DEFAULT):
    """``M^{-1} o f o M`` for ``M(z) = (a z + b)/(c z + d)`` given as ``[[a, b], [c, d]]``."""
    (a, b), (c, d) = np.asarray(M, dtype=np.complex128)
    det = a * d - b * c
    scale = max(abs(a), abs(b), abs(c), abs(d))
    if scale == 0 or abs(det) <= tol.eps_rank * scale**2:
        raise SingularMobius("Moebius matrix is singular")
    num, den = Poly([b, a]), Poly([d, c])
    Pg = homogeneous_substitute(f.P, f.D, num, den)
    Qg = homogeneous_substitute(f.Q, f.D, num, den)
    # M^{-1}(u) = (d u - b) / (-c u + a)
    P = (Pg * d - Qg * b).trimmed()
    Q = (Qg * a - Pg * c).trimmed()
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ReductionWarning)
        return make_map(P, Q, tol)


def mobius_apply(M, x):
    (a, b), (c, d) = np.asarray(M, dtype=np.complex128)
    return ProjPoint(a * x.a + b * x.b, c * x.a + d * x.b)


def mobius_inverse(M):
    (a, b), (c, d) = np.asarray(M, dtype=np.complex128)
    return np.array([[d, -b], [-c, a]])
