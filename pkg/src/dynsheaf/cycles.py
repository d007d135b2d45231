"""Periodic orbits, multipliers, classification, parabolic invariants and gamma multiplicities."""

from dataclasses import dataclass, replace

import numpy as np

from .errors import ClusterAmbiguity, JetOrderInsufficient, Unclassified
from .map_core import chart_series, iterate
from .numerics import series
from .numerics.geometry import ProjPoint
from .numerics.poly import Poly, cancel_sub
from .numerics.roots import _components, aberth_roots, cluster_roots, polish_cluster, refine_roots
from .numerics.tolerances import DEFAULT

KINDS = ("superattracting", "attracting", "repelling", "parabolic", "irrationally_indifferent")

# series coefficients below this are read as zero when locating N
_JET_TOL = 1e-8
_MAX_JET_ORDER = 80


@dataclass(frozen=True)
class ParabolicData:
    """Invariants of a parabolic cycle.

    ``N + 1`` is the multiplicity of the cycle point as a fixed point of
    ``g = f^(kq)``.  ``alpha`` is the formal invariant of ``f^k`` in its
    preferred coordinate and ``beta = (N + 1)/2 - alpha``.  ``alpha_g`` is the
    invariant of ``g`` itself (from its normal form) and ``residue`` the
    fixed-point index of ``g``, an independent route to the same number.
    """

    q: int
    N: int
    nu: int
    alpha: complex
    beta: complex
    alpha_g: complex
    residue: complex

    @property
    def repelling(self):
        return self.beta.real > 1e-9

    def to_json(self):
        return {
            "q": self.q,
            "N": self.N,
            "nu": self.nu,
            "alpha": [self.alpha.real, self.alpha.imag],
            "beta": [self.beta.real, self.beta.imag],
            "repelling": self.repelling,
        }


@dataclass(frozen=True, eq=False)
class Cycle:
    points: tuple
    period: int
    multiplier: complex
    kind: str = None
    parabolic: ParabolicData = None

    def contains(self, x, tol=DEFAULT):
        return any(x.close(p, tol) for p in self.points)

    def to_json(self):
        out = {
            "period": self.period,
            "points": [p.to_json() for p in self.points],
            "multiplier": [self.multiplier.real, self.multiplier.imag],
            "class": self.kind,
        }
        if self.parabolic is not None:
            out["parabolic"] = self.parabolic.to_json()
        return out


def orbit_series(f, points, order, tol=DEFAULT):
    """Chart series of ``f`` at each orbit point (chart at ``x_i`` to chart at ``x_{i+1}``)."""
    return [chart_series(f, x, order, tol)[1] for x in points]


def multiplier(f, points, tol=DEFAULT):
    rho = 1 + 0j
    for F in orbit_series(f, points, 2, tol):
        rho *= F[1]
    return complex(rho)


def fixed_point_form(g):
    """``P - z Q``: its zeros (as a binary form of degree ``D + 1``) are the fixed points."""
    return cancel_sub(g.P, g.Q * Poly([0, 1]))


def _orbit_form_evaluator(f, k):
    """Pointwise ``(h, h')`` for ``h = P_k - z Q_k``, ``f^k = P_k/Q_k``, by homogeneous iteration.

    Values come back up to a per-point scale.  Iterating ``f`` on the pair
    ``(a, b)`` avoids the cancellation hidden in the expanded coefficients of
    ``f^k`` when periodic points crowd together.
    """
    d = f.D
    p = f.P.padded(d + 1)
    q = f.Q.padded(d + 1)
    idx = np.arange(d + 1)[:, None]

    def form(c, pa, pb, dpa, dpb):
        val = np.sum(c[:, None] * pa * pb[::-1], axis=0)
        der = np.sum(c[:, None] * (dpa * pb[::-1] + pa * dpb[::-1]), axis=0)
        return val, der

    def evaluate(z, with_scale=False):
        z = np.asarray(z, dtype=np.complex128)
        s = np.maximum(np.abs(z), 1.0)
        log_scale = np.log(s)
        a, b = z / s, 1.0 / s + 0j
        da, db = 1.0 / s + 0j, np.zeros_like(z)
        for _ in range(k):
            pa = a[None, :] ** idx
            pb = b[None, :] ** idx
            # d/dz a^i = i a^(i-1) a'
            dpa = np.vstack([np.zeros_like(a)[None, :], idx[1:] * pa[:-1] * da])
            dpb = np.vstack([np.zeros_like(b)[None, :], idx[1:] * pb[:-1] * db])
            A, dA = form(p, pa, pb, dpa, dpb)
            B, dB = form(q, pa, pb, dpa, dpb)
            s = np.maximum(np.abs(A), np.abs(B))
            s = np.where(s == 0, 1.0, s)
            log_scale = d * log_scale + np.log(s)
            a, b, da, db = A / s, B / s, dA / s, dB / s
        if with_scale:
            return a - z * b, da - b - z * db, log_scale
        return a - z * b, da - b - z * db

    return evaluate


def _scaled(evaluate, w):
    v, _, log_scale = evaluate(w, with_scale=True)
    return v, log_scale


def periodic_points(f, k, tol=DEFAULT):
    """Fixed points of ``f^k`` on the sphere as ``(ProjPoint, multiplicity)``, multiplicities summing to ``D^k + 1``.

    Aberth on the expanded fixed-point form supplies starting values; they are
    refined and clustered with the pointwise evaluator.
    """
    g = iterate(f, k, tol)
    h = fixed_point_form(g)
    n = g.D + 1
    evaluate = _orbit_form_evaluator(f, k)
    z = refine_roots(aberth_roots(h, tol), evaluate)
    # the evaluator works on unit-size pairs, so its rounding level is ~eps (1 + |z|)
    roots = cluster_roots(z, evaluate, tol, noise=16 * np.finfo(float).eps * (1 + np.abs(z)))
    centers = np.array([r.point for r in roots])
    pts = []
    for i, r in enumerate(roots):
        x = r.point
        if r.multiplicity > 1:
            members = z[np.abs(z - x) <= 0.5 * np.min(np.abs(centers[np.arange(len(centers)) != i] - x), initial=np.inf)]
            spread = float(np.max(np.abs(members - x), initial=0.0))
            others = np.abs(centers[np.arange(len(centers)) != i] - x)
            gap = float(np.min(others, initial=1.0 + abs(x)))
            radius = min(0.4 * gap, max(1e3 * spread, 1e-4 * (1 + abs(x))))
            x = polish_cluster(x, r.multiplicity, lambda w: _scaled(evaluate, w), radius)
        pts.append((ProjPoint.from_complex(x), r.multiplicity))
    if n > h.degree:
        pts.append((ProjPoint.infinity(), n - h.degree))
    pairs = [
        (i, j)
        for i in range(len(pts))
        for j in range(i + 1, len(pts))
        if pts[i][0].chordal(pts[j][0]) < tol.eps_point
    ]
    out = []
    for grp in _components(len(pts), pairs):
        members = [pts[i] for i in grp]
        rep = max(members, key=lambda pm: (pm[0].b == 0, pm[1]))[0]
        out.append((rep, sum(m for _, m in members)))
    out.sort(key=lambda pm: pm[0].sort_key())
    return out


def _match(x, candidates, tol):
    d = [x.chordal(c) for c in candidates]
    i = int(np.argmin(d))
    return i, d[i]


def cycles_up_to_period(f, k_max, tol=DEFAULT, classify=True):
    """All cycles of exact period ``<= k_max``, sorted by period then by first point.

    Fixed points of ``f^k`` come from the homogenized equation; points already
    seen at a smaller period are skipped, and the rest are grouped into orbits
    by forward iteration, snapping each image to the nearest computed root.
    """
    found = []
    match_tol = 1e-5
    for k in range(1, k_max + 1):
        roots = periodic_points(f, k, tol)
        pts = [x for x, _ in roots]
        used = [False] * len(pts)
        for i, x in enumerate(pts):
            if used[i] or any(c.contains(x, tol) for c in found):
                continue
            orbit = [i]
            y = x
            ok = True
            for _ in range(k - 1):
                y = f.apply(y)
                j, dist = _match(y, pts, tol)
                if dist > match_tol:
                    ok = False
                    break
                if j == i:
                    break
                orbit.append(j)
                y = pts[j]
            if not ok or len(orbit) != k:
                continue
            j, dist = _match(f.apply(pts[orbit[-1]]), pts, tol)
            if j != i:
                continue
            if any(used[j] for j in orbit):
                raise ClusterAmbiguity("periodic points of distinct cycles could not be separated")
            for j in orbit:
                used[j] = True
            start = min(range(k), key=lambda t: pts[orbit[t]].sort_key())
            cyc_pts = tuple(pts[orbit[(start + t) % k]] for t in range(k))
            c = Cycle(cyc_pts, k, multiplier(f, cyc_pts, tol))
            found.append(classify_cycle(f, c, tol) if classify else c)
    found.sort(key=lambda c: (c.period, c.points[0].sort_key()))
    return found


def _root_of_unity_order(rho, tol):
    for q in range(1, tol.q_max + 1):
        if abs(rho**q - 1) < tol.unity_tol:
            return q
    return None


def return_series(f, points, reps, order, tol=DEFAULT):
    """Series of ``f^(k * reps)`` at ``points[0]``, composed around the orbit."""
    fs = orbit_series(f, points, order, tol)
    g = np.zeros(order, dtype=np.complex128)
    g[1] = 1.0
    for _ in range(reps):
        for F in fs:
            g = series.compose(F, g, order)
    return g


def normal_form(g, N):
    """Conjugate ``g = z + a z^(N+1) + ...`` by ``z + c z^j`` (``j = 2..N``) to kill orders ``N+2..2N``.

    Returns the conjugated series.
    """
    n = len(g)
    a = g[N + 1]
    for j in range(2, N + 1):
        e = g[N + j]
        if e == 0:
            continue
        c = -e / (a * (N + 1 - j))
        h = np.zeros(n, dtype=np.complex128)
        h[1], h[j] = 1.0, c
        g = series.compose(series.inverse(h, n), series.compose(g, h, n), n)
    return g


def fixed_point_residue(g, N):
    """``Res_0 1/(z - g(z))`` for ``g(z) - z`` of valuation ``N + 1``."""
    s = g.copy()
    s[1] -= 1.0
    tail = s[N + 1:]
    return complex(-series.reciprocal(tail, N + 1)[N])


def parabolic_data(f, c, q, tol=DEFAULT):
    order = 8
    while True:
        g = return_series(f, c.points, q, order, tol)
        d = g.copy()
        d[1] -= 1.0
        d[0] = 0.0
        scale = max(1.0, float(np.max(np.abs(d))))
        v = series.valuation(d, _JET_TOL * scale)
        if v < order and 2 * (v - 1) + 2 <= order:
            break
        if order >= _MAX_JET_ORDER:
            raise JetOrderInsufficient(f"g(z) - z vanishes beyond order {order}")
        order = min(2 * order, _MAX_JET_ORDER)
    N = v - 1
    if N < 1 or N % q:
        raise JetOrderInsufficient(f"multiplicity N+1 = {N + 1} is not 1 mod q = {q}")
    # rounding debris below order N+1 is discarded
    g = g.copy()
    g[1] = 1.0
    g[2:N + 1] = 0.0
    nf = normal_form(g, N)
    alpha_g = complex(nf[2 * N + 1] / nf[N + 1] ** 2)
    residue = fixed_point_residue(g, N)
    alpha = q * residue - (N + 1) * (q - 1) / 2
    beta = (N + 1) / 2 - alpha
    return ParabolicData(q, N, N // q, complex(alpha), complex(beta), alpha_g, residue)


def classify_cycle(f, c, tol=DEFAULT):
    """Fill in the class (and parabolic data) of a cycle from its multiplier."""
    rho = c.multiplier
    r = abs(rho)
    par = None
    if r < tol.eps_rank:
        kind = "superattracting"
    elif r < 1 - tol.unity_tol:
        kind = "attracting"
    elif r > 1 + tol.unity_tol:
        kind = "repelling"
    else:
        q = _root_of_unity_order(rho, tol)
        if q is None:
            kind = "irrationally_indifferent"
        else:
            kind = "parabolic"
            par = parabolic_data(f, c, q, tol)
    return replace(c, kind=kind, parabolic=par)


def cycle_from_point(f, x, tol=DEFAULT, k_max=12):
    """The cycle through a known periodic point ``x`` (complex or :class:`ProjPoint`)."""
    x = x if isinstance(x, ProjPoint) else ProjPoint.from_complex(complex(x))
    pts = [x]
    y = f.apply(x)
    while y.chordal(x) > 1e-6:
        pts.append(y)
        if len(pts) > k_max:
            raise ValueError("point is not periodic within the allowed period")
        y = f.apply(y)
    c = Cycle(tuple(pts), len(pts), multiplier(f, pts, tol))
    return classify_cycle(f, c, tol)


def gamma_value(c):
    if c.kind is None:
        raise Unclassified("cycle has not been classified")
    if c.kind in ("superattracting", "repelling"):
        return 0
    if c.kind in ("attracting", "irrationally_indifferent"):
        return 1
    p = c.parabolic
    return p.nu if p.repelling else p.nu + 1


@dataclass(frozen=True, eq=False)
class GammaReport:
    """Per-cycle gamma values and their sum over the chosen cycle set.

    ``gamma_A`` only sees the cycles passed in, so it is a lower bound for
    the total over all cycles.
    """

    cycles: tuple
    values: tuple
    gamma_A: int
    lower_bound: bool = True

    def to_json(self):
        return {"values": list(self.values), "gamma_A": self.gamma_A, "lower_bound": self.lower_bound}


def gamma(f, cycles):
    values = tuple(gamma_value(c) for c in cycles)
    return GammaReport(tuple(cycles), values, sum(values))
