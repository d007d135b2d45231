"""All complex roots of a polynomial, with multiplicities.

Aberth-Ehrlich simultaneous iteration started from Newton-polygon circles,
then clustering.  Approximations of a root of multiplicity m scatter on a
circle of radius ~eps**(1/m); their Weierstrass inclusion discs overlap, so a
connected component of overlapping discs is read as one root whose
multiplicity is the component size and whose location is the centroid (the
centroid of a cluster is well conditioned even when its members are not).
"""

from dataclasses import dataclass

import numpy as np

from ..errors import NonConvergence
from . import _backend
from .geometry import ProjPoint
from .tolerances import DEFAULT

_EPS = np.finfo(float).eps
_CHUNK = 512


@dataclass(frozen=True)
class Root:
    point: complex
    multiplicity: int


def _initial_guesses(c, rng):
    """Bini's Newton-polygon starting points."""
    n = len(c) - 1
    k = np.flatnonzero(np.abs(c) > 0)
    logs = np.log(np.abs(c[k]))
    hull = [0]
    for i in range(1, len(k)):
        while len(hull) >= 2:
            a, b = hull[-2], hull[-1]
            # keep the upper hull: drop b when it lies below the chord a -> i
            cross = (k[b] - k[a]) * (logs[i] - logs[a]) - (logs[b] - logs[a]) * (k[i] - k[a])
            if cross >= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    sigma = 0.7 + 0.1 * rng.random()
    z = []
    for h0, h1 in zip(hull[:-1], hull[1:]):
        m = k[h1] - k[h0]
        u = np.exp((logs[h0] - logs[h1]) / m)
        ang = 2 * np.pi * np.arange(m) / m + 2 * np.pi * k[h0] / n + sigma
        z.extend(u * np.exp(1j * ang))
    return np.array(z, dtype=np.complex128)


def _log_abs_value(c, z):
    # log|p(z)|, through the reversed polynomial outside the unit disc to avoid overflow
    out = np.empty(len(z))
    inside = np.abs(z) <= 1.0
    with np.errstate(divide="ignore"):
        if inside.any():
            v, _ = _backend.horner(c, z[inside])
            out[inside] = np.log(np.abs(v))
        if (~inside).any():
            zo = z[~inside]
            v, _ = _backend.horner(c[::-1].copy(), 1.0 / zo)
            out[~inside] = np.log(np.abs(v)) + (len(c) - 1) * np.log(np.abs(zo))
    return out


def _log_rounding_bound(a, z):
    # log of 32 n eps sum a_k |z|^k with a_k >= |c_k|: the Horner rounding bound,
    # widened because the coefficients are usually themselves rounded results;
    # same two charts
    a = np.abs(a)
    out = np.empty(len(z))
    inside = np.abs(z) <= 1.0
    with np.errstate(divide="ignore"):
        if inside.any():
            out[inside] = np.log(np.polyval(a[::-1], np.abs(z[inside])))
        if (~inside).any():
            zo = np.abs(z[~inside])
            out[~inside] = np.log(np.polyval(a, 1.0 / zo)) + (len(a) - 1) * np.log(zo)
    return out + np.log(32 * (len(a) - 1) * _EPS)


def _weierstrass_radii(c, z, size=None):
    n = len(z)
    # a value below the rounding bound carries no information beyond that bound
    bound = _log_rounding_bound(c if size is None else size, z)
    logv = np.maximum(_log_abs_value(c, z), bound) - np.log(abs(c[-1]))
    radii = np.empty(n)
    for lo in range(0, n, _CHUNK):
        rows = np.arange(lo, min(lo + _CHUNK, n))
        diff = z[rows, None] - z[None, :]
        diff[np.arange(len(rows)), rows] = 1.0
        with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
            logd = np.sum(np.log(np.abs(diff)), axis=1)
            # coincident approximations (logd = -inf) get an infinite disc
            lr = np.where(np.isneginf(logd), np.inf, logv[rows] - logd)
            radii[rows] = n * np.exp(lr)
    return radii


def _linked_pairs(z, radii, eps):
    """Index pairs whose inclusion discs overlap or which are chordally eps-close."""
    n = len(z)
    scale = np.sqrt(1.0 + np.abs(z) ** 2)
    out = []
    for lo in range(0, n, _CHUNK):
        rows = np.arange(lo, min(lo + _CHUNK, n))
        dist = np.abs(z[rows, None] - z[None, :])
        hit = dist <= radii[rows, None] + radii[None, :]
        hit |= dist / (scale[rows, None] * scale[None, :]) < eps
        i, j = np.nonzero(hit)
        i = rows[i]
        keep = i < j
        out.extend(zip(i[keep].tolist(), j[keep].tolist()))
    return out


def _components(n, pairs):
    parent = list(range(n))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for i, j in pairs:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[max(ri, rj)] = min(ri, rj)
    groups = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    return list(groups.values())


def aberth_roots(p, tol=DEFAULT):
    """Raw Aberth approximations of all roots of ``p`` (no clustering)."""
    c = np.array(p.coeffs, dtype=np.complex128)
    n = len(c) - 1
    if n < 0:
        raise ValueError("the zero polynomial has no root multiset")
    if n == 0:
        return np.zeros(0, dtype=np.complex128)
    lowz = int(np.flatnonzero(c)[0])
    c = c[lowz:]
    m = len(c) - 1
    zeros = np.zeros(lowz, dtype=np.complex128)
    if m == 0:
        return zeros
    c = c / c[-1]
    if m == 1:
        return np.concatenate([zeros, [-c[0]]])
    rng = np.random.default_rng(tol.rng_seed)
    z0 = _initial_guesses(c, rng)
    eta = 8.0 * (m + 1) * _EPS
    z, conv, _ = _backend.aberth(c, z0, tol.max_root_iterations, eta)
    if not np.all(conv):
        # a stalled approximation may still be fine at a slightly looser level
        vals, _ = _backend.horner(c, z)
        scale = np.array([np.sum(np.abs(c) * np.abs(zi) ** np.arange(m + 1)) for zi in z])
        if np.any(np.abs(vals) > 1e3 * eta * scale):
            raise NonConvergence(
                f"Aberth iteration did not converge for degree {m} "
                f"after {tol.max_root_iterations} iterations"
            )
    return np.concatenate([zeros, z])


def roots_with_multiplicity(p, tol=DEFAULT, size=None):
    """Roots of ``p`` as a list of :class:`Root`, multiplicities summing to ``deg p``.

    ``size`` optionally gives, per coefficient, the magnitude of the terms it
    was computed from; after cancellation this is what bounds its rounding
    error, and so how far apart the copies of a multiple root may drift.
    """
    if p.is_zero():
        raise ValueError("the zero polynomial has no root multiset")
    z = aberth_roots(p, tol)
    if len(z) == 0:
        return []
    c = np.array(p.coeffs, dtype=np.complex128)
    if size is not None:
        size = np.maximum(np.abs(np.asarray(size, dtype=float)[: len(c)]), np.abs(c)) / abs(c[-1])
    c = c / c[-1]
    radii = _weierstrass_radii(c, z, size)
    # exact zeros factored out up front carry no disc; give them the smallest one
    radii = np.where(z == 0, 0.0, radii)

    out = []
    for g in _components(len(z), _linked_pairs(z, radii, tol.eps_point)):
        center = complex(np.mean(z[g]))
        if center != 0 or len(g) == 1:
            center = _newton_polish(_deriv_coeffs(c, len(g) - 1), center)
        out.append(Root(center, len(g)))
    out.sort(key=lambda r: (round(r.point.real, 9), round(r.point.imag, 9), r.multiplicity))
    return out


def _deriv_coeffs(c, k):
    # a root of multiplicity m is a simple root of the (m-1)-th derivative
    with np.errstate(over="ignore", invalid="ignore"):
        for _ in range(k):
            c = c[1:] * np.arange(1, len(c))
            c = c / np.max(np.abs(c))
    return c


def _newton_polish(c, z, steps=4):
    # plain Newton, accepted only while the residual keeps shrinking
    if not np.all(np.isfinite(c)):
        return z
    with np.errstate(over="ignore", invalid="ignore"):
        return _newton_steps(c, z, steps)


def _newton_steps(c, z, steps):
    v, d = _backend.horner(c, np.array([z]))
    for _ in range(steps):
        if d[0] == 0 or v[0] == 0 or not np.isfinite(v[0] / d[0]):
            break
        step = v[0] / d[0]
        if abs(step) > 1e-3 * (1 + abs(z)):
            break
        zn = z - step
        vn, dn = _backend.horner(c, np.array([zn]))
        if abs(vn[0]) >= abs(v[0]):
            break
        z, v, d = zn, vn, dn
    return complex(z)


def homogeneous_roots(h, n, tol=DEFAULT, size=None):
    """Zeros on the sphere of the degree-``n`` binary form whose affine part is ``h``.

    ``h`` is a :class:`Poly` with ``deg h <= n``; the point at infinity
    carries multiplicity ``n - deg h``.  Clusters closer than ``eps_point``
    on the sphere (e.g. huge affine roots next to infinity) are merged.
    Returns a list of ``(ProjPoint, multiplicity)`` summing to ``n``;
    ``size`` is passed on to :func:`roots_with_multiplicity`.
    """
    if h.is_zero():
        raise ValueError("the zero form has no root multiset")
    if h.degree > n:
        raise ValueError("form degree below polynomial degree")
    pts = [(ProjPoint.from_complex(r.point), r.multiplicity) for r in roots_with_multiplicity(h, tol, size)]
    if n > h.degree:
        pts.append((ProjPoint.infinity(), n - h.degree))
    pairs = [
        (i, j)
        for i in range(len(pts))
        for j in range(i + 1, len(pts))
        if pts[i][0].chordal(pts[j][0]) < tol.eps_point
    ]
    out = []
    for g in _components(len(pts), pairs):
        members = [pts[i] for i in g]
        mult = sum(m for _, m in members)
        # the exact point at infinity wins, else the heaviest member
        rep = max(members, key=lambda pm: (pm[0].b == 0, pm[1]))[0]
        out.append((rep, mult))
    out.sort(key=lambda pm: pm[0].sort_key())
    return out


def refine_roots(z, evaluate, maxiter=60):
    """Aberth sweeps on approximations ``z`` of all roots of a polynomial known only through ``evaluate``.

    ``evaluate(points)`` returns ``(p, p')`` up to a common nonzero factor per
    point, which is all the Newton ratio needs.  Used when the expanded
    coefficients are less accurate than a pointwise evaluation.
    """
    z = np.array(z, dtype=np.complex128)
    n = len(z)
    if n == 0:
        return z
    for _ in range(maxiter):
        v, d = evaluate(z)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(d == 0, 0, v / np.where(d == 0, 1, d))
            diff = z[:, None] - z[None, :]
            np.fill_diagonal(diff, np.inf)
            s = (1.0 / diff).sum(axis=1)
            w = ratio / (1.0 - ratio * s)
        w = np.where(np.isfinite(w), w, 0)
        z = z - w
        if np.all(np.abs(w) <= 4 * _EPS * (1 + np.abs(z))):
            break
    return z


def cluster_roots(z, evaluate, tol=DEFAULT, noise=None):
    """Group approximations by overlapping Newton discs ``|x - z_i| <= 4 n |p/p'|(z_i)``.

    ``noise`` is an optional per-point estimate of the rounding level of
    ``evaluate``; values below it are raised to it, so an approximation
    whose value happens to round to zero still gets a disc.  Returns
    :class:`Root` objects located at the cluster centroids.
    """
    z = np.asarray(z, dtype=np.complex128)
    n = len(z)
    if n == 0:
        return []
    v, d = evaluate(z)
    av = np.abs(v)
    cap = 1e-2 * (1 + np.abs(z))
    if noise is not None:
        av = np.where(v == 0, av, np.maximum(av, noise))
        av = np.where((v == 0) & (d != 0), noise, av)
    # inside the rounding-noise zone of a multiple root |p/p'| is not a
    # rigorous bound, hence the safety factor; exact zeros keep radius 0
    ad = np.abs(np.where(d == 0, 1, d))
    radii = np.where(d == 0, np.where(v == 0, 0.0, cap), np.minimum(4 * n * av / ad, cap))
    out = [Root(_snap(complex(np.mean(z[g]))), len(g)) for g in _components(n, _linked_pairs(z, radii, tol.eps_point))]
    out.sort(key=lambda r: (round(r.point.real, 9), round(r.point.imag, 9), r.multiplicity))
    return out


def _snap(z):
    # drop rounding debris in one component (e.g. -1 - 5e-32j)
    small = 4 * _EPS * abs(z)
    return complex(0.0 if abs(z.real) <= small else z.real, 0.0 if abs(z.imag) <= small else z.imag)


def polish_cluster(center, m, evaluate_scaled, radius, samples=32):
    """Relocate an ``m``-fold root as the simple zero of the ``(m-1)``-th derivative.

    Taylor coefficients about ``center`` come from a Cauchy FFT on the circle
    of the given radius; ``evaluate_scaled(points)`` returns ``(value, log_scale)``
    with ``value * exp(log_scale)`` the true polynomial value up to one
    global constant.  The circle must enclose the cluster and no other root.
    """
    if m < 2 or radius <= 0:
        return center
    t = np.exp(2j * np.pi * np.arange(samples) / samples)
    v, log_scale = evaluate_scaled(center + radius * t)
    if not np.all(np.isfinite(v)):
        return center
    vals = v * np.exp(log_scale - np.max(log_scale))
    c = np.fft.fft(vals)[: samples // 2] / samples
    c = _deriv_coeffs(c, m - 1)
    if not np.all(np.isfinite(c)) or c[1] == 0:
        return center
    # Newton in the rescaled variable; the zero sought lies well inside the circle
    w = 0j
    v, d = _backend.horner(c, np.array([w]))
    for _ in range(12):
        if d[0] == 0:
            break
        wn = w - v[0] / d[0]
        if abs(wn) > 0.5:
            return center
        vn, dn = _backend.horner(c, np.array([wn]))
        if abs(vn[0]) >= abs(v[0]):
            break
        w, v, d = wn, vn, dn
    return _snap(complex(center + radius * w))
