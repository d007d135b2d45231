"""Meromorphic quadratic differentials with bounded poles, pullback, pushforward and ``nabla_f``.

A differential ``R(z) dz^2`` with poles bounded by an effective divisor
``Delta`` is stored by its coefficients in the basis
``z^j / prod_i l_i(z)^{m_i}`` of the space ``H^0(Omega^2(+Delta))``, where the
product runs over the finite support and ``l_i(z) = z - a_i`` (or
``1 - z/a_i`` when ``|a_i| > 1``, which keeps the basis well scaled).  The
exponent ``j`` runs up to ``deg Delta_finite - 4 + mult_Delta(inf)`` so the
differential has the allowed order at infinity.

Pullback and pushforward are computed by sampling and fitting in the target
basis; the fit residual certifies the pole bound.
"""

from dataclasses import dataclass
from math import gcd

import numpy as np

from .divisors import Divisor, e_dynamical_check, fiber
from .errors import BasisOverflow, NearCriticalSample, OverdeterminedInconsistent, PreconditionViolation
from .map_core import critical_data, mobius_apply, mobius_conjugate, mobius_inverse, postcritical
from .numerics.geometry import ProjPoint
from .numerics.linalg import LabeledMatrix, fit_in_basis, rank_and_kernel
from .numerics.roots import aberth_roots
from .numerics.tolerances import DEFAULT

_SAMPLE_RADIUS = 2.0
# fits sample several circles so the coefficients are good across an annulus
_FIT_RADII = (0.5, 1.0, _SAMPLE_RADIUS)
_EXTRA_SAMPLES = 8
_RETRIES = 5
# samples closer than this (chordally) to a pole or critical value are redrawn
_AVOID = 1e-3
# |f'| below this at a fiber point marks a sample as near-critical
_DERIV_FLOOR = 1e-6


@dataclass(frozen=True, eq=False)
class QDSpace:
    """``H^0(Omega^2(+Delta))`` with its partial-fraction basis."""

    delta: Divisor
    poles: tuple
    m_inf: int
    dim: int

    @property
    def top(self):
        """Largest numerator exponent (``dim - 1``)."""
        return self.dim - 1

    def labels(self, tag="qd"):
        return [(tag, j) for j in range(self.dim)]

    def denominator(self, z):
        z = np.asarray(z, dtype=np.complex128)
        out = np.ones_like(z)
        for a, m in self.poles:
            if abs(a) > 1:
                out = out * (1 - z / a) ** m
            else:
                out = out * (z - a) ** m
        return out

    def basis_values(self, z):
        """``(len(z), dim)`` matrix of basis functions ``R_j(z)``."""
        z = np.asarray(z, dtype=np.complex128)
        powers = z[:, None] ** np.arange(self.dim)[None, :]
        return powers / self.denominator(z)[:, None]

    def zero(self):
        return QuadDifferential(self, np.zeros(self.dim, dtype=np.complex128))

    def element(self, coeffs):
        return QuadDifferential(self, coeffs)


def qd_basis(delta, tol=DEFAULT):
    """The space of quadratic differentials with poles bounded by ``delta``."""
    if not delta.is_effective():
        raise ValueError("pole bound must be effective")
    poles = []
    m_inf = 0
    for x, m in delta:
        if x.is_infinity(tol):
            m_inf += m
        else:
            poles.append((complex(x.value), m))
    dim = max(0, delta.degree - 3)
    return QDSpace(delta, tuple(poles), m_inf, dim)


@dataclass(frozen=True, eq=False)
class QuadDifferential:
    space: QDSpace
    coeffs: np.ndarray

    def __post_init__(self):
        c = np.asarray(self.coeffs, dtype=np.complex128).reshape(-1)
        if len(c) != self.space.dim:
            raise ValueError(f"expected {self.space.dim} coefficients, got {len(c)}")
        object.__setattr__(self, "coeffs", c)

    def __call__(self, z):
        """``R(z)`` at finite points."""
        z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
        if self.space.dim == 0:
            return np.zeros(len(z), dtype=np.complex128)
        return self.space.basis_values(z) @ self.coeffs

    def _check_space(self, other):
        if other.space is not self.space:
            raise ValueError("differentials live in different spaces")

    def __add__(self, other):
        self._check_space(other)
        return QuadDifferential(self.space, self.coeffs + other.coeffs)

    def __sub__(self, other):
        self._check_space(other)
        return QuadDifferential(self.space, self.coeffs - other.coeffs)

    def __rmul__(self, a):
        return QuadDifferential(self.space, a * self.coeffs)

    def __neg__(self):
        return QuadDifferential(self.space, -self.coeffs)

    def to_json(self):
        return {
            "pole_divisor": self.space.delta.to_json(),
            "coefficients": [[c.real, c.imag] for c in self.coeffs],
        }

    @classmethod
    def from_json(cls, data, tol=DEFAULT):
        space = qd_basis(Divisor.from_json(data["pole_divisor"], tol), tol)
        return cls(space, np.array([complex(a, b) for a, b in data["coefficients"]]))


# sampling helpers

def _derivative(f, z):
    p, dp = f.P.eval_with_derivative(z)
    q, dq = f.Q.eval_with_derivative(z)
    return (dp * q - p * dq) / q**2


def _values(f, z):
    return f.P(z) / f.Q(z)


def _circle_samples(n, avoid, rng, radii=(_SAMPLE_RADIUS,)):
    """``n`` equispaced points per circle under a random rotation, chordally away from ``avoid``."""
    base = np.exp(2j * np.pi * np.arange(n) / n)
    for _ in range(50 * n + 100):
        w = np.concatenate([r * base * np.exp(2j * np.pi * rng.random()) for r in radii])
        if all(ProjPoint.from_complex(complex(z)).chordal(a) > _AVOID for z in w for a in avoid):
            return w
    raise NearCriticalSample("could not place samples away from poles and critical values")


def _fit(space, z, vals, tol):
    """Coordinates in ``space`` of sampled values, fitted through the numerator polynomial.

    Rows are normalized by the size of the monomial row, so samples on
    several circles each constrain the fit relative to their own scale.
    """
    z = np.asarray(z, dtype=np.complex128)
    powers = np.arange(space.dim)

    def rows(p):
        m = p[:, None] ** powers[None, :]
        return m / np.linalg.norm(m, axis=1)[:, None]

    num = np.asarray(vals) * space.denominator(z) / np.linalg.norm(z[:, None] ** powers[None, :], axis=1)
    coeffs, _ = fit_in_basis(list(zip(z, num)), rows, tol)
    return coeffs


def _pole_points(space):
    return [x for x, _ in space.delta]


def pullback_bound(f, delta, tol=DEFAULT):
    """Pole bound of ``f*q`` for ``q`` in ``H^0(Omega^2(+delta))``.

    At a preimage ``x`` of ``y`` the order is ``deg_x f (ord_y q + 2) - 2``, so
    a pole of order ``m`` at ``y`` gives a pole of order
    ``max(0, 2 - deg_x f (2 - m))`` at ``x``.
    """
    out = []
    for y, m in delta:
        for x, e in fiber(f, y, tol):
            order = 2 - e * (2 - m)
            if order > 0:
                out.append((x, order))
    return Divisor(out, tol)


def pullback_qd(f, q, target=None, tol=DEFAULT):
    """``f*q = R(f(z)) f'(z)^2 dz^2`` in the space bounded by ``target`` (default: the computed bound)."""
    bound = pullback_bound(f, q.space.delta, tol)
    if target is None:
        target = bound
    if not bound <= target:
        raise BasisOverflow(f"pullback needs poles {bound!r}, target allows {target!r}")
    tspace = qd_basis(target, tol)
    if tspace.dim == 0:
        return tspace.zero()
    rng = np.random.default_rng(tol.rng_seed)
    avoid = _pole_points(tspace) + list(critical_data(f, tol).critical_points)
    z = _circle_samples(tspace.dim + _EXTRA_SAMPLES, avoid, rng, _FIT_RADII)
    vals = q(_values(f, z)) * _derivative(f, z) ** 2
    return tspace.element(_fit(tspace, z, vals, tol))


def _fiber_points(f, w, tol):
    c = f.P - f.Q * w
    z = aberth_roots(c, tol)
    if len(z) != f.D:
        # w is the image of infinity
        return None
    return z


def _pushforward_samples(f, funcs, avoid, need, tol):
    """Sample points ``w`` with the fiber sums ``sum R(z)/f'(z)^2`` and the largest single term.

    One column of sums per function in ``funcs``.
    """
    rng = np.random.default_rng(tol.rng_seed)
    crit = critical_data(f, tol)
    avoid = list(avoid) + list(crit.critical_values) + [f.apply(ProjPoint.infinity())]
    for _ in range(_RETRIES):
        ws = _circle_samples(need, avoid, rng, _FIT_RADII)
        sums = []
        term = 0.0
        for w in ws:
            z = _fiber_points(f, w, tol)
            if z is None:
                break
            d = _derivative(f, z)
            if np.min(np.abs(d)) < _DERIV_FLOOR:
                break
            terms = [g(z) / d**2 for g in funcs]
            term = max(term, max(float(np.max(np.abs(t))) for t in terms))
            sums.append([np.sum(t) for t in terms])
        else:
            return ws, np.array(sums, dtype=np.complex128).reshape(len(ws), len(funcs)), term
        # a sample fell near a critical point; redraw the whole rotated set
    raise NearCriticalSample(f"samples fell near critical points in {_RETRIES} rotations")


def _basis_funcs(space):
    return [(lambda z, k=k: space.basis_values(z)[:, k]) for k in range(space.dim)]


def pushforward_matrix(f, source, target, tol=DEFAULT):
    """Matrix of ``f_*`` from the basis of ``source`` to the basis of ``target``.

    Raises :class:`OverdeterminedInconsistent` if some image leaves ``target``.
    """
    m = np.zeros((target.dim, source.dim), dtype=np.complex128)
    if source.dim:
        ws, sums, term = _pushforward_samples(
            f, _basis_funcs(source), _pole_points(target), target.dim + _EXTRA_SAMPLES, tol
        )
        if target.dim == 0:
            # only the zero differential fits in a zero space
            if np.max(np.abs(sums)) > tol.eps_residual * max(1.0, term):
                raise OverdeterminedInconsistent("pushforward is nonzero but the target space is zero")
        for k in range(source.dim if target.dim else 0):
            m[:, k] = _fit(target, ws, sums[:, k], tol)
    return LabeledMatrix(target.labels("target"), source.labels("source"), m)


def pushforward_qd(f, q, delta_target, tol=DEFAULT):
    """``f_* q``: sum over inverse branches of ``R(z)/f'(z)^2``, fitted in ``H^0(Omega^2(+delta_target))``."""
    tspace = qd_basis(delta_target, tol)
    if tspace.dim == 0:
        return tspace.zero()
    ws, sums, _ = _pushforward_samples(f, [q], _pole_points(tspace), tspace.dim + _EXTRA_SAMPLES, tol)
    return tspace.element(_fit(tspace, ws, sums[:, 0], tol))


def express(q, space, tol=DEFAULT):
    """Coordinates of ``q`` in a space whose pole bound contains that of ``q``."""
    if space.dim == 0:
        if q.space.dim and np.any(q.coeffs):
            raise OverdeterminedInconsistent("nonzero differential in a zero space")
        return space.zero()
    rng = np.random.default_rng(tol.rng_seed)
    z = _circle_samples(space.dim + _EXTRA_SAMPLES, _pole_points(space) + _pole_points(q.space), rng, _FIT_RADII)
    return space.element(_fit(space, z, q(z), tol))


def inclusion_matrix(source, target, tol=DEFAULT):
    m = np.zeros((target.dim, source.dim), dtype=np.complex128)
    for k in range(source.dim):
        e = np.zeros(source.dim)
        e[k] = 1.0
        m[:, k] = express(source.element(e), target, tol).coeffs
    return LabeledMatrix(target.labels("target"), source.labels("source"), m)


def _fibonacci_sphere(n):
    """``3 x n`` unit vectors spread evenly over the sphere."""
    k = np.arange(n) + 0.5
    h = 1 - 2 * k / n
    t = np.pi * (1 + 5**0.5) * k
    r = np.sqrt(1 - h**2)
    return np.stack([r * np.cos(t), r * np.sin(t), h])


def _sphere_samples(n, avoid, rng):
    """``n`` roughly equidistributed points of the sphere (Fibonacci lattice) under a random rotation."""
    base = _fibonacci_sphere(n)
    for _ in range(_RETRIES * 20):
        rot, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        x, y, c = rot @ base
        if np.max(c) > 1 - 1e-12:
            continue
        w = (x + 1j * y) / (1 - c)
        if all(ProjPoint.from_complex(complex(z)).chordal(a) > _AVOID for z in w for a in avoid):
            return w
    raise NearCriticalSample("could not place sphere samples away from poles and critical values")


def _section_weight(space, z):
    """Pointwise size of ``R(z) dz^2`` as a section of ``Omega^2(+Delta)``.

    The round metric times the chordal distance to each pole, raised to its
    order, which keeps every element of the space bounded on the sphere.
    """
    z = np.asarray(z, dtype=np.complex128)
    s = 1 + np.abs(z) ** 2
    out = s ** (2 - space.m_inf / 2)
    for a, m in space.poles:
        out = out * (np.abs(z - a) / np.sqrt(s * (1 + abs(a) ** 2))) ** m
    return out


def _normalized_nabla(f, source, target, tol):
    """``incl`` and ``f_*`` in bases orthonormal for a discrete L^2 product of sections.

    The kernel does not depend on the basis, but the gap between zero and
    nonzero singular values does, and the partial-fraction basis degrades when
    poles cluster.  Both spaces are orthonormalized by QR of weighted values at
    sample points ``w`` and their fibers, so the orthonormal functions are known
    exactly where they are needed and conditioning only enters as a small
    additive error.
    """
    rng = np.random.default_rng(tol.rng_seed)
    crit = critical_data(f, tol)
    avoid = (
        _pole_points(target)
        + list(crit.critical_values)
        + [f.apply(ProjPoint.infinity())]
        + [f.apply(x) for x in _pole_points(source)]
    )
    n = 4 * max(target.dim, source.dim) + 4 * _EXTRA_SAMPLES
    for _ in range(_RETRIES):
        ws = _sphere_samples(n, avoid, rng)
        fibers = [_fiber_points(f, w, tol) for w in ws]
        if any(z is None for z in fibers):
            continue
        zs = np.array(fibers)
        d = _derivative(f, zs.ravel()).reshape(zs.shape)
        if np.min(np.abs(d)) >= _DERIV_FLOOR:
            break
    else:
        raise NearCriticalSample(f"samples fell near critical points in {_RETRIES} rotations")
    pts = np.concatenate([ws, zs.ravel()])
    rho_s = _section_weight(source, pts)
    rho_t = _section_weight(target, ws)
    q_s, _ = np.linalg.qr(source.basis_values(pts) * rho_s[:, None])
    q_t, _ = np.linalg.qr(target.basis_values(ws) * rho_t[:, None])
    phi = q_s / rho_s[:, None]
    fib = phi[n:].reshape(n, f.D, source.dim)
    pushed = np.sum(fib / d[:, :, None] ** 2, axis=1) * rho_t[:, None]
    proj = q_t.conj().T
    return proj @ (phi[:n] * rho_t[:, None]), proj @ pushed


def _unit_vector(y):
    # unit representative [a : b] on the sphere in R^3, infinity at the north pole
    ab = y.a * np.conj(y.b)
    return [2 * ab.real, 2 * ab.imag, abs(y.a) ** 2 - abs(y.b) ** 2]


def _balancing_frame(points, iters=200):
    """Moebius matrix ``B`` putting the conformal barycenter of ``points`` at the center of the ball.

    Unique up to a rotation, which the round metric does not see, so work done
    after moving by ``B`` no longer depends on the coordinate the data came in.
    Each step rotates the Euclidean mean of the points to the north pole and
    pulls the sphere south by a dilation.
    """
    B = np.eye(2, dtype=np.complex128)
    for _ in range(iters):
        v = np.mean([_unit_vector(mobius_apply(B, x)) for x in points], axis=0)
        r = float(np.linalg.norm(v))
        if r < 1e-3 or r >= 1:
            break
        v = v / r
        R = np.eye(2, dtype=np.complex128)
        if v[2] < 1 - 1e-12:
            u = complex(v[0], v[1]) / (1 - v[2])
            R = np.array([[u.conjugate(), 1], [-1, u]])
        S = np.diag([1.0, np.sqrt((1 + r) / (1 - r))])
        B = S @ R @ B
        B = B / np.max(np.abs(B))
    # a final rotation sends the direction farthest from every point to infinity,
    # so no point sits next to the chart boundary
    ys = np.array([_unit_vector(mobius_apply(B, x)) for x in points])
    cand = _fibonacci_sphere(64)
    v = cand[:, np.argmin(np.max(ys @ cand, axis=0))]
    if v[2] < 1 - 1e-12:
        u = complex(v[0], v[1]) / (1 - v[2])
        B = np.array([[u.conjugate(), 1], [-1, u]]) @ B
    return B / np.max(np.abs(B))


def _moved(d, B, tol):
    return Divisor([(mobius_apply(B, x), m) for x, m in d], tol)


@dataclass(frozen=True, eq=False)
class NablaResult:
    """``nabla_f = incl - f_*`` and the dimension of its kernel (the dual of ``Ext^2``)."""

    nabla: LabeledMatrix
    ext2_dim: int
    smallest_singular_value: float
    margin: float
    source: QDSpace
    target: QDSpace
    scale: float = 1.0
    # nabla in round-metric orthonormal bases; ranks and margins refer to it
    normalized: LabeledMatrix = None

    def to_json(self):
        return {
            "source_dim": self.source.dim,
            "target_dim": self.target.dim,
            "ext2": self.ext2_dim,
            "smallest_singular_value": self.smallest_singular_value,
            "margin": self.margin,
        }


def nabla_and_ext2(f, pair, tol=DEFAULT):
    """``nabla_f: H^0(Omega^2(+Delta_1 - Gamma_f)) -> H^0(Omega^2(+Delta_0))`` and ``dim ker``."""
    d0, d1 = pair.delta0, pair.delta1
    gamma_f = critical_data(f, tol).ramification
    if not gamma_f <= d1:
        raise PreconditionViolation("Gamma_f is not bounded by Delta_1")
    if not e_dynamical_check(f, d0, d1, tol):
        raise PreconditionViolation("divisor pair is not E-dynamical")
    source = qd_basis(d1 - gamma_f, tol)
    target = qd_basis(d0, tol)
    inc = inclusion_matrix(source, target, tol)
    push = pushforward_matrix(f, source, target, tol)
    nab = LabeledMatrix(inc.rows, inc.cols, inc.entries - push.entries)
    if source.dim == 0:
        return NablaResult(nab, 0, float("inf"), 1.0, source, target)
    if target.dim == 0:
        return NablaResult(nab, source.dim, 0.0, 0.0, source, target)
    # ranks are judged in orthonormal coordinates of a balanced frame; incl and
    # f_* may cancel exactly, so against their own size
    crit = critical_data(f, tol)
    B = _balancing_frame(_pole_points(target) + _pole_points(source) + list(crit.critical_points))
    inc_n, push_n = _normalized_nabla(
        mobius_conjugate(f, mobius_inverse(B), tol),
        qd_basis(_moved(d1 - gamma_f, B, tol), tol),
        qd_basis(_moved(d0, B, tol), tol),
        tol,
    )
    normalized = LabeledMatrix(inc.rows, inc.cols, inc_n - push_n)
    scale = float(max(np.linalg.norm(inc_n, 2), np.linalg.norm(push_n, 2)))
    r = rank_and_kernel(normalized, tol, scale=scale)
    sv = np.linalg.svd(normalized.entries, compute_uv=False)
    # a tall matrix has exactly source.dim singular values
    smallest = float(sv[-1]) if len(sv) == source.dim else 0.0
    return NablaResult(nab, r.kernel_dim, smallest, float(smallest / scale), source, target, scale, normalized)


def orbifold_signature(f, tol=DEFAULT, cap=64):
    """Orbifold weights on a finite postcritical set, sorted; ``None`` if not postcritically finite.

    The weight ``nu`` is the least function on the postcritical set with
    ``deg_x f * nu(x)`` dividing ``nu(f(x))`` (``nu = 1`` off the set); a
    weight beyond ``cap`` stands for a periodic critical point and is
    reported as ``inf``.
    """
    post = postcritical(f, tol=tol)
    if not post.stabilized or post.delta != 0:
        return None
    pts = list(post.sets[-1])
    nu = [1] * len(pts)

    def index(y):
        for i, p in enumerate(pts):
            if y.close(p, tol):
                return i
        return None

    changed = True
    while changed:
        changed = False
        for i, y in enumerate(pts):
            for x, e in fiber(f, y, tol):
                j = index(x)
                need = e * (nu[j] if j is not None else 1)
                new = nu[i] * need // gcd(nu[i], need)
                if new != nu[i]:
                    if new > cap:
                        new = cap + 1
                    if new != nu[i]:
                        nu[i] = new
                        changed = True
    return tuple(sorted(float("inf") if v > cap else v for v in nu))


def is_lattes_2222(f, tol=DEFAULT):
    """Detection hint: postcritically finite with orbifold signature (2, 2, 2, 2)."""
    return orbifold_signature(f, tol) == (2, 2, 2, 2)
