"""Jets of vector fields along divisors and the difference operator ``df - f*`` between them."""

from dataclasses import dataclass

import numpy as np

from .divisors import Divisor, EDivisorPair, e_dynamical_check, fiber
from .errors import CaseUndetermined, CriticalBasePoint, PreconditionViolation
from .map_core import chart_of, chart_series, critical_data
from .numerics import series
from .numerics.geometry import ProjPoint
from .numerics.linalg import LabeledMatrix, rank_and_kernel
from .numerics.poly import Poly
from .numerics.tolerances import DEFAULT


@dataclass(frozen=True)
class JetBasisLabel:
    """Coefficient of ``zeta^j`` at the ``point``-th support point, in chart ``chart``."""

    point: int
    chart: str
    j: int


@dataclass(frozen=True, eq=False)
class LocalSeries:
    center: ProjPoint
    image: ProjPoint
    source_chart: tuple
    target_chart: tuple
    coeffs: np.ndarray
    order: int


def local_series(f, x, order, tol=DEFAULT):
    """Taylor expansion of ``f`` at ``x`` in the charts centred at ``x`` and ``f(x)``."""
    if order < 2:
        raise ValueError("order must be at least 2")
    x = x if isinstance(x, ProjPoint) else ProjPoint.from_complex(complex(x))
    fx, F = chart_series(f, x, order, tol)
    return LocalSeries(x, fx, chart_of(x, tol), chart_of(fx, tol), F, order)


def _index_of(x, support, tol):
    for i, y in enumerate(support):
        if x.close(y, tol):
            return i
    return None


def d00_matrix(f, delta0, delta1, tol=DEFAULT, check=True):
    """Matrix of ``df - f*`` from jets along ``delta0`` to jets along ``delta1``.

    The block at a point ``x`` of ``delta1`` takes ``t -> t * F'`` from the
    slot at ``x`` and subtracts ``t -> t o F`` from the slot at ``f(x)``,
    with ``F`` the chart series of ``f`` at ``x``.
    """
    if check and not e_dynamical_check(f, delta0, delta1, tol):
        raise PreconditionViolation("divisor pair is not E-dynamical")
    sup0 = delta0.support
    cols = []
    col_index = {}
    for i, (x, m) in enumerate(delta0):
        tag = chart_of(x, tol)[0]
        for j in range(m):
            col_index[(i, j)] = len(cols)
            cols.append(JetBasisLabel(i, tag, j))
    rows = []
    blocks = []
    for i, (x, m1) in enumerate(delta1):
        tag = chart_of(x, tol)[0]
        a = _index_of(x, sup0, tol)
        m0 = delta0.mult(x)
        fx = f.apply(x)
        b = _index_of(fx, sup0, tol)
        if a is None or b is None:
            raise PreconditionViolation("jet slot missing in delta0")
        mb = delta0.mult(sup0[b])
        # F' mod zeta^m1 needs F through zeta^m1
        order = max(m1, 1) + 1
        _, F = chart_series(f, x, order, tol)
        dF = series.deriv(F)
        block = np.zeros((m1, len(cols)), dtype=np.complex128)
        # df: zeta^i * F'(zeta)
        for k in range(m0):
            v = np.zeros(order, dtype=np.complex128)
            if k < order:
                v[k:] = dF[: order - k]
            block[:, col_index[(a, k)]] += v[:m1]
        # f*: F(zeta)^k
        p = np.zeros(order, dtype=np.complex128)
        p[0] = 1.0
        for k in range(mb):
            block[:, col_index[(b, k)]] -= p[:m1]
            p = series.mul(p, F, order)
        blocks.append(block)
        rows.extend(JetBasisLabel(len(sup0) + i, tag, j) for j in range(m1))
    entries = np.vstack(blocks) if blocks else np.zeros((0, len(cols)), dtype=np.complex128)
    return LabeledMatrix(rows, cols, entries)


@dataclass(frozen=True)
class HomExt:
    hom: int
    ext1: int
    margin: float


def hom_ext(f, delta0, delta1, tol=DEFAULT):
    """``dim Hom`` (kernel) and ``dim Ext^1`` (cokernel) of ``d00`` on the pair."""
    m = d00_matrix(f, delta0, delta1, tol)
    # the f* half carries unit entries, so the difference is measured against
    # scale one even when df and f* nearly cancel (multiplier close to 1)
    r = rank_and_kernel(m, tol, scale=1.0)
    return HomExt(r.kernel_dim, r.corank, r.margin)


def hom_dim(f, delta0, delta1, tol=DEFAULT):
    return hom_ext(f, delta0, delta1, tol).hom


def cycle_divisor(c, n, tol=DEFAULT):
    """``n`` times the reduced divisor of the cycle."""
    return Divisor([(x, n) for x in c.points], tol)


class Infinite:
    """Marker for an infinite-dimensional answer (finite-order germs)."""

    def __repr__(self):
        return "Infinite"


INFINITE = Infinite()


def e0_closed_form(f, c, N, tol=DEFAULT):
    """Closed-form dimension of Hom on ``N`` times a cycle, by cycle type.

    Cycles of period ``k`` are read through the fixed point of ``f^k``; for a
    superattracting cycle the local degree is the product along the orbit.
    """
    if N < 1:
        raise ValueError("N must be positive")
    kind = c.kind
    if kind == "superattracting":
        e = 1
        for x in c.points:
            e *= f.local_degree(x, tol)
        return min(N - 1, e - 1)
    if kind in ("attracting", "repelling"):
        if N >= 2:
            return 1
        raise CaseUndetermined("the closed form covers N >= 2")
    if kind == "irrationally_indifferent":
        if N == 2:
            return 1
        raise CaseUndetermined("irrationally indifferent cycles: closed form known only for N = 2")
    if kind == "parabolic":
        p = c.parabolic
        if N == 2:
            return 1
        if p.N <= N <= 2 * p.N + 1:
            return p.nu
        if N == 2 * p.N + 2:
            return p.nu + 1
        raise CaseUndetermined(f"N = {N} outside the ranges of the parabolic closed form (N_x = {p.N})")
    raise CaseUndetermined(f"unknown cycle class {kind!r}")


def e0_brute_force(f, c, N, tol=DEFAULT):
    d = cycle_divisor(c, N, tol)
    return hom_dim(f, d, d, tol)


def preimage_tree(f, p, n, tol=DEFAULT):
    """``Delta_p^(n)``: every point of the first ``n`` preimage generations with weight ``deg_x f``."""
    p = p if isinstance(p, ProjPoint) else ProjPoint.from_complex(complex(p))
    pts = []
    layer = [p]
    for _ in range(n):
        nxt = []
        for z in layer:
            for x, _e in fiber(f, z, tol):
                if not any(x.close(y, tol) for y in nxt):
                    nxt.append(x)
        for x in nxt:
            if not any(x.close(y, tol) for y in pts):
                pts.append(x)
        layer = nxt
    return Divisor([(x, f.local_degree(x, tol)) for x in pts], tol)


def preimage_tree_dim(f, p, n, tol=DEFAULT):
    """``(closed form, brute force)`` for the preimage-tree pair based at a non-critical ``p``.

    The brute-force pair is ``([p] + T, T)`` with ``T`` the tree away from
    ``p``, so a periodic base point still carries a single jet slot.
    """
    p = p if isinstance(p, ProjPoint) else ProjPoint.from_complex(complex(p))
    crit = critical_data(f, tol)
    if any(p.close(x, tol) for x in crit.critical_points):
        raise CriticalBasePoint("base point is critical")
    tree = preimage_tree(f, p, n, tol)
    gamma_p = crit.ramification.meet(tree)
    closed = max(gamma_p.degree, 1)
    # a periodic p reappears in its own tree; its jet slot is the base slot
    strict = Divisor([(x, m) for x, m in tree if not x.close(p, tol)], tol)
    brute = hom_dim(f, Divisor.point(p, 1, tol) + strict, strict, tol)
    return closed, brute


@dataclass(frozen=True)
class GlobalDeformations:
    hom: int
    coker: int
    margin: float
    matrix: LabeledMatrix


def global_deformation_matrix(f):
    """``df - f*`` from ``H^0(T)`` (basis ``d/dz, z d/dz, z^2 d/dz``) to ``H^0(f*T)`` (degree ``2D`` forms)."""
    d = f.D
    w = f.derivative_poly()
    pulls = [f.Q * f.Q, f.P * f.Q, f.P * f.P]
    cols = []
    for k in range(3):
        col = w * Poly.monomial(k) - pulls[k]
        cols.append(col.padded(2 * d + 1))
    rows = [("fT", j) for j in range(2 * d + 1)]
    return LabeledMatrix(rows, [("T", k) for k in range(3)], np.array(cols).T)


def global_deformation_dims(f, tol=DEFAULT):
    m = global_deformation_matrix(f)
    r = rank_and_kernel(m, tol)
    return GlobalDeformations(r.kernel_dim, r.corank, r.smallest_retained / max(np.linalg.norm(m.entries, 2), 1e-300), m)


def lambda_hom_ext(f, pair, tol=DEFAULT):
    """Hom and Ext^1 for a divisor pair, e.g. the truncated critical pair."""
    return hom_ext(f, pair.delta0, pair.delta1, tol)


__all__ = [
    "EDivisorPair",
    "GlobalDeformations",
    "HomExt",
    "INFINITE",
    "JetBasisLabel",
    "LocalSeries",
    "cycle_divisor",
    "d00_matrix",
    "e0_brute_force",
    "e0_closed_form",
    "global_deformation_dims",
    "global_deformation_matrix",
    "hom_dim",
    "hom_ext",
    "lambda_hom_ext",
    "local_series",
    "preimage_tree",
    "preimage_tree_dim",
]
