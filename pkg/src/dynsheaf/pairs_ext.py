"""Dynamical pairs of vector spaces, Hom and Ext^1 through the difference operator, and two-column assembly.

A dynamical pair is a finite-dimensional space ``V`` with an endomorphism
``phi``.  Morphisms ``(V, phi) -> (W, psi)`` are the kernel of
``S(theta) = theta phi - psi theta``; its cokernel is ``Ext^1``.  Extensions
are carried by cocycles ``h: V -> W`` and realized as block matrices.
"""

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .errors import DimensionMismatch, PreconditionViolation
from .jets import global_deformation_matrix
from .map_core import critical_data
from .numerics.linalg import LabeledMatrix, rank_and_kernel
from .numerics.tolerances import DEFAULT
from .quad_diff import nabla_and_ext2


@dataclass(frozen=True, eq=False)
class DynPair:
    phi: np.ndarray

    def __post_init__(self):
        a = np.atleast_2d(np.asarray(self.phi, dtype=np.complex128))
        if a.shape[0] != a.shape[1]:
            raise DimensionMismatch(f"endomorphism must be square, got {a.shape}")
        object.__setattr__(self, "phi", a)

    @property
    def dim(self):
        return self.phi.shape[0]

    def conjugated(self, g):
        """The isomorphic pair ``(V, g phi g^-1)``."""
        g = np.asarray(g, dtype=np.complex128)
        return DynPair(g @ self.phi @ np.linalg.inv(g))


def sylvester_operator(a, b):
    """``S(theta) = theta phi_a - psi_b theta`` on ``Hom(V_a, V_b)`` in column-major ``vec`` coordinates."""
    n, m = a.dim, b.dim
    s = np.kron(a.phi.T, np.eye(m)) - np.kron(np.eye(n), b.phi)
    labels = [("theta", i, j) for j in range(n) for i in range(m)]
    return LabeledMatrix(labels, labels, s)


def _unvec(v, rows, cols):
    return np.asarray(v).reshape(cols, rows).T


def _vec(theta):
    return np.asarray(theta, dtype=np.complex128).T.reshape(-1)


def _operator_scale(a, b):
    # S can cancel to rounding level, so its rank is judged against phi and psi
    return max(np.linalg.norm(a.phi, 2) if a.dim else 0.0, np.linalg.norm(b.phi, 2) if b.dim else 0.0)


@dataclass(frozen=True, eq=False)
class PairHomExt:
    hom_basis: tuple
    hom_dim: int
    ext1_dim: int
    margin: float


def pair_hom_ext(a, b, tol=DEFAULT):
    """Hom (kernel of ``S``, as matrices ``V_a -> V_b``) and ``dim Ext^1`` (cokernel of ``S``)."""
    s = sylvester_operator(a, b)
    if s.shape[1] == 0:
        return PairHomExt((), 0, 0, 0.0)
    r = rank_and_kernel(s, tol, scale=_operator_scale(a, b))
    basis = tuple(_unvec(r.kernel.entries[:, k], b.dim, a.dim) for k in range(r.kernel_dim))
    # higher Ext of vector spaces vanish, so Ext^1 is the whole cokernel
    return PairHomExt(basis, r.kernel_dim, r.corank, r.margin)


@dataclass(frozen=True, eq=False)
class CocycleClass:
    """An extension of ``(V, phi)`` by ``(W, psi)`` given by a cocycle ``h: V -> W``."""

    h: np.ndarray
    source: DynPair
    target: DynPair

    def __post_init__(self):
        h = np.atleast_2d(np.asarray(self.h, dtype=np.complex128))
        if h.shape != (self.target.dim, self.source.dim):
            raise DimensionMismatch(f"cocycle has shape {h.shape}, expected {(self.target.dim, self.source.dim)}")
        object.__setattr__(self, "h", h)

    def extension_matrix(self):
        """``[[psi, h], [0, phi]]`` on ``W + V``."""
        w, v = self.target.dim, self.source.dim
        out = np.zeros((w + v, w + v), dtype=np.complex128)
        out[:w, :w] = self.target.phi
        out[:w, w:] = self.h
        out[w:, w:] = self.source.phi
        return out

    def splitting(self, tol=DEFAULT):
        """``theta`` with ``h = psi theta - theta phi`` if the extension splits, else ``None``."""
        s = sylvester_operator(self.source, self.target)
        if s.shape[1] == 0:
            return np.zeros_like(self.h)
        # psi theta - theta phi = -S(theta)
        theta, *_ = np.linalg.lstsq(-s.entries, _vec(self.h), rcond=None)
        resid = np.linalg.norm(-s.entries @ theta - _vec(self.h))
        scale = max(1.0, np.linalg.norm(s.entries, 2), np.linalg.norm(self.h))
        if resid > tol.eps_residual * scale:
            return None
        return _unvec(theta, self.target.dim, self.source.dim)

    def is_split(self, tol=DEFAULT):
        return self.splitting(tol) is not None

    def _check_same(self, other):
        if other.source is not self.source and not np.allclose(other.source.phi, self.source.phi):
            raise DimensionMismatch("cocycles have different source pairs")
        if other.target is not self.target and not np.allclose(other.target.phi, self.target.phi):
            raise DimensionMismatch("cocycles have different target pairs")

    def baer_sum(self, other):
        self._check_same(other)
        return CocycleClass(self.h + other.h, self.source, self.target)

    def inverse(self):
        return CocycleClass(-self.h, self.source, self.target)

    def same_class(self, other, tol=DEFAULT):
        self._check_same(other)
        return CocycleClass(self.h - other.h, self.source, self.target).is_split(tol)


@dataclass(frozen=True, eq=False)
class CocycleReport:
    extension_matrix: np.ndarray
    is_split: bool
    baer_sum: CocycleClass = None


def cocycle_calculus(c, other=None, tol=DEFAULT):
    """Extension matrix and split test of ``c``; the Baer sum with ``other`` when given."""
    return CocycleReport(c.extension_matrix(), c.is_split(tol), c.baer_sum(other) if other is not None else None)


# two-column assembly

@dataclass(frozen=True, eq=False)
class SpectralReport:
    """Rows ``E^{0,q} -> E^{1,q}`` and the assembled ``H^n = C^{n-1} + K^n``."""

    e0: tuple
    e1: tuple
    ranks: tuple
    K: tuple
    C: tuple
    H: tuple
    euler: int
    matrices: tuple = field(default=(), repr=False)

    def to_json(self):
        return {
            "rows": [
                {"q": q, "E0": a, "E1": b, "rank": r, "K": k, "C": c}
                for q, (a, b, r, k, c) in enumerate(zip(self.e0, self.e1, self.ranks, self.K, self.C))
            ],
            "H": list(self.H),
            "euler": self.euler,
        }


def two_column_assemble(rows, tol=DEFAULT):
    """Assemble ``(dim E^{0,q}, dim E^{1,q}, d^{0,q})`` rows into ``H^n`` dimensions.

    ``d^{0,q}`` may be an array, a :class:`LabeledMatrix`, or ``None`` for the
    zero map.  A row may carry a fourth entry, the reference scale for the
    rank cutoff (see :func:`rank_and_kernel`).
    """
    e0, e1, ranks, K, C, mats = [], [], [], [], [], []
    for q, row in enumerate(rows):
        if len(row) not in (3, 4):
            raise DimensionMismatch(f"row {q}: expected (E0, E1, d) or (E0, E1, d, scale)")
        a, b, d = row[:3]
        scale = row[3] if len(row) == 4 else None
        if d is None:
            d = np.zeros((b, a), dtype=np.complex128)
        if not isinstance(d, LabeledMatrix):
            d = np.asarray(d, dtype=np.complex128).reshape(b, a) if np.size(d) == a * b else np.asarray(d)
            if d.ndim != 2:
                raise DimensionMismatch(f"row {q}: d^0,q must be a matrix")
            d = LabeledMatrix([("E1", q, i) for i in range(d.shape[0])], [("E0", q, j) for j in range(d.shape[1])], d)
        if d.shape != (b, a):
            raise DimensionMismatch(f"row {q}: matrix shape {d.shape} does not match dims ({b}, {a})")
        r = rank_and_kernel(d, tol, scale=scale).rank if a and b else 0
        e0.append(a)
        e1.append(b)
        ranks.append(r)
        K.append(a - r)
        C.append(b - r)
        mats.append(d)
    H = [(C[n - 1] if n >= 1 else 0) + (K[n] if n < len(K) else 0) for n in range(len(rows) + 1)]
    euler = sum((-1) ** n * h for n, h in enumerate(H))
    columns = sum((-1) ** q * (a - b) for q, (a, b) in enumerate(zip(e0, e1)))
    if euler != columns:
        raise DimensionMismatch(f"Euler characteristic {euler} differs from column count {columns}")
    return SpectralReport(tuple(e0), tuple(e1), tuple(ranks), tuple(K), tuple(C), tuple(H), euler, tuple(mats))


def pair_rows(a, b):
    """The single row ``Hom(V_a, V_b) -> Hom(V_a, V_b)`` with map ``S``."""
    s = sylvester_operator(a, b)
    n = s.shape[0]
    return [(n, n, s, _operator_scale(a, b))]


def de_rham_rows():
    """A contractible space: one row ``C -> C`` with the zero map."""
    return [(1, 1, None)]


# the ideal sheaf O(-Delta) of a divisor pair

def _form_vanishing(n, delta, tol):
    """Linear conditions on degree-``n`` binary forms (affine coefficients) to vanish along ``delta``."""
    rows = []
    for x, m in delta:
        for k in range(min(m, n + 1)):
            r = np.zeros(n + 1, dtype=np.complex128)
            if x.is_infinity(tol):
                r[n - k] = 1.0
            else:
                z0 = complex(x.value)
                if abs(z0) <= 1:
                    # Taylor coefficient of t^k in s(z0 + t)
                    for j in range(k, n + 1):
                        r[j] = _binom(j, k) * z0 ** (j - k)
                else:
                    # same in the reversed form, w = 1/z around 1/z0
                    w0 = 1 / z0
                    for j in range(0, n - k + 1):
                        r[j] = _binom(n - j, k) * w0 ** (n - j - k)
            rows.append(r / np.linalg.norm(r))
    return np.array(rows).reshape(len(rows), n + 1)


def _binom(a, b):
    from math import comb

    return comb(a, b)


def _sections(n, delta, tol):
    """Orthonormal basis (columns) of degree-``n`` forms vanishing along ``delta``."""
    c = _form_vanishing(n, delta, tol)
    if c.shape[0] == 0:
        return np.eye(n + 1, dtype=np.complex128)
    m = LabeledMatrix([("c", i) for i in range(c.shape[0])], [("s", j) for j in range(n + 1)], c)
    return rank_and_kernel(m, tol).kernel.entries


def global_sections_map(f, pair, tol=DEFAULT):
    """``d^{0,0}: H^0(T(-Delta_0)) -> H^0(f*T(-Delta_1))`` in orthonormal section bases."""
    g = global_deformation_matrix(f).entries
    x0 = _sections(2, pair.delta0, tol)
    x1 = _sections(2 * f.D, pair.delta1, tol)
    m = x1.conj().T @ g @ x0
    leak = np.linalg.norm(g @ x0 - x1 @ m) if x0.size else 0.0
    if leak > 1e3 * tol.eps_residual * max(1.0, np.linalg.norm(g, 2)):
        raise PreconditionViolation("global vector fields on Delta_0 do not map into sections on Delta_1")
    return m


@dataclass(frozen=True, eq=False)
class IdealSheafExt:
    """``Ext^i(Omega, O(-Delta))`` from the two-column assembly, with ``delta = deg Delta_0 - deg Delta_1``."""

    report: SpectralReport
    hom: int
    ext1: int
    ext2: int
    delta: int
    rr_value: int

    @property
    def rr_holds(self):
        return self.ext1 - self.ext2 == self.rr_value


def ideal_sheaf_rows(f, pair, tol=DEFAULT):
    """Rows ``H^q(T(-Delta_0)) -> H^q(f*T(-Delta_1))`` for ``q = 0, 1``.

    The ``q = 1`` map is the Serre transpose of ``nabla_f``.
    """
    d00 = global_sections_map(f, pair, tol)
    nab = nabla_and_ext2(f, pair, tol)
    row1 = (nab.target.dim, nab.source.dim, (nab.nabla if nab.normalized is None else nab.normalized).entries.T, nab.scale)
    return [(d00.shape[1], d00.shape[0], d00), row1], nab


def ideal_sheaf_ext(f, pair, tol=DEFAULT):
    """Assembled ``hom``, ``ext^1``, ``ext^2`` of ``(Omega, O(-Delta))`` and the Riemann-Roch value ``2D - 2 + delta``."""
    if critical_data(f, tol).ramification.degree != 2 * f.D - 2:
        raise PreconditionViolation("ramification degree check failed")
    rows, _ = ideal_sheaf_rows(f, pair, tol)
    rep = two_column_assemble(rows, tol)
    delta = pair.delta0.degree - pair.delta1.degree
    return IdealSheafExt(rep, rep.H[0], rep.H[1], rep.H[2], delta, 2 * f.D - 2 + delta)


# topology demos

def _cyclic_product(factors):
    factors = tuple(int(n) for n in factors)
    if any(n < 1 for n in factors):
        raise ValueError("cyclic factors must be positive")
    elements = list(product(*[range(n) for n in factors]))

    def op(a, b):
        return tuple((x + y) % n for x, y, n in zip(a, b, factors))

    return elements, op


def torsor_count(factors):
    """Classes of ``Gamma``-torsors with a structure map over a point, ``Gamma = prod Z/n_i``.

    A torsor is ``Gamma`` with right translation; a structure map is an
    equivariant self-bijection ``T``.  Two structure maps are equivalent when
    an equivariant bijection intertwines them.  All equivariant bijections are
    enumerated and the equivalence classes counted.
    """
    elements, op = _cyclic_product(factors)
    index = {g: i for i, g in enumerate(elements)}
    n = len(elements)
    maps = []
    # a map commuting with right translation is fixed by the image of the identity
    for x in elements:
        perm = tuple(index[op(x, g)] for g in elements)
        if len(set(perm)) != n:
            continue
        if all(perm[index[op(g, h)]] == index[op(elements[perm[index[g]]], h)] for g in elements for h in elements):
            maps.append(perm)
    parent = list(range(len(maps)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    pos = {m: i for i, m in enumerate(maps)}
    for s in maps:
        inv = [0] * n
        for i, j in enumerate(s):
            inv[j] = i
        for i, t in enumerate(maps):
            # s t s^-1
            conj = tuple(s[t[inv[k]]] for k in range(n))
            j = pos[conj]
            ri, rj = find(i), find(j)
            if ri != rj:
                parent[max(ri, rj)] = min(ri, rj)
    return len({find(i) for i in range(len(maps))})


def h2_line_bundle_check(D):
    """Whether ``H^2`` of the constant sheaf ``Z(1)`` on the dynamical site vanishes.

    Pulling back multiplies degrees by ``D``, so the relevant difference map
    on ``Pic = Z`` is multiplication by ``D - 1``; vanishing is its injectivity.
    """
    if D < 1:
        raise ValueError("degree must be positive")
    return D - 1 != 0
