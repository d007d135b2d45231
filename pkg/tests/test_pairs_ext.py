import json

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from dynsheaf.errors import DimensionMismatch
from dynsheaf.pairs_ext import (
    CocycleClass,
    DynPair,
    cocycle_calculus,
    de_rham_rows,
    h2_line_bundle_check,
    pair_hom_ext,
    pair_rows,
    sylvester_operator,
    torsor_count,
    two_column_assemble,
)


def sympy_hom_dim(phi, psi):
    """dim of {theta : theta phi = psi theta} by an exact symbolic solve."""
    phi, psi = sp.Matrix(phi), sp.Matrix(psi)
    n, m = phi.shape[0], psi.shape[0]
    theta = sp.Matrix(m, n, lambda i, j: sp.Symbol(f"t{i}_{j}"))
    eqs = list(theta * phi - psi * theta)
    a, _ = sp.linear_eq_to_matrix(eqs, list(theta))
    return m * n - a.rank()


def random_integer_pair(rng, n):
    """Integer endomorphisms sharing small eigenvalues often enough to give nonzero Hom."""
    if rng.random() < 0.5:
        return rng.integers(-2, 3, size=(n, n))
    j = np.diag(rng.integers(-1, 2, size=n))
    j += np.diag(rng.integers(0, 2, size=n - 1), 1) if n > 1 else 0
    g = np.eye(n, dtype=int) + np.triu(rng.integers(-1, 2, size=(n, n)), 1)
    # unipotent g has an integer inverse, so the conjugate stays integral
    ginv = np.rint(np.linalg.inv(g)).astype(int)
    return g @ j @ ginv


def test_invertible_difference():
    r = pair_hom_ext(DynPair([[2]]), DynPair([[3]]))
    assert (r.hom_dim, r.ext1_dim) == (0, 0)


def test_equal_scalars():
    r = pair_hom_ext(DynPair([[1.5]]), DynPair([[1.5]]))
    assert (r.hom_dim, r.ext1_dim) == (1, 1)


def test_nilpotent_jordan_blocks():
    n = DynPair([[0, 1], [0, 0]])
    r = pair_hom_ext(n, n)
    assert r.hom_dim == sympy_hom_dim(n.phi.real.astype(int), n.phi.real.astype(int)) == 2
    assert r.ext1_dim == 2


def test_hom_basis_solves_equation():
    a = DynPair([[1, 1, 0], [0, 1, 0], [0, 0, 2]])
    b = DynPair([[1, 0], [0, 2]])
    r = pair_hom_ext(a, b)
    assert r.hom_dim == len(r.hom_basis) == 2
    for t in r.hom_basis:
        assert t.shape == (2, 3)
        assert np.allclose(t @ a.phi, b.phi @ t, atol=1e-12)


def test_empty_pair():
    r = pair_hom_ext(DynPair(np.zeros((0, 0))), DynPair([[1]]))
    assert (r.hom_dim, r.ext1_dim) == (0, 0)


def test_non_square_rejected():
    with pytest.raises(DimensionMismatch):
        DynPair([[1, 2]])


def test_brute_force_hom_random_pairs():
    rng = np.random.default_rng(7)
    for _ in range(50):
        n, m = rng.integers(1, 5, size=2)
        phi, psi = random_integer_pair(rng, n), random_integer_pair(rng, m)
        r = pair_hom_ext(DynPair(phi), DynPair(psi))
        expected = sympy_hom_dim(phi, psi)
        assert r.hom_dim == expected
        assert r.ext1_dim == expected


@given(st.integers(0, 10_000))
def test_similarity_invariance(seed):
    rng = np.random.default_rng(seed)
    n, m = rng.integers(1, 5, size=2)
    a, b = DynPair(random_integer_pair(rng, n)), DynPair(random_integer_pair(rng, m))
    g = rng.normal(size=(n, n)) + np.eye(n) * 3
    h = rng.normal(size=(m, m)) + np.eye(m) * 3
    r0 = pair_hom_ext(a, b)
    r1 = pair_hom_ext(a.conjugated(g), b.conjugated(h))
    assert (r0.hom_dim, r0.ext1_dim) == (r1.hom_dim, r1.ext1_dim)


def test_zero_cocycle_splits():
    c = CocycleClass(np.zeros((1, 1)), DynPair([[2]]), DynPair([[2]]))
    assert c.is_split()


def test_equal_scalars_nonsplit():
    c = CocycleClass([[1]], DynPair([[1.5]]), DynPair([[1.5]]))
    assert not c.is_split()
    assert c.baer_sum(c.inverse()).is_split()


def test_extension_matrix_block_form():
    c = CocycleClass([[5]], DynPair([[2]]), DynPair([[3]]))
    rep = cocycle_calculus(c)
    assert np.allclose(rep.extension_matrix, [[3, 5], [0, 2]])
    # different eigenvalues: every extension splits
    assert rep.is_split


def test_splitting_conjugates_extension():
    src, tgt = DynPair([[2, 1], [0, 2]]), DynPair([[1, 0], [0, 3]])
    c = CocycleClass([[1, -2], [0.5, 4]], src, tgt)
    theta = c.splitting()
    assert theta is not None
    # h = psi theta - theta phi
    assert np.allclose(tgt.phi @ theta - theta @ src.phi, c.h)


@given(st.integers(0, 10_000))
def test_split_iff_in_sylvester_image(seed):
    rng = np.random.default_rng(seed)
    n, m = rng.integers(1, 4, size=2)
    a, b = DynPair(random_integer_pair(rng, n)), DynPair(random_integer_pair(rng, m))
    s = sylvester_operator(a, b).entries
    if rng.random() < 0.5:
        h = (s @ rng.normal(size=n * m)).reshape(n, m).T
    else:
        h = rng.normal(size=(m, n))
    c = CocycleClass(h, a, b)
    vec = h.T.reshape(-1)
    in_image = np.linalg.matrix_rank(np.column_stack([s, vec]), tol=1e-8) == np.linalg.matrix_rank(s, tol=1e-8)
    assert c.is_split() == in_image


@given(st.integers(0, 10_000))
def test_baer_group_laws(seed):
    rng = np.random.default_rng(seed)
    a = DynPair([[1, 1], [0, 1]])
    b = DynPair([[1, 0], [0, 2]])
    x, y, z = (CocycleClass(rng.normal(size=(2, 2)), a, b) for _ in range(3))
    assert x.baer_sum(y).baer_sum(z).same_class(x.baer_sum(y.baer_sum(z)))
    assert x.baer_sum(y).same_class(y.baer_sum(x))
    zero = CocycleClass(np.zeros((2, 2)), a, b)
    assert x.baer_sum(zero).same_class(x)
    assert x.baer_sum(x.inverse()).is_split()


def test_baer_sum_mismatch():
    x = CocycleClass([[1]], DynPair([[1]]), DynPair([[1]]))
    y = CocycleClass([[1]], DynPair([[2]]), DynPair([[1]]))
    with pytest.raises(DimensionMismatch):
        x.baer_sum(y)


def test_de_rham_row():
    rep = two_column_assemble(de_rham_rows())
    assert rep.H == (1, 1)


def test_all_zero_rows():
    rep = two_column_assemble([(0, 0, None), (0, 0, None)])
    assert rep.H == (0, 0, 0)


def test_assembly_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        two_column_assemble([(2, 2, np.eye(3))])


@given(st.integers(0, 10_000))
def test_euler_constancy(seed):
    rng = np.random.default_rng(seed)
    rows = []
    for _ in range(rng.integers(1, 4)):
        a, b = (int(v) for v in rng.integers(0, 4, size=2))
        r = int(rng.integers(0, min(a, b) + 1))
        d = rng.normal(size=(b, r)) @ rng.normal(size=(r, a))
        rows.append((a, b, d))
    rep = two_column_assemble(rows)
    assert rep.euler == sum((-1) ** q * (a - b) for q, (a, b, _) in enumerate(rows))
    for n, h in enumerate(rep.H):
        assert h == (rep.C[n - 1] if n else 0) + (rep.K[n] if n < len(rep.K) else 0)


@given(st.integers(0, 10_000))
def test_engine_self_consistency(seed):
    rng = np.random.default_rng(seed)
    n, m = rng.integers(1, 4, size=2)
    a, b = DynPair(random_integer_pair(rng, n)), DynPair(random_integer_pair(rng, m))
    rep = two_column_assemble(pair_rows(a, b))
    r = pair_hom_ext(a, b)
    assert rep.H[0] == r.hom_dim
    assert rep.H[1] == r.ext1_dim


def test_spectral_json():
    rep = two_column_assemble([(2, 3, np.ones((3, 2)))])
    data = json.loads(json.dumps(rep.to_json()))
    assert data["rows"][0]["K"] == 1 and data["rows"][0]["C"] == 2
    assert data["H"] == [1, 2]


@pytest.mark.parametrize("n", range(1, 7))
def test_torsors_cyclic(n):
    assert torsor_count([n]) == n


def test_torsors_trivial_and_product():
    assert torsor_count([1]) == 1
    assert torsor_count([2, 2]) == 4


def test_torsors_reject_bad_factor():
    with pytest.raises(ValueError):
        torsor_count([0])


@pytest.mark.parametrize("D,vanishes", [(1, False), (2, True), (5, True)])
def test_h2_line_bundle(D, vanishes):
    assert h2_line_bundle_check(D) is vanishes
