import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from conftest import INF, pt, rmap
from dynsheaf.cycles import cycle_from_point, cycles_up_to_period
from dynsheaf.divisors import Divisor, lambda_truncated
from dynsheaf.errors import CaseUndetermined, CriticalBasePoint, PreconditionViolation
from dynsheaf.jets import (
    cycle_divisor,
    d00_matrix,
    e0_brute_force,
    e0_closed_form,
    global_deformation_dims,
    hom_dim,
    hom_ext,
    lambda_hom_ext,
    local_series,
    preimage_tree,
    preimage_tree_dim,
)
from dynsheaf.map_core import iterate, mobius_conjugate

Z, T = sp.symbols("z t")


def sympy_local_hom(expr, x0, N):
    """Exact dimension of jets v mod t^N with F'(t) v(t) = v(F(t)), F(t) = f(x0 + t) - x0."""
    F = sp.expand(expr.subs(Z, x0 + T) - x0)
    ts = sp.symbols(f"c0:{N}")
    v = sum(c * T**j for j, c in enumerate(ts))
    lhs = sp.expand(sp.diff(F, T) * v - v.subs(T, F))
    eqs = [lhs.coeff(T, j) for j in range(N)]
    M = sp.Matrix([[sp.diff(e, c) for c in ts] for e in eqs])
    return N - M.rank()


def test_local_series_examples():
    s = local_series(rmap([0, 0, 1]), 1, 4)
    assert np.allclose(s.coeffs, [0, 2, 1, 0])
    s = local_series(rmap([0, 0, 1]), INF, 4)
    assert s.image == INF and np.allclose(s.coeffs, [0, 0, 1, 0])


def test_local_series_truncation_stable():
    f = rmap([0.3, 1, 0, 2], [1, 0.5])
    a = local_series(f, 0.7, 5).coeffs
    b = local_series(f, 0.7, 9).coeffs
    assert np.allclose(a, b[:5])


def test_d00_explicit_block():
    m = d00_matrix(rmap([0, 0, 1]), Divisor([(0, 2)]), Divisor([(0, 2)]))
    # rows: zeta^0, zeta^1; columns t0, t1
    assert np.allclose(m.entries, [[-1, 0], [2, 0]])
    assert hom_dim(rmap([0, 0, 1]), Divisor([(0, 2)]), Divisor([(0, 2)])) == 1


def test_d00_empty():
    m = d00_matrix(rmap([0, 0, 1]), Divisor(), Divisor())
    assert m.shape == (0, 0)


def test_d00_rejects_non_dynamical_pair():
    with pytest.raises(PreconditionViolation):
        d00_matrix(rmap([0, 0, 1]), Divisor([(-1, 1)]), Divisor([(-1, 1)]))


def test_d00_block_diagonal_on_disjoint_cycles():
    f = rmap([0, 0, 1])
    d = Divisor([(0, 2), (1, 2)])
    e = d00_matrix(f, d, d).entries
    assert np.allclose(e[:2, 2:], 0) and np.allclose(e[2:, :2], 0)


def test_hom_additive_over_disjoint_supports():
    f = rmap([0, 0, 1])
    a, b = Divisor([(0, 2)]), Divisor([(1, 3)])
    assert hom_dim(f, a + b, a + b) == hom_dim(f, a, a) + hom_dim(f, b, b)


@pytest.mark.parametrize(
    "coeffs,x0,N",
    [
        ([0, 0, 1], 0, 2),
        ([0, 0, 1], 0, 4),
        ([0, 0, 1], 1, 3),
        ([sp.Rational(3, 16), 0, 1], sp.Rational(1, 4), 3),
        ([sp.Rational(3, 16), 0, 1], sp.Rational(3, 4), 2),
        ([0, 1, 1], 0, 2),
        ([0, 1, 1], 0, 3),
        ([0, 1, 1], 0, 4),
        ([0, 1, 1, 2], 0, 4),
        ([0, 1, 1, 2], 0, 5),
        ([0, 1, 0, 1], 0, 6),
        ([0, 0, 0, 1], 0, 5),
    ],
)
def test_hom_against_exact_oracle(coeffs, x0, N):
    expr = sum(c * Z**k for k, c in enumerate(coeffs))
    f = rmap([complex(c) for c in coeffs])
    c = Divisor([(complex(x0), N)])
    assert hom_dim(f, c, c) == sympy_local_hom(expr, x0, N)


def test_e0_closed_form_examples():
    sup = cycle_from_point(rmap([0, 0, 1]), 0)
    assert e0_closed_form(rmap([0, 0, 1]), sup, 2) == 1
    par = cycle_from_point(rmap([0, 1, 1, 2]), 0)
    f = rmap([0, 1, 1, 2])
    assert e0_closed_form(f, par, 3) == 1
    assert e0_closed_form(f, par, 4) == 2


def test_e0_undetermined():
    rep = cycle_from_point(rmap([0, 0, 1]), 1)
    with pytest.raises(CaseUndetermined):
        e0_closed_form(rmap([0, 0, 1]), rep, 1)


@pytest.mark.parametrize("P", [[0, 0, 1], [0.1, 0, 1], [0, 1, 1], [-1, 0, 1], [0, 1, 1, 2], [0.25, 0, 1]])
def test_e0_closed_form_matches_brute_force(P):
    f = rmap(P)
    for c in cycles_up_to_period(f, 2):
        for N in range(1, 7):
            try:
                cf = e0_closed_form(f, c, N)
            except CaseUndetermined:
                continue
            assert cf == e0_brute_force(f, c, N), (c.kind, c.period, N)


def test_cycle_reduction():
    f = rmap([-1, 0, 1])
    two = [c for c in cycles_up_to_period(f, 2) if c.period == 2][0]
    g = iterate(f, 2)
    for N in (2, 3):
        d = cycle_divisor(two, N)
        x = Divisor([(two.points[0], N)])
        assert hom_dim(f, d, d) == hom_dim(g, x, x)


@given(st.floats(0.2, 5.0), st.integers(2, 5))
def test_hom_invariant_under_chart_scaling(s, N):
    f = rmap([0, 1, 1, 2])
    g = mobius_conjugate(f, [[s, 0], [0, 1]])
    d = Divisor([(0, N)])
    assert hom_dim(f, d, d) == hom_dim(g, d, d)


def test_preimage_tree_examples():
    z2 = rmap([0, 0, 1])
    assert preimage_tree_dim(z2, 1, 2) == (1, 1)
    cheb = rmap([0, -3, 0, 1])
    assert preimage_tree_dim(cheb, -2, 1) == (1, 1)
    t = preimage_tree(cheb, -2, 1)
    assert t.mult(pt(1)) == 2 and t.mult(pt(-2)) == 1
    assert preimage_tree_dim(rmap([1, 0, 0, 1]), 1, 1) == (2, 2)


def test_preimage_tree_critical_base():
    with pytest.raises(CriticalBasePoint):
        preimage_tree_dim(rmap([0, 0, 1]), 0, 1)


@pytest.mark.parametrize("P,Q", [([0, 0, 1], [1]), ([-1, 0, 1], [1]), ([1, 0, 0, 1], [1]), ([1, 0, 1], [0, 2])])
def test_global_deformations(P, Q):
    f = rmap(P, Q)
    g = global_deformation_dims(f)
    assert g.hom == 0 and g.coker == 2 * f.D - 2
    # Euler count with vanishing ext2
    assert g.hom - g.coker == 2 - 2 * f.D


def test_lambda_hom_ext_z2_plus_1():
    f = rmap([1, 0, 1])
    he = lambda_hom_ext(f, lambda_truncated(f))
    assert (he.hom, he.ext1) == (2, 1)


def test_hom_ext_sign_convention():
    # df - f* and f* - df have the same kernel and cokernel
    f = rmap([0.1, 0, 1])
    d = Divisor([((1 - np.sqrt(0.6)) / 2, 2)])
    m = d00_matrix(f, d, d)
    assert hom_ext(f, d, d).hom == 2 - np.linalg.matrix_rank(-m.entries)
