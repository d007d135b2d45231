import cmath

import numpy as np
import pytest
import sympy as sp
from hypothesis import given
from hypothesis import strategies as st

from conftest import INF, pt, rmap
from dynsheaf.cycles import (
    Cycle,
    classify_cycle,
    cycle_from_point,
    cycles_up_to_period,
    gamma,
    gamma_value,
    multiplier,
)
from dynsheaf.errors import Unclassified
from dynsheaf.map_core import iterate, mobius_conjugate

Z = sp.symbols("z")


def _sympy_index(coeffs):
    """Holomorphic fixed-point index at 0 of the polynomial with these coefficients."""
    f = sum(sp.nsimplify(c) * Z**k for k, c in enumerate(coeffs))
    return complex(sp.residue(1 / (Z - f), Z, 0))


def test_cycles_z2():
    cs = cycles_up_to_period(rmap([0, 0, 1]), 2)
    fixed = [c for c in cs if c.period == 1]
    assert len(fixed) == 3
    for x in (pt(0), pt(1), INF):
        assert any(c.points[0] == x for c in fixed)
    two = [c for c in cs if c.period == 2]
    assert len(two) == 1
    w = cmath.exp(2j * cmath.pi / 3)
    assert any(p == pt(w) for p in two[0].points) and any(p == pt(w * w) for p in two[0].points)


def test_cycles_z2_minus_1():
    cs = cycles_up_to_period(rmap([-1, 0, 1]), 2)
    two = [c for c in cs if c.period == 2]
    assert len(two) == 1 and two[0].kind == "superattracting"
    pts = two[0].points
    assert any(p == pt(0) for p in pts) and any(p == pt(-1) for p in pts)


@pytest.mark.parametrize("P,Q", [([0.3, 0, 1], [1]), ([0.5, 1, 0, 2], [2, 0.3, 1]), ([1j, 0, 1], [1])])
def test_cycle_count_with_multiplicity(P, Q):
    # each period-k cycle contributes k points; sum over divisors of k gives D^k + 1
    f = rmap(P, Q)
    cs = cycles_up_to_period(f, 2)
    n1 = sum(1 for c in cs if c.period == 1)
    n2 = sum(2 for c in cs if c.period == 2)
    assert n1 == f.D + 1
    assert n1 + n2 == f.D**2 + 1


def test_classify_parabolic_z_plus_z2():
    c = cycle_from_point(rmap([0, 1, 1]), 0)
    assert c.kind == "parabolic"
    p = c.parabolic
    assert (p.q, p.N, p.nu) == (1, 1, 1)


def test_classify_repelling_and_attracting():
    assert cycle_from_point(rmap([0, 0, 1]), 1).kind == "repelling"
    x = (1 - np.sqrt(1 - 0.4)) / 2
    c = cycle_from_point(rmap([0.1, 0, 1]), x)
    assert c.kind == "attracting"
    assert c.multiplier == pytest.approx(2 * x)


def test_irrationally_indifferent():
    theta = (np.sqrt(5) - 1) / 2
    lam = cmath.exp(2j * cmath.pi * theta)
    c = cycle_from_point(rmap([0, lam, 1]), 0)
    assert c.kind == "irrationally_indifferent" and gamma_value(c) == 1


def test_gamma_values():
    sup = cycle_from_point(rmap([0, 0, 1]), 0)
    att = cycle_from_point(rmap([0.1, 0, 1]), (1 - np.sqrt(0.6)) / 2)
    par = cycle_from_point(rmap([0, 1, 1, 2]), 0)
    assert [gamma_value(c) for c in (sup, att, par)] == [0, 1, 2]
    g = gamma(rmap([0, 0, 1]), [sup, att])
    assert g.values == (0, 1) and g.gamma_A == 1 and g.lower_bound


def test_gamma_unclassified():
    c = Cycle((pt(0),), 1, 0j)
    with pytest.raises(Unclassified):
        gamma_value(c)


@pytest.mark.parametrize(
    "coeffs,N",
    [([0, 1, 1, 0.5], 1), ([0, 1, 1, 2], 1), ([0, 1, 1, -0.7, 0.3], 1), ([0, 1, 0, 1, 0, 0.25], 2), ([0, 1, 0, 1, 0.4, 2], 2)],
)
def test_beta_against_fixed_point_index(coeffs, N):
    c = cycle_from_point(rmap(coeffs), 0)
    assert c.kind == "parabolic" and c.parabolic.N == N
    iota = _sympy_index(coeffs)
    assert c.parabolic.beta == pytest.approx((N + 1) / 2 - iota, abs=1e-8)


@given(st.floats(-3, 3), st.sampled_from([1, 2, 3]))
def test_beta_synthetic_normal_form(b, N):
    coeffs = [0.0] * (2 * N + 2)
    coeffs[1], coeffs[N + 1], coeffs[2 * N + 1] = 1.0, 1.0, b
    c = cycle_from_point(rmap(coeffs), 0)
    assert c.parabolic.beta == pytest.approx((N + 1) / 2 - b, abs=1e-7)


def test_q_divides_N():
    # multiplier -1 at 0: second iterate has a degenerate fixed point
    for f in (rmap([0, -1, 0, 2]), rmap([0, -1, 1])):
        for c in cycles_up_to_period(f, 2):
            if c.kind == "parabolic":
                assert c.parabolic.N % c.parabolic.q == 0


def test_beta_boundary_is_nonrepelling():
    # z + z^2 + z^3 has beta = 0 exactly
    c = cycle_from_point(rmap([0, 1, 1, 1]), 0)
    assert abs(c.parabolic.beta) < 1e-9
    assert not c.parabolic.repelling and gamma_value(c) == 2


@given(st.integers(0, 10_000))
def test_multiplier_chain_rule(seed):
    rng = np.random.default_rng(seed)
    c0 = complex(rng.uniform(-1.5, 0.3), rng.uniform(-0.5, 0.5))
    f = rmap([c0, 0, 1])
    for c in cycles_up_to_period(f, 2, classify=False):
        if c.period == 2 and not c.points[0].is_infinity():
            g = iterate(f, 2)
            assert multiplier(g, c.points[:1]) == pytest.approx(c.multiplier, rel=1e-6, abs=1e-9)


@given(st.integers(0, 10_000), st.sampled_from([[0, 1, 1, 2], [0, 1, 0, 1], [0, -1, 0, 2], [1, 0, 0, 1], [0, 1, 1]]))
def test_classes_invariant_under_conjugation(seed, coeffs):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    f = rmap(coeffs)
    g = mobius_conjugate(f, M)

    def table(h):
        return sorted((c.period, c.kind, gamma_value(c)) for c in cycles_up_to_period(h, 2))

    assert table(f) == table(g)


def test_classify_keeps_points():
    f = rmap([0, 0, 1])
    c = Cycle((pt(1),), 1, 2 + 0j)
    assert classify_cycle(f, c).points == c.points
