import warnings

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import INF, pt, random_map, rmap
from dynsheaf.cycles import cycles_up_to_period
from dynsheaf.errors import DegreeCap, DegreeZero, SingularMobius
from dynsheaf.map_core import (
    ReductionWarning,
    chart_series,
    critical_data,
    eval_and_local_derivative,
    iterate,
    local_degree,
    make_map,
    mobius_conjugate,
    postcritical,
)
from dynsheaf.numerics import Poly
from dynsheaf.numerics.roots import homogeneous_roots


def test_make_map_degree():
    assert rmap([0, 0, 1]).D == 2
    assert rmap([1, 0, 1], [0, 2]).D == 2


def test_make_map_cancels_common_factor():
    with pytest.warns(ReductionWarning):
        f = make_map(Poly([0, 0, 1]), Poly([0, 1]))
    assert f.D == 1
    assert f.P.allclose(Poly([0, 1])) and f.Q.allclose(Poly([1]))
    assert f.warnings


def test_make_map_keeps_nearby_distinct_roots():
    # numerator and denominator roots 1e-3 apart are not a common factor
    with warnings.catch_warnings():
        warnings.simplefilter("error", ReductionWarning)
        f = make_map(Poly([2.002, -3.001, 1]), Poly([0, -1, 1]))
    assert f.D == 2 and not f.warnings


def test_make_map_constant():
    with pytest.raises(DegreeZero):
        rmap([3])
    with pytest.raises(DegreeZero):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ReductionWarning)
            rmap([0, 2], [0, 1])


def test_make_map_normalizes_denominator():
    f = rmap([1, 0, 1], [0, 2])
    assert f.Q.lead == 1
    assert f(3.0) == pytest.approx(10 / 6)


def test_eval_derivative_affine():
    y, d = eval_and_local_derivative(rmap([0, 0, 1]), pt(1))
    assert y == pt(1) and d == pytest.approx(2)


def test_eval_derivative_at_infinity():
    y, d = eval_and_local_derivative(rmap([0, 0, 1]), INF)
    assert y == INF and abs(d) < 1e-14


def test_eval_derivative_mixed_charts():
    # near 0 the target chart is w = 1/f(z) = z
    y, d = eval_and_local_derivative(rmap([1], [0, 1]), pt(0))
    assert y == INF and d == pytest.approx(1)


def test_chart_series_at_one():
    # (1 + t)^2 - 1 = 2t + t^2
    fx, F = chart_series(rmap([0, 0, 1]), pt(1), 4)
    assert fx == pt(1)
    assert np.allclose(F, [0, 2, 1, 0])


def test_chart_series_at_infinity():
    fx, F = chart_series(rmap([0, 0, 1]), INF, 4)
    assert fx == INF and np.allclose(F, [0, 0, 1, 0])


def test_iterate_examples():
    assert iterate(rmap([0, 0, 1]), 2).P.allclose(Poly([0, 0, 0, 0, 1]))
    assert iterate(rmap([-1, 0, 1]), 2).P.allclose(Poly([0, 0, -2, 0, 1]))


def test_iterate_degree(rng):
    f = random_map(rng, 2)
    assert iterate(f, 3).D == 8


def test_iterate_cap():
    with pytest.raises(DegreeCap):
        iterate(rmap([0, 0, 1]), 13)


def test_critical_data_z2():
    c = critical_data(rmap([0, 0, 1]))
    assert c.ramification.mult(pt(0)) == 1 and c.ramification.mult(INF) == 1
    assert set(map(repr, c.critical_values)) == {repr(pt(0)), repr(INF)}


def test_critical_data_z2_minus_1():
    c = critical_data(rmap([-1, 0, 1]))
    assert sorted(map(repr, c.critical_values)) == sorted([repr(pt(-1)), repr(INF)])


def test_critical_data_cubic():
    c = critical_data(rmap([1, 0, 0, 1]))
    assert c.ramification.mult(pt(0)) == 2 and c.ramification.mult(INF) == 2
    assert local_degree(rmap([1, 0, 0, 1]), pt(0)) == 3


@given(st.integers(0, 10_000), st.sampled_from([2, 3, 4]))
def test_riemann_hurwitz(seed, d):
    f = random_map(np.random.default_rng(seed), d)
    c = critical_data(f)
    assert c.ramification.degree == 2 * d - 2
    for x in c.critical_points:
        assert any(f.apply(x) == y for y in c.critical_values)


def test_postcritical_examples():
    assert postcritical(rmap([0, 0, 1])).delta == 0
    p = postcritical(rmap([1, 0, 1]))
    assert p.delta == 1 and p.stabilized
    p = postcritical(rmap([-1, 0, 1]))
    assert p.delta == 0
    assert sorted(map(repr, p.sets[-1])) == sorted(map(repr, [pt(-1), pt(0), INF]))


@given(st.integers(0, 10_000))
def test_postcritical_increments_nonincreasing(seed):
    c = complex(np.random.default_rng(seed).uniform(-2, 0.25))
    p = postcritical(rmap([c, 0, 1]), N_max=12, stop_early=False)
    inc = p.increments
    assert all(b <= a for a, b in zip(inc, inc[1:])) or p.warnings


def test_postcritical_needs_two_steps():
    with pytest.raises(ValueError):
        postcritical(rmap([0, 0, 1]), N_max=1)


def test_mobius_inversion_fixes_z2():
    g = mobius_conjugate(rmap([0, 0, 1]), [[0, 1], [1, 0]])
    assert g.P.allclose(Poly([0, 0, 1])) and g.Q.allclose(Poly([1]))


def test_mobius_singular():
    with pytest.raises(SingularMobius):
        mobius_conjugate(rmap([0, 0, 1]), [[1, 2], [2, 4]])


@given(st.integers(0, 10_000))
def test_mobius_invariants(seed):
    rng = np.random.default_rng(seed)
    f = rmap([-1, 0, 1])
    M = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    g = mobius_conjugate(f, M)
    assert g.D == 2
    assert critical_data(g).ramification.degree == 2
    assert postcritical(g).delta == postcritical(f).delta
    rho_f = sorted(np.round([abs(c.multiplier) for c in cycles_up_to_period(f, 2)], 5))
    rho_g = sorted(np.round([abs(c.multiplier) for c in cycles_up_to_period(g, 2)], 5))
    assert rho_f == rho_g


@pytest.mark.parametrize("k", [1, 2, 3])
def test_periodic_point_count(k):
    # the homogeneous fixed-point form of f^k has D^k + 1 roots on the sphere
    g = iterate(rmap([0.3, 0, 1], [1, 0.2]), k)
    h = Poly([0, 1]) * g.Q - g.P
    roots = homogeneous_roots(h, g.D + 1)
    assert sum(m for _, m in roots) == 2**k + 1
