import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import INF, pt, random_map, rmap
from dynsheaf.cycles import cycle_from_point, cycles_up_to_period
from dynsheaf.divisors import (
    Divisor,
    EDivisorPair,
    claim_divisor,
    divisor_algebra,
    dynamical_check,
    e_dynamical_check,
    fiber,
    lambda_truncated,
    pullback_divisor,
    rigid_cycles_divisor_xf,
    rigid_divisor,
)
from dynsheaf.errors import PreconditionViolation, SuperattractingPresent
from dynsheaf.map_core import critical_data, mobius_conjugate, postcritical
from dynsheaf.parser import parse_map

small_divisor = st.lists(
    st.tuples(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False), st.integers(1, 3)),
    min_size=1,
    max_size=3,
)


def test_meet_and_sum():
    a = Divisor([(0, 2), (1, 1)])
    b = Divisor([(0, 1), (1, 3)])
    out = divisor_algebra(a, b)
    assert out["meet"] == Divisor([(0, 1), (1, 1)])
    assert out["sum"].degree == a.degree + b.degree
    assert not out["le"]


def test_clustering_at_construction():
    d = Divisor([(1.0, 1), (1.0 + 1e-10, 2)])
    assert len(d) == 1 and d.mult(pt(1)) == 3


def test_antisymmetry():
    a = Divisor([(0, 2), (INF, 1)])
    b = Divisor([(INF, 1), (0, 2)])
    assert a <= b and b <= a and a == b


def test_negative_and_positive_part():
    d = Divisor([(0, 2)]) - Divisor([(0, 3), (1, 1)])
    assert not d.is_effective()
    assert d.positive_part().degree == 0


def test_json_roundtrip():
    d = Divisor([(0.5j, 2), (INF, 1)])
    assert Divisor.from_json(d.to_json()) == d


def test_pullback_examples():
    f = rmap([0, 0, 1])
    assert pullback_divisor(f, Divisor([(0, 1)])) == Divisor([(0, 2)])
    assert pullback_divisor(f, Divisor([(1, 1)])) == Divisor([(1, 1), (-1, 1)])


def test_fiber_of_infinity():
    f = rmap([1, 0, 1], [0, 1])
    got = fiber(f, INF)
    assert sorted(m for _, m in got) == [1, 1]
    assert any(x == pt(0) for x, _ in got) and any(x == INF for x, _ in got)


def test_fiber_keeps_double_point_near_image_of_infinity():
    # in this conjugate of z^2 - 1 a critical value sits near f(inf), so the
    # fiber equation loses most of its leading coefficient to cancellation
    rng = np.random.default_rng(148)
    M = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    g = mobius_conjugate(parse_map("z^2 - 1"), M)
    for c in critical_data(g).critical_points:
        got = fiber(g, g.apply(c))
        assert [m for x, m in got if x.chordal(c) < 1e-6] == [2]


@given(small_divisor, st.integers(0, 1000))
def test_pullback_degree(items, seed):
    f = random_map(np.random.default_rng(seed), 2)
    d = Divisor(items)
    assert pullback_divisor(f, d).degree == 2 * d.degree


@given(small_divisor, small_divisor)
def test_pullback_additive(a, b):
    f = rmap([0.2, 0, 1], [1, 0.5])
    A, B = Divisor(a), Divisor(b)
    assert pullback_divisor(f, A + B) == pullback_divisor(f, A) + pullback_divisor(f, B)


def test_dynamical_examples():
    f = rmap([0, 0, 1])
    assert dynamical_check(f, Divisor([(INF, 1)]))
    assert dynamical_check(f, Divisor([(1, 1)]))
    assert not dynamical_check(f, Divisor([(-1, 1)]))


def test_e_dynamical_pair_checked():
    f = rmap([0, 0, 1])
    with pytest.raises(PreconditionViolation):
        EDivisorPair.checked(f, Divisor([(-1, 1)]), Divisor([(-1, 1)]))
    p = EDivisorPair.checked(f, Divisor([(0, 2)]), Divisor([(0, 2)]))
    assert p.degree_difference == 0


def test_rigid_multiplicities():
    att = cycle_from_point(rmap([0.1, 0, 1]), (1 - np.sqrt(0.6)) / 2)
    rep = cycle_from_point(rmap([0, 0, 1]), 1)
    par = cycle_from_point(rmap([0, 1, 1, 2]), 0)
    parr = cycle_from_point(rmap([0, 1, 1]), 0)
    assert rigid_divisor(None, [att]).degree == 2
    assert rigid_divisor(None, [rep]).degree == 1
    assert rigid_divisor(None, [par]).degree == 4
    assert rigid_divisor(None, [parr]).degree == 3


def test_rigid_rejects_superattracting():
    sup = cycle_from_point(rmap([0, 0, 1]), 0)
    with pytest.raises(SuperattractingPresent):
        rigid_divisor(None, [sup])


def test_xf_variant_includes_superattracting():
    f = rmap([-1, 0, 1])
    cs = cycles_up_to_period(f, 2)
    d = rigid_cycles_divisor_xf(f, cs)
    assert d.mult(pt(0)) == 2 and d.mult(pt(-1)) == 2 and d.mult(INF) == 2


def test_lambda_examples():
    z2 = rmap([0, 0, 1])
    for n in (1, 2, 4):
        p = lambda_truncated(z2, n)
        assert p.delta1 == Divisor([(0, 2), (INF, 2)])
    f = rmap([-1, 0, 1])
    p = lambda_truncated(f)
    assert p.delta1 == Divisor([(0, 2), (-1, 1), (INF, 2)])
    assert e_dynamical_check(f, p.delta0, p.delta1)


def test_claim_divisor_examples():
    z2 = rmap([0, 0, 1])
    one = cycle_from_point(z2, 1)
    base = lambda_truncated(z2)
    p = claim_divisor(z2, [one])
    assert p.delta1 == base.delta1 + Divisor([(1, 1)])
    assert p.degree_difference == 0
    f = rmap([0.1, 0, 1])
    att = cycle_from_point(f, (1 - np.sqrt(0.6)) / 2)
    assert claim_divisor(f, [att]).degree_difference == 1
    empty = claim_divisor(f, [])
    lam = lambda_truncated(f)
    assert empty.delta0 == lam.delta0 and empty.delta1 == lam.delta1


@pytest.mark.parametrize("P", [[0, 0, 1], [-1, 0, 1], [1, 0, 1], [0.1, 0, 1], [1, 0, 0, 1], [0, 1, 1]])
def test_claim_pairs_are_e_dynamical(P):
    f = rmap(P)
    cs = [c for c in cycles_up_to_period(f, 2) if c.kind != "superattracting"]
    pair = claim_divisor(f, cs)
    assert e_dynamical_check(f, pair.delta0, pair.delta1)
    assert pair.degree_difference == postcritical(f).delta
