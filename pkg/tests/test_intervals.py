"""Interval algebra, measures, and generated families."""

import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from psidensity.errors import DomainMismatchError, PreconditionError
from psidensity.intervals import (IntervalSet, accel4, combine, finlog, geo2,
                                  parse_set_spec, psi_measure,
                                  random_block_set)
from psidensity.radius import Radius
from psidensity.scales import Domain, make_scale

LOG = make_scale("log")
LIN = make_scale("linear")


def _r_pairs(E):
    return [(pytest.approx(a, rel=1e-12), pytest.approx(b, rel=1e-12))
            for a, b in E.pairs_r()]


def test_complement_of_single_interval():
    E = IntervalSet.from_r_pairs(1.0, 10.0, [(2.0, 3.0)])
    C = combine(E, None, "complement")
    got = C.pairs_r()
    assert len(got) == 2
    assert got[0][0] == pytest.approx(1.0) and got[0][1] == pytest.approx(2.0)
    assert got[1][0] == pytest.approx(3.0) and got[1][1] == pytest.approx(10.0)


def test_union_merges_overlap():
    A = IntervalSet.from_r_pairs(1.0, math.inf, [(1.0, 3.0)])
    B = IntervalSet.from_r_pairs(1.0, math.inf, [(2.0, 5.0)])
    U = combine(A, B, "union")
    assert len(U) == 1
    (a, b), = U.pairs_r()
    assert a == pytest.approx(1.0) and b == pytest.approx(5.0)


def test_union_merges_touching_halfopen():
    A = IntervalSet.from_r_pairs(1.0, math.inf, [(1.0, 2.0)])
    B = IntervalSet.from_r_pairs(1.0, math.inf, [(2.0, 3.0)])
    U = combine(A, B, "union")
    assert len(U) == 1


def test_intersection_with_window():
    # powers-of-two blocks meeting (1, 100); the k=0 block [1,2) survives as
    # a (measure-equal) piece, then [4,8), [16,32), and [64,128) clipped
    E = geo2().materialize(Radius.at(200.0))
    W = IntervalSet.from_r_pairs(1.0, math.inf, [(1.0, 100.0)])
    X = combine(E, W, "intersection")
    got = X.pairs_r()
    want = [(1.0, 2.0), (4.0, 8.0), (16.0, 32.0), (64.0, 100.0)]
    assert len(got) == len(want)
    for (ga, gb), (wa, wb) in zip(got, want):
        assert ga == pytest.approx(wa, rel=1e-12)
        assert gb == pytest.approx(wb, rel=1e-12)


def test_difference():
    A = IntervalSet.from_r_pairs(1.0, math.inf, [(2.0, 10.0)])
    B = IntervalSet.from_r_pairs(1.0, math.inf, [(4.0, 5.0)])
    D = combine(A, B, "difference")
    got = D.pairs_r()
    assert len(got) == 2
    assert got[0][1] == pytest.approx(4.0) and got[1][0] == pytest.approx(5.0)


def test_domain_mismatch_rejected():
    A = IntervalSet.from_r_pairs(1.0, math.inf, [(2.0, 3.0)])
    B = IntervalSet.from_r_pairs(2.0, math.inf, [(3.0, 4.0)])
    with pytest.raises(DomainMismatchError):
        combine(A, B, "union")


def test_degenerate_pieces_dropped():
    E = IntervalSet.from_log_pairs(0.0, math.inf, [(1.0, 1.0), (2.0, 3.0)])
    assert len(E) == 1


def test_measure_log_scale_exact():
    E = IntervalSet.from_r_pairs(1.0, math.inf, [(math.e, math.e ** 2)])
    assert psi_measure(E, LOG, Radius.at(math.e ** 3)) == pytest.approx(1.0, abs=1e-12)


def test_measure_empty_set():
    E = IntervalSet.empty(Domain(0.0, math.inf))
    assert psi_measure(E, LOG, 100.0) == 0.0
    assert psi_measure(E, LIN, 100.0) == 0.0


def _riemann_indicator_measure(pairs_r, upto, step=1e-3):
    """Brute-force linear measure of a union of intervals via a Riemann sum."""
    total = 0.0
    t = 1.0
    while t < upto:
        if any(a <= t < b for a, b in pairs_r):
            total += step
        t += step
    return total


def test_geo2_linear_measure_to_128():
    E = geo2()
    got = psi_measure(E, LIN, 128.0)
    assert got == pytest.approx(85.0, rel=1e-9)
    brute = _riemann_indicator_measure(
        E.materialize(Radius.at(256.0)).pairs_r(), 128.0)
    assert got == pytest.approx(brute, abs=0.05)


def test_geo2_log_measure():
    # log measure of the first K+1 blocks is (K+1) log 2
    E = geo2()
    got = psi_measure(E, LOG, Radius.at(2.0 ** 11))  # blocks up to [2^10, 2^11)
    assert got == pytest.approx(6 * math.log(2.0), rel=1e-12)


def test_accel4_exact_log_endpoints():
    E = accel4().materialize(Radius.from_log(4.0 ** 5))
    assert E.pieces[:3] == ((1.0, 2.0), (4.0, 8.0), (16.0, 32.0))


def test_materialize_monotone_superset():
    for E in (geo2(), accel4(), finlog(),
              combine(geo2(), None, "complement"),
              combine(geo2(), accel4(), "union")):
        small = E.materialize(Radius.from_log(20.0)).pieces
        large = E.materialize(Radius.from_log(80.0)).pieces
        for a, b in small:
            assert any(la <= a and b <= lb for la, lb in large), (E.label, a, b)


def test_materialize_idempotent():
    E = geo2()
    m1 = E.materialize(Radius.from_log(30.0))
    m2 = m1.materialize(Radius.from_log(30.0))
    assert m1.pieces == m2.pieces


def test_psi_measure_needs_materialization():
    prefix = geo2().materialize(Radius.from_log(10.0))
    with pytest.raises(PreconditionError):
        psi_measure(prefix, LOG, Radius.from_log(50.0))


def test_parse_set_spec():
    assert parse_set_spec("geo2").label == "geo2"
    assert parse_set_spec("accel4:4").label == "accel4"
    E = parse_set_spec("2:3,5:8")
    assert len(E) == 2
    with pytest.raises(DomainMismatchError):
        parse_set_spec("3:2")
    with pytest.raises((DomainMismatchError, ValueError)):
        parse_set_spec("junk")


def test_pieces_must_stay_in_domain():
    with pytest.raises(DomainMismatchError):
        IntervalSet.from_r_pairs(2.0, 10.0, [(1.0, 3.0)])


# -- measure identities on random sets ------------------------------------------------

_pair_lists = st.lists(
    st.tuples(st.floats(min_value=0.1, max_value=50.0, allow_nan=False),
              st.floats(min_value=0.05, max_value=5.0, allow_nan=False)),
    min_size=0, max_size=12,
)


def _build(pairs):
    return IntervalSet.from_log_pairs(
        0.0, math.inf, [(a, a + w) for a, w in pairs])


@settings(max_examples=200, deadline=None)
@given(_pair_lists, _pair_lists)
def test_inclusion_exclusion(pa, pb):
    A, B = _build(pa), _build(pb)
    upto = Radius.from_log(60.0)
    for scale in (LOG, LIN):
        lhs = psi_measure(combine(A, B, "union"), scale, upto) + \
            psi_measure(combine(A, B, "intersection"), scale, upto)
        rhs = psi_measure(A, scale, upto) + psi_measure(B, scale, upto)
        assert lhs == pytest.approx(rhs, rel=1e-9, abs=1e-9)


@settings(max_examples=200, deadline=None)
@given(_pair_lists)
def test_complement_measure_identity(pa):
    E = _build(pa)
    C = combine(E, None, "complement")
    upto = Radius.from_log(60.0)
    for scale in (LOG, LIN):
        total = float(scale.value_x(60.0)) - float(scale.value_x(0.0))
        got = psi_measure(C, scale, upto)
        want = total - psi_measure(E, scale, upto)
        assert got == pytest.approx(want, rel=1e-9, abs=1e-9)


def test_random_block_set_reproducible():
    E1 = random_block_set(random.Random(7))
    E2 = random_block_set(random.Random(7))
    assert E1.materialize(Radius.from_log(100.0)).pieces == \
        E2.materialize(Radius.from_log(100.0)).pieces
