"""Density estimator, chain, finite-measure lemma, exceptional-set
avoidance, and predicate-set extraction."""

import math
import random

import numpy as np
import pytest

from psidensity.density import (avoid_exceptional, check_chain,
                                check_finite_measure_zero_density,
                                density_ratios, density_trajectory,
                                estimate_density, extract_set)
from psidensity.errors import PreconditionError
from psidensity.functions import FuncFn, LogrFn
from psidensity.intervals import (IntervalSet, accel4, combine, finlog, geo2,
                                  random_block_set)
from psidensity.radius import Radius
from psidensity.scales import Domain, exp_lift, make_scale

LOG = make_scale("log")
LIN = make_scale("linear")
FULL_DOMAIN = Domain(0.0, math.inf)


def test_full_domain_density_one():
    E = IntervalSet.full(FULL_DOMAIN)
    d = estimate_density(E, LOG, Radius.at(1e9))
    assert d.upper == pytest.approx(1.0, abs=1e-12)
    assert d.lower == pytest.approx(1.0, abs=1e-12)


def test_empty_set_density_zero():
    E = IntervalSet.empty(FULL_DOMAIN)
    d = estimate_density(E, LOG, Radius.at(1e9))
    assert d.upper == 0.0 and d.lower == 0.0


def test_geo2_log_densities():
    # closed form: at the right endpoint of block K the ratio is
    # (K+1)/(2K+1), decreasing in K, so the max over the trailing window of
    # 8 at horizon 2^81 (block K=40) sits at K=33: 34/67.  Left endpoints
    # give exactly 1/2.
    d = estimate_density(geo2(), LOG, Radius.at(2.0 ** 81))
    assert d.upper == pytest.approx(34.0 / 67.0, rel=1e-12)
    assert d.lower == pytest.approx(0.5, rel=1e-12)
    assert abs(d.upper - 0.5) < 1e-2 and abs(d.lower - 0.5) < 1e-2


def test_geo2_linear_densities():
    # right-endpoint ratio (4^(K+1)-1)/(3*2^(2K+1)) -> 2/3, left-endpoint
    # ratio -> 1/3
    d = estimate_density(geo2(), LIN, Radius.at(2.0 ** 81))
    assert abs(d.upper - 2.0 / 3.0) < 1e-2
    assert abs(d.lower - 1.0 / 3.0) < 1e-2


def test_accel4_log_densities():
    # only nine blocks exist below e^(4^9); the minimum window width keeps
    # the trailing window inside the asymptotic regime
    d = estimate_density(accel4(), LOG, Radius.from_log(4.0 ** 9), tail_window=4)
    assert abs(d.upper - 2.0 / 3.0) < 1e-2
    assert abs(d.lower - 1.0 / 3.0) < 1e-2


def test_estimate_density_validations():
    with pytest.raises(PreconditionError):
        estimate_density(geo2(), LOG, Radius.at(100.0), tail_window=2)


def test_sparse_set_low_confidence():
    E = IntervalSet.from_r_pairs(1.0, math.inf, [(2.0, 3.0), (10.0, 20.0)])
    d = estimate_density(E, LOG, Radius.at(1e6))
    assert d.low_confidence
    assert d.lower == pytest.approx(0.0, abs=1e-6)  # measure stalls, psi grows


def test_ratio_monotone_inside_and_between_pieces():
    # D climbs inside pieces of E and decays on gaps (tested pointwise)
    rng = random.Random(3)
    for _ in range(10):
        E = random_block_set(rng).materialize(Radius.from_log(200.0))
        for scale in (LOG, LIN, exp_lift(LOG)):
            pieces = E.pieces[:40]
            for (a, b), (a2, _) in list(zip(pieces, pieces[1:]))[:6]:
                # stay strictly right of x=0 where psi=log vanishes
                inside = np.linspace(max(a, 0.05), b, 10)
                vals = density_ratios(pieces, scale, list(inside))
                assert all(v2 >= v1 - 1e-12 for v1, v2 in zip(vals, vals[1:]))
                gap = np.linspace(b, a2, 10)
                vals = density_ratios(pieces, scale, list(gap))
                assert all(v2 <= v1 + 1e-12 for v1, v2 in zip(vals, vals[1:]))


def test_complement_identity_random_sets():
    rng = random.Random(99)
    for _ in range(30):
        E = random_block_set(rng)
        cutoff = Radius.from_log(E.materialize(Radius.from_log(1e280)).pieces[40][0])
        Ec = combine(E, None, "complement")
        upper_c = estimate_density(Ec, LOG, cutoff).upper
        lower_e = estimate_density(E, LOG, cutoff).lower
        assert upper_c + lower_e == pytest.approx(1.0, abs=2e-2)


def test_cutoff_stability():
    # accel4 only has nine blocks below its horizon; the minimum window
    # keeps its trailing window asymptotic (as in the density tests above)
    for E, cut, w in ((geo2(), Radius.at(2.0 ** 81), 8),
                      (accel4(), Radius.from_log(4.0 ** 9), 4)):
        for scale in (LOG,) if E.label == "accel4" else (LOG, LIN):
            d1 = estimate_density(E, scale, cut, tail_window=w)
            d2 = estimate_density(E, scale, Radius.from_log(2 * cut.x), tail_window=w)
            assert abs(d1.upper - d2.upper) < 5e-3
            assert abs(d1.lower - d2.lower) < 5e-3


def test_density_trajectory_matches_estimates():
    E = geo2()
    cut = Radius.at(2.0 ** 41)
    traj = density_trajectory(E, LOG, cut)
    d = estimate_density(E, LOG, cut)
    vals = [v for _, v in traj]
    assert max(vals[-17:]) >= d.upper - 1e-12
    assert d.lower >= min(vals) - 1e-12


# -- chain -----------------------------------------------------------------------


def test_chain_geo2():
    reports = check_chain(geo2(), LOG, Radius.at(2.0 ** 81))
    assert len(reports) == 4
    assert all(r.passed for r in reports)


def test_chain_full_and_empty():
    for E in (IntervalSet.full(FULL_DOMAIN), IntervalSet.empty(FULL_DOMAIN)):
        assert all(r.passed for r in check_chain(E, LOG, Radius.at(1e9)))


def test_chain_random_sets():
    rng = random.Random(5)
    for _ in range(25):
        E = random_block_set(rng)
        cutoff = Radius.from_log(E.materialize(Radius.from_log(1e280)).pieces[40][0])
        assert all(r.passed for r in check_chain(E, LOG, cutoff))


# -- finite measure => zero lifted density ---------------------------------------


def test_finite_log_measure_set_passes():
    cutoffs = [Radius.from_log(18.0), Radius.from_log(19.5), Radius.from_log(20.0)]
    rep = check_finite_measure_zero_density(finlog(), LOG, cutoffs)
    assert rep.passed
    assert rep.measured < 1e-3


def test_single_interval_passes_trivially():
    E = IntervalSet.from_r_pairs(1.0, math.inf, [(2.0, 3.0)])
    cutoffs = [Radius.from_log(10.0), Radius.from_log(15.0), Radius.from_log(20.0)]
    rep = check_finite_measure_zero_density(E, LOG, cutoffs)
    assert rep.passed


def test_infinite_measure_set_rejected():
    cutoffs = [Radius.from_log(20.0), Radius.from_log(40.0), Radius.from_log(60.0)]
    with pytest.raises(PreconditionError, match="not converged"):
        check_finite_measure_zero_density(geo2(), LOG, cutoffs)


# -- exceptional-set avoidance -----------------------------------------------------


def test_avoid_exceptional_trivial():
    f = FuncFn(lambda r: np.multiply(r, 1.0), name="t")
    E = IntervalSet.empty(FULL_DOMAIN)
    r_prime, rep = avoid_exceptional(f, f, E, LOG, 2.0, Radius.at(1e6))
    assert rep.passed
    assert r_prime.x == pytest.approx(0.0, abs=1e-9)


def _step_to_block_end():
    """f equals r off the blocks and jumps to the block's right end inside,
    staying non-decreasing but beating g = r on the blocks."""
    pieces = geo2().materialize(Radius.from_log(80.0)).pairs_r()

    def fn(r):
        r = np.asarray(r, dtype=float)
        out = np.array(r, dtype=float)
        for a, b in pieces:
            out = np.where((r >= a) & (r < b), b, out)
        return out

    return FuncFn(fn, name="step")


def test_avoid_exceptional_geo2():
    f = _step_to_block_end()
    g = FuncFn(lambda r: np.multiply(r, 1.0), name="t")
    r_prime, rep = avoid_exceptional(f, g, geo2(), LOG, 3.0, Radius.at(1e20))
    assert rep.passed
    assert math.exp(r_prime.x) < 1e20


def test_avoid_exceptional_alpha_too_small():
    f = _step_to_block_end()
    g = FuncFn(lambda r: np.multiply(r, 1.0), name="t")
    with pytest.raises(PreconditionError, match="alpha"):
        avoid_exceptional(f, g, geo2(), LOG, 1.5, Radius.at(1e20))


# -- extraction ---------------------------------------------------------------------


def test_extract_sin_log_intervals():
    pred = LogrFn(lambda x: np.sin(np.asarray(x, dtype=float)), name="sinlog")
    E = extract_set(pred, FULL_DOMAIN, Radius.from_log(4 * math.pi))
    assert len(E.pieces) == 2
    (a1, b1), (a2, b2) = E.pieces
    assert a1 == pytest.approx(0.0, abs=1e-6)
    assert b1 == pytest.approx(math.pi, abs=1e-6)
    assert a2 == pytest.approx(2 * math.pi, abs=1e-6)
    assert b2 == pytest.approx(3 * math.pi, abs=1e-6)


def test_extract_constant_sign():
    full = extract_set(LogrFn(lambda x: np.ones_like(np.asarray(x, dtype=float)),
                              name="one"), FULL_DOMAIN, Radius.from_log(50.0))
    assert full.pieces == ((0.0, 50.0),)
    empty = extract_set(LogrFn(lambda x: -np.ones_like(np.asarray(x, dtype=float)),
                               name="neg"), FULL_DOMAIN, Radius.from_log(50.0))
    assert len(empty) == 0


def test_extract_then_density_half():
    # period-pi occupancy in log coordinates; the horizon must hold enough
    # periods for the trailing window to sit in the asymptotic regime
    pred = LogrFn(lambda x: np.sin(np.asarray(x, dtype=float)), name="sinlog")
    E = extract_set(pred, FULL_DOMAIN, Radius.from_log(128 * math.pi))
    d = estimate_density(E, LOG, Radius.from_log(128 * math.pi))
    assert abs(d.upper - 0.5) < 1e-2
    assert abs(d.lower - 0.5) < 1e-2


def test_extract_refinement_monotone():
    pred = LogrFn(lambda x: np.sin(np.asarray(x, dtype=float)), name="sinlog")
    coarse = extract_set(pred, FULL_DOMAIN, Radius.from_log(40.0), grid_per_decade=64)
    fine = extract_set(pred, FULL_DOMAIN, Radius.from_log(40.0), grid_per_decade=256)
    assert len(fine.pieces) >= len(coarse.pieces)
    for a, b in coarse.pieces:  # every detected piece persists under refinement
        assert any(abs(fa - a) < 1e-6 and abs(fb - b) < 1e-6
                   for fa, fb in fine.pieces)


def test_extract_linear_pieces_path_matches_grid():
    from psidensity.growth import make_zigzag, ratio_above
    zz = make_zigzag(1.0, 3.0)
    cut = Radius.from_log(3000.0)
    pred = ratio_above(zz, 2.5)
    exact = extract_set(pred, Domain(1.0, math.inf), cut)
    grid_pred = LogrFn(lambda x: np.asarray(pred.at_logr(x), dtype=float),
                       name="grid")
    gridded = extract_set(grid_pred, Domain(1.0, math.inf), cut)
    assert len(exact.pieces) == len(gridded.pieces)
    for (ea, eb), (ga, gb) in zip(exact.pieces, gridded.pieces):
        assert ea == pytest.approx(ga, rel=1e-6, abs=1e-6)
        assert eb == pytest.approx(gb, rel=1e-6, abs=1e-6)
