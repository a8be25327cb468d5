"""Quadrature, weighted Cesaro averages, density-limit certification, the
usual-limit upgrade, the dichotomy, and divergence witnesses.

Frozen oracle values come from 30-digit evaluations of the closed forms:
    integral_2^100 sin^2(t)/t dt
        = (log 50 - Ci(200) + Ci(4)) / 2 = 1.88770987681712174
        with Ci(4) = -0.140981697886930, Ci(200) = -0.00437844609302783
    (1/log r) integral_2^r sin^2(t)/t dt at r = 10^6 = 0.469811881106751
"""

import math
import random

import numpy as np
import pytest

from psidensity.errors import ConvergenceError, EvalDomainError, PreconditionError
from psidensity.functions import ExpressionFn, FuncFn, SpikeTrainFn, transform
from psidensity.limits import (cesaro_psi_average, check_abs_integrability,
                               density_limit_certify, dichotomy_check,
                               divergence_witness, integrate,
                               plain_limit_probe, usual_limit_certify)
from psidensity.scales import make_scale

LOG = make_scale("log")
LIN = make_scale("linear")
LOGLOG = make_scale("loglog")
POWLOG2 = make_scale("powlog", beta=2.0)

SIN2_OVER_T = FuncFn(lambda t: np.sin(t) ** 2 / t, name="sin^2/t")
OSC_INTEGRAND = ExpressionFn("sin(t)^2/(t*log(t))")


def test_integrate_reciprocal():
    got = integrate(FuncFn(lambda t: 1.0 / t, name="1/t"), 1.0, math.e, 1e-10)
    assert got == pytest.approx(1.0, abs=1e-10)


def test_integrate_zero():
    z = FuncFn(lambda t: np.zeros_like(np.asarray(t, dtype=float)), name="0")
    assert integrate(z, 0.0, 1.0, 1e-12) == 0.0


def test_integrate_oscillatory_frozen_value():
    got = integrate(SIN2_OVER_T, 2.0, 100.0, 1e-8, period_hint=math.pi)
    assert got == pytest.approx(1.88770987681712174, abs=1e-8)
    # and without the hint the adaptive splitting must find it on its own
    got2 = integrate(SIN2_OVER_T, 2.0, 100.0, 1e-8)
    assert got2 == pytest.approx(1.88770987681712174, abs=1e-8)


def test_integrate_orientation_and_degenerate():
    f = FuncFn(lambda t: np.multiply(t, 1.0), name="t")
    assert integrate(f, 3.0, 3.0, 1e-9) == 0.0
    assert integrate(f, 2.0, 0.0, 1e-9) == pytest.approx(-2.0, abs=1e-9)


def test_integrate_error_control_random_panels():
    rng = random.Random(77)
    poly = FuncFn(lambda t: 3.0 * t ** 2 - 2.0 * t + 0.5, name="poly")
    sine = FuncFn(np.sin, name="sin")
    recip = FuncFn(lambda t: 1.0 / t, name="1/t")
    for _ in range(100):
        a = 0.5 + 10.0 * rng.random()
        b = a + 0.1 + 20.0 * rng.random()
        tol = 10.0 ** -rng.uniform(6, 10)
        want = (b ** 3 - b ** 2 + 0.5 * b) - (a ** 3 - a ** 2 + 0.5 * a)
        assert abs(integrate(poly, a, b, tol) - want) <= tol * (1 + abs(want) * 1e-12)
        assert abs(integrate(sine, a, b, tol) - (math.cos(a) - math.cos(b))) <= tol
        assert abs(integrate(recip, a, b, tol) - math.log(b / a)) <= tol


def test_integrate_budget_exhaustion():
    wiggle = FuncFn(lambda t: np.sin(1000.0 * t), name="fast")
    with pytest.raises(ConvergenceError):
        integrate(wiggle, 0.0, 1000.0, 1e-13, max_evals=2000)


def test_integrate_domain_error_surfaces():
    f = ExpressionFn("log(t-5)")
    with pytest.raises(EvalDomainError):
        integrate(f, 1.0, 10.0, 1e-6)


# -- Cesaro trajectories -----------------------------------------------------------


def test_cesaro_inverse_square_closed_form():
    f = ExpressionFn("1/t^2")
    traj = cesaro_psi_average(f, LIN, [10.0, 100.0, 1000.0], tol=1e-9)
    want = [math.log(r) / r for r in (10.0, 100.0, 1000.0)]
    for (r, v), w in zip(traj, want):
        assert v == pytest.approx(w, abs=1e-8)


def test_cesaro_zero_function():
    z = FuncFn(lambda t: np.zeros_like(np.asarray(t, dtype=float)), name="0")
    traj = cesaro_psi_average(z, LIN, [10.0, 100.0], tol=1e-9)
    assert all(v == 0.0 for _, v in traj)


def test_cesaro_oscillatory_tends_to_half():
    # log-weighted average of sin^2 t/(t log t): value at 10^6 frozen from
    # the cosine-integral closed form, tending to 1/2 (not 0)
    traj = cesaro_psi_average(OSC_INTEGRAND, LOG, list(np.geomspace(8.0, 1e6, 25)),
                              tol=1e-4, r_start=2.0, period_hint=math.pi)
    r, v = traj[-1]
    assert r == pytest.approx(1e6)
    assert v == pytest.approx(0.469811881106751, abs=2e-3)
    assert 0.45 <= v <= 0.52


def test_divergence_witness_oscillatory():
    rs = np.geomspace(8.0, 1e6, 25)
    verdict = divergence_witness(OSC_INTEGRAND, LOG, list(rs), tol=0.02,
                                 r_start=2.0, period_hint=math.pi)
    assert verdict.kind == "divergence-witness"
    assert verdict.details["criterion"] == "stabilized"
    assert abs(verdict.value - 0.5) < 0.05


def test_divergence_witness_absent_for_integrable():
    f = ExpressionFn("1/t^2")
    verdict = divergence_witness(f, LIN, [10.0, 100.0, 1000.0], tol=0.02)
    assert verdict.kind == "no-limit-detected"


def test_divergence_witness_escaping():
    f = ExpressionFn("1/t")
    verdict = divergence_witness(f, LOG, list(np.geomspace(10.0, 1e8, 12)),
                                 tol=0.02)
    assert verdict.kind == "divergence-witness"
    assert verdict.details["criterion"] == "escaping"
    assert math.isinf(verdict.value) and verdict.value > 0


# -- limits in psi-density ------------------------------------------------------------


def test_spike_train_certified_linear_density():
    verdict = density_limit_certify(SpikeTrainFn(), 0.0, LIN, cutoff=1e4)
    assert verdict.kind == "psi-density-limit"
    assert verdict.value == 0.0
    assert all(d < 1e-2 for _, d in verdict.evidence)


def test_sin_log_not_certified():
    f = ExpressionFn("sin(log(t))")
    verdict = density_limit_certify(f, 0.0, LOG, eps_grid=(1.0, 0.5, 0.1),
                                    cutoff=math.exp(128 * math.pi))
    assert verdict.kind == "no-limit-detected"
    dens = dict(verdict.evidence)
    # {|sin| >= 1/2} occupies 2/3 of each period in log coordinates
    assert dens[0.5] == pytest.approx(2.0 / 3.0, abs=2e-2)


def test_constant_certified_for_any_scale():
    f = ExpressionFn("5")
    for psi in (LIN, LOG, POWLOG2):
        verdict = density_limit_certify(f, 5.0, psi, cutoff=1e6)
        assert verdict.kind == "psi-density-limit"
        assert all(d == 0.0 for _, d in verdict.evidence)


def test_usual_limit_implies_density_limit_every_scale():
    f = ExpressionFn("1/t")  # usual limit 0
    for psi in (LIN, LOG, POWLOG2, LOGLOG):
        verdict = density_limit_certify(f, 0.0, psi, cutoff=1e6)
        assert verdict.kind == "psi-density-limit", psi.name


def test_eps_monotonicity_of_excursion_densities():
    f = ExpressionFn("sin(log(t))")
    verdict = density_limit_certify(f, 0.0, LOG,
                                    eps_grid=(0.9, 0.7, 0.5, 0.3, 0.1),
                                    cutoff=math.exp(128 * math.pi))
    dens = [d for _, d in verdict.evidence]
    assert all(d2 >= d1 - 1e-9 for d1, d2 in zip(dens, dens[1:]))


def test_limit_plus_infinity():
    f = ExpressionFn("log(t)")
    verdict = density_limit_certify(f, math.inf, LOG, cutoff=1e9)
    assert verdict.kind == "psi-density-limit"


def test_eps_grid_validation():
    with pytest.raises(PreconditionError):
        density_limit_certify(ExpressionFn("t"), 0.0, LIN,
                              eps_grid=(0.1, 0.3), cutoff=100.0)


# -- usual-limit upgrade ---------------------------------------------------------------


WEIGHT_DECAY = ExpressionFn("1/(t*log(t)^2)")


def test_usual_limit_linear_scale():
    verdict = usual_limit_certify(WEIGHT_DECAY, LIN, 10.0, 1e8)
    assert verdict.kind == "usual-limit" and verdict.value == 0.0
    assert verdict.details["condition_i"] and verdict.details["condition_ii"]
    # r f(r) = 1/log(r)^2 at 1e8: frozen 0.00294705776580647
    assert verdict.details["final_abs_value"] == pytest.approx(
        0.00294705776580647, rel=1e-9)


def test_usual_limit_powlog_scale():
    verdict = usual_limit_certify(WEIGHT_DECAY, POWLOG2, 10.0, 1e8)
    assert verdict.kind == "usual-limit"
    assert verdict.details["condition_i"] and verdict.details["condition_ii"]
    # psi/psi' = r log r / 2, so the certified quantity is 1/(2 log r)
    assert verdict.details["final_abs_value"] == pytest.approx(
        1.0 / (2.0 * math.log(1e8)), rel=1e-9)


def test_usual_limit_loglog_scale_condition_split():
    verdict = usual_limit_certify(WEIGHT_DECAY, LOGLOG, 10.0, 1e8)
    assert verdict.kind == "usual-limit"
    assert not verdict.details["condition_i"]
    assert verdict.details["condition_ii"]
    # quantity log(log r)/log(r) -> 0
    x = math.log(1e8)
    assert verdict.details["final_abs_value"] == pytest.approx(
        math.log(x) / x, rel=1e-9)


def test_condition_ii_against_tail_integral_bound():
    """When certification goes through the non-increasing |f|/psi' route,
    |psi f / psi'| is dominated by twice the integral of |f| over
    [s(r), r] with s(r) = psi^{-1}(psi(r)/2) -- checked numerically."""
    verdict = usual_limit_certify(WEIGHT_DECAY, LOGLOG, 10.0, 1e8)
    absf = transform(WEIGHT_DECAY, np.abs, name="|f|")
    for r, q in verdict.evidence[::6]:
        s = float(LOGLOG.inverse_r(0.5 * float(LOGLOG.value_r(r))))
        if s <= 10.0 or r / s < 1.0001:
            continue
        tail = integrate(absf, s, r, 1e-10)
        assert abs(q) <= 2.0 * tail * (1 + 1e-6)


def test_usual_limit_fallback_when_conditions_fail():
    f = FuncFn(lambda t: (2.0 + np.sin(t)) / (t * np.log(t) ** 2), name="osc-decay")
    verdict = usual_limit_certify(f, LIN, 10.0, 1e6)
    assert verdict.kind == "psi-density-limit"
    assert not verdict.details["condition_i"]
    assert not verdict.details["condition_ii"]


def test_usual_limit_requires_integrability():
    with pytest.raises(PreconditionError, match="converge"):
        usual_limit_certify(ExpressionFn("1/t"), LIN, 10.0, 1e8)


def test_integrability_probe():
    good = check_abs_integrability(WEIGHT_DECAY, 10.0, 1e8)
    assert good["converged"]
    assert math.isfinite(good["tail_estimate"])
    bad = check_abs_integrability(ExpressionFn("1/t"), 10.0, 1e8)
    assert not bad["converged"]


# -- dichotomy and the plain limit probe -------------------------------------------------


def test_dichotomy_constant_function():
    rep = dichotomy_check(ExpressionFn("2"), 2.0, LOG, 1e8)
    assert rep.passed


def test_dichotomy_spike_train_second_branch():
    rep = dichotomy_check(SpikeTrainFn(), 0.0, LIN, 1e4)
    assert rep.passed
    assert "not non-decreasing" in rep.note


def test_dichotomy_reciprocal_log():
    rep = dichotomy_check(ExpressionFn("1/log(t)"), 0.0, LOG, 1e8)
    assert rep.passed
    assert "non-decreasing" in rep.note


def test_plain_probe_spike_train_sees_spikes():
    ok, dev = plain_limit_probe(SpikeTrainFn(), 0.0, 1e4)
    assert not ok
    assert dev == pytest.approx(1.0)


def test_plain_probe_accepts_decaying():
    ok, dev = plain_limit_probe(ExpressionFn("1/t"), 0.0, 1e6)
    assert ok
    assert dev < 1e-4
