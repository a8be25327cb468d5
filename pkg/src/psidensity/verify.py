"""Materialize limsup/liminf level sets and check the density bound catalog.

Each checker materializes the sets a bound speaks about (near-limsup band
F, near-liminf band G, growth comparison sets H, I, K1, K2, N1, P, Q, V),
measures their densities with the trailing-window estimator, and emits one
BoundReport per stated inequality.  Premise violations mark reports
inapplicable instead of failing them.

Report ids follow the CLI's verification catalog: thm3.1, prop3.2, cor3.3,
cor4.1 .. cor4.7.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .density import BoundReport, DensityEstimate, estimate_density, extract_set
from .errors import DomainMismatchError, PreconditionError
from .functions import ConstFn, LogrFn, ScalarFn
from .growth import (GrowthFunction, estimate_orders, estimate_type,
                     ratio_above, ratio_below)
from .intervals import IntervalSet, combine
from .radius import Radius, as_logr
from .scales import Domain, PsiScale, exp_lift

DEFAULT_SLACK = 2e-2
EXP_TOL = 2e-2          # one-sided horizon certification band for e^psi claims
ESTIMATED_EXTRA = 2e-2  # folded in when K and k are estimates, not analytic


@dataclass(frozen=True)
class LimitSetSpec:
    """Inputs of the limsup/liminf set checks.

    phi is the ratio-like function; K and k its limsup and liminf (K may be
    math.inf, which switches to the excess-set branch with threshold M).
    ``analytic`` records whether K and k are exact (zig-zag metadata) or
    trailing-window estimates; estimates widen every slack.
    """

    phi: ScalarFn | GrowthFunction
    psi: PsiScale
    K: float
    k: float
    eps: float = 0.5
    M: Optional[float] = None
    analytic: bool = True

    def __post_init__(self):
        if not (0 <= self.k < self.K):
            raise DomainMismatchError(f"need 0 <= k < K, got k={self.k}, K={self.K}")
        if not self.eps > 0:
            raise DomainMismatchError("eps must be positive")


def spec_from_zigzag(gf: GrowthFunction, psi: PsiScale, eps: float = 0.5,
                     M: Optional[float] = None) -> LimitSetSpec:
    """LimitSetSpec for phi = log T / log r of a zig-zag: K, k are exact."""
    if gf.zig is None:
        raise DomainMismatchError("spec_from_zigzag needs a zig-zag growth function")
    return LimitSetSpec(phi=gf, psi=psi, K=gf.zig.L, k=gf.zig.ell, eps=eps,
                        M=M, analytic=True)


# -- set materialization ------------------------------------------------------------


def _set_domain(phi) -> Domain:
    if isinstance(phi, GrowthFunction) and phi.zig is not None:
        return Domain(phi.zig.x0, math.inf)
    return Domain(0.0, math.inf)


def _phi_level_set(phi, c: float, above: bool, cutoff,
                   grid_per_decade: int = 64) -> IntervalSet:
    """{phi > c} or {phi < c} below the horizon."""
    dom = _set_domain(phi)
    if isinstance(phi, GrowthFunction):
        pred = ratio_above(phi, c) if above else ratio_below(phi, c)
        return extract_set(pred, dom, cutoff, grid_per_decade)
    sign = 1.0 if above else -1.0
    pred = LogrFn(lambda x: sign * (np.asarray(phi.at_logr(x), dtype=float) - c),
                  name=f"phi{'>' if above else '<'}{c:g}")
    return extract_set(pred, dom, cutoff, grid_per_decade)


def _band_set(phi, lo: float, hi: float, cutoff) -> IntervalSet:
    """{lo < phi < hi}; measure-equal to the closed band for our phi's."""
    return combine(_phi_level_set(phi, lo, True, cutoff),
                   _phi_level_set(phi, hi, False, cutoff), "intersection")


def _phi_value_at_logx(phi, x):
    if isinstance(phi, GrowthFunction):
        return phi.ratio_at_logx(x)
    return phi.at_logr(x)


def _check_phi_psi_monotone(phi, psi: PsiScale, cutoff, points: int = 1000) -> bool:
    """Spot check that phi(r) psi(r) is non-decreasing on a log-spaced grid."""
    cx = as_logr(cutoff)
    x0 = _set_domain(phi).x0
    if isinstance(phi, GrowthFunction) and phi.zig is not None and psi.kind == "log":
        # phi * psi is exactly y(x), non-decreasing iff breakpoint heights are
        xs, ys = phi._bps(cx)
        return bool(np.all(np.diff(ys) >= 0))
    hi = min(cx, 700.0)
    xs = np.linspace(x0 + max(1e-9, 1e-6 * (hi - x0)), hi, points)
    vals = np.asarray(_phi_value_at_logx(phi, xs), dtype=float) \
        * np.asarray(psi.value_x(xs), dtype=float)
    return bool(np.all(np.diff(vals) >= -1e-9 * np.maximum(np.abs(vals[:-1]), 1.0)))


# -- limsup/liminf set bounds -------------------------------------------------------


def verify_limsup_sets(spec: LimitSetSpec, cutoff, tail_window: int = 8,
                       slack: float = DEFAULT_SLACK) -> list[BoundReport]:
    """Density bounds for the near-limsup and near-liminf bands of phi.

    Finite K: the four base bounds, the e^psi certifications, and -- when
    eps < (K-k)/2 -- the four improved bounds.  Infinite K: the excess set
    {phi > M} has full upper density and lower density at most k/M.
    """
    K, k, eps = spec.K, spec.k, spec.eps
    if not spec.analytic:
        slack = slack + ESTIMATED_EXTRA
    tag = f"[K={K:g},k={k:g},eps={eps:g}]"

    if not _check_phi_psi_monotone(spec.phi, spec.psi, cutoff):
        note = "phi*psi is not non-decreasing; bounds not asserted"
        ids = [f"thm3.1{tag}.inapplicable"]
        return [BoundReport.inapplicable(i, note) for i in ids]

    psi, lifted = spec.psi, exp_lift(spec.psi)
    reports: list[BoundReport] = []

    if math.isinf(K):
        if spec.M is None or spec.M <= k:
            return [BoundReport.inapplicable(f"thm3.1{tag}.HM", "need M > k")]
        M = spec.M
        H = _phi_level_set(spec.phi, M, True, cutoff)
        dH = estimate_density(H, psi, cutoff, tail_window)
        tagM = f"[K=inf,k={k:g},M={M:g}]"
        reports.append(BoundReport.check(
            f"thm3.1{tagM}.HM.upper_psi", dH.upper, ">=", 1.0, slack,
            note="equality certified one-sidedly at a finite horizon"))
        reports.append(BoundReport.check(
            f"thm3.1{tagM}.HM.lower_psi", dH.lower, "<=", k / M, slack))
        return reports

    F = _band_set(spec.phi, K - eps, K + eps, cutoff)
    G = _band_set(spec.phi, k - eps, k + eps, cutoff) if k - eps > 0 else \
        _phi_level_set(spec.phi, k + eps, False, cutoff)
    dF = estimate_density(F, psi, cutoff, tail_window)
    dG = estimate_density(G, psi, cutoff, tail_window)
    dFx = estimate_density(F, lifted, cutoff, tail_window)
    dGx = estimate_density(G, lifted, cutoff, tail_window)

    reports += [
        BoundReport.check(f"thm3.1{tag}.F.upper_psi", dF.upper, ">=", eps / K, slack),
        BoundReport.check(f"thm3.1{tag}.G.upper_psi", dG.upper, ">=", eps / (k + eps), slack),
        BoundReport.check(f"thm3.1{tag}.F.lower_psi", dF.lower, "<=", k / (k + eps), slack),
        BoundReport.check(f"thm3.1{tag}.G.lower_psi", dG.lower, "<=", (K - eps) / K, slack),
    ]
    one_sided = "equality certified one-sidedly at a finite horizon"
    reports += [
        BoundReport.check(f"thm3.1{tag}.F.upper_exp", dFx.upper, ">=", 1.0, EXP_TOL, note=one_sided),
        BoundReport.check(f"thm3.1{tag}.F.lower_exp", dFx.lower, "<=", 0.0, EXP_TOL, note=one_sided),
        BoundReport.check(f"thm3.1{tag}.G.upper_exp", dGx.upper, ">=", 1.0, EXP_TOL, note=one_sided),
        BoundReport.check(f"thm3.1{tag}.G.lower_exp", dGx.lower, "<=", 0.0, EXP_TOL, note=one_sided),
    ]
    if eps < (K - k) / 2:
        reports += [
            BoundReport.check(f"prop3.2{tag}.F.upper_psi", dF.upper, ">=", 1 - (k + eps) / K, slack),
            BoundReport.check(f"prop3.2{tag}.G.upper_psi", dG.upper, ">=", 1 - k / (K - eps), slack),
            BoundReport.check(f"prop3.2{tag}.F.lower_psi", dF.lower, "<=", k / (K - eps), slack),
            BoundReport.check(f"prop3.2{tag}.G.lower_psi", dG.lower, "<=", (k + eps) / K, slack),
        ]
    return reports


# -- comparison of two functions -----------------------------------------------------


def verify_comparison(phi1, phi2, psi: PsiScale, mode: str, cutoff,
                      k1: Optional[float] = None, k2: Optional[float] = None,
                      tail_window: int = 8, slack: float = DEFAULT_SLACK
                      ) -> list[BoundReport]:
    """Where phi1's limsup (or liminf) trails phi2's, the set {phi1 < phi2}
    has upper psi-density at least 1 - k1/k2 and full upper e^psi-density."""
    if mode not in ("limsup", "liminf"):
        raise DomainMismatchError(f"mode must be limsup or liminf, not {mode!r}")
    if k1 is None:
        k1 = _mode_limit(phi1, mode, cutoff)
    if k2 is None:
        k2 = _mode_limit(phi2, mode, cutoff)
    tag = f"[mode={mode},k1={k1:g},k2={k2:g}]"
    if not k1 < k2:
        return [BoundReport.inapplicable(f"cor3.3{tag}", f"premise k1 < k2 fails")]
    if not _check_phi_psi_monotone(phi2, psi, cutoff):
        return [BoundReport.inapplicable(f"cor3.3{tag}", "phi2*psi not non-decreasing")]

    G = _difference_positive_set(phi1, phi2, cutoff)
    dG = estimate_density(G, psi, cutoff, tail_window)
    dGx = estimate_density(G, exp_lift(psi), cutoff, tail_window)
    bound = 1.0 if math.isinf(k2) else 1.0 - k1 / k2
    return [
        BoundReport.check(f"cor3.3{tag}.psi", dG.upper, ">=", bound, slack),
        BoundReport.check(f"cor3.3{tag}.exp", dGx.upper, ">=", 1.0, EXP_TOL,
                          note="equality certified one-sidedly at a finite horizon"),
    ]


def _mode_limit(phi, mode: str, cutoff) -> float:
    if isinstance(phi, ConstFn):
        return phi.c
    if isinstance(phi, GrowthFunction) and phi.zig is not None:
        return phi.zig.L if mode == "limsup" else phi.zig.ell
    # trailing-window estimate on a moderate grid
    cx = min(as_logr(cutoff), 700.0)
    xs = np.linspace(cx * 0.5, cx, 4096)
    vals = np.asarray(_phi_value_at_logx(phi, xs), dtype=float)
    return float(np.max(vals)) if mode == "limsup" else float(np.min(vals))


def _difference_positive_set(phi1, phi2, cutoff) -> IntervalSet:
    """{phi2 - phi1 > 0}; exact when phi2 is a zig-zag ratio and phi1 const."""
    if isinstance(phi2, GrowthFunction) and isinstance(phi1, ConstFn):
        return _phi_level_set(phi2, phi1.c, True, cutoff)
    dom = _set_domain(phi2)
    pred = LogrFn(lambda x: np.asarray(_phi_value_at_logx(phi2, x), dtype=float)
                  - np.asarray(_phi_value_at_logx(phi1, x), dtype=float),
                  name="phi2-phi1")
    return extract_set(pred, dom, cutoff)


# -- growth corollaries ---------------------------------------------------------------


def verify_growth_corollary(id: str, params: dict, T, cutoff,
                            tail_window: int = 8, slack: float = DEFAULT_SLACK
                            ) -> list[BoundReport]:
    """Dispatch one of the growth-corollary checks (cor4.1 .. cor4.7).

    ``T`` is a GrowthFunction, or a pair (T1, T2) for the two-function
    corollaries 4.5 and 4.6.
    """
    handlers = {
        "cor4.1": _cor41, "cor4.2": _cor42, "cor4.3": _cor43, "cor4.4": _cor44,
        "cor4.5": _cor45, "cor4.6": _cor46, "cor4.7": _cor47,
    }
    if id not in handlers:
        raise DomainMismatchError(f"unknown corollary id {id!r}")
    return handlers[id](params, T, cutoff, tail_window, slack)


def _orders_of(T: GrowthFunction, cutoff) -> tuple[float, float]:
    if T.zig is not None:
        return T.zig.ell, T.zig.L
    est = estimate_orders(T, Radius.from_log(min(as_logr(cutoff), 690.0)))
    upper = math.inf if est.upper_infinite else est.upper_order
    return est.lower_order, upper


def _log_scale() -> PsiScale:
    from .scales import make_scale
    return make_scale("log")


def _linear_scale() -> PsiScale:
    from .scales import make_scale
    return make_scale("linear")


def _cor41(params, T, cutoff, w, slack):
    a, b = float(params["a"]), float(params["b"])
    ell, L = _orders_of(T, cutoff)
    tag = f"[l={ell:g},L={L:g},a={a:g},b={b:g}]"
    if not (ell < a <= b < L):
        return [BoundReport.inapplicable(f"cor4.1{tag}", "need ell < a <= b < L")]
    log = _log_scale()
    H = _phi_level_set(T, a, False, cutoff)          # T <= r^a
    I = _phi_level_set(T, b, True, cutoff)           # T > r^b
    dH = estimate_density(H, log, cutoff, w)
    dI = estimate_density(I, log, cutoff, w)
    dH_lin = estimate_density(H, exp_lift(log), cutoff, w)
    reports = [
        BoundReport.check(f"cor4.1{tag}.H.upper_log", dH.upper, ">=",
                          max((a - ell) / a, (L - a) / (L + ell - a)), slack),
        BoundReport.check(f"cor4.1{tag}.I.lower_log", dI.lower, "<=",
                          min(ell / b, ell / (L + ell - b)), slack),
        BoundReport.check(f"cor4.1{tag}.H.lower_log", dH.lower, "<=",
                          min(a / L, (L + ell - a) / L), slack),
        BoundReport.check(f"cor4.1{tag}.I.upper_log", dI.upper, ">=",
                          max((L - b) / L, (b - ell) / L), slack),
        # the classical weaker statement, certified alongside
        BoundReport.check(f"cor4.1{tag}.H.upper_lin", dH_lin.upper, ">=", 1.0, slack,
                          note="classical upper-density-one claim"),
        BoundReport.check(f"cor4.1{tag}.H.lower_lin", dH_lin.lower, "<=", 0.0, slack,
                          note="classical lower-density-zero claim"),
    ]
    return reports


def _cor42(params, T, cutoff, w, slack):
    eps = float(params["eps"])
    ell, L = _orders_of(T, cutoff)
    tag = f"[L={L:g},eps={eps:g}]"
    if not (0 < L < math.inf):
        return [BoundReport.inapplicable(f"cor4.2{tag}", "need finite positive order")]
    K1 = _band_set(T, L - eps, L + eps, cutoff)
    d = estimate_density(K1, _log_scale(), cutoff, w)
    return [BoundReport.check(f"cor4.2{tag}.K1.upper_log", d.upper, ">=", eps / L, slack)]


def _cor43(params, T, cutoff, w, slack):
    eps = float(params["eps"])
    ell, L = _orders_of(T, cutoff)
    tag = f"[l={ell:g},eps={eps:g}]"
    if not (0 < ell < math.inf):
        return [BoundReport.inapplicable(f"cor4.3{tag}", "need finite positive lower order")]
    K2 = _band_set(T, ell - eps, ell + eps, cutoff) if ell - eps > 0 else \
        _phi_level_set(T, ell + eps, False, cutoff)
    d = estimate_density(K2, _log_scale(), cutoff, w)
    return [BoundReport.check(f"cor4.3{tag}.K2.upper_log", d.upper, ">=",
                              eps / (ell + eps), slack)]


def _type_premises(T, rho, tau, cutoff, rel_tol=0.15):
    ell, L = _orders_of(T, cutoff)
    if math.isinf(L) or abs(L - rho) > rel_tol * max(1.0, rho):
        return f"estimated order {L:.4g} is not rho={rho:g}"
    tau_est = estimate_type(T, rho, Radius.from_log(min(as_logr(cutoff), 690.0)))
    if math.isinf(tau_est) or abs(tau_est - tau) > rel_tol * max(1.0, tau):
        return f"estimated type {tau_est:.4g} is not tau={tau:g}"
    return None


def _cor44(params, T, cutoff, w, slack):
    rho, tau, eps0 = (float(params[k]) for k in ("rho", "tau", "eps0"))
    tag = f"[rho={rho:g},tau={tau:g},eps0={eps0:g}]"
    if not 0 < eps0 < tau:
        return [BoundReport.inapplicable(f"cor4.4{tag}", "need 0 < eps0 < tau")]
    problem = _type_premises(T, rho, tau, cutoff)
    if problem:
        return [BoundReport.inapplicable(f"cor4.4{tag}", problem)]
    dom = _set_domain(T)

    def scaled(x):
        x = np.asarray(x, dtype=float)
        return np.exp(T.log_T_at_logx(x) - rho * x)

    above = extract_set(LogrFn(lambda x: scaled(x) - (tau - eps0), name="N1lo"),
                        dom, cutoff)
    below = extract_set(LogrFn(lambda x: (tau + eps0) - scaled(x), name="N1hi"),
                        dom, cutoff)
    N1 = combine(above, below, "intersection")
    d = estimate_density(N1, _linear_scale(), cutoff, w)
    bound = 1.0 - ((tau - eps0) / tau) ** (1.0 / rho)
    return [BoundReport.check(f"cor4.4{tag}.N1.upper_lin", d.upper, ">=", bound, slack)]


def _cor45(params, Ts, cutoff, w, slack):
    T1, T2 = Ts
    beta = float(params.get("beta", 1.0))
    xi_mode = params.get("xi", "order")
    ell1, L1 = _orders_of(T1, cutoff)
    ell2, L2 = _orders_of(T2, cutoff)
    xi1, xi2 = (L1, L2) if xi_mode == "order" else (ell1, ell2)
    tag = f"[xi={xi_mode},xi1={xi1:g},xi2={xi2:g},beta={beta:g}]"
    if not xi1 < xi2:
        return [BoundReport.inapplicable(f"cor4.5{tag}", "need xi(T1) < xi(T2)")]
    dom = _set_domain(T2)

    def gap(x):
        x = np.asarray(x, dtype=float)
        with np.errstate(all="ignore"):
            weight = beta * np.log(x)
        return T2.log_T_at_logx(x) - T1.log_T_at_logx(x) - weight

    P = extract_set(LogrFn(gap, name="P"), dom, cutoff)
    dP = estimate_density(P, _log_scale(), cutoff, w)
    dPx = estimate_density(P, exp_lift(_log_scale()), cutoff, w)
    bound = 1.0 if math.isinf(xi2) else 1.0 - xi1 / xi2
    return [
        BoundReport.check(f"cor4.5{tag}.P.upper_log", dP.upper, ">=", bound, slack),
        BoundReport.check(f"cor4.5{tag}.P.upper_lin", dPx.upper, ">=", 1.0, slack,
                          note="equality certified one-sidedly at a finite horizon"),
    ]


def _cor46(params, Ts, cutoff, w, slack):
    T1, T2 = Ts
    rho, C = float(params["rho"]), float(params["C"])
    cx690 = Radius.from_log(min(as_logr(cutoff), 690.0))
    tau1 = estimate_type(T1, rho, cx690)
    tau2 = estimate_type(T2, rho, cx690)
    tag = f"[rho={rho:g},C={C:g},tau1={tau1:.4g},tau2={tau2:.4g}]"
    if not (0 < tau1 < tau2 < math.inf):
        return [BoundReport.inapplicable(f"cor4.6{tag}", "need 0 < tau1 < tau2 < inf")]
    if not (1 < C < tau2 / tau1):
        return [BoundReport.inapplicable(f"cor4.6{tag}", "need C in (1, tau2/tau1)")]
    dom = _set_domain(T2)
    pred = LogrFn(lambda x: T2.log_T_at_logx(x) - T1.log_T_at_logx(x) - math.log(C),
                  name="Q")
    Q = extract_set(pred, dom, cutoff)
    d = estimate_density(Q, _linear_scale(), cutoff, w)
    bound = 1.0 - C ** (1.0 / rho) * (tau1 / tau2) ** (1.0 / rho)
    return [BoundReport.check(f"cor4.6{tag}.Q.upper_lin", d.upper, ">=", bound, slack)]


def _cor47(params, T, cutoff, w, slack):
    rho, tau = float(params["rho"]), float(params["tau"])
    C1, C2 = float(params["C1"]), float(params["C2"])
    tag = f"[rho={rho:g},tau={tau:g},C1={C1:g},C2={C2:g}]"
    if not (C1 > 1 and C2 > 1):
        return [BoundReport.inapplicable(f"cor4.7{tag}", "need C1 > 1 and C2 > 1")]
    problem = _type_premises(T, rho, tau, cutoff)
    if problem:
        return [BoundReport.inapplicable(f"cor4.7{tag}", problem)]
    dom = _set_domain(T)
    shift = math.log(C1)
    pred = LogrFn(lambda x: T.log_T_at_logx(np.asarray(x, dtype=float) + shift)
                  - T.log_T_at_logx(x) - math.log(C2), name="V")
    V = extract_set(pred, dom, cutoff)
    reports = []
    if C2 ** (1.0 / rho) < C1:
        d = estimate_density(V, _linear_scale(), cutoff, w)
        bound = 1.0 - C2 ** (1.0 / rho) / C1
        reports.append(BoundReport.check(f"cor4.7{tag}.V.upper_lin", d.upper,
                                         ">=", bound, slack))
    else:
        reports.append(BoundReport.inapplicable(
            f"cor4.7{tag}.V.upper_lin", "main premise C2^(1/rho) < C1 fails"))
    classical = rho * math.log(C1) / math.log(C2)
    if classical < 1:
        d_log = estimate_density(V, _log_scale(), cutoff, w)
        reports.append(BoundReport.check(
            f"cor4.7{tag}.V.upper_log_classical", d_log.upper, "<=", classical,
            slack, note="classical logarithmic upper bound"))
    else:
        reports.append(BoundReport.inapplicable(
            f"cor4.7{tag}.V.upper_log_classical",
            f"classical bound {classical:.4g} >= 1 carries no information"))
    return reports
