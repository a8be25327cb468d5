"""Behavior of integrable functions at infinity.

Builds on one quadrature primitive: a vectorized adaptive-Simpson
integrator with per-panel error budgeting.  On top of it sit the weighted
Cesaro average (1/psi(r)) * integral of psi*f, the certification of limits
in psi-density, the monotonicity-based upgrade to a usual limit, the
monotone/limit dichotomy check, and the divergence witness that flags a
weighted average stabilizing away from zero.

All integrals here run at radii that fit in floats; the log-coordinate
machinery of the density modules is not needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .density import BoundReport, estimate_density, extract_set
from .errors import ConvergenceError, EvalDomainError, PreconditionError
from .functions import FuncFn, ScalarFn, transform
from .radius import as_logr
from .scales import Domain, PsiScale

DEFAULT_EPS_GRID = (1.0, 0.3, 0.1, 0.03, 0.01)
DEFAULT_M_GRID = (1.0, 3.0, 10.0, 30.0, 100.0)
STABLE_WINDOW = 5


@dataclass(frozen=True)
class LimitVerdict:
    kind: str                       # usual-limit | psi-density-limit |
    #                                 no-limit-detected | divergence-witness
    value: Optional[float]
    psi: str
    evidence: tuple = ()            # (point, quantity) pairs
    eps_grid: tuple = ()
    details: dict = field(default_factory=dict, compare=False)

    def as_dict(self) -> dict:
        return {
            "kind": self.kind,
            "value": self.value,
            "psi": self.psi,
            "evidence": [list(p) for p in self.evidence],
            "eps_grid": list(self.eps_grid),
            "details": self.details,
        }


# -- quadrature --------------------------------------------------------------------


def _eval_checked(f, xs: np.ndarray) -> np.ndarray:
    vals = np.asarray(f(xs), dtype=float)
    if not np.all(np.isfinite(vals)):
        bad = xs[~np.isfinite(vals)][0]
        try:
            f(float(bad))  # scalar path carries the precise diagnostic
        except EvalDomainError:
            raise
        raise EvalDomainError(f"integrand not finite at t={bad!r}")
    return vals


def _initial_edges(a: float, b: float, period_hint: Optional[float]) -> np.ndarray:
    if period_hint and period_hint > 0 and 2 <= (b - a) / period_hint <= 4e6:
        ks = np.arange(math.ceil(a / period_hint), math.floor(b / period_hint) + 1)
        inner = ks * period_hint
        edges = np.unique(np.concatenate([[a], inner[(inner > a) & (inner < b)], [b]]))
        return edges
    if a > 0 and b / a > 100.0:
        return np.geomspace(a, b, 129)
    return np.linspace(a, b, 17)


def integrate(f, a: float, b: float, tol: float = 1e-8, *,
              period_hint: Optional[float] = None,
              max_evals: int = 30_000_000, max_waves: int = 48) -> float:
    """Adaptive Simpson integral of f over [a, b], |error| <= tol.

    Panels that fail their share of the error budget are bisected in
    vectorized waves; each accepted panel contributes its Richardson-
    corrected estimate.  Oscillatory integrands benefit from period_hint,
    which pre-aligns the initial panels.  Exhausting the eval or wave
    budget raises ConvergenceError.
    """
    if not tol > 0:
        raise PreconditionError("tol must be positive")
    if a == b:
        return 0.0
    if a > b:
        return -integrate(f, b, a, tol, period_hint=period_hint,
                          max_evals=max_evals, max_waves=max_waves)

    edges = _initial_edges(float(a), float(b), period_hint)
    fe = _eval_checked(f, edges)
    x0, x2 = edges[:-1], edges[1:]
    f0, f2 = fe[:-1], fe[1:]
    xm = 0.5 * (x0 + x2)
    fm = _eval_checked(f, xm)
    S = (x2 - x0) / 6.0 * (f0 + 4.0 * fm + f2)
    evals = len(edges) + len(xm)

    total = 0.0
    scale = 1.0 / (b - a)
    for _ in range(max_waves):
        if len(x0) == 0:
            return total
        xl = 0.5 * (x0 + xm)
        xr = 0.5 * (xm + x2)
        fl = _eval_checked(f, xl)
        fr = _eval_checked(f, xr)
        evals += len(xl) + len(xr)
        if evals > max_evals:
            raise ConvergenceError(
                f"integration needs more than {max_evals} evaluations on "
                f"[{a}, {b}] at tol={tol}")
        Sl = (xm - x0) / 6.0 * (f0 + 4.0 * fl + fm)
        Sr = (x2 - xm) / 6.0 * (fm + 4.0 * fr + f2)
        err = (Sl + Sr - S) / 15.0
        accept = np.abs(err) <= tol * (x2 - x0) * scale
        total += float(np.sum((Sl + Sr + err)[accept]))
        keep = ~accept
        # requeue both halves of every rejected panel
        x0 = np.concatenate([x0[keep], xm[keep]])
        x2n = np.concatenate([xm[keep], x2[keep]])
        f0 = np.concatenate([f0[keep], fm[keep]])
        f2n = np.concatenate([fm[keep], f2[keep]])
        S = np.concatenate([Sl[keep], Sr[keep]])
        xm = 0.5 * (x0 + x2n)
        fm = np.concatenate([fl[keep], fr[keep]])
        x2, f2 = x2n, f2n
    if len(x0) == 0:
        return total
    raise ConvergenceError(
        f"integration wave budget exhausted on [{a}, {b}] at tol={tol}")


# -- weighted Cesaro averages ---------------------------------------------------------


def cesaro_psi_average(f: ScalarFn, psi: PsiScale, r_values: Sequence[float],
                       tol: float = 1e-6, r_start: Optional[float] = None,
                       period_hint: Optional[float] = None
                       ) -> list[tuple[float, float]]:
    """Trajectory of (1/psi(r)) * integral_{r_start}^{r} psi(t) f(t) dt.

    Each inter-point panel is integrated once and reused cumulatively; the
    total quadrature error over the whole trajectory stays below tol.
    """
    rs = sorted(float(r) for r in r_values)
    if r_start is None:
        r_start = psi.domain.r0
    if not rs or rs[0] <= r_start:
        raise PreconditionError("r_values must lie strictly beyond r_start")

    def weighted(t):
        return np.asarray(psi.value_r(t), dtype=float) * np.asarray(f(t), dtype=float)

    total_width = rs[-1] - r_start
    acc = 0.0
    prev = r_start
    out = []
    for r in rs:
        sub_tol = tol * max((r - prev) / total_width, 1e-12)
        acc += integrate(weighted, prev, r, sub_tol, period_hint=period_hint)
        out.append((r, acc / float(psi.value_r(r))))
        prev = r
    return out


def divergence_witness(f: ScalarFn, psi: PsiScale, r_values: Sequence[float],
                       tol: float = 0.02, r_start: Optional[float] = None,
                       period_hint: Optional[float] = None) -> LimitVerdict:
    """Evidence that the weighted Cesaro average does not tend to zero.

    The trajectory stabilizing (relative spread of the trailing window
    below tol) at a value of magnitude above 10*tol, or escaping
    monotonically, witnesses divergence of the integral of f.  Anything
    else is inconclusive: no-limit-detected, never a convergence claim.
    """
    traj = cesaro_psi_average(f, psi, r_values, tol=min(tol * 1e-2, 1e-4),
                              r_start=r_start, period_hint=period_hint)
    tail = [v for _, v in traj[-STABLE_WINDOW:]]
    evidence = tuple(traj)
    if len(tail) >= 3:
        mean = sum(tail) / len(tail)
        spread = max(tail) - min(tail)
        stabilized = spread <= tol * max(abs(mean), 1e-300)
        if stabilized and abs(mean) > 10 * tol:
            return LimitVerdict("divergence-witness", mean, psi.name, evidence,
                                details={"criterion": "stabilized", "tol": tol})
        mags = [abs(v) for v in tail]
        escaping = all(m2 > m1 for m1, m2 in zip(mags, mags[1:]))
        if escaping and mags[-1] > 10 * tol:
            value = math.inf if tail[-1] > 0 else -math.inf
            return LimitVerdict("divergence-witness", value, psi.name, evidence,
                                details={"criterion": "escaping", "tol": tol})
    return LimitVerdict("no-limit-detected", None, psi.name, evidence,
                        details={"tol": tol})


# -- limits in psi-density --------------------------------------------------------------


def density_limit_certify(f: ScalarFn, l: float, psi: PsiScale,
                          eps_grid: Optional[Sequence[float]] = None,
                          cutoff=None, threshold: float = 1e-2,
                          tail_window: int = 8,
                          grid_per_decade: int = 64) -> LimitVerdict:
    """Certify lim f = l in psi-density at a finite horizon.

    For every eps in the grid, the excursion set {|f - l| >= eps} must have
    upper psi-density below the threshold.  For l = +-inf the sets are
    {f <= M} (resp. {f >= M}) over a grid of thresholds M.
    """
    if cutoff is None:
        raise PreconditionError("cutoff is required")
    if eps_grid is None:
        eps_grid = DEFAULT_M_GRID if math.isinf(l) else DEFAULT_EPS_GRID
    eps_grid = list(eps_grid)
    if not eps_grid or any(e <= 0 for e in eps_grid) or \
            sorted(eps_grid, reverse=True) != eps_grid:
        raise PreconditionError("eps_grid must be positive and decreasing")

    dom = Domain(psi.domain.x0, math.inf)
    densities = []
    for eps in eps_grid:
        if math.isinf(l):
            sign = 1.0 if l > 0 else -1.0
            pred = transform(f, lambda v, M=eps, s=sign: M - s * np.asarray(v),
                             name=f"{{f {'<=' if l > 0 else '>='} {eps:g}}}")
        else:
            pred = transform(f, lambda v, e=eps: np.abs(np.asarray(v) - l) - e,
                             name=f"{{|f-{l:g}|>={eps:g}}}")
        S = extract_set(pred, dom, cutoff, grid_per_decade)
        densities.append(estimate_density(S, psi, cutoff, tail_window).upper)

    certified = all(d < threshold for d in densities)
    evidence = tuple(zip(eps_grid, densities))
    kind = "psi-density-limit" if certified else "no-limit-detected"
    return LimitVerdict(kind, l if certified else None, psi.name, evidence,
                        eps_grid=tuple(eps_grid),
                        details={"threshold": threshold,
                                 "cutoff_log_r": as_logr(cutoff)})


# -- upgrade to a usual limit --------------------------------------------------------------


def _grid_r(lo: float, hi: float, points: int = 1000) -> np.ndarray:
    return np.exp(np.linspace(math.log(lo), math.log(hi), points))


def check_abs_integrability(f: ScalarFn, r_start: float, cutoff_r: float,
                            period_hint: Optional[float] = None,
                            q_max: float = 0.97) -> dict:
    """Heuristic convergence probe for integral of |f|.

    Integrates over horizons growing by factors of 4; increments must
    decay geometrically (ratio below q_max), in which case the remaining
    tail is estimated by the geometric sum.  A documented heuristic, not a
    proof.
    """
    absf = transform(f, np.abs, name=f"|{f.name}|")
    horizons = [cutoff_r / 4 ** j for j in range(4, -1, -1)]
    horizons = [h for h in horizons if h > r_start * 1.5] + []
    if len(horizons) < 3:
        raise PreconditionError("cutoff too close to r_start for the probe")
    increments = []
    prev = r_start
    total = 0.0
    for h in horizons:
        inc = integrate(absf, prev, h, 1e-9 * max(1.0, h - prev) / (cutoff_r - r_start),
                        period_hint=period_hint)
        increments.append(inc)
        total += inc
        prev = h
    ratios = [b / a for a, b in zip(increments[1:-1], increments[2:]) if a > 0]
    converged = bool(ratios) and all(q <= q_max for q in ratios)
    tail = increments[-1] * ratios[-1] / (1 - ratios[-1]) if converged and ratios[-1] < 1 else math.inf
    return {"converged": converged, "integral_to_cutoff": total,
            "increments": increments, "tail_estimate": tail}


def usual_limit_certify(f: ScalarFn, psi: PsiScale, r1: float, cutoff_r: float,
                        period_hint: Optional[float] = None,
                        grid_points: int = 1000) -> LimitVerdict:
    """Certify lim (psi/psi') f = 0 as a usual limit via monotonicity.

    Requires a numerically convergent integral of |f|, then screens the two
    sufficient conditions: (i) psi^2 |f| / psi' non-decreasing, (ii)
    |f| / psi' non-increasing, with exact comparisons on a log grid.  If
    either holds the limit is certified in the usual sense with a
    decreasing evidence trajectory; otherwise the claim falls back to a
    limit in psi-density.
    """
    probe = check_abs_integrability(f, r1, cutoff_r, period_hint)
    if not probe["converged"]:
        raise PreconditionError(
            "integral of |f| did not converge numerically; "
            f"increments {probe['increments']}")

    rs = _grid_r(r1, cutoff_r, grid_points)
    fv = np.abs(np.asarray(f(rs), dtype=float))
    dpsi = np.asarray(psi.derivative_r(rs), dtype=float)
    vpsi = np.asarray(psi.value_r(rs), dtype=float)

    cond_i = bool(np.all(np.diff(vpsi * vpsi * fv / dpsi) >= 0))
    cond_ii = bool(np.all(np.diff(fv / dpsi) <= 0))

    idx = np.unique(np.linspace(0, len(rs) - 1, 32).astype(int))
    quantity = vpsi * np.asarray(f(rs), dtype=float) / dpsi
    evidence = tuple((float(rs[i]), float(quantity[i])) for i in idx)
    details = {"condition_i": cond_i, "condition_ii": cond_ii,
               "integral_probe": {k: v for k, v in probe.items() if k != "increments"},
               "final_abs_value": float(abs(quantity[-1]))}

    if cond_i or cond_ii:
        return LimitVerdict("usual-limit", 0.0, psi.name, evidence,
                            details=details)
    q_fn = FuncFn(lambda r: np.asarray(psi.value_r(r)) * np.asarray(f(r))
                  / np.asarray(psi.derivative_r(r)),
                  name="psi*f/psi'", hints=f.sample_hints)
    verdict = density_limit_certify(q_fn, 0.0, psi, cutoff=cutoff_r)
    details["fallback"] = verdict.kind
    return LimitVerdict(verdict.kind, verdict.value, psi.name,
                        verdict.evidence, eps_grid=verdict.eps_grid,
                        details=details)


def dichotomy_check(f: ScalarFn, l: float, psi: PsiScale, cutoff_r: float,
                    band: float = 0.1, grid_points: int = 1000) -> BoundReport:
    """Either f(r) psi(r) fails to be non-decreasing, or f tends to l in the
    usual sense.  Presumes a certified limit l in psi-density."""
    rs = _grid_r(psi.domain.r0 * (1 + 1e-9), cutoff_r, grid_points)
    hints = [h for h in f.sample_hints(float(rs[0]), float(rs[-1]))
             if rs[0] < h < rs[-1]]
    if hints:
        rs = np.unique(np.concatenate([rs, np.asarray(hints, dtype=float)]))
    prod = np.asarray(f(rs), dtype=float) * np.asarray(psi.value_r(rs), dtype=float)
    monotone = bool(np.all(np.diff(prod) >= 0))
    if not monotone:
        return BoundReport(
            id=f"dichotomy[l={l:g},psi={psi.name}]", measured=0.0, bound=band,
            relation="<=", slack=0.0, passed=True,
            note="f*psi is not non-decreasing; dichotomy holds by that branch")
    tail = rs >= rs[-1] ** 0.95 if rs[-1] > 1 else rs >= rs[-1] * 0.9
    dev = float(np.max(np.abs(np.asarray(f(rs[tail]), dtype=float) - l)))
    return BoundReport.check(
        f"dichotomy[l={l:g},psi={psi.name}]", dev, "<=", band, 0.0,
        note="f*psi non-decreasing, so f must attain the usual limit")


def plain_limit_probe(f: ScalarFn, l: float, cutoff_r: float,
                      band: float = 1e-2, grid_points: int = 2000
                      ) -> tuple[bool, float]:
    """Trailing-window oscillation check for a usual limit; returns
    (limit plausible, trailing max |f - l|).  Sample hints are honored, so
    spike trains are not missed."""
    lo = max(cutoff_r ** 0.8, cutoff_r / 100.0)
    rs = _grid_r(lo, cutoff_r, grid_points)
    hints = [h for h in f.sample_hints(float(rs[0]), float(rs[-1]))
             if rs[0] < h < rs[-1]]
    if hints:
        rs = np.unique(np.concatenate([rs, np.asarray(hints, dtype=float)]))
    dev = float(np.max(np.abs(np.asarray(f(rs), dtype=float) - l)))
    return dev <= band, dev
