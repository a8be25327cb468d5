"""Finite-horizon estimation of upper and lower psi-densities.

The density ratio D(r) = measure(E ∩ [r0, r)) / psi(r) is piecewise
monotone: it climbs inside pieces of E and decays on gaps, so every local
maximum sits at a right endpoint and every local minimum at the left
endpoint that follows a gap (or at the horizon itself).  The estimator
therefore evaluates D only at those candidate extrema and reports the
max/min over a trailing window of them -- the finite surrogate for
limsup/liminf.

For lifted scales e^psi the ratio is computed as a sum of
exp(log psi(endpoint) - log psi(horizon)) terms, which stays finite for
radii like e^(10^6) where e^psi itself overflows everything.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DomainMismatchError, PreconditionError
from .functions import ScalarFn
from .intervals import IntervalSet, Pairs, combine, psi_measure
from .radius import Radius, as_logr
from .scales import Domain, PsiScale, exp_lift, scale_shift_x

REL = (">=", "<=", "==")


@dataclass(frozen=True)
class DensityEstimate:
    upper: float
    lower: float
    cutoff_x: float
    eval_points: int
    tail_window: int
    low_confidence: bool = False

    def as_dict(self) -> dict:
        return {
            "upper": self.upper,
            "lower": self.lower,
            "cutoff_log_r": self.cutoff_x,
            "eval_points": self.eval_points,
            "tail_window": self.tail_window,
            "low_confidence": self.low_confidence,
        }


@dataclass(frozen=True)
class BoundReport:
    id: str
    measured: float
    bound: float
    relation: str  # one of >=, <=, ==
    slack: float
    passed: bool
    applicable: bool = True
    note: str = ""

    @classmethod
    def check(cls, id: str, measured: float, relation: str, bound: float,
              slack: float, note: str = "") -> "BoundReport":
        if relation == ">=":
            ok = measured >= bound - slack
        elif relation == "<=":
            ok = measured <= bound + slack
        elif relation == "==":
            ok = abs(measured - bound) <= slack
        else:
            raise ValueError(f"unknown relation {relation!r}")
        return cls(id, float(measured), float(bound), relation, slack, bool(ok),
                   note=note)

    @classmethod
    def inapplicable(cls, id: str, note: str) -> "BoundReport":
        return cls(id, math.nan, math.nan, "==", 0.0, False, applicable=False,
                   note=note)

    def as_dict(self) -> dict:
        return {
            "id": self.id,
            "measured": self.measured,
            "bound": self.bound,
            "relation": self.relation,
            "slack": self.slack,
            "pass": self.passed,
            "applicable": self.applicable,
            "note": self.note,
        }


def density_ratios(pieces: Pairs, scale: PsiScale, xs: Sequence[float]) -> list[float]:
    """D(r) at each x = log r in xs, for the materialized piece list."""
    out = []
    if scale.uses_exp_arithmetic:
        logpsi = scale.log_value_x
        for x in xs:
            lx = float(logpsi(x))
            m = 0.0
            for a, b in pieces:
                if a >= x:
                    break
                la = float(logpsi(a))
                lb = float(logpsi(min(b, x)))
                if lb - la > 30.0:  # terms far apart: no cancellation to dodge
                    m += math.exp(lb - lx) - math.exp(la - lx)
                else:  # grouped form keeps nearby endpoints accurate
                    m += math.exp(la - lx) * math.expm1(lb - la)
            out.append(min(max(m, 0.0), 1.0))
    else:
        psi = scale.value_x
        for x in xs:
            px = float(psi(x))
            if not px > 0:
                raise DomainMismatchError(f"psi is not positive at x={x}")
            m = 0.0
            for a, b in pieces:
                if a >= x:
                    break
                m += float(psi(min(b, x))) - float(psi(a))
            out.append(min(max(m / px, 0.0), 1.0))
    return out


def _candidates(E: IntervalSet, cx: float) -> tuple[list[float], list[float]]:
    """Candidate maxima (right endpoints) and minima (gap-following left
    endpoints) strictly below the horizon."""
    maxima = [b for _, b in E.pieces if b <= cx]
    minima = []
    prev_end = E.domain.x0
    for a, b in E.pieces:
        if a >= cx:
            break
        if a > prev_end:  # a genuine gap precedes this piece
            minima.append(a)
        prev_end = b
    return maxima, minima


def estimate_density(E: IntervalSet, s: PsiScale, cutoff,
                     tail_window: int = 8) -> DensityEstimate:
    """Trailing-window estimate of the upper/lower psi-density of E."""
    if tail_window < 4:
        raise PreconditionError(f"tail_window must be >= 4, got {tail_window}")
    cx = as_logr(cutoff)
    if not cx < E.domain.x1:
        raise DomainMismatchError("cutoff must lie strictly inside the domain")
    mat = E.materialize_x(cx)

    maxima, minima = _candidates(mat, cx)
    up_pts = maxima[-tail_window:] + [cx]
    lo_pts = minima[-tail_window:] + [cx]
    pts = sorted(set(up_pts + lo_pts))
    vals = dict(zip(pts, density_ratios(mat.pieces, s, pts)))

    return DensityEstimate(
        upper=max(vals[x] for x in up_pts),
        lower=min(vals[x] for x in lo_pts),
        cutoff_x=cx,
        eval_points=len(pts),
        tail_window=tail_window,
        low_confidence=(len(maxima) < tail_window or len(minima) < tail_window),
    )


def density_trajectory(E: IntervalSet, s: PsiScale, cutoff) -> list[tuple[float, float]]:
    """(x, D(e^x)) at every candidate extremum up to the horizon, for CSV."""
    cx = as_logr(cutoff)
    mat = E.materialize_x(cx)
    maxima, minima = _candidates(mat, cx)
    pts = sorted(set(maxima + minima + [cx]))
    return list(zip(pts, density_ratios(mat.pieces, s, pts)))


def check_chain(E: IntervalSet, s: PsiScale, cutoff, tail_window: int = 8,
                slack: float = 1e-2) -> list[BoundReport]:
    """The lower-e^psi <= lower-psi <= upper-psi <= upper-e^psi chain."""
    if s.base is not None:
        raise DomainMismatchError("chain check needs an unlifted base scale")
    d_psi = estimate_density(E, s, cutoff, tail_window)
    d_exp = estimate_density(E, exp_lift(s), cutoff, tail_window)
    lbl = E.label or "E"
    return [
        BoundReport.check(f"chain[{lbl}].range", d_exp.lower, ">=", 0.0, 0.0,
                          note=f"upper_exp={d_exp.upper:.6f} <= 1 also holds"
                          if d_exp.upper <= 1.0 else "upper_exp exceeds 1"),
        BoundReport.check(f"chain[{lbl}].lower_exp<=lower_psi",
                          d_psi.lower - d_exp.lower, ">=", 0.0, slack),
        BoundReport.check(f"chain[{lbl}].lower_psi<=upper_psi",
                          d_psi.upper - d_psi.lower, ">=", 0.0, slack),
        BoundReport.check(f"chain[{lbl}].upper_psi<=upper_exp",
                          d_exp.upper - d_psi.upper, ">=", 0.0, slack),
    ]


def check_finite_measure_zero_density(E: IntervalSet, s: PsiScale,
                                      cutoffs: Sequence) -> BoundReport:
    """Finite psi-measure forces zero upper e^psi-density.

    Precondition (surfaced, not assumed): the psi-measure must have
    numerically converged across the last two horizons.
    """
    if len(cutoffs) < 2:
        raise PreconditionError("need at least two cutoffs")
    cxs = [as_logr(c) for c in cutoffs]
    if sorted(cxs) != cxs:
        raise PreconditionError("cutoffs must be increasing")
    measures = [psi_measure(E, s, Radius.from_log(cx)) for cx in cxs]
    gap = measures[-1] - measures[-2]
    if not gap < 1e-6:
        raise PreconditionError(
            f"psi-measure not converged: grew by {gap:.3g} over the last "
            "two cutoffs (must be < 1e-6); the set may have infinite measure")

    lifted = exp_lift(s)
    ratios = []
    for cx in cxs:
        mat = E.materialize_x(cx)
        ratios.append(density_ratios(mat.pieces, lifted, [cx])[0])
    decreasing = all(ratios[i + 1] <= ratios[i] * (1 + 1e-9) for i in range(len(ratios) - 1))
    final = ratios[-1]
    passed = decreasing and final < 1e-3
    return BoundReport(
        id=f"lemma-finite-measure[{E.label or 'E'}]",
        measured=final, bound=1e-3, relation="<=", slack=0.0,
        passed=passed,
        note=f"ratios at cutoffs: {[f'{v:.3e}' for v in ratios]}"
             + ("" if decreasing else " (not decreasing)"),
    )


def avoid_exceptional(f: ScalarFn, g: ScalarFn, E: IntervalSet, s: PsiScale,
                      alpha: float, cutoff, grid_points: int = 1024
                      ) -> tuple[Radius, BoundReport]:
    """Trade an exceptional set for a scale shift.

    Given f <= g off E and an upper-density bound on E, the comparison
    f(r) <= g(s_alpha(r)) with s_alpha(r) = psi^{-1}(alpha psi(r)) must hold
    from some r' on.  Returns the first grid point after which no violation
    occurs, plus a report that it lies below the horizon.
    """
    cx = as_logr(cutoff)
    dens = estimate_density(E, s, cutoff).upper
    if dens >= 1:
        raise PreconditionError("E has upper density 1; no alpha works")
    threshold = 1.0 / (1.0 - dens)
    if not alpha > threshold:
        raise PreconditionError(
            f"alpha={alpha} too small: need alpha > 1/(1-ud(E)) = {threshold:.6g}")

    xs = np.linspace(E.domain.x0 + 1e-9, cx, grid_points)
    fv = np.asarray(f.at_logr(xs), dtype=float)
    gv = np.asarray(g.at_logr(xs), dtype=float)
    if np.any(np.diff(fv) < -1e-12 * np.maximum(np.abs(fv[:-1]), 1.0)) or \
       np.any(np.diff(gv) < -1e-12 * np.maximum(np.abs(gv[:-1]), 1.0)):
        raise PreconditionError("f and g must be non-decreasing (grid check failed)")

    mat = E.materialize_x(cx)
    off_E = np.ones(len(xs), dtype=bool)
    for a, b in mat.pieces:
        off_E &= ~((xs >= a) & (xs < b))
    if np.any(fv[off_E] > gv[off_E] * (1 + 1e-9) + 1e-300):
        raise PreconditionError("f <= g fails off E (grid check)")

    shifted = np.array([scale_shift_x(s, alpha, float(x)) for x in xs])
    gs = np.asarray(g.at_logr(shifted), dtype=float)
    bad = fv > gs * (1 + 1e-12)
    if not bad.any():
        r_prime_x = E.domain.x0
    else:
        r_prime_x = float(xs[np.nonzero(bad)[0][-1]])
    report = BoundReport.check(
        "exceptional-avoidance", r_prime_x, "<=", cx - (cx - E.domain.x0) * 1e-3,
        0.0, note=f"alpha={alpha}, ud(E)~{dens:.4f}, threshold={threshold:.4f}")
    return Radius.from_log(r_prime_x), report


# -- predicate-defined sets ------------------------------------------------------

_GRID_CAP = 40_000_000


def extract_set(fn: ScalarFn, domain: Domain, cutoff,
                grid_per_decade: int = 64, refine_tol: float = 1e-9,
                seeds: Optional[Sequence[float]] = None) -> IntervalSet:
    """Materialize {r : fn(r) > 0} below the horizon.

    Functions that advertise exact piecewise-linear structure in log
    coordinates (``linear_pieces_x``) get their sign changes solved in
    closed form; everything else is scanned on a log-spaced grid (at least
    ``grid_per_decade`` points per decade, plus the function's own sample
    hints) and each sign change is pinned down by bisection to relative
    width ``refine_tol``.  Oscillation faster than the grid is a documented
    accuracy limit, not an error.
    """
    cx = as_logr(cutoff)
    if cx > domain.x1:
        raise DomainMismatchError("cutoff beyond domain end")

    pieces_fn = getattr(fn, "linear_pieces_x", None)
    if pieces_fn is not None:
        try:
            segments = pieces_fn(cx)
        except AttributeError:  # predicate without exact structure after all
            segments = None
        if segments is not None:
            pairs = _extract_from_linear_pieces(segments, domain.x0, cx)
            return IntervalSet(domain, pairs, materialized_to=cx,
                               label=f"{{{getattr(fn, 'name', 'g')}>0}}")

    step = math.log(10.0) / grid_per_decade
    npts = int(math.ceil((cx - domain.x0) / step)) + 1
    if npts > _GRID_CAP:
        raise PreconditionError(
            f"grid would need {npts} points; lower the horizon or provide "
            "piecewise structure on the predicate")
    xs = np.linspace(domain.x0, cx, npts)
    hint_xs = _hint_logr(fn, domain.x0, cx, seeds)
    if hint_xs.size:
        xs = np.unique(np.concatenate([xs, hint_xs]))

    sign = np.zeros(len(xs), dtype=bool)
    chunk = 1 << 20
    for i in range(0, len(xs), chunk):
        v = np.asarray(fn.at_logr(xs[i:i + chunk]), dtype=float)
        sign[i:i + chunk] = v > 0  # NaN compares false: outside the set

    pairs = []
    start: Optional[float] = None
    if sign[0]:
        start = float(xs[0])
    flips = np.nonzero(sign[:-1] != sign[1:])[0]
    for i in flips:
        z = _bisect_root(fn, float(xs[i]), float(xs[i + 1]), bool(sign[i]), refine_tol)
        if sign[i]:
            pairs.append((start, z))
            start = None
        else:
            start = z
    if start is not None:
        pairs.append((start, cx))
    return IntervalSet(domain, tuple(pairs), materialized_to=cx,
                       label=f"{{{getattr(fn, 'name', 'g')}>0}}")


def _hint_logr(fn: ScalarFn, x_lo: float, x_hi: float, seeds) -> np.ndarray:
    out = []
    if seeds is not None:
        out.extend(float(s) for s in seeds)
    if x_hi < 700:  # hints are taken in r-space; skip when r overflows
        try:
            hints = fn.sample_hints(math.exp(x_lo), math.exp(x_hi))
        except Exception:
            hints = []
        out.extend(math.log(h) for h in hints if h > 0)
    arr = np.array([x for x in out if x_lo < x < x_hi], dtype=float)
    return np.unique(arr)


def _bisect_root(fn: ScalarFn, lo: float, hi: float, lo_positive: bool,
                 refine_tol: float) -> float:
    for _ in range(200):
        if hi - lo <= refine_tol * max(abs(lo), abs(hi), 1e-30):
            break
        mid = 0.5 * (lo + hi)
        v = float(fn.at_logr(mid))
        if (v > 0) == lo_positive:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _extract_from_linear_pieces(segments, x_lo: float, x_hi: float) -> Pairs:
    """Sign-change solving for predicates linear on each segment.

    ``segments`` is a list of (xs, xe, g(xs), slope); segments must tile
    [x_lo, x_hi] in order.
    """
    pairs = []
    start: Optional[float] = None
    for xs, xe, g0, m in segments:
        if xs >= x_hi:
            break
        xe = min(xe, x_hi)
        if xe <= xs:
            continue
        g1 = g0 + m * (xe - xs)
        p0, p1 = g0 > 0, g1 > 0
        if p0 and start is None:
            start = xs
        if p0 != p1:
            z = xs - g0 / m  # exact crossing of the linear piece
            if p0:
                pairs.append((start, z))
                start = None
            else:
                start = z
    if start is not None:
        pairs.append((start, x_hi))
    return tuple(pairs)
